#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "eftci/dense_eig.hpp"
#include "eftci/purity_oracles.hpp"
#include "eftci/rng.hpp"
#include "eftci/tensor_train.hpp"

namespace eftci {

enum class EigTarget { kGround, kMidSpectrum };

inline EigTarget eig_target_from_string(const std::string& s) {
  if (s == "ground") return EigTarget::kGround;
  if (s == "mid_spectrum") return EigTarget::kMidSpectrum;
  throw std::invalid_argument("unknown eigenstate target: " + s);
}

/// Family descriptor for every benchmark state. `params` carries the
/// family-specific knobs (J, g, h, W, phi, colors, ...).
struct ModelSpec {
  std::string family;
  int L = 0;
  std::uint64_t seed = 0;
  std::string target = "ground";
  std::map<std::string, double> params;

  double param(const std::string& key, double fallback) const {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["family"] = family;
    j["L"] = L;
    j["seed"] = seed;
    j["target"] = target;
    j["params"] = params;
    return j;
  }
  static ModelSpec from_json(const nlohmann::json& j) {
    ModelSpec m;
    m.family = j.at("family").get<std::string>();
    m.L = j.at("L").get<int>();
    m.seed = j.value("seed", std::uint64_t(0));
    m.target = j.value("target", std::string("ground"));
    if (j.contains("params")) m.params = j["params"].get<std::map<std::string, double>>();
    return m;
  }
};

namespace detail {

inline Complex complex_gaussian(std::mt19937_64& rng, std::normal_distribution<double>& n) {
  const double re = n(rng);
  const double im = n(rng);
  return {re, im};
}

}  // namespace detail

/// Haar state: i.i.d. circularly symmetric complex Gaussian amplitudes,
/// then normalized.
inline DenseState gen_haar(int L, std::uint64_t seed) {
  if (L < 1 || L > 16) throw std::invalid_argument("gen_haar: L out of range");
  DenseState st;
  st.dims.assign(static_cast<size_t>(L), 2);
  const std::int64_t total = 1ll << L;
  st.amps.resize(total);
  auto rng = make_rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  for (std::int64_t i = 0; i < total; ++i) st.amps(i) = detail::complex_gaussian(rng, n);
  st.amps /= st.amps.norm();
  return st;
}

inline DenseState gen_product(int L) {
  if (L < 1 || L > 24) throw std::invalid_argument("gen_product: L out of range");
  DenseState st;
  st.dims.assign(static_cast<size_t>(L), 2);
  st.amps = Eigen::VectorXcd::Zero(1ll << L);
  st.amps(0) = 1.0;
  return st;
}

/// Random MPS: i.i.d. complex Gaussian cores with Schmidt-bounded ranks
/// min(phi, 2^l, 2^{L-l}), left-canonicalized and unit-normalized.
inline ComplexTensorTrain gen_random_mps(int L, int phi, std::uint64_t seed) {
  if (L < 1) throw std::invalid_argument("gen_random_mps: L must be >= 1");
  if (phi < 1) throw std::invalid_argument("gen_random_mps: phi must be >= 1");
  auto rng = make_rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  auto bond = [&](int l) {  // rank of bond l (0..L)
    const double cap = std::min(std::pow(2.0, l), std::pow(2.0, L - l));
    return std::max(1, std::min(phi, static_cast<int>(std::min(cap, 1e9))));
  };
  std::vector<TTCore<Complex>> cores;
  cores.reserve(static_cast<size_t>(L));
  for (int l = 0; l < L; ++l) {
    TTCore<Complex> c(bond(l), 2, bond(l + 1));
    for (auto& x : c.data) x = detail::complex_gaussian(rng, n);
    cores.push_back(std::move(c));
  }
  ComplexTensorTrain mps(std::vector<int>(static_cast<size_t>(L), 2), std::move(cores));
  left_orthogonalize(mps);
  auto& last = mps.core(L - 1);
  const double nrm = std::sqrt(last.left_unfold().squaredNorm());
  for (auto& x : last.data) x /= nrm;
  return mps;
}

/// Contracts an MPS to a dense state (guarded to 2^20 amplitudes).
inline DenseState mps_to_dense(const ComplexTensorTrain& mps) {
  if (mps.total_dim() > (1ll << 20)) throw std::invalid_argument("mps_to_dense: state too large");
  DenseState st;
  st.dims = mps.dims();
  auto values = enumerate_dense(mps);
  st.amps = Eigen::Map<const Eigen::VectorXcd>(values.data(), static_cast<Eigen::Index>(values.size()));
  return st;
}

/// Open-boundary Ising chain
///   H = J sum sz_i sz_{i+1} + sum (g sx_i + (h + r_i) sz_i),  r_i ~ U[0, W].
inline Eigen::MatrixXd build_tfim(int L, double J, double g, double h, double W,
                                  std::uint64_t seed) {
  if (L < 2 || L > 14) throw std::invalid_argument("build_tfim: L out of range");
  std::vector<double> r(static_cast<size_t>(L), 0.0);
  if (W != 0.0) {
    auto rng = make_rng(seed);
    std::uniform_real_distribution<double> u(0.0, W);
    for (auto& x : r) x = u(rng);
  }
  const std::int64_t dim = 1ll << L;
  Eigen::MatrixXd hmat = Eigen::MatrixXd::Zero(dim, dim);
  for (std::int64_t s = 0; s < dim; ++s) {
    double diag = 0;
    for (int i = 0; i < L; ++i) {
      const double zi = ((s >> (L - 1 - i)) & 1) ? -1.0 : 1.0;  // site 0 slowest
      diag += (h + r[static_cast<size_t>(i)]) * zi;
      if (i + 1 < L) {
        const double zj = ((s >> (L - 2 - i)) & 1) ? -1.0 : 1.0;
        diag += J * zi * zj;
      }
    }
    hmat(s, s) = diag;
    for (int i = 0; i < L; ++i) hmat(s ^ (1ll << (L - 1 - i)), s) += g;
  }
  return hmat;
}

/// Sum of nearest-neighbor GUE blocks: H = sum_j h_{j,j+1} with
/// h = (G + G^dag)/2, G having N(0,1) real and imaginary parts per entry.
inline Eigen::MatrixXcd build_gue_h(int L, std::uint64_t seed) {
  if (L < 2 || L > 14) throw std::invalid_argument("build_gue_h: L out of range");
  auto rng = make_rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  const std::int64_t dim = 1ll << L;
  Eigen::MatrixXcd hmat = Eigen::MatrixXcd::Zero(dim, dim);
  for (int j = 0; j + 1 < L; ++j) {
    Eigen::MatrixXcd g(4, 4);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) g(a, b) = detail::complex_gaussian(rng, n);
    Eigen::MatrixXcd h4 = 0.5 * (g + g.adjoint());
    const int shift = L - 2 - j;  // bits of sites j, j+1
    for (std::int64_t s = 0; s < dim; ++s) {
      const int sub = static_cast<int>((s >> shift) & 3);
      const std::int64_t base = s & ~(3ll << shift);
      for (int sub2 = 0; sub2 < 4; ++sub2)
        hmat(base | (static_cast<std::int64_t>(sub2) << shift), s) += h4(sub2, sub);
    }
  }
  return hmat;
}

/// Majorana operators in the canonically ordered Dirac basis:
/// sqrt(2) chi_{2k-1} = c_k^dag + c_k, sqrt(2) chi_{2k} = i(c_k - c_k^dag).
inline std::vector<Eigen::MatrixXcd> majorana_operators(int n_modes) {
  const std::int64_t dim = 1ll << n_modes;
  std::vector<Eigen::MatrixXcd> chi;
  chi.reserve(static_cast<size_t>(2 * n_modes));
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int k = 0; k < n_modes; ++k) {
    Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(dim, dim);  // annihilator c_k
    for (std::int64_t s = 0; s < dim; ++s) {
      const int bit = static_cast<int>((s >> (n_modes - 1 - k)) & 1);
      if (!bit) continue;
      int before = 0;  // occupied modes with smaller label
      for (int j = 0; j < k; ++j) before += static_cast<int>((s >> (n_modes - 1 - j)) & 1);
      const double sign = (before % 2 == 0) ? 1.0 : -1.0;
      c(s ^ (1ll << (n_modes - 1 - k)), s) = sign;
    }
    Eigen::MatrixXcd cdag = c.adjoint();
    chi.push_back((cdag + c) * inv_sqrt2);
    chi.push_back(Complex(0, 1) * (c - cdag) * inv_sqrt2);
  }
  return chi;
}

/// SYK_4 over N = 2 * n_modes Majoranas:
/// H = -sqrt(6)/N^{3/2} sum_{i<j<k<l} 4 J_{ijkl} chi_i chi_j chi_k chi_l.
inline Eigen::MatrixXcd build_syk(int n_modes, std::uint64_t seed) {
  if (n_modes < 2 || n_modes > 7) throw std::invalid_argument("build_syk: mode count out of range");
  const int N = 2 * n_modes;
  const std::int64_t dim = 1ll << n_modes;
  auto chi = majorana_operators(n_modes);
  // Precompute pair products to keep this at one matmul per quadruple.
  std::vector<std::vector<Eigen::MatrixXcd>> pair(static_cast<size_t>(N));
  for (int i = 0; i < N; ++i) {
    pair[static_cast<size_t>(i)].resize(static_cast<size_t>(N));
    for (int j = i + 1; j < N; ++j)
      pair[static_cast<size_t>(i)][static_cast<size_t>(j)] =
          chi[static_cast<size_t>(i)] * chi[static_cast<size_t>(j)];
  }
  auto rng = make_rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
  const double pref = -std::sqrt(6.0) / std::pow(static_cast<double>(N), 1.5) * 4.0;
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j)
      for (int k = j + 1; k < N; ++k)
        for (int l = k + 1; l < N; ++l) {
          const double Jijkl = n01(rng);
          h.noalias() += (pref * Jijkl) * (pair[static_cast<size_t>(i)][static_cast<size_t>(j)] *
                                           pair[static_cast<size_t>(k)][static_cast<size_t>(l)]);
        }
  const double herm = (h - h.adjoint()).cwiseAbs().maxCoeff();
  if (herm > 1e-10) throw std::runtime_error("build_syk: Hamiltonian not Hermitian");
  return h;
}

/// Lowest eigenvector, or the one with eigenvalue closest to 1e-3 for
/// mid-spectrum targets (ties resolved toward the lower index).
template <class Matrix>
std::pair<Eigen::VectorXcd, double> eigenstate(const Matrix& h, EigTarget target) {
  if (h.rows() > (1 << 14)) throw std::invalid_argument("eigenstate: matrix too large");
  EighResult es = dense_eigh(h);
  Eigen::Index pick = 0;
  if (target == EigTarget::kMidSpectrum) {
    const double sigma = 1e-3;
    double best = std::abs(es.values(0) - sigma);
    for (Eigen::Index i = 1; i < es.values.size(); ++i) {
      const double d = std::abs(es.values(i) - sigma);
      if (d < best) {
        best = d;
        pick = i;
      }
    }
  }
  return {es.vectors.col(pick), es.values(pick)};
}

// ---------------------------------------------------------------------------
// Motzkin / Fredkin ground states
// ---------------------------------------------------------------------------

namespace detail {

/// Enumerates color-balanced paths. Steps: 0 = flat (Motzkin only),
/// 1..c = up with a color, c+1..2c = down matching the color on top of the
/// stack. Valid paths return to height zero and never dip below it.
inline void enumerate_paths(int L, int colors, bool allow_flat, std::vector<int>& step,
                            std::vector<int>& stack, std::vector<std::vector<int>>& out) {
  const int pos = static_cast<int>(step.size());
  if (pos == L) {
    if (stack.empty()) out.push_back(step);
    return;
  }
  if (static_cast<int>(stack.size()) > L - pos) return;  // cannot return to zero
  if (allow_flat) {
    step.push_back(0);
    enumerate_paths(L, colors, allow_flat, step, stack, out);
    step.pop_back();
  }
  for (int col = 1; col <= colors; ++col) {
    step.push_back(allow_flat ? col : col - 1);
    stack.push_back(col);
    enumerate_paths(L, colors, allow_flat, step, stack, out);
    stack.pop_back();
    step.pop_back();
  }
  if (!stack.empty()) {
    const int col = stack.back();
    step.push_back(allow_flat ? colors + col : colors + col - 1);
    stack.pop_back();
    enumerate_paths(L, colors, allow_flat, step, stack, out);
    stack.push_back(col);
    step.pop_back();
  }
}

inline DenseState path_superposition(int L, int local_dim, const std::vector<std::vector<int>>& paths) {
  if (paths.empty()) throw std::invalid_argument("path state: no valid paths");
  DenseState st;
  st.dims.assign(static_cast<size_t>(L), local_dim);
  const std::int64_t total = st.total_dim();
  if (total > (1ll << 24)) throw std::invalid_argument("path state: dimension too large");
  st.amps = Eigen::VectorXcd::Zero(total);
  const double amp = 1.0 / std::sqrt(static_cast<double>(paths.size()));
  for (const auto& p : paths) {
    std::int64_t idx = 0;
    for (int s : p) idx = idx * local_dim + s;
    st.amps(idx) = amp;
  }
  return st;
}

}  // namespace detail

/// Equal-weight superposition of color-balanced Motzkin paths
/// (local dimension 2c+1: flat, c up colors, c down colors).
inline DenseState gen_motzkin(int L, int colors) {
  if (L < 1 || L > 12) throw std::invalid_argument("gen_motzkin: L out of range");
  if (colors < 1) throw std::invalid_argument("gen_motzkin: colors must be >= 1");
  std::vector<std::vector<int>> paths;
  std::vector<int> step, stack;
  detail::enumerate_paths(L, colors, true, step, stack, paths);
  return detail::path_superposition(L, 2 * colors + 1, paths);
}

/// Spin-1/2 Fredkin state: equal-weight superposition of Dyck paths
/// (up = 0, down = 1). Odd lengths have no valid path and are rejected.
inline DenseState gen_fredkin(int L) {
  if (L < 2 || L > 14) throw std::invalid_argument("gen_fredkin: L out of range");
  if (L % 2 != 0) throw std::invalid_argument("gen_fredkin: odd L has no height-returning path");
  std::vector<std::vector<int>> paths;
  std::vector<int> step, stack;
  detail::enumerate_paths(L, 1, false, step, stack, paths);
  return detail::path_superposition(L, 2, paths);
}

/// Number of valid paths (enumeration-backed; Motzkin numbers for c = 1).
inline std::int64_t motzkin_path_count(int L, int colors) {
  std::vector<std::vector<int>> paths;
  std::vector<int> step, stack;
  detail::enumerate_paths(L, colors, true, step, stack, paths);
  return static_cast<std::int64_t>(paths.size());
}

// ---------------------------------------------------------------------------
// Uniform entry point
// ---------------------------------------------------------------------------

struct GeneratedState {
  ModelSpec spec;
  // Exactly one of the two is set; random_mps keeps the train form.
  std::optional<DenseState> dense;
  std::optional<ComplexTensorTrain> mps;
  bool fermionic = false;  // dense amplitudes live in the fermionic mode basis
  double energy = 0.0;     // for eigenstate families
};

inline GeneratedState generate_state(const ModelSpec& spec) {
  GeneratedState g;
  g.spec = spec;
  const auto target = eig_target_from_string(spec.target);
  if (spec.family == "haar") {
    g.dense = gen_haar(spec.L, spec.seed);
  } else if (spec.family == "product") {
    g.dense = gen_product(spec.L);
  } else if (spec.family == "random_mps") {
    g.mps = gen_random_mps(spec.L, static_cast<int>(spec.param("phi", 3)), spec.seed);
  } else if (spec.family == "tfim") {
    Eigen::MatrixXd h = build_tfim(spec.L, spec.param("J", -1.0), spec.param("g", -1.05),
                                   spec.param("h", 0.5), spec.param("W", 0.0), spec.seed);
    auto [vec, energy] = eigenstate(h, target);
    DenseState st;
    st.dims.assign(static_cast<size_t>(spec.L), 2);
    st.amps = vec;
    g.dense = std::move(st);
    g.energy = energy;
  } else if (spec.family == "gue_h") {
    Eigen::MatrixXcd h = build_gue_h(spec.L, spec.seed);
    auto [vec, energy] = eigenstate(h, target);
    DenseState st;
    st.dims.assign(static_cast<size_t>(spec.L), 2);
    st.amps = vec;
    g.dense = std::move(st);
    g.energy = energy;
  } else if (spec.family == "syk") {
    Eigen::MatrixXcd h = build_syk(spec.L, spec.seed);
    auto [vec, energy] = eigenstate(h, target);
    DenseState st;
    st.dims.assign(static_cast<size_t>(spec.L), 2);
    st.amps = vec;
    g.dense = std::move(st);
    g.fermionic = true;
    g.energy = energy;
  } else if (spec.family == "motzkin") {
    g.dense = gen_motzkin(spec.L, static_cast<int>(spec.param("colors", 1)));
  } else if (spec.family == "fredkin") {
    g.dense = gen_fredkin(spec.L);
  } else {
    throw std::invalid_argument("generate_state: unknown family " + spec.family);
  }
  return g;
}

/// Purity backend for any generated state (fermionic states use the
/// sign-correct trace).
inline std::shared_ptr<CachedPurity> make_purity_backend(const GeneratedState& g) {
  std::shared_ptr<const PurityBackend> backend;
  if (g.mps) {
    backend = std::make_shared<MpsPurityBackend>(*g.mps);
  } else if (g.fermionic) {
    FermionState f;
    f.n_modes = g.spec.L;
    f.amps = g.dense->amps;
    backend = std::make_shared<FermionPurityBackend>(std::move(f));
  } else {
    backend = std::make_shared<DensePurityBackend>(*g.dense);
  }
  return std::make_shared<CachedPurity>(std::move(backend));
}

}  // namespace eftci
