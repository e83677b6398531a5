#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "eftci/cross_interpolation.hpp"
#include "eftci/partitions.hpp"
#include "eftci/tensor_train.hpp"

namespace eftci {

using Complex = std::complex<double>;

/// Generic qudit state with big-endian amplitude order (site 0 slowest).
/// Normalization is not required; purity divides by (tr rho)^2.
struct DenseState {
  std::vector<int> dims;
  Eigen::VectorXcd amps;

  int n_sites() const { return static_cast<int>(dims.size()); }
  std::int64_t total_dim() const {
    std::int64_t p = 1;
    for (int d : dims) p *= d;
    return p;
  }
  void validate() const {
    if (dims.empty()) throw std::invalid_argument("DenseState: empty dims");
    for (int d : dims)
      if (d < 1) throw std::invalid_argument("DenseState: dims must be >= 1");
    if (amps.size() != total_dim()) throw std::invalid_argument("DenseState: amplitude count mismatch");
    if (!amps.allFinite()) throw std::invalid_argument("DenseState: non-finite amplitudes");
    if (!(amps.squaredNorm() > 0)) throw std::invalid_argument("DenseState: zero-norm state");
  }
};

/// Fermionic state over Dirac modes in the canonically ordered occupation
/// basis |i_1...i_L> = (c_1^dag)^{i_1}...(c_L^dag)^{i_L}|vac>.
struct FermionState {
  int n_modes = 0;
  Eigen::VectorXcd amps;

  void validate() const {
    if (n_modes < 1 || n_modes > 20) throw std::invalid_argument("FermionState: bad mode count");
    if (amps.size() != (1ll << n_modes)) throw std::invalid_argument("FermionState: amplitude count mismatch");
    if (!(amps.squaredNorm() > 0)) throw std::invalid_argument("FermionState: zero-norm state");
  }
  DenseState as_qubits() const {
    DenseState s;
    s.dims.assign(static_cast<size_t>(n_modes), 2);
    s.amps = amps;
    return s;
  }
};

struct OracleStats {
  std::atomic<long> distinct_queries{0};
  std::atomic<long> total_queries{0};
};

enum class EntropyKind { kRenyi2, kVonNeumann };

namespace detail {

/// Reshapes the state into a (dim A) x (dim A^c) matrix with region-A digits
/// as the row index, both groups kept in big-endian site order.
inline Eigen::MatrixXcd bipartition_matrix(const DenseState& st, const Partition& p) {
  const int L = st.n_sites();
  std::vector<std::int64_t> row_stride(static_cast<size_t>(L), 0), col_stride(static_cast<size_t>(L), 0);
  std::int64_t da = 1, dc = 1;
  for (int i = L - 1; i >= 0; --i) {
    if (p.test(i)) {
      row_stride[static_cast<size_t>(i)] = da;
      da *= st.dims[static_cast<size_t>(i)];
    } else {
      col_stride[static_cast<size_t>(i)] = dc;
      dc *= st.dims[static_cast<size_t>(i)];
    }
  }
  Eigen::MatrixXcd m(da, dc);
  const std::int64_t total = st.total_dim();
  std::vector<int> digit(static_cast<size_t>(L), 0);
  std::int64_t row = 0, col = 0;
  for (std::int64_t g = 0; g < total; ++g) {
    m(row, col) = st.amps(g);
    // odometer increment, least-significant site last
    for (int i = L - 1; i >= 0; --i) {
      const std::int64_t rs = row_stride[static_cast<size_t>(i)], cs = col_stride[static_cast<size_t>(i)];
      if (++digit[static_cast<size_t>(i)] < st.dims[static_cast<size_t>(i)]) {
        row += rs;
        col += cs;
        break;
      }
      digit[static_cast<size_t>(i)] = 0;
      row -= rs * (st.dims[static_cast<size_t>(i)] - 1);
      col -= cs * (st.dims[static_cast<size_t>(i)] - 1);
    }
  }
  return m;
}

}  // namespace detail

/// Purity (exp(-S)) of region A for a dense qudit state. Renyi-2 uses the
/// Gram matrix: tr rho_A^2 = ||G||_F^2 / (tr G)^2 with G = M M^H over the
/// smaller side. The von Neumann variant returns exp(sum p ln p) so the
/// entanglement-feature definition applies uniformly.
inline double purity_dense(const DenseState& st, const Partition& p,
                           EntropyKind kind = EntropyKind::kRenyi2) {
  st.validate();
  if (p.L != st.n_sites()) throw std::invalid_argument("purity_dense: partition length mismatch");
  if (p.empty() || p.full()) return 1.0;
  Eigen::MatrixXcd m = detail::bipartition_matrix(st, p);
  if (m.cols() < m.rows()) m = m.transpose().eval();
  Eigen::MatrixXcd g = m * m.adjoint();
  const double tr = g.real().trace();
  if (kind == EntropyKind::kRenyi2) {
    return g.squaredNorm() / (tr * tr);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g);
  double s = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double q = es.eigenvalues()(i) / tr;
    if (q > 1e-300) s += q * std::log(q);
  }
  return std::exp(s);
}

/// Reduced density matrix of a fermionic state, obtained by tracing out the
/// modes not in A one by one. Tracing an interior mode picks up the sign
/// (-1)^sigma with sigma = sum_{q>m}(i_q + j_q) when the mode is occupied on
/// both sides. `trace_order` lists the mode labels to trace (default: all
/// modes outside A, descending); the result is order-independent.
inline Eigen::MatrixXcd fermionic_reduced_density(const FermionState& st, const Partition& p,
                                                  std::vector<int> trace_order = {}) {
  st.validate();
  if (p.L != st.n_modes) throw std::invalid_argument("fermionic trace: partition length mismatch");
  if (trace_order.empty()) {
    for (int m = st.n_modes - 1; m >= 0; --m)
      if (!p.test(m)) trace_order.push_back(m);
  }
  Eigen::MatrixXcd rho = st.amps * st.amps.adjoint();
  std::vector<int> modes(static_cast<size_t>(st.n_modes));
  for (int i = 0; i < st.n_modes; ++i) modes[static_cast<size_t>(i)] = i;

  for (int target : trace_order) {
    const int k = static_cast<int>(modes.size());
    auto pos_it = std::find(modes.begin(), modes.end(), target);
    if (pos_it == modes.end()) throw std::invalid_argument("fermionic trace: mode traced twice");
    const int pos = static_cast<int>(pos_it - modes.begin());
    const std::int64_t dim_new = 1ll << (k - 1);
    const int lo_bits = k - 1 - pos;  // modes after `pos` in canonical order
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim_new, dim_new);
    for (std::int64_t ip = 0; ip < dim_new; ++ip) {
      const std::int64_t ihi = ip >> lo_bits;
      const std::int64_t ilo = ip & ((1ll << lo_bits) - 1);
      for (std::int64_t jp = 0; jp < dim_new; ++jp) {
        const std::int64_t jhi = jp >> lo_bits;
        const std::int64_t jlo = jp & ((1ll << lo_bits) - 1);
        Complex acc = 0;
        for (int v = 0; v <= 1; ++v) {
          const std::int64_t i = (((ihi << 1) | v) << lo_bits) | ilo;
          const std::int64_t j = (((jhi << 1) | v) << lo_bits) | jlo;
          double sign = 1.0;
          if (v == 1) {
            const int sum_after =
                std::popcount(static_cast<std::uint64_t>(ilo)) + std::popcount(static_cast<std::uint64_t>(jlo));
            if (sum_after % 2 == 1) sign = -1.0;
          }
          acc += sign * rho(i, j);
        }
        out(ip, jp) = acc;
      }
    }
    rho = std::move(out);
    modes.erase(modes.begin() + pos);
  }
  return rho;
}

/// tr rho_A^2 / (tr rho_A)^2 with the sign-correct fermionic partial trace.
/// The reduced matrix is checked Hermitian to 1e-10 of its scale.
inline double purity_fermionic(const FermionState& st, const Partition& p) {
  if (p.empty() || p.full()) return 1.0;
  Eigen::MatrixXcd rho = fermionic_reduced_density(st, p);
  const double scale = std::max(rho.cwiseAbs().maxCoeff(), 1e-300);
  const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  if (herm > 1e-10 * scale)
    throw std::runtime_error("purity_fermionic: reduced matrix not Hermitian (residual " +
                             std::to_string(herm) + ")");
  const double tr = rho.real().trace();
  return rho.squaredNorm() / (tr * tr);
}

/// Symmetrized analytic entanglement feature of a Haar state:
/// d^{-|A|} + d^{-(L-|A|)}, pinned to exactly 1 at the empty and full masks.
inline double purity_haar_analytic(int L, int d, const Partition& p) {
  if (d < 2) throw std::invalid_argument("purity_haar_analytic: d must be >= 2");
  if (p.L != L) throw std::invalid_argument("purity_haar_analytic: partition length mismatch");
  const int k = p.count();
  if (k == 0 || k == L) return 1.0;
  return std::pow(static_cast<double>(d), -k) + std::pow(static_cast<double>(d), -(L - k));
}

// ---------------------------------------------------------------------------
// Entanglement feature of an MPS
// ---------------------------------------------------------------------------

namespace detail {

/// Transfer matrices of the 4-copy construction. For each site,
///   E[0] = sum_{s,t} A^s (x) conj(A^s) (x) A^t (x) conj(A^t)
///   E[1] = sum_{s,t} A^s (x) conj(A^t) (x) A^t (x) conj(A^s)
/// so a product of E[b_i] evaluates tr(S_A rho (x) rho) for the mask b.
struct EfTransfer {
  std::vector<Eigen::MatrixXcd> e0, e1;  // per site, (r_prev^4) x (r_next^4)
  double norm4 = 1.0;                    // product of E[0], equals (tr rho)^2
};

inline Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline EfTransfer build_ef_transfer(const ComplexTensorTrain& mps) {
  EfTransfer t;
  const int L = mps.n_sites();
  t.e0.reserve(static_cast<size_t>(L));
  t.e1.reserve(static_cast<size_t>(L));
  for (int l = 0; l < L; ++l) {
    const auto& c = mps.core(l);
    const int d = mps.dims()[static_cast<size_t>(l)];
    std::vector<Eigen::MatrixXcd> a(static_cast<size_t>(d));
    for (int s = 0; s < d; ++s) a[static_cast<size_t>(s)] = c.slice(s);
    const Eigen::Index m = c.left * c.left * c.left * c.left;
    const Eigen::Index n = c.right * c.right * c.right * c.right;
    Eigen::MatrixXcd e0 = Eigen::MatrixXcd::Zero(m, n);
    Eigen::MatrixXcd e1 = Eigen::MatrixXcd::Zero(m, n);
    for (int s = 0; s < d; ++s)
      for (int u = 0; u < d; ++u) {
        const auto& as = a[static_cast<size_t>(s)];
        const auto& au = a[static_cast<size_t>(u)];
        e0 += kron(kron(as, as.conjugate()), kron(au, au.conjugate()));
        e1 += kron(kron(as, au.conjugate()), kron(au, as.conjugate()));
      }
    t.e0.push_back(std::move(e0));
    t.e1.push_back(std::move(e1));
  }
  Eigen::MatrixXcd v = Eigen::MatrixXcd::Ones(1, 1);
  for (int l = 0; l < L; ++l) v = v * t.e0[static_cast<size_t>(l)];
  t.norm4 = v(0, 0).real();
  if (!(t.norm4 > 0)) throw std::invalid_argument("mps ef: zero-norm state");
  return t;
}

/// Real orthonormal eigenbasis of the double swap P = S (x) S on the 4-copy
/// virtual space, with an extra i on the antisymmetric sector. Conjugating
/// the transfer matrices with these makes them real. At most 4 nonzeros per
/// column, so it is kept sparse.
inline Eigen::SparseMatrix<Complex> realifier(Eigen::Index r) {
  const Eigen::Index m = r * r;
  Eigen::SparseMatrix<double> q(m, m);
  Eigen::VectorXd sign(m);
  {
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::Index col = 0;
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (Eigen::Index a = 0; a < r; ++a) {
      trip.emplace_back(a * r + a, col, 1.0);
      sign(col++) = 1.0;
    }
    for (Eigen::Index a = 0; a < r; ++a)
      for (Eigen::Index b = a + 1; b < r; ++b) {
        trip.emplace_back(a * r + b, col, inv_sqrt2);
        trip.emplace_back(b * r + a, col, inv_sqrt2);
        sign(col++) = 1.0;
      }
    for (Eigen::Index a = 0; a < r; ++a)
      for (Eigen::Index b = a + 1; b < r; ++b) {
        trip.emplace_back(a * r + b, col, inv_sqrt2);
        trip.emplace_back(b * r + a, col, -inv_sqrt2);
        sign(col++) = -1.0;
      }
    q.setFromTriplets(trip.begin(), trip.end());
  }
  std::vector<Eigen::Triplet<Complex>> trip;
  trip.reserve(static_cast<size_t>(16 * m * m));
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) {
      const Complex phase = (sign(i) * sign(j) > 0) ? Complex(1, 0) : Complex(0, 1);
      for (Eigen::SparseMatrix<double>::InnerIterator it_i(q, i); it_i; ++it_i)
        for (Eigen::SparseMatrix<double>::InnerIterator it_j(q, j); it_j; ++it_j)
          trip.emplace_back(it_i.row() * m + it_j.row(), i * m + j, phase * it_i.value() * it_j.value());
    }
  Eigen::SparseMatrix<Complex> u(m * m, m * m);
  u.setFromTriplets(trip.begin(), trip.end());
  return u;
}

}  // namespace detail

/// Natural-basis entanglement feature of an MPS as a real tensor train with
/// binary legs. Raw bond dimensions are the fourth powers of the MPS bond
/// dimensions; the result is scaled so the empty mask evaluates to one.
inline TensorTrain mps_ef_build(const ComplexTensorTrain& mps) {
  const int L = mps.n_sites();
  if (L < 1) throw std::invalid_argument("mps_ef_build: empty mps");
  if (mps.max_rank() > 6) throw std::invalid_argument("mps_ef_build: bond dimension above 6 unsupported");
  detail::EfTransfer t = detail::build_ef_transfer(mps);

  auto identity1 = [] {
    Eigen::SparseMatrix<Complex> one(1, 1);
    one.insert(0, 0) = Complex(1, 0);
    one.makeCompressed();
    return one;
  };
  std::vector<Eigen::SparseMatrix<Complex>> u(static_cast<size_t>(L + 1));
  u[0] = identity1();
  u[static_cast<size_t>(L)] = identity1();
  for (int l = 1; l < L; ++l) u[static_cast<size_t>(l)] = detail::realifier(mps.core(l - 1).right);

  std::vector<TTCore<double>> cores;
  cores.reserve(static_cast<size_t>(L));
  const double scale = std::pow(t.norm4, 1.0 / L);
  for (int l = 0; l < L; ++l) {
    const auto& ul = u[static_cast<size_t>(l)];
    const auto& ur = u[static_cast<size_t>(l + 1)];
    TTCore<double> core(ul.cols(), 2, ur.cols());
    for (int b = 0; b <= 1; ++b) {
      const Eigen::MatrixXcd& e = b == 0 ? t.e0[static_cast<size_t>(l)] : t.e1[static_cast<size_t>(l)];
      Eigen::MatrixXcd m = (ul.adjoint() * (e * ur)) / scale;
      const double mx = std::max(m.cwiseAbs().maxCoeff(), 1e-300);
      const double imag = m.imag().cwiseAbs().maxCoeff();
      if (imag > 1e-12 * mx + 1e-14)
        throw std::runtime_error("mps_ef_build: imaginary residue " + std::to_string(imag));
      for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) core.at(i, b, j) = m(i, j).real();
    }
    cores.push_back(std::move(core));
  }
  return TensorTrain(std::vector<int>(static_cast<size_t>(L), 2), std::move(cores));
}

// ---------------------------------------------------------------------------
// Backends behind the uniform purity(Partition) -> (0,1] contract
// ---------------------------------------------------------------------------

class PurityBackend {
 public:
  virtual ~PurityBackend() = default;
  virtual int n_sites() const = 0;
  virtual double purity(const Partition& p) const = 0;
};

class DensePurityBackend final : public PurityBackend {
 public:
  explicit DensePurityBackend(DenseState st, EntropyKind kind = EntropyKind::kRenyi2)
      : state_(std::move(st)), kind_(kind) {
    state_.validate();
  }
  int n_sites() const override { return state_.n_sites(); }
  double purity(const Partition& p) const override { return purity_dense(state_, p, kind_); }
  const DenseState& state() const { return state_; }

 private:
  DenseState state_;
  EntropyKind kind_;
};

class FermionPurityBackend final : public PurityBackend {
 public:
  explicit FermionPurityBackend(FermionState st) : state_(std::move(st)) { state_.validate(); }
  int n_sites() const override { return state_.n_modes; }
  double purity(const Partition& p) const override { return purity_fermionic(state_, p); }

 private:
  FermionState state_;
};

/// With clip_boundary (the default) the empty and full masks are pinned to
/// exactly 1 like every other backend. Without it the raw symmetrized sum is
/// returned everywhere, which is an exactly rank-2 function; the clip adds a
/// d^-L delta at the boundary masks and raises the exact rank to 3.
class HaarAnalyticBackend final : public PurityBackend {
 public:
  HaarAnalyticBackend(int L, int d = 2, bool clip_boundary = true)
      : L_(L), d_(d), clip_(clip_boundary) {
    if (L < 1) throw std::invalid_argument("HaarAnalyticBackend: L must be >= 1");
    if (d < 2) throw std::invalid_argument("HaarAnalyticBackend: d must be >= 2");
  }
  int n_sites() const override { return L_; }
  double purity(const Partition& p) const override {
    if (clip_) return purity_haar_analytic(L_, d_, p);
    const int k = p.count();
    return std::pow(static_cast<double>(d_), -k) + std::pow(static_cast<double>(d_), -(L_ - k));
  }

 private:
  int L_, d_;
  bool clip_;
};

/// Lazy single-mask evaluation of the MPS entanglement feature: one transfer
/// product per query, no chi = phi^4 train materialized.
class MpsPurityBackend final : public PurityBackend {
 public:
  explicit MpsPurityBackend(ComplexTensorTrain mps) : mps_(std::move(mps)) {
    for (int d : mps_.dims())
      if (d < 1) throw std::invalid_argument("MpsPurityBackend: bad dims");
    transfer_ = detail::build_ef_transfer(mps_);
  }
  int n_sites() const override { return mps_.n_sites(); }
  double purity(const Partition& p) const override {
    if (p.L != n_sites()) throw std::invalid_argument("purity_mps: partition length mismatch");
    if (p.empty() || p.full()) return 1.0;
    Eigen::MatrixXcd v = Eigen::MatrixXcd::Ones(1, 1);
    for (int l = 0; l < n_sites(); ++l)
      v = v * (p.test(l) ? transfer_.e1[static_cast<size_t>(l)] : transfer_.e0[static_cast<size_t>(l)]);
    const Complex raw = v(0, 0) / transfer_.norm4;
    if (std::abs(raw.imag()) > 1e-12 * std::max(std::abs(raw.real()), 1.0))
      throw std::runtime_error("purity_mps: imaginary residue " + std::to_string(raw.imag()));
    return raw.real();
  }
  const ComplexTensorTrain& mps() const { return mps_; }

 private:
  ComplexTensorTrain mps_;
  detail::EfTransfer transfer_;
};

inline double purity_mps(const ComplexTensorTrain& mps, const Partition& p) {
  return MpsPurityBackend(mps).purity(p);
}

/// Site relabeling: site i of the permuted system is site perm[i] of the
/// wrapped backend.
class PermutedPurityBackend final : public PurityBackend {
 public:
  PermutedPurityBackend(std::shared_ptr<const PurityBackend> inner, std::vector<int> perm)
      : inner_(std::move(inner)), perm_(std::move(perm)) {
    if (static_cast<int>(perm_.size()) != inner_->n_sites())
      throw std::invalid_argument("PermutedPurityBackend: permutation length mismatch");
    std::vector<bool> seen(perm_.size(), false);
    for (int v : perm_) {
      if (v < 0 || v >= static_cast<int>(perm_.size()) || seen[static_cast<size_t>(v)])
        throw std::invalid_argument("PermutedPurityBackend: not a permutation");
      seen[static_cast<size_t>(v)] = true;
    }
  }
  int n_sites() const override { return inner_->n_sites(); }
  double purity(const Partition& p) const override {
    Partition q(p.L, 0);
    for (int i = 0; i < p.L; ++i)
      if (p.test(i)) q.set(perm_[static_cast<size_t>(i)], true);
    return inner_->purity(q);
  }

 private:
  std::shared_ptr<const PurityBackend> inner_;
  std::vector<int> perm_;
};

/// Exact-map memoization plus query counters shared by all adapters of one
/// backend. Thread safe; no eviction at desk scale.
class CachedPurity {
 public:
  explicit CachedPurity(std::shared_ptr<const PurityBackend> backend)
      : backend_(std::move(backend)), stats_(std::make_shared<OracleStats>()) {}

  int n_sites() const { return backend_->n_sites(); }

  double operator()(const Partition& p) const {
    stats_->total_queries.fetch_add(1, std::memory_order_relaxed);
    {
      std::lock_guard<std::mutex> lock(mutex_);
      auto it = cache_.find(p.bits);
      if (it != cache_.end()) return it->second;
    }
    const double v = backend_->purity(p);
    std::lock_guard<std::mutex> lock(mutex_);
    auto [it, fresh] = cache_.emplace(p.bits, v);
    if (fresh) stats_->distinct_queries.fetch_add(1, std::memory_order_relaxed);
    return it->second;
  }

  std::shared_ptr<OracleStats> stats() const { return stats_; }
  const PurityBackend& backend() const { return *backend_; }

 private:
  std::shared_ptr<const PurityBackend> backend_;
  std::shared_ptr<OracleStats> stats_;
  mutable std::mutex mutex_;
  mutable std::unordered_map<std::uint64_t, double> cache_;
};

// ---------------------------------------------------------------------------
// Cross-interpolation oracle adapters
// ---------------------------------------------------------------------------

struct PurityOracle {
  IndexSpace space;
  OracleFn fn;
};

inline Partition natural_index_to_partition(const MultiIndex& idx, int L) {
  Partition p(L, 0);
  for (int i = 0; i < L; ++i)
    if (idx[static_cast<size_t>(i)]) p.set(i, true);
  return p;
}

inline PurityOracle natural_oracle(std::shared_ptr<CachedPurity> backend) {
  const int L = backend->n_sites();
  PurityOracle o;
  o.space.dims.assign(static_cast<size_t>(L), 2);
  o.fn = [backend, L](const MultiIndex& idx) {
    return (*backend)(natural_index_to_partition(idx, L));
  };
  return o;
}

inline PurityOracle dual_oracle(std::shared_ptr<CachedPurity> backend) {
  const int L = backend->n_sites();
  if (L < 2) throw std::invalid_argument("dual_oracle: need at least 2 sites");
  PurityOracle o;
  o.space.dims.assign(static_cast<size_t>(L - 1), 2);
  o.fn = [backend, L](const MultiIndex& idx) {
    DualIndex d(L - 1, 0);
    for (int i = 0; i + 1 < L; ++i)
      if (idx[static_cast<size_t>(i)]) d.bits |= (1ull << i);
    return (*backend)(dual_to_natural(d));
  };
  return o;
}

/// Size-k subsets of `pool` (0-based site labels) by sequential selection;
/// dims are |pool|, |pool|-1, ..., |pool|-k+1. Masks are taken against the
/// full system (global complement).
inline PurityOracle fixed_size_oracle(std::shared_ptr<CachedPurity> backend,
                                      const std::vector<int>& pool, int k) {
  if (k < 1 || k > static_cast<int>(pool.size()))
    throw std::invalid_argument("fixed_size_oracle: k out of range");
  const int L = backend->n_sites();
  PurityOracle o;
  o.space.dims.resize(static_cast<size_t>(k));
  for (int j = 0; j < k; ++j) o.space.dims[static_cast<size_t>(j)] = static_cast<int>(pool.size()) - j;
  o.fn = [backend, pool, L](const MultiIndex& idx) {
    MultiIndex one_based(idx.size());
    for (size_t j = 0; j < idx.size(); ++j) one_based[j] = idx[j] + 1;
    return (*backend)(fixed_size_decode(one_based, pool, L));
  };
  return o;
}

// ---------------------------------------------------------------------------
// Dense-state binary file: magic, u32 L, u32 dims[L], interleaved re/im
// doubles in big-endian index order.
// ---------------------------------------------------------------------------

inline constexpr char kDenseStateMagic[8] = {'E', 'F', 'T', 'C', 'I', 'S', 'T', '1'};

inline void save_dense_state(const DenseState& st, const std::string& path) {
  st.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_dense_state: cannot open " + path);
  out.write(kDenseStateMagic, 8);
  const std::uint32_t L = static_cast<std::uint32_t>(st.n_sites());
  out.write(reinterpret_cast<const char*>(&L), 4);
  for (int d : st.dims) {
    const std::uint32_t u = static_cast<std::uint32_t>(d);
    out.write(reinterpret_cast<const char*>(&u), 4);
  }
  for (Eigen::Index i = 0; i < st.amps.size(); ++i) {
    const double re = st.amps(i).real(), im = st.amps(i).imag();
    out.write(reinterpret_cast<const char*>(&re), 8);
    out.write(reinterpret_cast<const char*>(&im), 8);
  }
  if (!out) throw std::runtime_error("save_dense_state: write failed for " + path);
}

inline DenseState load_dense_state(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_dense_state: cannot open " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kDenseStateMagic, 8) != 0)
    throw std::runtime_error("load_dense_state: bad magic in " + path);
  std::uint32_t L = 0;
  in.read(reinterpret_cast<char*>(&L), 4);
  if (!in || L == 0 || L > 30) throw std::runtime_error("load_dense_state: bad site count");
  DenseState st;
  st.dims.resize(L);
  for (std::uint32_t i = 0; i < L; ++i) {
    std::uint32_t d = 0;
    in.read(reinterpret_cast<char*>(&d), 4);
    if (!in || d == 0) throw std::runtime_error("load_dense_state: bad dims");
    st.dims[i] = static_cast<int>(d);
  }
  const std::int64_t total = st.total_dim();
  if (total > (1ll << 26)) throw std::runtime_error("load_dense_state: state too large");
  st.amps.resize(total);
  for (std::int64_t i = 0; i < total; ++i) {
    double re = 0, im = 0;
    in.read(reinterpret_cast<char*>(&re), 8);
    in.read(reinterpret_cast<char*>(&im), 8);
    if (!in) throw std::runtime_error("load_dense_state: truncated amplitude data");
    st.amps(i) = Complex(re, im);
  }
  st.validate();
  return st;
}

}  // namespace eftci
