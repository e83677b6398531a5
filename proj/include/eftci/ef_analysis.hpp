#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "eftci/cross_interpolation.hpp"
#include "eftci/partitions.hpp"
#include "eftci/purity_oracles.hpp"
#include "eftci/rng.hpp"
#include "eftci/state_zoo.hpp"
#include "eftci/tensor_train.hpp"
#include "eftci/tt_io.hpp"

namespace eftci {

inline constexpr int kMaxEnumerationL = 14;

/// All 2^{L-1} purities in dual (domain-wall) index order, big-endian.
inline Eigen::VectorXd exact_ef_dual(const CachedPurity& backend, int L) {
  if (L < 2 || L > kMaxEnumerationL)
    throw std::invalid_argument("exact_ef_dual: full enumeration limited to 2 <= L <= 14");
  const std::int64_t n_el = 1ll << (L - 1);
  Eigen::VectorXd out(n_el);
  for (std::int64_t g = 0; g < n_el; ++g) {
    DualIndex d(L - 1, 0);
    for (int i = 0; i + 1 < L; ++i)
      if ((g >> (L - 2 - i)) & 1) d.bits |= (1ull << i);
    out(g) = backend(dual_to_natural(d));
  }
  return out;
}

/// Evaluates a learned train over every dual entry, reusing shared prefixes.
/// Natural-basis trains are walked along the domain-wall path b_1 = 1,
/// b_{i+1} = b_i xor dual_i.
inline Eigen::VectorXd tt_values_over_dual(const TensorTrain& tt, const std::string& basis, int L) {
  const std::int64_t n_el = 1ll << (L - 1);
  Eigen::VectorXd out(n_el);
  if (basis == "dual") {
    if (tt.n_sites() != L - 1) throw std::invalid_argument("tt_values_over_dual: leg count mismatch");
    auto v = enumerate_dense(tt);
    for (std::int64_t g = 0; g < n_el; ++g) out(g) = v[static_cast<size_t>(g)];
    return out;
  }
  if (basis != "natural") throw std::invalid_argument("tt_values_over_dual: unknown basis " + basis);
  if (tt.n_sites() != L) throw std::invalid_argument("tt_values_over_dual: leg count mismatch");

  using Row = Eigen::Matrix<double, 1, Eigen::Dynamic>;
  std::function<void(int, const Row&, int, std::int64_t)> walk = [&](int depth, const Row& vec,
                                                                     int cur_bit, std::int64_t g) {
    if (depth == L - 1) {
      out(g) = vec(0);
      return;
    }
    for (int wall = 0; wall <= 1; ++wall) {
      const int next_bit = cur_bit ^ wall;
      Row nv = vec * tt.core(depth + 1).slice(next_bit);
      walk(depth + 1, nv, next_bit, (g << 1) | wall);
    }
  };
  Row v0 = tt.core(0).slice(1);
  walk(0, v0, 1, 0);
  return out;
}

/// Average global relative error over all dual entries:
/// (1/N) sum |T[b] - EF[b]| / EF[b].
inline double global_relative_error(const Eigen::VectorXd& tt_values, const Eigen::VectorXd& exact) {
  if (tt_values.size() != exact.size()) throw std::invalid_argument("global_relative_error: size mismatch");
  double acc = 0;
  for (Eigen::Index i = 0; i < exact.size(); ++i) acc += std::abs(tt_values(i) - exact(i)) / exact(i);
  return acc / static_cast<double>(exact.size());
}

inline double global_relative_error(const TensorTrain& tt, const std::string& basis,
                                    const CachedPurity& backend, int L) {
  return global_relative_error(tt_values_over_dual(tt, basis, L), exact_ef_dual(backend, L));
}

// ---------------------------------------------------------------------------
// Learning driver
// ---------------------------------------------------------------------------

struct EFRecord {
  TensorTrain tt;
  std::string basis;  // "natural" or "dual"
  int L = 0;
  nlohmann::json state_meta;
  TciOptions options;
  std::optional<double> eps_th;
  PivotState pivots;
  long n_queries = 0;
  bool converged = false;
  double max_local_error = 0;
  int sweeps = 0;
  double eps_at_stop = -1;  // Eq.-(5)-style error at stop, when tracked

  nlohmann::json sidecar() const {
    nlohmann::json j;
    j["n_queries"] = n_queries;
    j["converged"] = converged;
    j["ranks"] = tt.ranks();
    j["max_local_error"] = max_local_error;
    j["seed"] = options.seed;
    j["basis"] = basis;
    j["L"] = L;
    j["sweeps"] = sweeps;
    if (eps_th) j["eps_th"] = *eps_th;
    if (eps_at_stop >= 0) j["eps_at_stop"] = eps_at_stop;
    j["state_meta"] = state_meta;
    return j;
  }
};

inline PurityOracle make_basis_oracle(std::shared_ptr<CachedPurity> backend,
                                      const std::string& basis) {
  if (basis == "natural") return natural_oracle(std::move(backend));
  if (basis == "dual") return dual_oracle(std::move(backend));
  throw std::invalid_argument("unknown basis: " + basis);
}

/// Learns the entanglement feature of a purity backend over the chosen basis.
/// With eps_th set, the full-enumeration error is checked after every sweep
/// (a benchmark-harness privilege; it is not billed as oracle queries) and
/// learning stops once it drops to the threshold.
inline EFRecord learn_ef(std::shared_ptr<CachedPurity> backend, const std::string& basis,
                         TciOptions opts, TciMode mode = TciMode::kAdaptive,
                         std::optional<double> eps_th = std::nullopt,
                         nlohmann::json state_meta = {}) {
  const int L = backend->n_sites();
  PurityOracle oracle = make_basis_oracle(backend, basis);

  EFRecord rec;
  rec.basis = basis;
  rec.L = L;
  rec.options = opts;
  rec.eps_th = eps_th;
  rec.state_meta = std::move(state_meta);

  SweepCallback cb;
  Eigen::VectorXd exact;
  if (eps_th) {
    if (L > kMaxEnumerationL)
      throw std::invalid_argument("learn_ef: eps_th requires full enumeration (L <= 14)");
    exact = exact_ef_dual(*backend, L);
    cb = [&](const TciSweepInfo& info) {
      const double eps = global_relative_error(tt_values_over_dual(*info.tt, basis, L), exact);
      rec.eps_at_stop = eps;
      return eps <= *eps_th;
    };
  }
  TciResult res = tci_learn(oracle.fn, oracle.space, opts, mode, cb);
  rec.tt = std::move(res.tt);
  rec.pivots = std::move(res.pivots);
  rec.n_queries = res.n_queries;
  rec.converged = res.converged;
  rec.max_local_error = res.max_local_error;
  rec.sweeps = res.sweeps;
  return rec;
}

// ---------------------------------------------------------------------------
// Distances and the entanglement map
// ---------------------------------------------------------------------------

/// l2 distance between two learned features computed in train form:
/// sqrt(<a,a> - 2<a,b> + <b,b>), clamped at zero for radicands within
/// -1e-10 of zero.
inline double ef_distance(const EFRecord& a, const EFRecord& b) {
  if (a.basis != b.basis || a.L != b.L)
    throw std::invalid_argument("ef_distance: records must share basis and system size");
  const double radicand = inner(a.tt, a.tt) - 2.0 * inner(a.tt, b.tt) + inner(b.tt, b.tt);
  if (radicand < -1e-10) throw std::runtime_error("ef_distance: negative radicand " + std::to_string(radicand));
  return std::sqrt(std::max(radicand, 0.0));
}

inline Eigen::MatrixXd distance_matrix(const std::vector<EFRecord>& records) {
  const Eigen::Index n = static_cast<Eigen::Index>(records.size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = ef_distance(records[static_cast<size_t>(i)], records[static_cast<size_t>(j)]);
      d(i, j) = v;
      d(j, i) = v;
    }
  return d;
}

struct StressResult {
  std::vector<std::array<double, 2>> coords;
  double stress = 0;
  int iterations = 0;
};

/// SMACOF majorization with weights w_ij = D_ij^-2 (capped at 1e8 for zero
/// distances) and optionally pinned coordinates. The stress never increases
/// from one iteration to the next.
inline StressResult stress_layout(const Eigen::MatrixXd& dist,
                                  const std::map<int, std::array<double, 2>>& pinned, int iters,
                                  std::uint64_t seed) {
  const Eigen::Index n = dist.rows();
  if (dist.cols() != n) throw std::invalid_argument("stress_layout: matrix not square");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (dist(i, i) != 0.0) throw std::invalid_argument("stress_layout: nonzero diagonal");
    for (Eigen::Index j = 0; j < n; ++j)
      if (std::abs(dist(i, j) - dist(j, i)) > 1e-12)
        throw std::invalid_argument("stress_layout: matrix not symmetric");
  }
  for (const auto& [idx, xy] : pinned) {
    (void)xy;
    if (idx < 0 || idx >= n) throw std::invalid_argument("stress_layout: pinned index out of range");
  }

  Eigen::MatrixXd w(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      w(i, j) = (i == j) ? 0.0 : (dist(i, j) > 0 ? 1.0 / (dist(i, j) * dist(i, j)) : 1e8);

  double mean_d = 0;
  int cnt = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (dist(i, j) > 0) {
        mean_d += dist(i, j);
        ++cnt;
      }
  mean_d = cnt ? mean_d / cnt : 1.0;

  Eigen::MatrixXd x(n, 2);
  auto rng = make_rng(derive_seed(seed, "layout"));
  std::normal_distribution<double> g(0.0, mean_d > 0 ? mean_d / 2 : 1.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i, 0) = g(rng);
    x(i, 1) = g(rng);
  }
  for (const auto& [idx, xy] : pinned) {
    x(idx, 0) = xy[0];
    x(idx, 1) = xy[1];
  }

  std::vector<Eigen::Index> free_idx;
  for (Eigen::Index i = 0; i < n; ++i)
    if (!pinned.count(static_cast<int>(i))) free_idx.push_back(i);

  auto stress_of = [&](const Eigen::MatrixXd& pos) {
    double s = 0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double dij = (pos.row(i) - pos.row(j)).norm();
        s += w(i, j) * (dij - dist(i, j)) * (dij - dist(i, j));
      }
    return s;
  };

  StressResult out;
  if (free_idx.empty() || n < 2) {
    out.coords.resize(static_cast<size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) out.coords[static_cast<size_t>(i)] = {x(i, 0), x(i, 1)};
    out.stress = stress_of(x);
    return out;
  }

  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j) {
        v(i, j) = -w(i, j);
        v(i, i) += w(i, j);
      }

  const Eigen::Index nf = static_cast<Eigen::Index>(free_idx.size());
  Eigen::MatrixXd vff(nf, nf);
  for (Eigen::Index a = 0; a < nf; ++a)
    for (Eigen::Index b = 0; b < nf; ++b) vff(a, b) = v(free_idx[static_cast<size_t>(a)], free_idx[static_cast<size_t>(b)]);
  if (pinned.empty()) vff.array() += 1.0 / static_cast<double>(n);  // Moore-Penrose shift, V 1 = 0
  Eigen::LDLT<Eigen::MatrixXd> solver(vff);

  double prev_stress = stress_of(x);
  out.stress = prev_stress;
  for (int it = 0; it < iters; ++it) {
    // Guttman transform: B(X) X, rows restricted to the free set.
    Eigen::MatrixXd bx = Eigen::MatrixXd::Zero(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
      double bii = 0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (i == j) continue;
        const double dij = (x.row(i) - x.row(j)).norm();
        const double bij = dij > 1e-300 ? -w(i, j) * dist(i, j) / dij : 0.0;
        bx.row(i) += bij * x.row(j);
        bii -= bij;
      }
      bx.row(i) += bii * x.row(i);
    }
    Eigen::MatrixXd rhs(nf, 2);
    for (Eigen::Index a = 0; a < nf; ++a) {
      const Eigen::Index i = free_idx[static_cast<size_t>(a)];
      rhs.row(a) = bx.row(i);
      for (const auto& [pj, xy] : pinned) {
        (void)xy;
        rhs.row(a) -= v(i, pj) * x.row(pj);
      }
    }
    Eigen::MatrixXd xf = solver.solve(rhs);
    for (Eigen::Index a = 0; a < nf; ++a) x.row(free_idx[static_cast<size_t>(a)]) = xf.row(a);

    const double s = stress_of(x);
    out.iterations = it + 1;
    const bool settled = std::abs(prev_stress - s) <= 1e-14 * std::max(prev_stress, 1.0);
    prev_stress = s;
    out.stress = s;
    if (settled) break;
  }
  out.coords.resize(static_cast<size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) out.coords[static_cast<size_t>(i)] = {x(i, 0), x(i, 1)};
  return out;
}

// ---------------------------------------------------------------------------
// Bond-dimension scans
// ---------------------------------------------------------------------------

struct ScanRow {
  std::string family;
  int L = 0;
  std::uint64_t state_seed = 0;
  std::uint64_t run_seed = 0;
  double eps_th = 0;
  double mean_chi = 0;  // bond-averaged rank, averaged over the TCI runs
  double std_chi = 0;
  double mean_queries = 0;
  std::string status = "ok";
};

struct ScanDetailRun {
  std::uint64_t run_seed = 0;
  double eps_th = 0;
  double avg_chi = 0;
  int max_chi = 0;
  long n_queries = 0;
  int stop_sweep = 0;
  double eps = 0;
};

/// Mean over bonds of min(2^l, 2^{N-l}) for an N-leg binary train: the
/// maximum possible average bond dimension.
inline double max_possible_avg_chi(int n_legs) {
  if (n_legs < 2) return 1.0;
  double s = 0;
  for (int l = 1; l <= n_legs - 1; ++l)
    s += std::min(std::pow(2.0, l), std::pow(2.0, n_legs - l));
  return s / static_cast<double>(n_legs - 1);
}

struct ScanGrid {
  std::vector<ModelSpec> families;  // L and seed fields are filled per row
  std::vector<int> Ls;
  std::vector<double> eps_list;
  int n_state_samples = 10;
  int n_tci_runs = 10;
  std::string basis = "dual";
  TciOptions base_opts;
  std::uint64_t root_seed = 0;
  int threads = 1;
};

namespace detail {

inline std::shared_ptr<CachedPurity> scan_backend(const ModelSpec& spec) {
  if (spec.family == "haar_analytic")
    return std::make_shared<CachedPurity>(std::make_shared<HaarAnalyticBackend>(spec.L, 2, false));
  return make_purity_backend(generate_state(spec));
}

}  // namespace detail

/// One state sample: runs `n_runs` independent learnings and records, for
/// every threshold, the bond statistics at the first sweep whose
/// full-enumeration error reaches it. A single trajectory per run serves all
/// thresholds (learning is deterministic given the seed, so stopping earlier
/// yields exactly the prefix of the same trajectory).
inline std::vector<ScanDetailRun> scan_state_sample(std::shared_ptr<CachedPurity> backend,
                                                    const std::string& basis,
                                                    const std::vector<double>& eps_list,
                                                    int n_runs, const TciOptions& base_opts,
                                                    std::uint64_t run_seed_base) {
  const int L = backend->n_sites();
  Eigen::VectorXd exact = exact_ef_dual(*backend, L);
  const double eps_min = *std::min_element(eps_list.begin(), eps_list.end());

  std::vector<ScanDetailRun> detail;
  for (int run = 0; run < n_runs; ++run) {
    TciOptions opts = base_opts;
    opts.seed = derive_seed(run_seed_base, "tci-run", static_cast<std::uint64_t>(run));
    PurityOracle oracle = make_basis_oracle(backend, basis);

    std::map<double, ScanDetailRun, std::greater<double>> hit;  // loose -> tight
    ScanDetailRun last;
    last.run_seed = opts.seed;
    SweepCallback cb = [&](const TciSweepInfo& info) {
      const double eps = global_relative_error(tt_values_over_dual(*info.tt, basis, L), exact);
      last.avg_chi = info.tt->avg_rank();
      last.max_chi = info.tt->max_rank();
      last.n_queries = info.n_queries;
      last.stop_sweep = info.sweep;
      last.eps = eps;
      for (double th : eps_list)
        if (eps <= th && !hit.count(th)) hit.emplace(th, last);
      return eps <= eps_min;
    };
    tci_learn(oracle.fn, oracle.space, opts, TciMode::kAdaptive, cb);
    for (double th : eps_list) {
      ScanDetailRun r = hit.count(th) ? hit.at(th) : last;  // unreached: converged values
      r.run_seed = opts.seed;
      r.eps_th = th;
      detail.push_back(r);
    }
  }
  return detail;
}

inline std::vector<ScanRow> bond_scan(const ScanGrid& grid,
                                      std::vector<ScanDetailRun>* all_details = nullptr) {
  struct Job {
    ModelSpec spec;
    std::uint64_t state_seed;
    std::uint64_t run_base;
  };
  std::vector<Job> jobs;
  for (const auto& fam : grid.families)
    for (int L : grid.Ls)
      for (int sample = 0; sample < grid.n_state_samples; ++sample) {
        Job j;
        j.spec = fam;
        j.spec.L = L;
        j.state_seed = derive_seed(grid.root_seed, "state", fnv1a64(fam.family), static_cast<std::uint64_t>(L),
                                   static_cast<std::uint64_t>(sample));
        j.spec.seed = j.state_seed;
        j.run_base = derive_seed(grid.root_seed, "tci", fnv1a64(fam.family), static_cast<std::uint64_t>(L),
                                 static_cast<std::uint64_t>(sample));
        jobs.push_back(std::move(j));
      }

  std::vector<std::vector<ScanRow>> row_slots(jobs.size());
  std::vector<std::vector<ScanDetailRun>> detail_slots(jobs.size());
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const size_t k = next.fetch_add(1);
      if (k >= jobs.size()) return;
      const Job& job = jobs[k];
      std::vector<ScanRow> rows;
      try {
        auto backend = detail::scan_backend(job.spec);
        auto det = scan_state_sample(backend, grid.basis, grid.eps_list, grid.n_tci_runs,
                                     grid.base_opts, job.run_base);
        detail_slots[k] = det;
        for (double th : grid.eps_list) {
          ScanRow row;
          row.family = job.spec.family;
          row.L = job.spec.L;
          row.state_seed = job.state_seed;
          row.run_seed = job.run_base;
          row.eps_th = th;
          double mean = 0, m2 = 0, q = 0;
          int cnt = 0;
          for (const auto& d : det)
            if (d.eps_th == th) {
              ++cnt;
              const double delta = d.avg_chi - mean;
              mean += delta / cnt;
              m2 += delta * (d.avg_chi - mean);
              q += static_cast<double>(d.n_queries);
            }
          row.mean_chi = mean;
          row.std_chi = cnt > 1 ? std::sqrt(m2 / (cnt - 1)) : 0.0;
          row.mean_queries = cnt ? q / cnt : 0.0;
          rows.push_back(std::move(row));
        }
      } catch (const std::exception& e) {
        for (double th : grid.eps_list) {
          ScanRow row;
          row.family = job.spec.family;
          row.L = job.spec.L;
          row.state_seed = job.state_seed;
          row.run_seed = job.run_base;
          row.eps_th = th;
          row.status = std::string("error: ") + e.what();
          rows.push_back(std::move(row));
        }
      }
      row_slots[k] = std::move(rows);
    }
  };
  const int n_threads = std::max(1, grid.threads);
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::vector<ScanRow> rows;
  for (auto& slot : row_slots)
    for (auto& r : slot) rows.push_back(std::move(r));
  // Reference curve: the maximum possible average bond dimension per L.
  for (int L : grid.Ls) {
    ScanRow row;
    row.family = "reference";
    row.L = L;
    row.eps_th = 0;
    row.mean_chi = max_possible_avg_chi(grid.basis == "dual" ? L - 1 : L);
    row.status = "ok";
    rows.push_back(std::move(row));
  }
  std::sort(rows.begin(), rows.end(), [](const ScanRow& a, const ScanRow& b) {
    return std::tie(a.family, a.L, a.eps_th, a.state_seed) < std::tie(b.family, b.L, b.eps_th, b.state_seed);
  });
  if (all_details) {
    for (auto& slot : detail_slots)
      for (auto& d : slot) all_details->push_back(std::move(d));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Half-cut spectrum study of directly built features
// ---------------------------------------------------------------------------

struct SpectrumRow {
  int phi = 0;
  std::vector<double> lambdas;  // sqrt of sample-averaged squared values
  double ratio32 = 0;           // lambda3^2 / lambda2^2
};

/// Builds the feature of random MPS samples directly and averages the squared
/// half-cut singular values over the samples, per bond dimension.
inline std::vector<SpectrumRow> ef_spectrum_study(const std::vector<int>& phis, int L,
                                                  int n_samples, std::uint64_t root_seed) {
  std::vector<SpectrumRow> rows;
  for (int phi : phis) {
    std::vector<double> acc;
    for (int s = 0; s < n_samples; ++s) {
      auto mps = gen_random_mps(L, phi, derive_seed(root_seed, "state", static_cast<std::uint64_t>(phi),
                                                    static_cast<std::uint64_t>(s)));
      Spectrum spec = halfcut_spectrum(mps_ef_build(mps));
      if (spec.values.size() > acc.size()) acc.resize(spec.values.size(), 0.0);
      for (size_t i = 0; i < spec.values.size(); ++i) acc[i] += spec.values[i] * spec.values[i];
    }
    SpectrumRow row;
    row.phi = phi;
    row.lambdas.resize(acc.size());
    for (size_t i = 0; i < acc.size(); ++i) row.lambdas[i] = std::sqrt(acc[i] / n_samples);
    if (acc.size() >= 3 && row.lambdas[1] > 0)
      row.ratio32 = (row.lambdas[2] * row.lambdas[2]) / (row.lambdas[1] * row.lambdas[1]);
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Least-squares slope of y against x.
inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_slope: need >= 2 points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace eftci
