#pragma once

#include <Eigen/Dense>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "eftci/rng.hpp"
#include "eftci/tensor_train.hpp"

namespace eftci {

using MultiIndex = std::vector<int>;

struct MultiIndexHash {
  size_t operator()(const MultiIndex& v) const noexcept {
    std::uint64_t h = 1469598103934665603ull;
    for (int x : v) {
      h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(x));
      h *= 1099511628211ull;
    }
    return static_cast<size_t>(h);
  }
};

using OracleFn = std::function<double(const MultiIndex&)>;

/// Product index space with per-position dimensions (possibly non-uniform).
struct IndexSpace {
  std::vector<int> dims;

  int n_sites() const { return static_cast<int>(dims.size()); }
  void validate() const {
    if (dims.empty()) throw std::invalid_argument("IndexSpace: empty");
    for (int d : dims)
      if (d < 1) throw std::invalid_argument("IndexSpace: dims must be >= 1");
  }
};

struct TciOptions {
  double tolerance = 1e-12;  // local relative error target
  int max_rank = std::numeric_limits<int>::max();
  int max_sweeps = 4000;
  int n_global_search = 2;    // random full indices proposed after each sweep
  int max_global_insert = 2;  // worst residual offenders inserted as pivots
  std::uint64_t seed = 0;
  std::optional<MultiIndex> initial_pivot;  // default: all-zeros if nonzero there
};

enum class TciMode { kFixedRank, kAdaptive };

/// Nested row/column multi-index sets per bond. row_sets[b] lives on positions
/// 0..b, col_sets[b] on positions b+1..N-1, with |I_b| = |J_b|.
struct PivotState {
  std::vector<std::vector<MultiIndex>> row_sets;
  std::vector<std::vector<MultiIndex>> col_sets;
};

struct TciSweepInfo {
  int sweep = 0;
  double max_local_error = 0;
  long n_queries = 0;
  const TensorTrain* tt = nullptr;
};
/// Returning true stops the learning loop after the current sweep.
using SweepCallback = std::function<bool(const TciSweepInfo&)>;

struct TciResult {
  TensorTrain tt;
  PivotState pivots;
  long n_queries = 0;
  bool converged = false;
  double max_local_error = 0;
  int sweeps = 0;
  bool stopped_early = false;
};

struct MatrixCiResult {
  std::vector<int> rows, cols;  // in pivot selection order
  double error_estimate = 0;    // next pivot magnitude at stop (0 if exhausted)
  double first_pivot = 0;       // magnitude of the first (largest) pivot
};

/// Greedy full-pivoted partial LU on the dense matrix supplied by `getter`.
/// After k pivots the cross interpolant A[:,cols] A[rows,cols]^-1 A[rows,:]
/// is exact on the chosen rows and columns. Selection stops when the next
/// pivot drops to tol (relative to the first) or at max_rank. Pivots below
/// 1e-14 of the first are never accepted, which keeps the pivot matrix
/// invertible to working precision. Ties break to the smallest (row, col).
inline MatrixCiResult matrix_ci(const std::function<double(int, int)>& getter, int n_rows,
                                int n_cols, double tol, int max_rank) {
  if (n_rows < 1 || n_cols < 1) throw std::invalid_argument("matrix_ci: empty matrix");
  Eigen::MatrixXd r(n_rows, n_cols);
  for (int i = 0; i < n_rows; ++i)
    for (int j = 0; j < n_cols; ++j) r(i, j) = getter(i, j);

  MatrixCiResult out;
  const int kmax = std::min({n_rows, n_cols, std::max(max_rank, 0)});
  while (true) {
    int bi = 0, bj = 0;
    double best = -1;
    for (int i = 0; i < n_rows; ++i)
      for (int j = 0; j < n_cols; ++j) {
        const double v = std::abs(r(i, j));
        if (v > best) {
          best = v;
          bi = i;
          bj = j;
        }
      }
    if (out.rows.empty()) {
      if (best <= 0.0) return out;  // all-zero matrix: no pivots, zero error
      out.first_pivot = best;
    } else if (best <= std::max(tol, 1e-14) * out.first_pivot ||
               static_cast<int>(out.rows.size()) >= kmax) {
      out.error_estimate = best;
      return out;
    }
    out.rows.push_back(bi);
    out.cols.push_back(bj);
    const double p = r(bi, bj);
    const Eigen::VectorXd col = r.col(bj);
    const Eigen::RowVectorXd row = r.row(bi);
    r.noalias() -= col * (row / p);
    r.row(bi).setZero();
    r.col(bj).setZero();
    if (static_cast<int>(out.rows.size()) == std::min(n_rows, n_cols)) {
      out.error_estimate = 0;
      return out;
    }
  }
}

namespace detail {

inline MultiIndex concat(const MultiIndex& a, const MultiIndex& b) {
  MultiIndex r;
  r.reserve(a.size() + b.size());
  r.insert(r.end(), a.begin(), a.end());
  r.insert(r.end(), b.begin(), b.end());
  return r;
}

inline MultiIndex concat3(const MultiIndex& a, int s, const MultiIndex& b) {
  MultiIndex r;
  r.reserve(a.size() + 1 + b.size());
  r.insert(r.end(), a.begin(), a.end());
  r.push_back(s);
  r.insert(r.end(), b.begin(), b.end());
  return r;
}

class TciDriver {
 public:
  TciDriver(const OracleFn& oracle, const IndexSpace& space, const TciOptions& opts, TciMode mode)
      : oracle_(oracle), space_(space), opts_(opts), mode_(mode), n_(space.n_sites()) {
    space_.validate();
    if (opts_.tolerance < 0) throw std::invalid_argument("TciOptions: tolerance must be >= 0");
    if (opts_.max_sweeps < 1) throw std::invalid_argument("TciOptions: max_sweeps must be >= 1");
    if (opts_.max_rank < 1) throw std::invalid_argument("TciOptions: max_rank must be >= 1");
  }

  TciResult run(const SweepCallback& on_sweep) {
    TciResult res;
    if (n_ == 1) return run_single_site();

    seed_initial_pivot();
    std::mt19937_64 global_rng(derive_seed(opts_.seed, "global-pivot"));
    std::vector<std::vector<MultiIndex>> prev_rows, prev_cols;

    bool converged = false, stopped_early = false;
    double sweep_err = 0;
    int sweep = 0;
    TensorTrain tt;
    for (sweep = 1; sweep <= opts_.max_sweeps; ++sweep) {
      sweep_err = 0;
      if (sweep % 2 == 1) {
        for (int b = 0; b <= n_ - 2; ++b) sweep_err = std::max(sweep_err, update_bond(b));
      } else {
        for (int b = n_ - 2; b >= 0; --b) sweep_err = std::max(sweep_err, update_bond(b));
      }
      tt = build_tt();

      const bool sets_stable = (rows_ == prev_rows && cols_ == prev_cols);
      prev_rows = rows_;
      prev_cols = cols_;

      const int inserted = global_pivot_pass(tt, global_rng);

      if (on_sweep) {
        TciSweepInfo info{sweep, sweep_err, n_queries_, &tt};
        if (on_sweep(info)) {
          stopped_early = true;
          break;
        }
      }
      // Pivot exactness needs mutually consistent (nested) sets, which is
      // guaranteed once a full sweep leaves every set unchanged.
      if (inserted == 0 && sets_stable && !reconditioned_) {
        if (mode_ == TciMode::kAdaptive && sweep_err <= opts_.tolerance) {
          converged = true;
          break;
        }
        if (mode_ == TciMode::kFixedRank) {
          converged = true;
          break;
        }
      }
    }

    res.tt = std::move(tt);
    res.pivots.row_sets = rows_;
    res.pivots.col_sets = cols_;
    res.n_queries = n_queries_;
    res.converged = converged;
    res.max_local_error = sweep_err;
    res.sweeps = std::min(sweep, opts_.max_sweeps);
    res.stopped_early = stopped_early;
    return res;
  }

 private:
  TciResult run_single_site() {
    TciResult res;
    const int d = space_.dims[0];
    TTCore<double> c(1, d, 1);
    for (int s = 0; s < d; ++s) c.at(0, s, 0) = query({s});
    res.tt = TensorTrain(space_.dims, {std::move(c)});
    res.n_queries = n_queries_;
    res.converged = true;
    res.sweeps = 1;
    return res;
  }

  double query(const MultiIndex& idx) {
    auto it = cache_.find(idx);
    if (it != cache_.end()) return it->second;
    const double v = oracle_(idx);
    if (!std::isfinite(v)) {
      std::string where;
      for (int x : idx) where += std::to_string(x) + ",";
      throw std::runtime_error("tci: oracle returned non-finite value at index (" + where + ")");
    }
    ++n_queries_;
    max_abs_seen_ = std::max(max_abs_seen_, std::abs(v));
    cache_.emplace(idx, v);
    return v;
  }

  void seed_initial_pivot() {
    MultiIndex p;
    if (opts_.initial_pivot) {
      p = *opts_.initial_pivot;
      if (static_cast<int>(p.size()) != n_) throw std::invalid_argument("tci: initial pivot length mismatch");
      for (int l = 0; l < n_; ++l)
        if (p[static_cast<size_t>(l)] < 0 || p[static_cast<size_t>(l)] >= space_.dims[static_cast<size_t>(l)])
          throw std::invalid_argument("tci: initial pivot out of range at position " + std::to_string(l));
    } else {
      p.assign(static_cast<size_t>(n_), 0);
      if (query(p) == 0.0) {
        std::mt19937_64 rng(derive_seed(opts_.seed, "init-pivot"));
        bool found = false;
        for (int attempt = 0; attempt < 256 && !found; ++attempt) {
          for (int l = 0; l < n_; ++l)
            p[static_cast<size_t>(l)] =
                static_cast<int>(rng() % static_cast<std::uint64_t>(space_.dims[static_cast<size_t>(l)]));
          found = query(p) != 0.0;
        }
        if (!found) throw std::runtime_error("tci: could not find a nonzero initial pivot");
      }
    }
    rows_.assign(static_cast<size_t>(n_ - 1), {});
    cols_.assign(static_cast<size_t>(n_ - 1), {});
    for (int b = 0; b <= n_ - 2; ++b) {
      rows_[static_cast<size_t>(b)] = {MultiIndex(p.begin(), p.begin() + b + 1)};
      cols_[static_cast<size_t>(b)] = {MultiIndex(p.begin() + b + 1, p.end())};
    }
  }

  std::vector<int> current_ranks() const {
    std::vector<int> r;
    r.reserve(rows_.size());
    for (const auto& s : rows_) r.push_back(static_cast<int>(s.size()));
    return r;
  }

  /// 2-site update: full cross interpolation of the Pi matrix spanned by
  /// (I_{b-1} x d_b) rows and (d_{b+1} x J_{b+1}) columns. Returns the local
  /// relative error at this bond.
  double update_bond(int b) {
    static const std::vector<MultiIndex> kEmpty = {MultiIndex{}};
    const auto& left_set = (b == 0) ? kEmpty : rows_[static_cast<size_t>(b - 1)];
    const auto& right_set = (b == n_ - 2) ? kEmpty : cols_[static_cast<size_t>(b + 1)];
    const int db = space_.dims[static_cast<size_t>(b)];
    const int dbn = space_.dims[static_cast<size_t>(b + 1)];

    std::vector<MultiIndex> row_idx, col_idx;
    row_idx.reserve(left_set.size() * static_cast<size_t>(db));
    for (const auto& u : left_set)
      for (int s = 0; s < db; ++s) row_idx.push_back(concat3(u, s, {}));
    col_idx.reserve(right_set.size() * static_cast<size_t>(dbn));
    for (int s = 0; s < dbn; ++s)
      for (const auto& v : right_set) col_idx.push_back(concat3({}, s, v));

    auto getter = [&](int i, int j) {
      return query(concat(row_idx[static_cast<size_t>(i)], col_idx[static_cast<size_t>(j)]));
    };
    MatrixCiResult ci = matrix_ci(getter, static_cast<int>(row_idx.size()),
                                  static_cast<int>(col_idx.size()), opts_.tolerance, opts_.max_rank);

    if (ci.rows.empty()) {
      // Zero block: keep a placeholder pivot so ranks stay >= 1.
      rows_[static_cast<size_t>(b)] = {row_idx[0]};
      cols_[static_cast<size_t>(b)] = {col_idx[0]};
      return 0.0;
    }
    std::vector<MultiIndex> nr, nc;
    nr.reserve(ci.rows.size());
    nc.reserve(ci.cols.size());
    for (int i : ci.rows) nr.push_back(row_idx[static_cast<size_t>(i)]);
    for (int j : ci.cols) nc.push_back(col_idx[static_cast<size_t>(j)]);
    rows_[static_cast<size_t>(b)] = std::move(nr);
    cols_[static_cast<size_t>(b)] = std::move(nc);
    return ci.error_estimate / ci.first_pivot;
  }

  Eigen::MatrixXd pivot_matrix_at(int b) {
    const auto& I = rows_[static_cast<size_t>(b)];
    const auto& J = cols_[static_cast<size_t>(b)];
    Eigen::MatrixXd p(I.size(), J.size());
    for (size_t i = 0; i < I.size(); ++i)
      for (size_t j = 0; j < J.size(); ++j) p(i, j) = query(concat(I[i], J[j]));
    return p;
  }

  /// Near-singular pivot matrices (condition above 1e12) trigger re-selection:
  /// a cross interpolation restricted to the already chosen rows/columns keeps
  /// only the well-conditioned subset. Returns true when any bond changed, in
  /// which case another sweep is forced before convergence can be declared.
  bool recondition_pivots() {
    bool changed = false;
    for (int b = 0; b <= n_ - 2; ++b) {
      auto& I = rows_[static_cast<size_t>(b)];
      auto& J = cols_[static_cast<size_t>(b)];
      if (I.size() <= 1) continue;
      Eigen::MatrixXd p = pivot_matrix_at(b);
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(p);
      const double smin = svd.singularValues()(svd.singularValues().size() - 1);
      const double smax = svd.singularValues()(0);
      if (smax <= 0 || smin < smax / 1e12) {
        auto getter = [&](int i, int j) { return p(i, j); };
        MatrixCiResult ci = matrix_ci(getter, static_cast<int>(p.rows()), static_cast<int>(p.cols()),
                                      1e-12, static_cast<int>(p.rows()));
        std::vector<MultiIndex> nr, nc;
        for (int i : ci.rows) nr.push_back(I[static_cast<size_t>(i)]);
        for (int j : ci.cols) nc.push_back(J[static_cast<size_t>(j)]);
        if (nr.empty()) {
          nr = {I[0]};
          nc = {J[0]};
        }
        I = std::move(nr);
        J = std::move(nc);
        changed = true;
      }
    }
    return changed;
  }

  TensorTrain build_tt() {
    reconditioned_ = recondition_pivots();
    static const std::vector<MultiIndex> kEmpty = {MultiIndex{}};
    std::vector<TTCore<double>> cores;
    cores.reserve(static_cast<size_t>(n_));
    for (int l = 0; l < n_; ++l) {
      const auto& left = (l == 0) ? kEmpty : rows_[static_cast<size_t>(l - 1)];
      const auto& right = (l == n_ - 1) ? kEmpty : cols_[static_cast<size_t>(l)];
      const int d = space_.dims[static_cast<size_t>(l)];
      const Eigen::Index rl = static_cast<Eigen::Index>(left.size());
      const Eigen::Index rr = static_cast<Eigen::Index>(right.size());
      TTCore<double> core(rl, d, rr);
      Eigen::MatrixXd t(rl, rr);
      for (int s = 0; s < d; ++s) {
        for (Eigen::Index i = 0; i < rl; ++i)
          for (Eigen::Index j = 0; j < rr; ++j)
            t(i, j) = query(concat3(left[static_cast<size_t>(i)], s, right[static_cast<size_t>(j)]));
        Eigen::MatrixXd a;
        if (l == n_ - 1) {
          a = t;
        } else {
          // Fold in the inverse pivot matrix through its LU factors.
          Eigen::MatrixXd p = pivot_matrix_at(l);
          Eigen::PartialPivLU<Eigen::MatrixXd> lu(p.transpose());
          a = lu.solve(t.transpose()).transpose();
        }
        for (Eigen::Index i = 0; i < rl; ++i)
          for (Eigen::Index j = 0; j < a.cols(); ++j) core.at(i, s, j) = a(i, j);
      }
      cores.push_back(std::move(core));
    }
    return TensorTrain(space_.dims, std::move(cores));
  }

  int global_pivot_pass(const TensorTrain& tt, std::mt19937_64& rng) {
    if (opts_.n_global_search <= 0 || opts_.max_global_insert <= 0) return 0;
    struct Cand {
      double resid;
      MultiIndex idx;
    };
    std::vector<Cand> cands;
    for (int g = 0; g < opts_.n_global_search; ++g) {
      MultiIndex p(static_cast<size_t>(n_));
      for (int l = 0; l < n_; ++l)
        p[static_cast<size_t>(l)] =
            static_cast<int>(rng() % static_cast<std::uint64_t>(space_.dims[static_cast<size_t>(l)]));
      const double resid = std::abs(tt.eval(p) - query(p));
      cands.push_back({resid, std::move(p)});
    }
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
      if (a.resid != b.resid) return a.resid > b.resid;
      return a.idx < b.idx;
    });
    const double scale = std::max(max_abs_seen_, 1e-300);
    int inserted = 0;
    for (const auto& c : cands) {
      if (inserted >= opts_.max_global_insert) break;
      if (c.resid <= opts_.tolerance * scale) continue;
      if (insert_full_pivot(c.idx)) ++inserted;
    }
    return inserted;
  }

  bool insert_full_pivot(const MultiIndex& p) {
    bool any = false;
    for (int b = 0; b <= n_ - 2; ++b) {
      auto& I = rows_[static_cast<size_t>(b)];
      auto& J = cols_[static_cast<size_t>(b)];
      if (static_cast<int>(I.size()) >= opts_.max_rank) continue;
      MultiIndex pre(p.begin(), p.begin() + b + 1);
      MultiIndex suf(p.begin() + b + 1, p.end());
      const bool has_pre = std::find(I.begin(), I.end(), pre) != I.end();
      const bool has_suf = std::find(J.begin(), J.end(), suf) != J.end();
      if (!has_pre && !has_suf) {
        I.push_back(std::move(pre));
        J.push_back(std::move(suf));
        any = true;
      }
    }
    return any;
  }

  const OracleFn& oracle_;
  IndexSpace space_;
  TciOptions opts_;
  TciMode mode_;
  int n_;
  std::unordered_map<MultiIndex, double, MultiIndexHash> cache_;
  long n_queries_ = 0;
  double max_abs_seen_ = 0;
  bool reconditioned_ = false;
  std::vector<std::vector<MultiIndex>> rows_, cols_;
};

}  // namespace detail

/// Adaptive (mode II) or fixed-rank (mode I) 2-site tensor cross
/// interpolation. The oracle must be deterministic during a run; query
/// billing is per distinct multi-index. The returned train reproduces the
/// oracle exactly at every multi-index composed from retained pivot pairs.
inline TciResult tci_learn(const OracleFn& oracle, const IndexSpace& space, const TciOptions& opts,
                           TciMode mode, const SweepCallback& on_sweep = {}) {
  detail::TciDriver driver(oracle, space, opts, mode);
  return driver.run(on_sweep);
}

/// Largest relative deviation |tt(p) - oracle(p)| / |oracle(p)| over
/// pivot-composed multi-indices (u in I_l, v in J_l), sampling up to
/// `max_samples` pairs per bond. Converged results stay at working precision.
inline double max_pivot_cross_error(const TciResult& res, const OracleFn& oracle,
                                    int max_samples_per_bond = 16, std::uint64_t seed = 0) {
  double worst = 0;
  auto rng = make_rng(derive_seed(seed, "pivot-check"));
  const size_t n_bonds = res.pivots.row_sets.size();
  for (size_t b = 0; b < n_bonds; ++b) {
    const auto& I = res.pivots.row_sets[b];
    const auto& J = res.pivots.col_sets[b];
    const size_t r = std::min(I.size(), J.size());
    if (r == 0) continue;
    const size_t pairs = r * r;
    for (int s = 0; s < max_samples_per_bond; ++s) {
      const size_t pick = (pairs <= static_cast<size_t>(max_samples_per_bond))
                              ? static_cast<size_t>(s)
                              : static_cast<size_t>(rng() % pairs);
      if (pick >= pairs) break;
      const auto& u = I[pick / r];
      const auto& v = J[pick % r];
      const MultiIndex idx = detail::concat(u, v);
      const double ex = oracle(idx);
      const double got = res.tt.eval(idx);
      const double denom = std::max(std::abs(ex), 1e-300);
      worst = std::max(worst, std::abs(got - ex) / denom);
    }
  }
  return worst;
}

struct TtoptResult {
  MultiIndex argmax;
  double value = 0;
  long n_queries = 0;
};

/// Maximum-element search: runs fixed-rank TCI while recording every oracle
/// evaluation and returns the largest-modulus entry seen. The reported value
/// is re-queried from the oracle on return.
inline TtoptResult ttopt_max(const OracleFn& oracle, const IndexSpace& space, int rank_cap,
                             TciOptions opts) {
  if (rank_cap < 1) throw std::invalid_argument("ttopt_max: rank_cap must be >= 1");
  opts.max_rank = rank_cap;
  TtoptResult best;
  bool have = false;
  OracleFn tracked = [&](const MultiIndex& idx) {
    const double v = oracle(idx);
    if (!have || std::abs(v) > std::abs(best.value) ||
        (std::abs(v) == std::abs(best.value) && idx < best.argmax)) {
      best.value = v;
      best.argmax = idx;
      have = true;
    }
    return v;
  };
  TciResult res = tci_learn(tracked, space, opts, TciMode::kFixedRank);
  best.n_queries = res.n_queries;
  if (!have) throw std::runtime_error("ttopt_max: no oracle evaluations recorded");
  best.value = oracle(best.argmax);
  return best;
}

}  // namespace eftci
