#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "eftci/cross_interpolation.hpp"
#include "eftci/partitions.hpp"
#include "eftci/purity_oracles.hpp"
#include "eftci/rng.hpp"
#include "eftci/state_zoo.hpp"

namespace eftci {

/// Site ordering: perm[new position] = original site (0-based).
struct Ordering {
  std::vector<int> perm;

  void validate(int L) const {
    if (static_cast<int>(perm.size()) != L) throw std::runtime_error("Ordering: wrong length");
    std::vector<bool> seen(static_cast<size_t>(L), false);
    for (int v : perm) {
      if (v < 0 || v >= L || seen[static_cast<size_t>(v)])
        throw std::runtime_error("Ordering: not a permutation");
      seen[static_cast<size_t>(v)] = true;
    }
  }
};

struct BestSplitResult {
  std::vector<int> sites;  // sorted 0-based labels of the chosen subset
  double purity = 0;       // re-verified by a direct oracle call
};

/// Least-entangled size-k subset of `pool`, found by running the maximum
/// search over the sequential-selection basis against the purity of the
/// subset versus the global complement. Ties take the lexicographically
/// smallest decoded subset. The initial pivot (all first choices) decodes to
/// the leading pool prefix, so the returned purity never falls below that
/// baseline.
inline BestSplitResult best_split(std::shared_ptr<CachedPurity> backend,
                                  const std::vector<int>& pool, int k, int rank_cap,
                                  std::uint64_t seed, int max_sweeps = 8) {
  if (k < 1 || k >= static_cast<int>(pool.size()))
    throw std::invalid_argument("best_split: need 1 <= k < |pool|");
  PurityOracle oracle = fixed_size_oracle(backend, pool, k);
  const int L = backend->n_sites();

  BestSplitResult best;
  bool have = false;
  OracleFn tracked = [&](const MultiIndex& idx) {
    const double v = oracle.fn(idx);
    MultiIndex one_based(idx.size());
    for (size_t j = 0; j < idx.size(); ++j) one_based[j] = idx[j] + 1;
    std::vector<int> sites = fixed_size_decode_sites(one_based, pool);
    std::sort(sites.begin(), sites.end());
    if (!have || v > best.purity || (v == best.purity && sites < best.sites)) {
      best.purity = v;
      best.sites = std::move(sites);
      have = true;
    }
    return v;
  };

  TciOptions opts;
  opts.seed = seed;
  opts.max_rank = rank_cap;
  opts.max_sweeps = max_sweeps;
  tci_learn(tracked, oracle.space, opts, TciMode::kFixedRank);
  if (!have) throw std::runtime_error("best_split: no candidates evaluated");

  Partition p(L, 0);
  for (int s : best.sites) p.set(s, true);
  best.purity = (*backend)(p);
  return best;
}

struct DisentangleReport {
  Ordering ordering;
  std::vector<double> s2_before;  // left-right cuts 1..L-1, identity order
  std::vector<double> s2_after;   // same cuts under the found ordering
  long n_queries = 0;             // distinct purity evaluations
  int L = 0;
};

namespace detail {

inline void disentangle_recurse(std::shared_ptr<CachedPurity> backend, std::vector<int> pool,
                                int rank_cap, std::uint64_t seed, int depth,
                                std::vector<int>& out) {
  if (pool.size() <= 2) {
    out.insert(out.end(), pool.begin(), pool.end());
    return;
  }
  const int k = static_cast<int>(pool.size()) / 2;
  BestSplitResult split =
      best_split(backend, pool, k, rank_cap,
                 derive_seed(seed, "split", static_cast<std::uint64_t>(depth),
                             static_cast<std::uint64_t>(pool.size()), static_cast<std::uint64_t>(pool[0])));
  std::vector<int> rest;
  for (int s : pool)
    if (std::find(split.sites.begin(), split.sites.end(), s) == split.sites.end()) rest.push_back(s);
  disentangle_recurse(backend, split.sites, rank_cap, seed, depth + 1, out);
  disentangle_recurse(backend, rest, rank_cap, seed, depth + 1, out);
}

}  // namespace detail

/// Divide-and-conquer ordering search: splits the pool into the two least
/// entangled halves (purity against the global complement), assigns the found
/// subset to the left block, and recurses down to blocks of size 2.
inline DisentangleReport disentangle(std::shared_ptr<CachedPurity> backend, int rank_cap = 2,
                                     std::uint64_t seed = 0) {
  const int L = backend->n_sites();
  if (L < 2) throw std::invalid_argument("disentangle: need at least 2 sites");
  const long queries_before = backend->stats()->distinct_queries.load();

  DisentangleReport rep;
  rep.L = L;
  for (int c = 1; c <= L - 1; ++c) {
    Partition p(L, 0);
    for (int i = 0; i < c; ++i) p.set(i, true);
    rep.s2_before.push_back(-std::log((*backend)(p)));
  }

  std::vector<int> pool(static_cast<size_t>(L));
  std::iota(pool.begin(), pool.end(), 0);
  std::vector<int> order;
  detail::disentangle_recurse(backend, std::move(pool), rank_cap, seed, 0, order);
  rep.ordering.perm = std::move(order);
  rep.ordering.validate(L);

  for (int c = 1; c <= L - 1; ++c) {
    Partition p(L, 0);
    for (int i = 0; i < c; ++i) p.set(rep.ordering.perm[static_cast<size_t>(i)], true);
    rep.s2_after.push_back(-std::log((*backend)(p)));
  }
  rep.n_queries = backend->stats()->distinct_queries.load() - queries_before;
  const long cap = 50l * L * L * L;
  if (rep.n_queries > cap)
    throw std::runtime_error("disentangle: query count " + std::to_string(rep.n_queries) +
                             " exceeded cap " + std::to_string(cap));
  return rep;
}

struct ShuffleBenchRow {
  int L = 0;
  double s2_before_mean = 0;  // mid-cut, averaged over samples
  double s2_after_mean = 0;
  long mean_queries = 0;
};

struct ShuffleBenchResult {
  std::vector<ShuffleBenchRow> rows;
  double slope_before = 0;  // linear fit of mid-cut entropy vs L
  double slope_after = 0;
};

/// Random MPS states with randomly permuted physical indices, disentangled
/// through their own purity oracle; reports mid-cut entropies before/after
/// and the linear growth rates across system sizes.
inline ShuffleBenchResult shuffle_benchmark(int phi, const std::vector<int>& Ls, int n_samples,
                                            std::uint64_t root_seed, int rank_cap = 2) {
  ShuffleBenchResult out;
  std::vector<double> xs, yb, ya;
  for (int L : Ls) {
    ShuffleBenchRow row;
    row.L = L;
    long queries = 0;
    for (int s = 0; s < n_samples; ++s) {
      auto mps = gen_random_mps(L, phi, derive_seed(root_seed, "state", static_cast<std::uint64_t>(L),
                                                    static_cast<std::uint64_t>(s)));
      std::vector<int> perm(static_cast<size_t>(L));
      std::iota(perm.begin(), perm.end(), 0);
      auto rng = make_rng(derive_seed(root_seed, "shuffle", static_cast<std::uint64_t>(L),
                                      static_cast<std::uint64_t>(s)));
      std::shuffle(perm.begin(), perm.end(), rng);
      auto backend = std::make_shared<CachedPurity>(std::make_shared<PermutedPurityBackend>(
          std::make_shared<MpsPurityBackend>(std::move(mps)), std::move(perm)));
      DisentangleReport rep = disentangle(backend, rank_cap,
                                          derive_seed(root_seed, "tci", static_cast<std::uint64_t>(L),
                                                      static_cast<std::uint64_t>(s)));
      row.s2_before_mean += rep.s2_before[static_cast<size_t>(L / 2 - 1)];
      row.s2_after_mean += rep.s2_after[static_cast<size_t>(L / 2 - 1)];
      queries += rep.n_queries;
    }
    row.s2_before_mean /= n_samples;
    row.s2_after_mean /= n_samples;
    row.mean_queries = queries / n_samples;
    xs.push_back(L);
    yb.push_back(row.s2_before_mean);
    ya.push_back(row.s2_after_mean);
    out.rows.push_back(row);
  }
  if (xs.size() >= 2) {
    const double n = static_cast<double>(xs.size());
    double sx = 0, sxx = 0;
    for (double x : xs) {
      sx += x;
      sxx += x * x;
    }
    auto slope = [&](const std::vector<double>& y) {
      double sy = 0, sxy = 0;
      for (size_t i = 0; i < y.size(); ++i) {
        sy += y[i];
        sxy += xs[i] * y[i];
      }
      return (n * sxy - sx * sy) / (n * sxx - sx * sx);
    };
    out.slope_before = slope(yb);
    out.slope_after = slope(ya);
  }
  return out;
}

}  // namespace eftci
