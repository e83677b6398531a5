#include "eftci/cross_interpolation.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "eftci/partitions.hpp"
#include "eftci/purity_oracles.hpp"
#include "eftci/state_zoo.hpp"
#include "test_support.hpp"

using namespace eftci;

namespace {

Eigen::MatrixXd ci_reconstruct(const Eigen::MatrixXd& a, const MatrixCiResult& ci) {
  const int k = static_cast<int>(ci.rows.size());
  Eigen::MatrixXd c(a.rows(), k), r(k, a.cols()), p(k, k);
  for (int i = 0; i < k; ++i) {
    c.col(i) = a.col(ci.cols[static_cast<size_t>(i)]);
    r.row(i) = a.row(ci.rows[static_cast<size_t>(i)]);
    for (int j = 0; j < k; ++j) p(i, j) = a(ci.rows[static_cast<size_t>(i)], ci.cols[static_cast<size_t>(j)]);
  }
  return c * p.partialPivLu().solve(r);
}

OracleFn separable_oracle(const std::vector<std::vector<double>>& factors) {
  return [factors](const MultiIndex& idx) {
    double p = 1;
    for (size_t i = 0; i < idx.size(); ++i) p *= factors[i][static_cast<size_t>(idx[i])];
    return p;
  };
}

}  // namespace

TEST(MatrixCi, IdentityNeedsTwoPivots) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(2, 2);
  auto ci = matrix_ci([&](int i, int j) { return a(i, j); }, 2, 2, 1e-12, 100);
  EXPECT_EQ(ci.rows.size(), 2u);
  EXPECT_LT((ci_reconstruct(a, ci) - a).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(MatrixCi, RankOneTakesMaxModulusPivot) {
  Eigen::VectorXd u(8), v(8);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dist(-1, 1);
  for (int i = 0; i < 8; ++i) {
    u(i) = dist(rng);
    v(i) = dist(rng);
  }
  Eigen::MatrixXd a = u * v.transpose();
  auto ci = matrix_ci([&](int i, int j) { return a(i, j); }, 8, 8, 1e-12, 100);
  ASSERT_EQ(ci.rows.size(), 1u);
  Eigen::Index mi, mj;
  a.cwiseAbs().maxCoeff(&mi, &mj);
  EXPECT_EQ(ci.rows[0], static_cast<int>(mi));
  EXPECT_EQ(ci.cols[0], static_cast<int>(mj));
  EXPECT_LT((ci_reconstruct(a, ci) - a).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(MatrixCi, RankThreeRecovered) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> dist(-1, 1);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(12, 12);
  for (int t = 0; t < 3; ++t) {
    Eigen::VectorXd u(12), v(12);
    for (int i = 0; i < 12; ++i) {
      u(i) = dist(rng);
      v(i) = dist(rng);
    }
    a += u * v.transpose();
  }
  auto ci = matrix_ci([&](int i, int j) { return a(i, j); }, 12, 12, 1e-12, 100);
  EXPECT_EQ(ci.rows.size(), 3u);
  EXPECT_LT((ci_reconstruct(a, ci) - a).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(MatrixCi, AllZeroMatrixGivesNoPivots) {
  auto ci = matrix_ci([](int, int) { return 0.0; }, 4, 5, 1e-12, 100);
  EXPECT_TRUE(ci.rows.empty());
  EXPECT_EQ(ci.error_estimate, 0.0);
}

TEST(MatrixCi, RankCapRespected) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> dist(-1, 1);
  Eigen::MatrixXd a(6, 6);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) a(i, j) = dist(rng);
  auto ci = matrix_ci([&](int i, int j) { return a(i, j); }, 6, 6, 0.0, 2);
  EXPECT_EQ(ci.rows.size(), 2u);
  EXPECT_GT(ci.error_estimate, 0.0);
}

TEST(TciLearn, SeparableOracleIsRankOneAndExact) {
  std::vector<std::vector<double>> factors(8, {0.6, 1.4});
  factors[3] = {0.2, 0.9};
  auto oracle = separable_oracle(factors);
  IndexSpace space{std::vector<int>(8, 2)};
  TciOptions opts;
  opts.seed = 1;
  auto res = tci_learn(oracle, space, opts, TciMode::kAdaptive);
  EXPECT_TRUE(res.converged);
  EXPECT_EQ(res.tt.max_rank(), 1);
  for (std::uint64_t g = 0; g < 256; ++g) {
    auto idx = test::index_from_bits(g, 8);
    const double want = oracle(idx);
    EXPECT_NEAR(res.tt.eval(idx), want, 1e-10 * std::abs(want));
  }
}

TEST(TciLearn, HaarFormulaOracleRankTwo) {
  auto backend = std::make_shared<CachedPurity>(std::make_shared<HaarAnalyticBackend>(10, 2, false));
  auto oracle = natural_oracle(backend);
  TciOptions opts;
  opts.seed = 2;
  auto res = tci_learn(oracle.fn, oracle.space, opts, TciMode::kAdaptive);
  EXPECT_TRUE(res.converged);
  EXPECT_LE(res.tt.max_rank(), 2);
  double worst = 0;
  for (std::uint64_t g = 0; g < 1024; ++g) {
    auto idx = test::index_from_bits(g, 10);
    const double want = oracle.fn(idx);
    worst = std::max(worst, std::abs(res.tt.eval(idx) - want) / want);
  }
  EXPECT_LT(worst, 1e-10);
}

TEST(TciLearn, WorkedThreeQubitExample) {
  // Natural-basis feature of (|00> + |11>) x |0> / sqrt(2):
  // amplitude 1 on masks 000,001,110,111 and 1/2 on the rest.
  auto backend =
      std::make_shared<CachedPurity>(std::make_shared<DensePurityBackend>(test::bell_times_zero()));
  auto oracle = natural_oracle(backend);
  TciOptions opts;
  opts.seed = 3;
  auto res = tci_learn(oracle.fn, oracle.space, opts, TciMode::kAdaptive);
  EXPECT_TRUE(res.converged);
  for (std::uint64_t g = 0; g < 8; ++g) {
    auto idx = test::index_from_bits(g, 3);
    const bool first_two_equal = idx[0] == idx[1];
    EXPECT_NEAR(res.tt.eval(idx), first_two_equal ? 1.0 : 0.5, 1e-12);
  }
}

TEST(TciLearn, PivotCrossExactness) {
  // Low-rank synthetic oracle: sum of two separable terms.
  std::vector<std::vector<double>> f1(6, {0.8, 1.1}), f2(6, {1.3, 0.5});
  auto o1 = separable_oracle(f1), o2 = separable_oracle(f2);
  OracleFn oracle = [&](const MultiIndex& idx) { return o1(idx) + o2(idx); };
  IndexSpace space{std::vector<int>(6, 2)};
  TciOptions opts;
  opts.seed = 12;
  auto res = tci_learn(oracle, space, opts, TciMode::kAdaptive);
  ASSERT_TRUE(res.converged);
  EXPECT_LT(max_pivot_cross_error(res, oracle, 64), 1e-10);
}

TEST(TciLearn, DeterministicGivenSeed) {
  auto backend = std::make_shared<CachedPurity>(
      std::make_shared<DensePurityBackend>(gen_haar(8, 77)));
  auto oracle = dual_oracle(backend);
  TciOptions opts;
  opts.seed = 99;
  auto a = tci_learn(oracle.fn, oracle.space, opts, TciMode::kAdaptive);
  auto b = tci_learn(oracle.fn, oracle.space, opts, TciMode::kAdaptive);
  EXPECT_EQ(a.n_queries, b.n_queries);
  EXPECT_EQ(a.tt.ranks(), b.tt.ranks());
  EXPECT_EQ(a.sweeps, b.sweeps);
  auto da = test::dense_from_tt(a.tt);
  auto db = test::dense_from_tt(b.tt);
  for (size_t i = 0; i < da.size(); ++i) EXPECT_EQ(da[i], db[i]);
}

TEST(TciLearn, ResidualsMonotoneOnceRanksStopGrowing) {
  auto backend = std::make_shared<CachedPurity>(
      std::make_shared<DensePurityBackend>(gen_haar(8, 5)));
  auto oracle = dual_oracle(backend);
  TciOptions opts;
  opts.seed = 4;
  std::vector<std::pair<int, double>> history;  // (max rank, local error)
  SweepCallback cb = [&](const TciSweepInfo& info) {
    history.emplace_back(info.tt->max_rank(), info.max_local_error);
    return false;
  };
  tci_learn(oracle.fn, oracle.space, opts, TciMode::kAdaptive, cb);
  const int final_rank = history.back().first;
  double prev = -1;
  for (const auto& [rank, err] : history) {
    if (rank != final_rank) continue;
    if (prev >= 0) EXPECT_LE(err, prev + 1e-15);
    prev = err;
  }
}

TEST(TciLearn, NonFiniteOracleAborts) {
  OracleFn oracle = [](const MultiIndex& idx) {
    return idx[0] == 1 && idx[1] == 1 ? std::numeric_limits<double>::quiet_NaN() : 1.0;
  };
  IndexSpace space{{2, 2, 2}};
  TciOptions opts;
  EXPECT_THROW(tci_learn(oracle, space, opts, TciMode::kAdaptive), std::runtime_error);
}

TEST(TciLearn, FixedRankCapsBondDimension) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> dist(0.1, 1.0);
  std::vector<std::vector<std::vector<double>>> terms;
  for (int t = 0; t < 3; ++t) {
    std::vector<std::vector<double>> f(7, std::vector<double>(2));
    for (auto& row : f)
      for (auto& x : row) x = dist(rng);
    terms.push_back(std::move(f));
  }
  OracleFn oracle = [&](const MultiIndex& idx) {
    double s = 0;
    for (const auto& f : terms) {
      double p = 1;
      for (size_t i = 0; i < idx.size(); ++i) p *= f[i][static_cast<size_t>(idx[i])];
      s += p;
    }
    return s;
  };
  IndexSpace space{std::vector<int>(7, 2)};
  TciOptions opts;
  opts.seed = 8;
  opts.max_rank = 2;
  opts.max_sweeps = 12;
  auto res = tci_learn(oracle, space, opts, TciMode::kFixedRank);
  EXPECT_LE(res.tt.max_rank(), 2);
}

TEST(TciLearn, SingleSiteSpaceEnumerates) {
  OracleFn oracle = [](const MultiIndex& idx) { return 1.0 + idx[0]; };
  IndexSpace space{{5}};
  TciOptions opts;
  auto res = tci_learn(oracle, space, opts, TciMode::kAdaptive);
  EXPECT_TRUE(res.converged);
  EXPECT_EQ(res.n_queries, 5);
  for (int i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(res.tt.eval({i}), 1.0 + i);
}

TEST(TciLearn, QueryBudgetForHaarFormula) {
  for (int L : {6, 12, 20}) {
    auto backend = std::make_shared<CachedPurity>(std::make_shared<HaarAnalyticBackend>(L, 2, false));
    auto oracle = dual_oracle(backend);
    TciOptions opts;
    opts.seed = 13;
    auto res = tci_learn(oracle.fn, oracle.space, opts, TciMode::kAdaptive);
    EXPECT_TRUE(res.converged);
    EXPECT_LE(res.tt.max_rank(), 2);
    EXPECT_LE(res.n_queries, 200l * L);
  }
}

TEST(TtoptMax, SeparablePositiveOracle) {
  std::vector<std::vector<double>> f{{0.7, 1.3, 0.2}, {0.4, 0.9, 0.1}, {2.0, 0.3, 0.5}};
  auto oracle = separable_oracle(f);
  IndexSpace space{{3, 3, 3}};
  TciOptions opts;
  opts.seed = 10;
  opts.max_sweeps = 8;
  auto r = ttopt_max(oracle, space, 2, opts);
  EXPECT_EQ(r.argmax, (MultiIndex{1, 1, 0}));
  EXPECT_DOUBLE_EQ(r.value, 1.3 * 0.9 * 2.0);
}

TEST(TtoptMax, ConstantOracleReturnsConstant) {
  OracleFn oracle = [](const MultiIndex&) { return 0.75; };
  IndexSpace space{{2, 2, 2, 2}};
  TciOptions opts;
  opts.max_sweeps = 4;
  auto r = ttopt_max(oracle, space, 2, opts);
  EXPECT_DOUBLE_EQ(r.value, 0.75);
}

TEST(TtoptMax, RestrictedFeatureSearchNearBruteForceMax) {
  // Size-6 subsets of a phi = 3 random MPS at L = 12, rank cap 2: the found
  // purity reaches 90% of the brute-force best in at least 80% of 20 trials.
  const int L = 12, k = 6;
  auto mps = gen_random_mps(L, 3, 31);
  auto backend = std::make_shared<CachedPurity>(std::make_shared<MpsPurityBackend>(std::move(mps)));
  double brute = 0;
  for (std::uint64_t bits = 0; bits < (1ull << L); ++bits) {
    if (std::popcount(bits) != k) continue;
    brute = std::max(brute, (*backend)(Partition(L, bits)));
  }
  std::vector<int> pool(L);
  std::iota(pool.begin(), pool.end(), 0);
  int hits = 0;
  for (int trial = 0; trial < 20; ++trial) {
    auto oracle = fixed_size_oracle(backend, pool, k);
    TciOptions opts;
    opts.seed = derive_seed(1000, "trial", static_cast<std::uint64_t>(trial));
    opts.max_sweeps = 8;
    auto r = ttopt_max(oracle.fn, oracle.space, 2, opts);
    if (r.value >= 0.9 * brute) ++hits;
  }
  EXPECT_GE(hits, 16);
}
