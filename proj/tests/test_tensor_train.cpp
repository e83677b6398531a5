#include "eftci/tensor_train.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "eftci/partitions.hpp"
#include "eftci/purity_oracles.hpp"
#include "eftci/state_zoo.hpp"
#include "eftci/tt_io.hpp"
#include "test_support.hpp"

using namespace eftci;

namespace {

std::vector<double> haar_formula_dense(int L, int d) {
  std::vector<double> v(static_cast<size_t>(1) << L);
  for (std::uint64_t g = 0; g < v.size(); ++g) {
    const int k = std::popcount(g);
    v[g] = std::pow(d, -k) + std::pow(d, -(L - k));
  }
  return v;
}

}  // namespace

TEST(TensorTrain, RankOneOnesEvaluatesToOne) {
  auto tt = TensorTrain::ones({2, 2, 2});
  for (std::uint64_t g = 0; g < 8; ++g)
    EXPECT_DOUBLE_EQ(tt.eval(test::index_from_bits(g, 3)), 1.0);
}

TEST(TensorTrain, FromDenseReproducesValues) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1, 1);
  const std::vector<int> dims{2, 3, 2, 4};
  std::vector<double> v(48);
  for (auto& x : v) x = u(rng);
  auto tt = TensorTrain::from_dense(v, dims, 0.0);
  auto back = test::dense_from_tt(tt);
  for (size_t i = 0; i < v.size(); ++i)
    EXPECT_NEAR(back[i], v[i], 1e-12 * std::max(1.0, std::abs(v[i])));
}

TEST(TensorTrain, FromDenseLengthMismatchRejected) {
  EXPECT_THROW(TensorTrain::from_dense({1.0, 2.0, 3.0}, {2, 2}, 0.0), std::invalid_argument);
}

TEST(TensorTrain, EvalRejectsOutOfRangeIndexWithPosition) {
  auto tt = TensorTrain::ones({2, 2});
  try {
    tt.eval({0, 5});
    FAIL() << "expected rejection";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("position 1"), std::string::npos);
  }
}

TEST(TensorTrain, HaarFeatureTrainMatchesFormula) {
  // chi = 2 feature of the symmetrized Haar expression at L = 4, d = 2.
  auto tt = TensorTrain::from_dense(haar_formula_dense(4, 2), {2, 2, 2, 2}, 1e-13);
  EXPECT_LE(tt.max_rank(), 2);
  EXPECT_NEAR(tt.eval({1, 1, 0, 0}), 0.5, 1e-12);  // 2^-2 + 2^-2
}

TEST(TensorTrain, InnerCountsEntriesOfOnes) {
  auto a = TensorTrain::ones({2, 2});
  EXPECT_DOUBLE_EQ(inner(a, a), 4.0);
}

TEST(TensorTrain, InnerMatchesEnumeration) {
  const std::vector<int> dims(6, 2);
  auto a = test::random_tt(dims, 2, 3);
  auto b = test::random_tt(dims, 2, 4);
  auto da = test::dense_from_tt(a);
  auto db = test::dense_from_tt(b);
  double direct = 0;
  for (size_t i = 0; i < da.size(); ++i) direct += da[i] * db[i];
  EXPECT_NEAR(inner(a, b), direct, 1e-10 * std::max(1.0, std::abs(direct)));
  EXPECT_GE(inner(a, a), 0.0);
  EXPECT_GE(inner(b, b), 0.0);
}

TEST(TensorTrain, InnerRejectsDimsMismatch) {
  auto a = TensorTrain::ones({2, 2});
  auto b = TensorTrain::ones({2, 3});
  EXPECT_THROW(inner(a, b), std::invalid_argument);
}

TEST(Compress, SeparableCollapsesToRankOne) {
  // A product function stored wastefully at rank 4.
  auto rank1 = test::random_tt({2, 2, 2, 2}, 1, 7);
  std::vector<TTCore<double>> cores;
  for (int l = 0; l < 4; ++l) {
    const auto& c = rank1.core(l);
    TTCore<double> padded(l == 0 ? 1 : 4, 2, l == 3 ? 1 : 4);
    for (int s = 0; s < 2; ++s) padded.at(0, s, 0) = c.at(0, s, 0);
    cores.push_back(std::move(padded));
  }
  TensorTrain fat({2, 2, 2, 2}, std::move(cores));
  auto slim = compress_svd(fat, 1e-12);
  EXPECT_EQ(slim.max_rank(), 1);
  auto want = test::dense_from_tt(rank1);
  auto got = test::dense_from_tt(slim);
  for (size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-12);
}

TEST(Compress, LosslessAtZeroTolerance) {
  auto tt = test::random_tt({2, 3, 2, 2, 3}, 3, 9);
  auto out = compress_svd(tt, 0.0);
  auto want = test::dense_from_tt(tt);
  auto got = test::dense_from_tt(out);
  for (size_t i = 0; i < want.size(); ++i)
    EXPECT_NEAR(got[i], want[i], 1e-12 * std::max(1.0, std::abs(want[i])));
}

TEST(Compress, NeverIncreasesRanks) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto tt = test::random_tt({2, 2, 2, 2, 2, 2}, 5, seed);
    auto out = compress_svd(tt, 1e-3);
    auto rin = tt.ranks();
    auto rout = out.ranks();
    for (size_t i = 0; i < rin.size(); ++i) EXPECT_LE(rout[i], rin[i]);
  }
}

TEST(Compress, DirectFeatureOfMpsCompressesBelowRawRank) {
  auto mps = gen_random_mps(8, 2, 21);
  auto ef = mps_ef_build(mps);
  EXPECT_EQ(ef.max_rank(), 16);  // phi^4 raw
  auto slim = compress_svd(ef, 1e-10);
  EXPECT_LT(slim.max_rank(), 16);
  auto want = test::dense_from_tt(ef);
  auto got = test::dense_from_tt(slim);
  for (size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-7);
}

TEST(HalfcutSpectrum, ProductFeatureIsRankOne) {
  auto spec = halfcut_spectrum(TensorTrain::ones({2, 2, 2, 2}));
  EXPECT_NEAR(spec.values[0], 1.0, 1e-12);
  for (size_t i = 1; i < spec.values.size(); ++i) EXPECT_EQ(spec.values[i], 0.0);
}

TEST(HalfcutSpectrum, HaarFormulaHasExactlyTwoValues) {
  auto tt = TensorTrain::from_dense(haar_formula_dense(6, 2), std::vector<int>(6, 2), 0.0);
  auto spec = halfcut_spectrum(tt);
  int nonzero = 0;
  for (double v : spec.values) nonzero += v > 0 ? 1 : 0;
  EXPECT_EQ(nonzero, 2);
}

TEST(HalfcutSpectrum, NormalizedAndDescending) {
  for (std::uint64_t seed : {4u, 5u}) {
    auto tt = test::random_tt({2, 2, 2, 2, 2, 2, 2}, 4, seed);
    auto spec = halfcut_spectrum(tt);
    double s2 = 0;
    for (size_t i = 0; i < spec.values.size(); ++i) {
      s2 += spec.values[i] * spec.values[i];
      if (i > 0) EXPECT_LE(spec.values[i], spec.values[i - 1]);
      EXPECT_GE(spec.values[i], 0.0);
    }
    EXPECT_NEAR(s2, 1.0, 1e-10);
  }
}

TEST(HalfcutSpectrum, SpectrumRatioTracksMpsBondDimension) {
  // EF of a phi = 3 MPS at L = 15: lambda3^2/lambda2^2 within a factor 3 of
  // phi^-4.
  auto mps = gen_random_mps(15, 3, 2);
  auto spec = halfcut_spectrum(mps_ef_build(mps));
  ASSERT_GE(spec.values.size(), 3u);
  const double ratio = (spec.values[2] * spec.values[2]) / (spec.values[1] * spec.values[1]);
  const double want = std::pow(3.0, -4);
  EXPECT_GE(ratio, want / 3.0);
  EXPECT_LE(ratio, want * 3.0);
}

TEST(HalfcutSpectrum, RejectsZeroNorm) {
  std::vector<TTCore<double>> cores;
  cores.emplace_back(1, 2, 1);
  cores.emplace_back(1, 2, 1);
  TensorTrain zero({2, 2}, std::move(cores));
  EXPECT_THROW(halfcut_spectrum(zero), std::invalid_argument);
}

TEST(TensorTrain, RoundTripThroughDenseEnumeration) {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> u(-2, 2);
  for (const auto& dims : {std::vector<int>{2, 2, 2, 2, 2}, std::vector<int>{4, 3, 5}}) {
    std::int64_t total = 1;
    for (int d : dims) total *= d;
    std::vector<double> v(static_cast<size_t>(total));
    for (auto& x : v) x = u(rng);
    auto tt = TensorTrain::from_dense(v, dims, 0.0);
    auto batched = enumerate_dense(tt);
    auto single = test::dense_from_tt(tt);
    for (size_t i = 0; i < v.size(); ++i) {
      EXPECT_NEAR(batched[i], v[i], 1e-12 * std::max(1.0, std::abs(v[i])));
      EXPECT_NEAR(single[i], batched[i], 1e-13);
    }
  }
}

TEST(TtIo, JsonRoundTripPreservesValues) {
  auto tt = test::random_tt({2, 3, 2}, 2, 17);
  const std::string path = testing::TempDir() + "tt_roundtrip.tt";
  save_tt(tt, path);
  auto back = load_tt(path);
  EXPECT_EQ(back.dims(), tt.dims());
  EXPECT_EQ(back.ranks(), tt.ranks());
  auto want = test::dense_from_tt(tt);
  auto got = test::dense_from_tt(back);
  for (size_t i = 0; i < want.size(); ++i) EXPECT_EQ(got[i], want[i]);  // lossless doubles
}

TEST(TtIo, ComplexRoundTrip) {
  auto mps = gen_random_mps(5, 2, 9);
  const std::string path = testing::TempDir() + "mps_roundtrip.tt";
  save_tt(mps, path);
  auto back = load_complex_tt(path);
  EXPECT_EQ(back.dims(), mps.dims());
  for (int l = 0; l < 5; ++l)
    for (size_t i = 0; i < mps.core(l).data.size(); ++i)
      EXPECT_EQ(back.core(l).data[i], mps.core(l).data[i]);
  EXPECT_TRUE(tt_json_is_complex(tt_to_json(mps)));
}

TEST(TtIo, VersionChecked) {
  nlohmann::json j = tt_to_json(TensorTrain::ones({2}));
  j["version"] = 9;
  EXPECT_THROW(tt_from_json(j), std::runtime_error);
}
