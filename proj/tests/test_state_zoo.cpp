#include "eftci/state_zoo.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "eftci/purity_oracles.hpp"
#include "test_support.hpp"

using namespace eftci;

TEST(Haar, NormalizedAndSeedSensitive) {
  auto a = gen_haar(8, 1);
  auto b = gen_haar(8, 2);
  EXPECT_NEAR(a.amps.norm(), 1.0, 1e-12);
  EXPECT_NEAR(b.amps.norm(), 1.0, 1e-12);
  EXPECT_GT((a.amps - b.amps).norm(), 1e-3);
}

TEST(Haar, MeanHalfCutPurityMatchesKnownAverage) {
  // (d_A + d_B) / (d_A d_B + 1) at L = 10: 64/1025.
  const int L = 10;
  Partition half(L, 0);
  for (int i = 0; i < L / 2; ++i) half.set(i, true);
  double mean = 0;
  const int samples = 100;
  for (int s = 0; s < samples; ++s) mean += purity_dense(gen_haar(L, 100 + s), half);
  mean /= samples;
  const double want = 64.0 / 1025.0;
  EXPECT_NEAR(mean, want, 0.1 * want);
}

TEST(RandomMps, ProductAtBondOne) {
  auto mps = gen_random_mps(6, 1, 3);
  MpsPurityBackend backend(mps);
  std::mt19937_64 rng(1);
  for (int t = 0; t < 16; ++t) EXPECT_NEAR(backend.purity(Partition(6, rng())), 1.0, 1e-12);
}

TEST(RandomMps, HalfCutEntropyBoundedByBondDimension) {
  for (int phi : {2, 3}) {
    auto mps = gen_random_mps(10, phi, 7);
    MpsPurityBackend backend(mps);
    Partition half(10, 0);
    for (int i = 0; i < 5; ++i) half.set(i, true);
    const double s2 = -std::log(backend.purity(half));
    EXPECT_LE(s2, std::log(static_cast<double>(phi)) + 1e-9);
  }
}

TEST(RandomMps, DensifiedAgreesWithLazyPurity) {
  auto mps = gen_random_mps(8, 2, 9);
  auto dense = mps_to_dense(mps);
  EXPECT_NEAR(dense.amps.norm(), 1.0, 1e-12);
  MpsPurityBackend lazy(mps);
  std::mt19937_64 rng(4);
  for (int t = 0; t < 32; ++t) {
    Partition p(8, rng());
    EXPECT_NEAR(lazy.purity(p), purity_dense(dense, p), 1e-10);
  }
}

TEST(Tfim, TwoSiteIsingSpectrum) {
  auto h = build_tfim(2, 1.0, 0.0, 0.0, 0.0, 0);
  auto es = dense_eigh(h);
  EXPECT_NEAR(es.values(0), -1.0, 1e-12);
  EXPECT_NEAR(es.values(1), -1.0, 1e-12);
  EXPECT_NEAR(es.values(2), 1.0, 1e-12);
  EXPECT_NEAR(es.values(3), 1.0, 1e-12);
}

TEST(Tfim, RealSymmetricByConstruction) {
  auto h = build_tfim(6, 0.632, 0.902, 0.0, 5.0, 11);
  EXPECT_LT((h - h.transpose()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Tfim, CleanCriticalSpectrumClosedUnderSign) {
  // J = g = -1, h = W = 0: conjugation by (prod sz)(prod_odd sx) flips H.
  auto h = build_tfim(6, -1.0, -1.0, 0.0, 0.0, 0);
  auto es = dense_eigh(h);
  Eigen::VectorXd sorted = es.values;
  for (Eigen::Index i = 0; i < sorted.size(); ++i)
    EXPECT_NEAR(sorted(i), -sorted(sorted.size() - 1 - i), 1e-10);
}

TEST(Tfim, DisorderDrawsDependOnSeed) {
  auto a = build_tfim(5, 0.632, 0.902, 0.0, 5.0, 1);
  auto b = build_tfim(5, 0.632, 0.902, 0.0, 5.0, 2);
  EXPECT_GT((a - b).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Eigenstate, GroundOfFerroIsingLivesInParallelSector) {
  auto h = build_tfim(2, -1.0, 0.0, 0.0, 0.0, 0);  // -sz sz
  auto [vec, energy] = eigenstate(h, EigTarget::kGround);
  EXPECT_NEAR(energy, -1.0, 1e-12);
  // support only on |00> and |11>
  EXPECT_NEAR(std::norm(vec(0)) + std::norm(vec(3)), 1.0, 1e-10);
}

TEST(Eigenstate, ResidualSmall) {
  auto h = build_tfim(8, -1.0, -1.05, 0.5, 0.0, 0);
  for (auto target : {EigTarget::kGround, EigTarget::kMidSpectrum}) {
    auto [vec, energy] = eigenstate(h, target);
    EXPECT_LT((h * vec - energy * vec).norm(), 1e-10);
  }
}

TEST(Eigenstate, MidSpectrumLandsNearZeroEnergy) {
  auto h = build_tfim(10, -1.0, -1.05, 0.5, 0.0, 0);
  auto es = dense_eigh(h);
  const double spacing = (es.values(es.values.size() - 1) - es.values(0)) / es.values.size();
  auto [vec, energy] = eigenstate(h, EigTarget::kMidSpectrum);
  (void)vec;
  EXPECT_LT(std::abs(energy - 1e-3), spacing * 2);
}

TEST(GueH, HermitianAndSeedSensitive) {
  auto a = build_gue_h(6, 1);
  auto b = build_gue_h(6, 2);
  EXPECT_LT((a - a.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_GT((a - b).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(GueH, SpectralWidthGrowsWithSize) {
  auto width = [](int L) {
    double acc = 0;
    for (int s = 0; s < 10; ++s) {
      auto es = dense_eigh(build_gue_h(L, 100 + s));
      acc += std::sqrt(es.values.array().square().mean());
    }
    return acc / 10;
  };
  EXPECT_GT(width(8), width(4));
}

TEST(Syk, HermitianAndTraceless) {
  auto h = build_syk(5, 3);
  EXPECT_LT((h - h.adjoint()).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT(std::abs(h.trace()), 1e-10);
}

TEST(Syk, MajoranaAnticommutators) {
  auto chi = majorana_operators(3);
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(8, 8);
  for (size_t i = 0; i < chi.size(); ++i)
    for (size_t j = i; j < chi.size(); ++j) {
      Eigen::MatrixXcd anti = chi[i] * chi[j] + chi[j] * chi[i];
      if (i == j)
        EXPECT_LT((anti - id).cwiseAbs().maxCoeff(), 1e-12);
      else
        EXPECT_LT(anti.cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Motzkin, TwoSiteColorlessState) {
  // Paths of length 2: flat-flat and up-down.
  auto st = gen_motzkin(2, 1);
  ASSERT_EQ(st.dims, (std::vector<int>{3, 3}));
  const double a = 1 / std::sqrt(2.0);
  EXPECT_NEAR(std::abs(st.amps(0 * 3 + 0)), a, 1e-12);  // |ff>
  EXPECT_NEAR(std::abs(st.amps(1 * 3 + 2)), a, 1e-12);  // |ud>
  EXPECT_NEAR(st.amps.norm(), 1.0, 1e-12);
}

TEST(Motzkin, PathCountsMatchMotzkinNumbers) {
  EXPECT_EQ(motzkin_path_count(2, 1), 2);
  EXPECT_EQ(motzkin_path_count(4, 1), 9);
  EXPECT_EQ(motzkin_path_count(5, 1), 21);
}

TEST(Fredkin, TwoSiteIsSingleConfiguration) {
  auto st = gen_fredkin(2);
  ASSERT_EQ(st.dims, (std::vector<int>{2, 2}));
  EXPECT_NEAR(std::abs(st.amps(0 * 2 + 1)), 1.0, 1e-12);  // |ud>
  // single basis state: every purity is 1
  for (std::uint64_t bits = 0; bits < 4; ++bits)
    EXPECT_NEAR(purity_dense(st, Partition(2, bits)), 1.0, 1e-12);
}

TEST(Fredkin, OddLengthRejected) { EXPECT_THROW(gen_fredkin(5), std::invalid_argument); }

TEST(Fredkin, SixSiteStateNormalizedAndSymmetric) {
  auto st = gen_fredkin(6);
  EXPECT_NEAR(st.amps.norm(), 1.0, 1e-12);
  std::mt19937_64 rng(2);
  for (int t = 0; t < 8; ++t) {
    Partition p(6, rng());
    EXPECT_NEAR(purity_dense(st, p), purity_dense(st, p.complement()), 1e-12);
  }
}

TEST(Product, AllPuritiesOne) {
  auto st = gen_product(4);
  for (std::uint64_t bits = 0; bits < 16; ++bits)
    EXPECT_DOUBLE_EQ(purity_dense(st, Partition(4, bits)), 1.0);
}

TEST(GenerateState, DispatchesFamilies) {
  ModelSpec spec;
  spec.family = "fredkin";
  spec.L = 4;
  auto g = generate_state(spec);
  ASSERT_TRUE(g.dense.has_value());
  EXPECT_EQ(g.dense->n_sites(), 4);

  spec.family = "random_mps";
  spec.L = 6;
  spec.params["phi"] = 2;
  auto m = generate_state(spec);
  ASSERT_TRUE(m.mps.has_value());

  spec.family = "syk";
  spec.L = 4;
  spec.target = "ground";
  auto s = generate_state(spec);
  ASSERT_TRUE(s.fermionic);
  EXPECT_NO_THROW(make_purity_backend(s));

  spec.family = "nope";
  EXPECT_THROW(generate_state(spec), std::invalid_argument);
}
