// Shared helpers for the test suites. The purity and enumeration oracles here
// are deliberately written along different code paths than the library
// (explicit reduced density matrices, per-index evaluation) so they can serve
// as independent checks.

#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "eftci/partitions.hpp"
#include "eftci/purity_oracles.hpp"
#include "eftci/tensor_train.hpp"

namespace eftci::test {

/// Reduced density matrix built entry by entry: rho_A(i,i') = sum_b psi(i,b)
/// conj(psi(i',b)). Brute force, independent of the library's Gram route.
inline Eigen::MatrixXcd brute_reduced_density(const DenseState& st, const Partition& p) {
  const int L = st.n_sites();
  std::int64_t da = 1;
  std::vector<int> a_sites, b_sites;
  for (int i = 0; i < L; ++i) {
    if (p.test(i)) {
      a_sites.push_back(i);
      da *= st.dims[static_cast<size_t>(i)];
    } else {
      b_sites.push_back(i);
    }
  }
  auto digits_of = [&](std::int64_t g) {
    std::vector<int> d(static_cast<size_t>(L));
    for (int i = L - 1; i >= 0; --i) {
      d[static_cast<size_t>(i)] = static_cast<int>(g % st.dims[static_cast<size_t>(i)]);
      g /= st.dims[static_cast<size_t>(i)];
    }
    return d;
  };
  auto sub_index = [&](const std::vector<int>& digits, const std::vector<int>& sites) {
    std::int64_t idx = 0;
    for (int s : sites) idx = idx * st.dims[static_cast<size_t>(s)] + digits[static_cast<size_t>(s)];
    return idx;
  };
  const std::int64_t total = st.total_dim();
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(da, da);
  for (std::int64_t g = 0; g < total; ++g) {
    const auto dg = digits_of(g);
    for (std::int64_t g2 = 0; g2 < total; ++g2) {
      const auto dg2 = digits_of(g2);
      if (sub_index(dg, b_sites) != sub_index(dg2, b_sites)) continue;
      rho(sub_index(dg, a_sites), sub_index(dg2, a_sites)) += st.amps(g) * std::conj(st.amps(g2));
    }
  }
  return rho / st.amps.squaredNorm();
}

inline double brute_purity(const DenseState& st, const Partition& p) {
  if (p.empty() || p.full()) return 1.0;
  Eigen::MatrixXcd rho = brute_reduced_density(st, p);
  return (rho * rho).real().trace();
}

/// One-by-one evaluation of every train entry (no prefix batching).
inline std::vector<double> dense_from_tt(const TensorTrain& tt) {
  const auto& dims = tt.dims();
  const std::int64_t total = tt.total_dim();
  std::vector<double> out(static_cast<size_t>(total));
  std::vector<int> idx(dims.size(), 0);
  for (std::int64_t g = 0; g < total; ++g) {
    out[static_cast<size_t>(g)] = tt.eval(idx);
    for (int i = static_cast<int>(dims.size()) - 1; i >= 0; --i) {
      if (++idx[static_cast<size_t>(i)] < dims[static_cast<size_t>(i)]) break;
      idx[static_cast<size_t>(i)] = 0;
    }
  }
  return out;
}

inline TensorTrain random_tt(const std::vector<int>& dims, int rank, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<TTCore<double>> cores;
  const int n = static_cast<int>(dims.size());
  int prev = 1;
  for (int l = 0; l < n; ++l) {
    const int next = (l == n - 1) ? 1 : rank;
    TTCore<double> c(prev, dims[static_cast<size_t>(l)], next);
    for (auto& x : c.data) x = u(rng);
    cores.push_back(std::move(c));
    prev = next;
  }
  return TensorTrain(dims, std::move(cores));
}

inline MultiIndex index_from_bits(std::uint64_t bits, int n) {
  MultiIndex idx(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) idx[static_cast<size_t>(i)] = static_cast<int>((bits >> (n - 1 - i)) & 1);
  return idx;
}

inline DenseState bell_times_zero() {
  DenseState st;
  st.dims = {2, 2, 2};
  st.amps = Eigen::VectorXcd::Zero(8);
  st.amps(0) = 1.0 / std::sqrt(2.0);  // |000>
  st.amps(6) = 1.0 / std::sqrt(2.0);  // |110>
  return st;
}

inline DenseState w_state() {
  DenseState st;
  st.dims = {2, 2, 2};
  st.amps = Eigen::VectorXcd::Zero(8);
  const double a = 1.0 / std::sqrt(3.0);
  st.amps(1) = a;  // |001>
  st.amps(2) = a;  // |010>
  st.amps(4) = a;  // |100>
  return st;
}

}  // namespace eftci::test
