#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <lapacke.h>

namespace eftci {

struct EighResult {
  Eigen::VectorXd values;    // ascending
  Eigen::MatrixXcd vectors;  // column i pairs with values(i)
};

/// Full dense Hermitian eigendecomposition (LAPACK dsyevd/zheevd).
inline EighResult dense_eigh(const Eigen::MatrixXd& h) {
  if (h.rows() != h.cols()) throw std::invalid_argument("dense_eigh: matrix not square");
  const lapack_int n = static_cast<lapack_int>(h.rows());
  Eigen::MatrixXd a = h;
  Eigen::VectorXd w(n);
  const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, a.data(), n, w.data());
  if (info != 0) throw std::runtime_error("dense_eigh: dsyevd failed with info " + std::to_string(info));
  EighResult r;
  r.values = std::move(w);
  r.vectors = a.cast<std::complex<double>>();
  return r;
}

inline EighResult dense_eigh(const Eigen::MatrixXcd& h) {
  if (h.rows() != h.cols()) throw std::invalid_argument("dense_eigh: matrix not square");
  const lapack_int n = static_cast<lapack_int>(h.rows());
  Eigen::MatrixXcd a = h;
  Eigen::VectorXd w(n);
  const lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'L', n,
                                         reinterpret_cast<lapack_complex_double*>(a.data()), n, w.data());
  if (info != 0) throw std::runtime_error("dense_eigh: zheevd failed with info " + std::to_string(info));
  EighResult r;
  r.values = std::move(w);
  r.vectors = std::move(a);
  return r;
}

}  // namespace eftci
