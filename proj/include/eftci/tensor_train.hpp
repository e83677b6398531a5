#pragma once

#include <Eigen/Dense>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace eftci {

template <class Scalar>
using RowMat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class Scalar>
using ColMat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// One 3-index core with shape (left, dim, right). Data is stored flat with
/// the right index fastest, so the two standard unfoldings are plain maps:
///   left_unfold  : (left*dim) x right
///   right_unfold : left x (dim*right)
template <class Scalar>
struct TTCore {
  Eigen::Index left = 1, dim = 1, right = 1;
  std::vector<Scalar> data;

  TTCore() = default;
  TTCore(Eigen::Index l, Eigen::Index d, Eigen::Index r)
      : left(l), dim(d), right(r), data(static_cast<size_t>(l * d * r), Scalar(0)) {
    if (l < 1 || d < 1 || r < 1) throw std::invalid_argument("TTCore: non-positive extent");
  }

  Scalar& at(Eigen::Index i, Eigen::Index s, Eigen::Index j) {
    return data[static_cast<size_t>((i * dim + s) * right + j)];
  }
  Scalar at(Eigen::Index i, Eigen::Index s, Eigen::Index j) const {
    return data[static_cast<size_t>((i * dim + s) * right + j)];
  }

  Eigen::Map<const RowMat<Scalar>> left_unfold() const {
    return {data.data(), left * dim, right};
  }
  Eigen::Map<RowMat<Scalar>> left_unfold() {
    return {data.data(), left * dim, right};
  }
  Eigen::Map<const RowMat<Scalar>> right_unfold() const {
    return {data.data(), left, dim * right};
  }
  Eigen::Map<RowMat<Scalar>> right_unfold() {
    return {data.data(), left, dim * right};
  }
  /// The (left x right) matrix selected by one physical index.
  Eigen::Map<const RowMat<Scalar>, 0, Eigen::OuterStride<>> slice(Eigen::Index s) const {
    return {data.data() + s * right, left, right, Eigen::OuterStride<>(dim * right)};
  }
};

/// Tensor train (MPS) over arbitrary per-site dimensions. Boundary ranks are
/// one; adjacent core ranks must match; entries must be finite.
template <class Scalar>
class TensorTrainT {
 public:
  TensorTrainT() = default;
  TensorTrainT(std::vector<int> dims, std::vector<TTCore<Scalar>> cores)
      : dims_(std::move(dims)), cores_(std::move(cores)) {
    validate();
  }

  static TensorTrainT ones(const std::vector<int>& dims) {
    std::vector<TTCore<Scalar>> cores;
    cores.reserve(dims.size());
    for (int d : dims) {
      TTCore<Scalar> c(1, d, 1);
      for (int s = 0; s < d; ++s) c.at(0, s, 0) = Scalar(1);
      cores.push_back(std::move(c));
    }
    return TensorTrainT(dims, std::move(cores));
  }

  /// Builds an exact-or-truncated train from a dense big-endian value array
  /// (site 0 slowest). Exact when tol = 0.
  static TensorTrainT from_dense(const std::vector<Scalar>& values, const std::vector<int>& dims,
                                 double tol = 0.0,
                                 int max_rank = std::numeric_limits<int>::max());

  int n_sites() const { return static_cast<int>(dims_.size()); }
  const std::vector<int>& dims() const { return dims_; }
  const TTCore<Scalar>& core(int l) const { return cores_[static_cast<size_t>(l)]; }
  TTCore<Scalar>& core(int l) { return cores_[static_cast<size_t>(l)]; }

  /// r_0 .. r_N (length N+1, boundary entries 1).
  std::vector<int> ranks() const {
    std::vector<int> r;
    r.reserve(cores_.size() + 1);
    r.push_back(1);
    for (const auto& c : cores_) r.push_back(static_cast<int>(c.right));
    return r;
  }
  int max_rank() const {
    int m = 1;
    for (const auto& c : cores_) m = std::max(m, static_cast<int>(c.right));
    return m;
  }
  /// Mean rank over the interior bonds r_1..r_{N-1}; 1 for a single site.
  double avg_rank() const {
    if (cores_.size() < 2) return 1.0;
    double s = 0;
    for (size_t l = 0; l + 1 < cores_.size(); ++l) s += static_cast<double>(cores_[l].right);
    return s / static_cast<double>(cores_.size() - 1);
  }

  Scalar eval(const std::vector<int>& idx) const {
    if (static_cast<int>(idx.size()) != n_sites())
      throw std::invalid_argument("tt eval: index has " + std::to_string(idx.size()) +
                                  " components, expected " + std::to_string(n_sites()));
    for (int l = 0; l < n_sites(); ++l)
      if (idx[static_cast<size_t>(l)] < 0 || idx[static_cast<size_t>(l)] >= dims_[static_cast<size_t>(l)])
        throw std::invalid_argument("tt eval: index out of range at position " + std::to_string(l));
    Eigen::Matrix<Scalar, 1, Eigen::Dynamic> v = cores_[0].slice(idx[0]);
    for (int l = 1; l < n_sites(); ++l) v = v * cores_[static_cast<size_t>(l)].slice(idx[static_cast<size_t>(l)]);
    return v(0);
  }

  std::int64_t total_dim() const {
    std::int64_t p = 1;
    for (int d : dims_) p *= d;
    return p;
  }

  void validate() const {
    if (dims_.size() != cores_.size()) throw std::invalid_argument("tt: dims/cores size mismatch");
    Eigen::Index prev = 1;
    for (size_t l = 0; l < cores_.size(); ++l) {
      const auto& c = cores_[l];
      if (c.dim != dims_[l]) throw std::invalid_argument("tt: core dim mismatch at site " + std::to_string(l));
      if (c.left != prev) throw std::invalid_argument("tt: bond rank mismatch at site " + std::to_string(l));
      prev = c.right;
      for (const Scalar& x : c.data)
        if (!std::isfinite(std::abs(x))) throw std::invalid_argument("tt: non-finite core entry");
    }
    if (!cores_.empty() && prev != 1) throw std::invalid_argument("tt: last rank must be 1");
  }

 private:
  std::vector<int> dims_;
  std::vector<TTCore<Scalar>> cores_;
};

using TensorTrain = TensorTrainT<double>;
using ComplexTensorTrain = TensorTrainT<std::complex<double>>;

namespace detail {

/// Rank kept by the cumulative-weight rule: discard the trailing singular
/// values whose total squared weight stays within tol^2 of the whole.
inline Eigen::Index truncation_rank(const Eigen::VectorXd& sv, double tol, int max_rank) {
  const Eigen::Index n = sv.size();
  double total = sv.squaredNorm();
  if (total <= 0.0) return 1;
  double budget = tol * tol * total;
  double tail = 0.0;
  Eigen::Index keep = n;
  for (Eigen::Index i = n - 1; i >= 1; --i) {
    tail += sv(i) * sv(i);
    if (tail <= budget) keep = i;
    else break;
  }
  keep = std::min<Eigen::Index>(keep, max_rank);
  return std::max<Eigen::Index>(keep, 1);
}

template <class Scalar>
Eigen::BDCSVD<ColMat<Scalar>> svd_of(const ColMat<Scalar>& m) {
  return Eigen::BDCSVD<ColMat<Scalar>>(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
}

}  // namespace detail

template <class Scalar>
TensorTrainT<Scalar> TensorTrainT<Scalar>::from_dense(const std::vector<Scalar>& values,
                                                      const std::vector<int>& dims, double tol,
                                                      int max_rank) {
  if (dims.empty()) throw std::invalid_argument("from_dense: empty dims");
  std::int64_t total = 1;
  for (int d : dims) {
    if (d < 1) throw std::invalid_argument("from_dense: dims must be >= 1");
    total *= d;
  }
  if (static_cast<std::int64_t>(values.size()) != total)
    throw std::invalid_argument("from_dense: value count " + std::to_string(values.size()) +
                                " does not match dims product " + std::to_string(total));

  const int N = static_cast<int>(dims.size());
  std::vector<TTCore<Scalar>> cores;
  cores.reserve(static_cast<size_t>(N));

  // Row-major work matrix; reshaping (r, d*rest) -> (r*d, rest) is free.
  RowMat<Scalar> work = Eigen::Map<const RowMat<Scalar>>(values.data(), 1, total);
  Eigen::Index r = 1;
  std::int64_t rest = total;
  for (int l = 0; l + 1 < N; ++l) {
    const Eigen::Index d = dims[static_cast<size_t>(l)];
    rest /= d;
    ColMat<Scalar> m = Eigen::Map<const RowMat<Scalar>>(work.data(), r * d, rest);
    auto svd = detail::svd_of<Scalar>(m);
    const Eigen::Index k = detail::truncation_rank(svd.singularValues(), tol, max_rank);
    TTCore<Scalar> core(r, d, k);
    core.left_unfold() = svd.matrixU().leftCols(k);
    cores.push_back(std::move(core));
    ColMat<Scalar> next = svd.singularValues().head(k).template cast<Scalar>().asDiagonal() *
                          svd.matrixV().leftCols(k).adjoint();
    work = RowMat<Scalar>(next);
    r = k;
  }
  TTCore<Scalar> last(r, dims[static_cast<size_t>(N - 1)], 1);
  last.left_unfold() = Eigen::Map<const RowMat<Scalar>>(work.data(), r * dims[static_cast<size_t>(N - 1)], 1);
  cores.push_back(std::move(last));
  return TensorTrainT<Scalar>(dims, std::move(cores));
}

/// Sum over all indices of a(idx)*b(idx) via transfer contraction.
/// Requires identical dims; agrees with brute-force enumeration.
inline double inner(const TensorTrain& a, const TensorTrain& b) {
  if (a.dims() != b.dims()) throw std::invalid_argument("inner: dims mismatch");
  ColMat<double> m = ColMat<double>::Ones(1, 1);
  for (int l = 0; l < a.n_sites(); ++l) {
    const auto& ca = a.core(l);
    const auto& cb = b.core(l);
    ColMat<double> next = ColMat<double>::Zero(ca.right, cb.right);
    for (int s = 0; s < a.dims()[static_cast<size_t>(l)]; ++s)
      next.noalias() += ca.slice(s).transpose() * m * cb.slice(s);
    m = std::move(next);
  }
  return m(0, 0);
}

/// Squared 2-norm, sum over |a(idx)|^2 (conjugating transfer).
template <class Scalar>
double norm2_squared(const TensorTrainT<Scalar>& a) {
  ColMat<Scalar> m = ColMat<Scalar>::Ones(1, 1);
  for (int l = 0; l < a.n_sites(); ++l) {
    const auto& c = a.core(l);
    ColMat<Scalar> next = ColMat<Scalar>::Zero(c.right, c.right);
    for (int s = 0; s < a.dims()[static_cast<size_t>(l)]; ++s)
      next.noalias() += c.slice(s).adjoint() * m * c.slice(s);
    m = std::move(next);
  }
  return std::real(std::complex<double>(m(0, 0)));
}

/// Left-to-right QR orthogonalization in place. Afterwards every core except
/// the last has orthonormal left unfolding and the full norm sits in the last
/// core. Ranks never increase.
template <class Scalar>
void left_orthogonalize(TensorTrainT<Scalar>& tt) {
  const int N = tt.n_sites();
  for (int l = 0; l + 1 < N; ++l) {
    auto& c = tt.core(l);
    ColMat<Scalar> m = c.left_unfold();
    Eigen::HouseholderQR<ColMat<Scalar>> qr(m);
    const Eigen::Index k = std::min(m.rows(), m.cols());
    ColMat<Scalar> q = qr.householderQ() * ColMat<Scalar>::Identity(m.rows(), k);
    ColMat<Scalar> r = qr.matrixQR().topRows(k).template triangularView<Eigen::Upper>();
    TTCore<Scalar> nc(c.left, c.dim, k);
    nc.left_unfold() = q;
    auto& cn = tt.core(l + 1);
    ColMat<Scalar> merged = r * cn.right_unfold();
    TTCore<Scalar> nn(k, cn.dim, cn.right);
    nn.right_unfold() = merged;
    tt.core(l) = std::move(nc);
    tt.core(l + 1) = std::move(nn);
  }
}

/// TT rounding: left-to-right orthogonalization, then right-to-left SVD
/// truncation at the given tolerance and rank cap. The relative 2-norm error
/// is at most tol*sqrt(N); ranks never increase at any bond.
template <class Scalar>
TensorTrainT<Scalar> compress_svd(TensorTrainT<Scalar> tt, double tol,
                                  int max_rank = std::numeric_limits<int>::max()) {
  if (tol < 0) throw std::invalid_argument("compress_svd: tol must be >= 0");
  if (max_rank < 1) throw std::invalid_argument("compress_svd: max_rank must be >= 1");
  const int N = tt.n_sites();
  if (N < 2) return tt;
  left_orthogonalize(tt);
  for (int l = N - 1; l >= 1; --l) {
    auto& c = tt.core(l);
    ColMat<Scalar> m = c.right_unfold();
    auto svd = detail::svd_of<Scalar>(m);
    Eigen::Index k = detail::truncation_rank(svd.singularValues(), tol, max_rank);
    k = std::min(k, static_cast<Eigen::Index>(c.left));
    TTCore<Scalar> nc(k, c.dim, c.right);
    nc.right_unfold() = svd.matrixV().leftCols(k).adjoint();
    ColMat<Scalar> carry = svd.matrixU().leftCols(k) *
                           svd.singularValues().head(k).template cast<Scalar>().asDiagonal();
    auto& cp = tt.core(l - 1);
    ColMat<Scalar> merged = cp.left_unfold() * carry;
    TTCore<Scalar> np(cp.left, cp.dim, k);
    np.left_unfold() = merged;
    tt.core(l) = std::move(nc);
    tt.core(l - 1) = std::move(np);
  }
  return tt;
}

struct Spectrum {
  std::vector<double> values;  // descending, non-negative
};

/// Schmidt spectrum of the unit-normalized train across the bond after site
/// floor(N/2), computed through canonical forms (no dense reshape). The
/// squared values sum to one; entries below 1e-14 of the leading value are
/// reported as zero.
inline Spectrum halfcut_spectrum(TensorTrain tt) {
  const int N = tt.n_sites();
  if (N < 2) throw std::invalid_argument("halfcut_spectrum: need at least 2 sites");
  left_orthogonalize(tt);
  // After left orthogonalization the norm is the last core's Frobenius norm.
  double nrm = std::sqrt(tt.core(N - 1).left_unfold().squaredNorm());
  if (!(nrm > 0)) throw std::invalid_argument("halfcut_spectrum: zero-norm tensor train");
  {
    auto& c = tt.core(N - 1);
    for (auto& x : c.data) x /= nrm;
  }
  const int cut = N / 2;  // spectrum across bond `cut` (1-based), i.e. before core index `cut`
  Eigen::VectorXd sv;
  for (int l = N - 1; l >= cut; --l) {
    auto& c = tt.core(l);
    ColMat<double> m = c.right_unfold();
    auto svd = detail::svd_of<double>(m);
    const Eigen::Index k = std::min(m.rows(), m.cols());
    sv = svd.singularValues().head(k);
    if (l == cut) break;
    TTCore<double> nc(k, c.dim, c.right);
    nc.right_unfold() = svd.matrixV().leftCols(k).adjoint();
    ColMat<double> carry = svd.matrixU().leftCols(k) * sv.asDiagonal();
    auto& cp = tt.core(l - 1);
    ColMat<double> merged = cp.left_unfold() * carry;
    TTCore<double> np(cp.left, cp.dim, k);
    np.left_unfold() = merged;
    tt.core(l) = std::move(nc);
    tt.core(l - 1) = std::move(np);
  }
  Spectrum out;
  out.values.resize(static_cast<size_t>(sv.size()));
  const double floor = 1e-14 * (sv.size() > 0 ? sv(0) : 0.0);
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    out.values[static_cast<size_t>(i)] = sv(i) > floor ? sv(i) : 0.0;
  return out;
}

/// All values in big-endian order, batched so the shared prefixes are reused.
/// Guarded to 2^24 entries.
template <class Scalar>
std::vector<Scalar> enumerate_dense(const TensorTrainT<Scalar>& tt) {
  const std::int64_t total = tt.total_dim();
  if (total > (1ll << 24)) throw std::invalid_argument("enumerate_dense: tensor too large");
  // prefix[i] is a row vector of length r after contracting the first sites.
  ColMat<Scalar> prefix = ColMat<Scalar>::Ones(1, 1);
  for (int l = 0; l < tt.n_sites(); ++l) {
    const auto& c = tt.core(l);
    const int d = tt.dims()[static_cast<size_t>(l)];
    ColMat<Scalar> next(prefix.rows() * d, c.right);
    for (int s = 0; s < d; ++s)
      next.block(static_cast<Eigen::Index>(s) * prefix.rows(), 0, prefix.rows(), c.right).noalias() =
          prefix * c.slice(s);
    // Row order must stay big-endian: row index = old_row * d + s, so reorder.
    ColMat<Scalar> ordered(next.rows(), next.cols());
    for (Eigen::Index row = 0; row < prefix.rows(); ++row)
      for (int s = 0; s < d; ++s)
        ordered.row(row * d + s) = next.row(static_cast<Eigen::Index>(s) * prefix.rows() + row);
    prefix = std::move(ordered);
  }
  std::vector<Scalar> out(static_cast<size_t>(total));
  for (std::int64_t i = 0; i < total; ++i) out[static_cast<size_t>(i)] = prefix(i, 0);
  return out;
}

}  // namespace eftci
