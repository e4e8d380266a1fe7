#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <utility>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "kplane/error.hpp"
#include "kplane/random.hpp"

namespace kplane {

/// An element alpha of the Grassmannian G(k, d), stored through an
/// orthonormal frame of its orthogonal complement.
///
/// `frame()` is (d - k) x d with orthonormal rows spanning alpha-perp;
/// `plane_basis()` is k x d with orthonormal rows spanning alpha itself.
/// Everything downstream acts through the projection onto alpha-perp, so the
/// choice of frame inside alpha-perp only changes fiber coordinates by an
/// isometry.
template <typename Scalar>
class Subspace {
 public:
  using MatrixType = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using VectorType = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  static constexpr double kOrthonormalityTolerance = 1e-10;

  explicit Subspace(MatrixType frame) : frame_(std::move(frame)) {
    const auto m = frame_.rows();
    const auto d = frame_.cols();
    require(d >= 2 && m >= 1 && m <= d - 1, "subspace: need 1 <= k <= d - 1");
    require(frame_.allFinite(), "subspace: non-finite frame");
    const Scalar defect = (frame_ * frame_.transpose() - MatrixType::Identity(m, m)).cwiseAbs().maxCoeff();
    require(defect <= Scalar(kOrthonormalityTolerance), "subspace: frame rows are not orthonormal");
    Eigen::HouseholderQR<MatrixType> qr(frame_.transpose());
    const MatrixType q = qr.householderQ();
    plane_basis_ = q.rightCols(d - m).transpose();
  }

  Eigen::Index dim() const { return frame_.cols(); }
  Eigen::Index codim() const { return frame_.rows(); }
  Eigen::Index plane_dim() const { return dim() - codim(); }
  const MatrixType& frame() const { return frame_; }
  const MatrixType& plane_basis() const { return plane_basis_; }

 private:
  MatrixType frame_;
  MatrixType plane_basis_;
};

using SubspaceD = Subspace<double>;

namespace detail {

/// Orthonormalizes the columns of `a` (d x m) keeping the orientation of
/// each column (positive diagonal of R); returns the rows frame m x d.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> orthonormal_rows(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& a) {
  using MatrixType = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Eigen::HouseholderQR<MatrixType> qr(a);
  MatrixType q = qr.householderQ() * MatrixType::Identity(a.rows(), a.cols());
  const MatrixType& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    if (r(j, j) < Scalar(0)) q.col(j) = -q.col(j);
  }
  return q.transpose();
}

}  // namespace detail

/// Draw from the O(d)-invariant probability measure on G(k, d): the row
/// space of an orthonormalized (d - k) x d standard Gaussian matrix.
template <typename Scalar = double>
Subspace<Scalar> haar_sample(Eigen::Index d, Eigen::Index k, std::uint64_t seed) {
  require(d >= 2 && k >= 1 && k <= d - 1, "haar_sample: need 1 <= k <= d - 1");
  Rng rng(seed);
  std::normal_distribution<Scalar> normal;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> g(d, d - k);
  for (Eigen::Index j = 0; j < g.cols(); ++j)
    for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, j) = normal(rng);
  return Subspace<Scalar>(detail::orthonormal_rows<Scalar>(g));
}

/// Coordinates of the orthogonal projection of x onto alpha-perp in the frame basis.
template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> project(const Subspace<Scalar>& alpha, const Eigen::MatrixBase<Derived>& x) {
  require(x.size() == alpha.dim(), "project: dimension mismatch");
  return alpha.frame() * x;
}

/// Random local move: rotate the frame by exp(step * A) for a random
/// antisymmetric A with |A|_F = sqrt(2), then re-orthonormalize.
template <typename Scalar>
Subspace<Scalar> perturb(const Subspace<Scalar>& alpha, Scalar step, std::uint64_t seed) {
  using MatrixType = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  require(step > Scalar(0) && std::isfinite(step), "perturb: step must be positive");
  const auto d = alpha.dim();
  Rng rng(seed);
  std::normal_distribution<Scalar> normal;
  MatrixType g(d, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < d; ++i) g(i, j) = normal(rng);
  MatrixType generator = (g - g.transpose()) / Scalar(2);
  const Scalar norm = generator.norm();
  if (norm > Scalar(0)) generator *= step * std::sqrt(Scalar(2)) / norm;
  const MatrixType rotation = generator.exp();
  const MatrixType rotated = alpha.frame() * rotation.transpose();
  return Subspace<Scalar>(detail::orthonormal_rows<Scalar>(rotated.transpose()));
}

/// A k-plane alpha with alpha contained in v-perp, i.e. v lies in alpha-perp.
/// The first frame row is v / |v|, so |project(alpha, v)| = |v|.
template <typename Scalar, typename Derived>
Subspace<Scalar> aligned_subspace(const Eigen::MatrixBase<Derived>& v, Eigen::Index k) {
  using MatrixType = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const auto d = v.size();
  require(d >= 2 && k >= 1 && k <= d - 1, "aligned_subspace: need 1 <= k <= d - 1");
  const Scalar norm = v.norm();
  require(norm > Scalar(0) && std::isfinite(norm), "aligned_subspace: v must be nonzero");
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> unit = v / norm;
  const MatrixType column = unit;
  Eigen::HouseholderQR<MatrixType> qr(column);
  const MatrixType q = qr.householderQ();
  MatrixType frame(d - k, d);
  frame.row(0) = unit.transpose();
  for (Eigen::Index r = 1; r < d - k; ++r) frame.row(r) = q.col(r).transpose();
  return Subspace<Scalar>(std::move(frame));
}

/// Principal angles between alpha-perp and beta-perp, ascending.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> principal_angles(const Subspace<Scalar>& alpha, const Subspace<Scalar>& beta) {
  require(alpha.dim() == beta.dim() && alpha.codim() == beta.codim(), "principal_angles: incompatible subspaces");
  const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> overlap = alpha.frame() * beta.frame().transpose();
  Eigen::JacobiSVD<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> svd(overlap);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> angles = svd.singularValues();
  for (Eigen::Index i = 0; i < angles.size(); ++i) angles(i) = std::acos(std::clamp(angles(i), Scalar(0), Scalar(1)));
  std::sort(angles.data(), angles.data() + angles.size());
  return angles;
}

/// Geodesic distance sqrt(sum theta_i^2) on the Grassmannian.
template <typename Scalar>
Scalar grassmann_distance(const Subspace<Scalar>& alpha, const Subspace<Scalar>& beta) {
  return principal_angles(alpha, beta).norm();
}

}  // namespace kplane
