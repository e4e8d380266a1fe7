#pragma once

#include <cmath>
#include <string>
#include <utility>

#include <Eigen/Core>

#include "kplane/error.hpp"
#include "kplane/summation.hpp"

namespace kplane {

/// Finite positive measure sum_i w_i delta_{x_i} on R^d.
///
/// Atoms are stored as the columns of a dim x n matrix. Atoms with weight
/// exactly zero are dropped on construction; the remaining weights must be
/// positive, finite, and have positive total.
template <typename Scalar>
class DiscreteMeasure {
 public:
  using VectorType = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using PointsType = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  DiscreteMeasure(PointsType points, VectorType weights) {
    require(points.rows() >= 1, "measure: dimension must be positive");
    require(points.cols() == weights.size(), "measure: points and weights disagree in count");
    require(points.allFinite(), "measure: non-finite coordinate");
    require(weights.allFinite(), "measure: non-finite weight");
    require((weights.array() >= Scalar(0)).all(), "measure: negative weight");
    const Eigen::Index kept = (weights.array() > Scalar(0)).count();
    require(kept >= 1, "measure: no atom with positive weight");
    if (kept == weights.size()) {
      points_ = std::move(points);
      weights_ = std::move(weights);
    } else {
      points_.resize(points.rows(), kept);
      weights_.resize(kept);
      Eigen::Index j = 0;
      for (Eigen::Index i = 0; i < weights.size(); ++i) {
        if (weights(i) > Scalar(0)) {
          points_.col(j) = points.col(i);
          weights_(j) = weights(i);
          ++j;
        }
      }
    }
  }

  static DiscreteMeasure dirac(const VectorType& x, Scalar mass = Scalar(1)) {
    return DiscreteMeasure(PointsType(x), VectorType::Constant(1, mass));
  }

  /// n atoms with equal weight mass / n.
  static DiscreteMeasure uniform(PointsType points, Scalar mass = Scalar(1)) {
    const auto n = points.cols();
    return DiscreteMeasure(std::move(points), VectorType::Constant(n, mass / Scalar(n)));
  }

  Eigen::Index dim() const { return points_.rows(); }
  Eigen::Index size() const { return points_.cols(); }
  const PointsType& points() const { return points_; }
  const VectorType& weights() const { return weights_; }
  auto point(Eigen::Index i) const { return points_.col(i); }
  Scalar weight(Eigen::Index i) const { return weights_(i); }

  /// Bitwise equality of atoms and weights (same order).
  bool identical(const DiscreteMeasure& other) const {
    return dim() == other.dim() && size() == other.size() && points_ == other.points_ &&
           weights_ == other.weights_;
  }

 private:
  PointsType points_;
  VectorType weights_;
};

using Measure = DiscreteMeasure<double>;

template <typename Scalar>
Scalar total_mass(const DiscreteMeasure<Scalar>& mu) {
  return compensated_sum(mu.weights());
}

template <typename Scalar>
typename DiscreteMeasure<Scalar>::VectorType barycenter(const DiscreteMeasure<Scalar>& mu) {
  CompensatedVectorSum<Scalar> first(mu.dim());
  for (Eigen::Index i = 0; i < mu.size(); ++i) first.add(mu.weight(i) * mu.point(i));
  return first.value() / total_mass(mu);
}

/// (1/M) sum_i w_i |x_i - m|^p.
template <typename Scalar>
Scalar centered_moment(const DiscreteMeasure<Scalar>& mu, Scalar p) {
  require(p >= Scalar(0), "centered_moment: order must be nonnegative");
  const auto m = barycenter(mu);
  CompensatedSum<Scalar> acc;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    const Scalar r2 = (mu.point(i) - m).squaredNorm();
    Scalar term;
    if (p == Scalar(2)) {
      term = r2;
    } else if (p == Scalar(0)) {
      term = Scalar(1);
    } else {
      term = std::pow(std::sqrt(r2), p);
    }
    acc.add(mu.weight(i) * term);
  }
  return acc.value() / total_mass(mu);
}

/// Unnormalized second-moment matrix sum_i w_i x_i x_i^T about the origin.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> moment_matrix(const DiscreteMeasure<Scalar>& mu) {
  const auto d = mu.dim();
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(d, d);
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = r; c < d; ++c) {
      CompensatedSum<Scalar> acc;
      for (Eigen::Index i = 0; i < mu.size(); ++i) acc.add(mu.weight(i) * mu.points()(r, i) * mu.points()(c, i));
      out(r, c) = acc.value();
      out(c, r) = out(r, c);
    }
  }
  return out;
}

/// Covariance (1/M) sum_i w_i (x_i - m)(x_i - m)^T.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> covariance(const DiscreteMeasure<Scalar>& mu) {
  const auto m = barycenter(mu);
  const typename DiscreteMeasure<Scalar>::PointsType centered = mu.points().colwise() - m;
  return moment_matrix(DiscreteMeasure<Scalar>(centered, mu.weights())) / total_mass(mu);
}

/// Shift by a: atoms move x -> x - a, so that the transform picks up e^{i a.xi}.
template <typename Scalar, typename Derived>
DiscreteMeasure<Scalar> shift(const DiscreteMeasure<Scalar>& mu, const Eigen::MatrixBase<Derived>& a) {
  require(a.size() == mu.dim(), "shift: dimension mismatch");
  typename DiscreteMeasure<Scalar>::PointsType moved = mu.points().colwise() - a;
  return DiscreteMeasure<Scalar>(std::move(moved), mu.weights());
}

template <typename Scalar>
DiscreteMeasure<Scalar> scale_mass(const DiscreteMeasure<Scalar>& mu, Scalar factor) {
  require(factor > Scalar(0) && std::isfinite(factor), "scale_mass: factor must be positive");
  return DiscreteMeasure<Scalar>(mu.points(), mu.weights() * factor);
}

/// mu / M_mu.
template <typename Scalar>
DiscreteMeasure<Scalar> normalize(const DiscreteMeasure<Scalar>& mu) {
  return DiscreteMeasure<Scalar>(mu.points(), mu.weights() / total_mass(mu));
}

/// mu = mass * (centered shifted back by barycenter).
template <typename Scalar>
struct CenteredDecomposition {
  DiscreteMeasure<Scalar> centered;
  typename DiscreteMeasure<Scalar>::VectorType barycenter;
  Scalar mass;
};

template <typename Scalar>
CenteredDecomposition<Scalar> center_normalize(const DiscreteMeasure<Scalar>& mu) {
  const Scalar mass = total_mass(mu);
  require(mass > Scalar(0), "center_normalize: zero mass");
  auto m = barycenter(mu);
  typename DiscreteMeasure<Scalar>::PointsType centered = mu.points().colwise() - m;
  return {DiscreteMeasure<Scalar>(std::move(centered), mu.weights() / mass), std::move(m), mass};
}

template <typename Scalar>
DiscreteMeasure<Scalar> recompose(const CenteredDecomposition<Scalar>& dec) {
  typename DiscreteMeasure<Scalar>::PointsType points = dec.centered.points().colwise() + dec.barycenter;
  return DiscreteMeasure<Scalar>(std::move(points), dec.centered.weights() * dec.mass);
}

}  // namespace kplane
