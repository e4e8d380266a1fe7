#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "kplane/error.hpp"
#include "kplane/measures.hpp"
#include "kplane/summation.hpp"

namespace kplane {

/// Regular cell-centered grid on a box in R^d.
///
/// `origin` is the lower corner of the box; node i sits at the center of its
/// cell, origin + (i + 1/2) * spacing. Flat indices are row-major (last axis
/// fastest).
template <typename Scalar>
class RegularGrid {
 public:
  using VectorType = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  RegularGrid(VectorType origin, VectorType spacing, std::vector<Eigen::Index> shape)
      : origin_(std::move(origin)), spacing_(std::move(spacing)), shape_(std::move(shape)) {
    require(!shape_.empty(), "grid: dimension must be positive");
    require(origin_.size() == static_cast<Eigen::Index>(shape_.size()) &&
                spacing_.size() == static_cast<Eigen::Index>(shape_.size()),
            "grid: origin/spacing/shape disagree in dimension");
    require(origin_.allFinite() && spacing_.allFinite(), "grid: non-finite origin or spacing");
    require((spacing_.array() > Scalar(0)).all(), "grid: spacing must be positive");
    strides_.assign(shape_.size(), 1);
    for (std::size_t a = shape_.size(); a-- > 0;) {
      require(shape_[a] >= 1, "grid: shape entries must be positive");
      if (a + 1 < shape_.size()) strides_[a] = strides_[a + 1] * shape_[a + 1];
    }
    size_ = strides_[0] * shape_[0];
  }

  /// Grid with `n` cells per axis covering the cube [center - half_width, center + half_width]^d.
  static RegularGrid cube(const VectorType& center, Scalar half_width, Eigen::Index n) {
    const auto d = center.size();
    const Scalar h = Scalar(2) * half_width / Scalar(n);
    return RegularGrid(center.array() - half_width, VectorType::Constant(d, h),
                       std::vector<Eigen::Index>(static_cast<std::size_t>(d), n));
  }

  Eigen::Index dim() const { return origin_.size(); }
  Eigen::Index size() const { return size_; }
  const VectorType& origin() const { return origin_; }
  const VectorType& spacing() const { return spacing_; }
  const std::vector<Eigen::Index>& shape() const { return shape_; }
  const std::vector<Eigen::Index>& strides() const { return strides_; }
  Eigen::Index shape(Eigen::Index axis) const { return shape_[static_cast<std::size_t>(axis)]; }

  Scalar cell_volume() const { return spacing_.prod(); }

  VectorType upper_corner() const {
    VectorType upper = origin_;
    for (Eigen::Index a = 0; a < dim(); ++a) upper(a) += spacing_(a) * Scalar(shape(a));
    return upper;
  }
  VectorType center() const { return (origin_ + upper_corner()) / Scalar(2); }

  /// Coordinate of node `i` along `axis`.
  Scalar coordinate(Eigen::Index axis, Eigen::Index i) const {
    return origin_(axis) + (Scalar(i) + Scalar(0.5)) * spacing_(axis);
  }

  VectorType node(Eigen::Index flat) const {
    VectorType x(dim());
    for (Eigen::Index a = 0; a < dim(); ++a) {
      const auto stride = strides_[static_cast<std::size_t>(a)];
      x(a) = coordinate(a, (flat / stride) % shape(a));
    }
    return x;
  }

  bool same_layout(const RegularGrid& other) const {
    return shape_ == other.shape_ && origin_ == other.origin_ && spacing_ == other.spacing_;
  }

 private:
  VectorType origin_;
  VectorType spacing_;
  std::vector<Eigen::Index> shape_;
  std::vector<Eigen::Index> strides_;
  Eigen::Index size_ = 0;
};

/// Real-valued samples on a RegularGrid (any sign), e.g. f - g or k-plane fibers.
template <typename Scalar>
struct GridFunction {
  using VectorType = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  GridFunction(RegularGrid<Scalar> g, VectorType v) : grid(std::move(g)), values(std::move(v)) {
    require(values.size() == grid.size(), "grid function: value count does not match grid");
    require(values.allFinite(), "grid function: non-finite value");
  }

  static GridFunction zero(RegularGrid<Scalar> g) {
    const auto n = g.size();
    return GridFunction(std::move(g), VectorType::Zero(n));
  }

  /// Cell-sum integral sum_i v_i * cell volume.
  Scalar integral() const { return compensated_sum(values) * grid.cell_volume(); }

  RegularGrid<Scalar> grid;
  VectorType values;
};

template <typename Scalar>
GridFunction<Scalar> operator-(const GridFunction<Scalar>& f, const GridFunction<Scalar>& g) {
  require(f.grid.same_layout(g.grid), "grid function difference: grids differ");
  return GridFunction<Scalar>(f.grid, f.values - g.values);
}

/// Nonnegative density (mass per unit volume) sampled at cell centers with
/// midpoint quadrature: cell mass = value * cell volume.
template <typename Scalar>
class GriddedDensity {
 public:
  using VectorType = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  GriddedDensity(RegularGrid<Scalar> grid, VectorType values) : function_(std::move(grid), std::move(values)) {
    require((function_.values.array() >= Scalar(0)).all(), "density: negative value");
    require(mass() > Scalar(0), "density: zero mass");
  }

  Eigen::Index dim() const { return function_.grid.dim(); }
  const RegularGrid<Scalar>& grid() const { return function_.grid; }
  const VectorType& values() const { return function_.values; }
  const GridFunction<Scalar>& function() const { return function_; }
  operator const GridFunction<Scalar>&() const { return function_; }

  Scalar mass() const { return function_.integral(); }

  /// Cell masses placed at cell centers; empty cells are dropped.
  DiscreteMeasure<Scalar> to_measure() const {
    const auto& g = function_.grid;
    typename DiscreteMeasure<Scalar>::PointsType points(g.dim(), g.size());
    for (Eigen::Index i = 0; i < g.size(); ++i) points.col(i) = g.node(i);
    return DiscreteMeasure<Scalar>(std::move(points), function_.values * g.cell_volume());
  }

 private:
  GridFunction<Scalar> function_;
};

/// Samples `fn(x)` at every node of `grid`.
template <typename Scalar, typename Fn>
GridFunction<Scalar> sample_on_grid(const RegularGrid<Scalar>& grid, Fn&& fn) {
  typename GridFunction<Scalar>::VectorType values(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) values(i) = fn(grid.node(i));
  return GridFunction<Scalar>(grid, std::move(values));
}

}  // namespace kplane
