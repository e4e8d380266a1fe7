#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "kplane/grassmann.hpp"
#include "kplane/grid.hpp"
#include "kplane/measures.hpp"

namespace kplane {

/// P_alpha mu: law of the alpha-perp frame coordinates of X ~ mu.
template <typename Scalar>
DiscreteMeasure<Scalar> pushforward(const Subspace<Scalar>& alpha, const DiscreteMeasure<Scalar>& mu) {
  require(mu.dim() == alpha.dim(), "pushforward: dimension mismatch");
  typename DiscreteMeasure<Scalar>::PointsType projected = alpha.frame() * mu.points();
  return DiscreteMeasure<Scalar>(std::move(projected), mu.weights());
}

enum class Interpolation { Linear, CubicBSpline };

/// Continuous extension of a GridFunction by tensor-product interpolation,
/// with the samples extended by zero outside the grid (compact support).
/// Cubic B-spline coefficients are prefiltered so the interpolant passes
/// through the samples.
class GridSampler {
 public:
  GridSampler(const GridFunction<double>& f, Interpolation order);

  double operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// Number of cells beyond the outermost nodes where the interpolant can be nonzero.
  double support_margin_cells() const { return order_ == Interpolation::Linear ? 1.0 : 2.0; }
  const RegularGrid<double>& grid() const { return grid_; }
  Interpolation order() const { return order_; }

 private:
  RegularGrid<double> grid_;
  Eigen::VectorXd coefficients_;
  Interpolation order_;
};

struct PlaneIntegralOptions {
  Interpolation interpolation = Interpolation::CubicBSpline;
  /// Lattice step along the k-plane; <= 0 selects the smallest ambient spacing.
  double plane_step = 0.0;
};

/// Fiber grid on alpha-perp (frame coordinates) centred on the projected
/// box centre, covering the projection of the whole support box plus the
/// interpolation margin, at spacing `spacing` (<= 0: smallest ambient spacing).
RegularGrid<double> default_fiber_grid(const RegularGrid<double>& ambient, const SubspaceD& alpha,
                                       double spacing = 0.0, double margin_cells = 2.0);

/// Pf(alpha, y) = int_alpha f(y + x) dx sampled on the nodes of `fiber_grid`.
GridFunction<double> kplane_density(const GridFunction<double>& f, const SubspaceD& alpha,
                                    const RegularGrid<double>& fiber_grid, const PlaneIntegralOptions& options = {});

using Fiber = std::variant<Measure, GridFunction<double>>;

/// Data on the affine Grassmannian sampled at quadrature nodes alpha_j:
/// one fiber per node (a measure or a gridded function on alpha_j-perp) and
/// probability weights for d(alpha).
struct KPlaneData {
  KPlaneData(std::vector<SubspaceD> nodes, std::vector<Fiber> fiber_values, Eigen::VectorXd weights);

  std::size_t size() const { return subspaces.size(); }

  std::vector<SubspaceD> subspaces;
  std::vector<Fiber> fibers;
  Eigen::VectorXd quad_weights;
};

enum class QuadratureKind { MonteCarlo, LowDiscrepancy };

struct GrassmannQuadrature {
  std::vector<SubspaceD> nodes;
  Eigen::VectorXd weights;
};

/// Equal-weight node set for the invariant probability measure on G(k, d).
/// MonteCarlo: independent Haar draws seeded by split_seed(seed, j).
/// LowDiscrepancy: equispaced angles for d = 2, otherwise a randomly shifted
/// Halton sequence mapped through the normal quantile and orthonormalized.
GrassmannQuadrature grassmann_quadrature(Eigen::Index d, Eigen::Index k, std::size_t count, std::uint64_t seed,
                                         QuadratureKind kind = QuadratureKind::MonteCarlo);

/// P mu at the given nodes: fibers are the pushforwards P_alpha mu.
KPlaneData kplane_transform(const Measure& mu, const GrassmannQuadrature& quadrature);

/// P f at the given nodes with default fiber grids.
KPlaneData kplane_transform(const GridFunction<double>& f, const GrassmannQuadrature& quadrature,
                            const PlaneIntegralOptions& options = {});

/// P* psi(x) = sum_j w_j psi(alpha_j, pi_{alpha_j-perp} x) with multilinear
/// fiber interpolation. Points falling outside a fiber grid contribute 0 and
/// are reported once per process.
double backproject(const KPlaneData& psi, const Eigen::Ref<const Eigen::VectorXd>& x);

/// sum_j w_j <P_{alpha_j} mu, psi(alpha_j, .)> for measure-valued `transformed`
/// and gridded `psi` sharing the same nodes.
double pairing(const KPlaneData& transformed, const KPlaneData& psi);

/// |<P mu, psi> - <mu, P* psi>| at shared nodes.
double duality_residual(const Measure& mu, const KPlaneData& transformed, const KPlaneData& psi);
double duality_residual(const Measure& mu, const KPlaneData& psi);

}  // namespace kplane
