#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "kplane/grid.hpp"
#include "kplane/transform.hpp"

namespace kplane {

/// f-hat(xi) = h^d sum_j f(x_j) exp(-i x_j . xi) on the DFT frequency lattice
/// xi_a = 2 pi k'_a / (N_a h_a), k'_a in [-N_a/2, N_a/2), stored in the same
/// row-major layout as the physical grid.
struct SpectralGrid {
  RegularGrid<double> grid;
  std::vector<Eigen::VectorXd> axis_frequencies;
  Eigen::VectorXcd values;
  /// prod_a 2 pi / (N_a h_a).
  double frequency_cell = 0.0;

  Eigen::Index size() const { return values.size(); }
  /// Frequency vector of flat node `index`.
  Eigen::VectorXd frequency(Eigen::Index index) const;
};

SpectralGrid spectral_transform(const GridFunction<double>& f);

/// |sum h^d |f|^2 - (2 pi)^-d sum |f-hat|^2 dxi| / sum h^d |f|^2 (0 for f = 0).
double parseval_defect(const GridFunction<double>& f, const SpectralGrid& spectrum);

struct SobolevOptions {
  /// |xi|^{2s} instead of (1 + |xi|^2)^s.
  bool homogeneous = false;
  /// Largest admissible share of the weighted energy at frequencies with
  /// some |xi_a| above half the Nyquist frequency pi / h_a.
  double nyquist_tolerance = 0.05;
  /// |mean| <= tolerance * int |f| counts as zero mean.
  double zero_mean_tolerance = 1e-9;
};

/// (2 pi)^-d sum |f-hat|^2 w(xi) dxi, square-rooted. In homogeneous mode the
/// xi = 0 node carries weight 1 for s = 0, 0 for s > 0 and is excluded for
/// s < 0; s <= -d/2 additionally requires zero mean.
double hs_norm(const GridFunction<double>& f, double s, const SobolevOptions& options = {});
double hs_norm(const GridFunction<double>& f, const GridFunction<double>& g, double s,
               const SobolevOptions& options = {});

/// (sum_j w_j (2 pi)^-(d-k) int (1 + |eta|^2)^s |u-hat(alpha_j, eta)|^2 deta)^(1/2)
/// over gridded fibers.
double hs_norm_kplane(const KPlaneData& u, double s, const SobolevOptions& options = {});

struct KPlaneSobolevOptions {
  std::size_t subspaces = 8;
  std::uint64_t seed = 0;
  QuadratureKind quadrature = QuadratureKind::MonteCarlo;
  PlaneIntegralOptions plane{};
  SobolevOptions norm{};
};

struct SobolevGain {
  double ratio = 0.0;
  double kplane_norm = 0.0;
  double ambient_norm = 0.0;
};

/// |Pf|_{H^{s+k/2}(G_{k,d})} / |f|_{H^s(R^d)}.
SobolevGain sobolev_gain_ratio(const GridFunction<double>& f, double s, Eigen::Index k,
                               const KPlaneSobolevOptions& options = {});

struct W2SobolevRatio {
  /// Empty when f == g.
  std::optional<double> ratio;
  /// |Pf - Pg|_{H^{k/2-1}(G_{k,d})}.
  double kplane_norm = 0.0;
  /// W2 between the cell-mass discretizations.
  double w2 = 0.0;
  double h_minus1 = 0.0;
  double hdot_minus1 = 0.0;
};

/// Probability densities on one grid, strictly positive on it.
W2SobolevRatio w2_sobolev_ratio(const GriddedDensity<double>& f, const GriddedDensity<double>& g, Eigen::Index k,
                                const KPlaneSobolevOptions& options = {}, std::size_t atom_cap = 2500);

}  // namespace kplane
