#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "kplane/grassmann.hpp"
#include "kplane/measures.hpp"
#include "kplane/metric_types.hpp"
#include "kplane/summation.hpp"

namespace kplane {

/// mu-hat(xi) = sum_i w_i exp(-i x_i . xi).
template <typename Scalar, typename Derived>
std::complex<Scalar> char_fn(const DiscreteMeasure<Scalar>& mu, const Eigen::MatrixBase<Derived>& xi) {
  require(xi.size() == mu.dim(), "char_fn: dimension mismatch");
  CompensatedSum<Scalar> re;
  CompensatedSum<Scalar> im;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    const Scalar phase = mu.point(i).dot(xi);
    re.add(mu.weight(i) * std::cos(phase));
    im.add(-mu.weight(i) * std::sin(phase));
  }
  return {re.value(), im.value()};
}

/// Log-spaced radii times unit directions.
struct RadialSpec {
  double r_min = 1e-3;
  double r_max = 50.0;
  int radii = 64;
  /// +-e_i for every frame axis.
  bool axis_directions = true;
  /// Random unit directions per fiber dimension (ignored on 1-D fibers).
  int random_directions_per_dim = 4;
  std::uint64_t seed = 0;
};

/// r_min = 1e-3 / s, r_max = 50 / s with s the pooled per-coordinate
/// standard deviation of the two centered normalized measures (1 if zero).
RadialSpec default_radial_spec(const Measure& mu, const Measure& nu);

/// Finite set of nonzero frequencies in R^d plus the frames over which the
/// xi -> 0 limit of |mu-hat - nu-hat| / |xi|^2 is taken.
struct FrequencySet {
  std::vector<Eigen::VectorXd> frequencies;
  std::vector<Eigen::MatrixXd> taylor_frames;
};

/// Union frequency plan: per-subspace sets live inside each alpha-perp
/// (lifted to R^d), and `global` is their exact union, so any sup taken over
/// `global` equals the max of the sups over the per-subspace sets.
struct FrequencyPlan {
  Eigen::Index dim = 0;
  std::vector<SubspaceD> subspaces;
  std::vector<FrequencySet> per_subspace;
  FrequencySet global;
  RadialSpec radial;

  /// FNV-1a hash of the frames, frequencies and radial spec.
  std::uint64_t hash() const;
};

/// Builds the union plan over `subspaces`. With `augment`, the subspace set
/// is extended by aligned subspaces containing the barycenter difference and
/// the leading eigenvector of the centered covariance difference in their
/// orthogonal complement, so both sups are attained inside the plan.
FrequencyPlan build_frequency_plan(std::vector<SubspaceD> subspaces, const RadialSpec& radial, const Measure& mu,
                                   const Measure& nu, bool augment = true);

/// Plan without subspaces (any d >= 1): global directions +-e_i plus random
/// directions, Taylor frame the identity.
FrequencyPlan build_global_plan(Eigen::Index dim, const RadialSpec& radial);

/// (1/2) max over frames F of the largest |eigenvalue| of F (S_mu - S_nu) F^T,
/// S the unnormalized second-moment matrices: the xi -> 0 limit of
/// |mu-hat - nu-hat| / |xi|^2 for pairs with equal mass and first moment.
double taylor_term(const Measure& mu, const Measure& nu, const std::vector<Eigen::MatrixXd>& frames);

/// |mu-hat(xi) - nu-hat(xi)| / |xi|^s.
double fourier_ratio(const Measure& mu, const Measure& nu, const Eigen::VectorXd& xi, double s);

/// Sampled sup over `set` of |mu-hat - nu-hat| / |xi|^s, max-ed with the
/// Taylor term when s == 2 and `taylor` is set. A lower bound of d_s.
double d_s_hat(const Measure& mu, const Measure& nu, double s, const FrequencySet& set, bool taylor = true);

/// Generalized d2: d2 of the centered normalized pair on `set` plus
/// barycenter and mass differences.
MetricBreakdown tilde_d2_hat(const Measure& mu, const Measure& nu, const FrequencySet& set, MetricWeights weights = {},
                             bool taylor = true);
MetricBreakdown tilde_d2_hat(const Measure& mu, const Measure& nu, const FrequencyPlan& plan, MetricWeights weights = {},
                             bool taylor = true);

struct KPlaneDistance {
  double value = 0.0;
  std::size_t argmax = 0;
  std::vector<MetricBreakdown> per_subspace;
  /// max over subspaces of the centered term alone.
  double sup_centered = 0.0;
};

/// Sampled D(P mu, P nu) = max over plan subspaces of tilde_d2 between the
/// pushforwards. Per-subspace centered terms are evaluated at the lifted
/// plan frequencies, which by the Fourier-slice identity are the fiber
/// transforms at the frame coordinates.
KPlaneDistance D_hat(const Measure& mu, const Measure& nu, const FrequencyPlan& plan, MetricWeights weights = {},
                     bool taylor = true);

struct FourierDistances {
  MetricBreakdown tilde_d2;
  KPlaneDistance kplane;
};

/// tilde_d2 on plan.global and D on the plan, sharing one evaluation of
/// every frequency.
FourierDistances fourier_distances(const Measure& mu, const Measure& nu, const FrequencyPlan& plan,
                                   MetricWeights weights = {}, bool taylor = true);

}  // namespace kplane
