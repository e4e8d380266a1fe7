#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "kplane/grassmann.hpp"
#include "kplane/measures.hpp"
#include "kplane/metric_types.hpp"

namespace kplane {

enum class MassPolicy {
  /// Masses must agree within the tolerance.
  Strict,
  /// Masses may differ; both measures are normalized first.
  Rescale,
};

enum class MassConvention {
  /// W2 between the normalized measures.
  Probability,
  /// Squared cost scaled by the common mass.
  RawMass,
};

struct TransportOptions {
  std::size_t atom_cap = 512;
  MassPolicy mass_policy = MassPolicy::Strict;
  MassConvention convention = MassConvention::Probability;
  double mass_tolerance = 1e-9;
};

/// Coupling between the atoms of mu (rows) and nu (columns). Marginals and
/// flows are expressed in the mass convention of the solve, and cost is
/// sum flows_ij |x_i - y_j|^2 recomputed in floating point.
struct TransportPlan {
  Eigen::VectorXd row_marginal;
  Eigen::VectorXd col_marginal;
  Eigen::SparseMatrix<double> flows;
  double cost = 0.0;
};

struct W2Result {
  double value = 0.0;
  TransportPlan plan;
};

/// Exact W2 by network simplex on integerized data: costs scaled to
/// [0, 10^12], marginals quantized to multiples of 2^-40 of the total.
W2Result w2_exact(const Measure& mu, const Measure& nu, const TransportOptions& options = {});

/// W2 on the line via the monotone (quantile) coupling of the normalized measures.
double w2_1d(const Measure& mu, const Measure& nu);

/// Closed-form W2 between N(m1, s1) and N(m2, s2).
double w2_gaussian(const Eigen::VectorXd& m1, const Eigen::MatrixXd& s1, const Eigen::VectorXd& m2,
                   const Eigen::MatrixXd& s2);

/// Generalized W2: W2 of the centered normalized pair plus barycenter and mass terms.
MetricBreakdown tilde_w2(const Measure& mu, const Measure& nu, MetricWeights weights = {},
                         const TransportOptions& options = {});

/// Writes "row col flow" lines, one per nonzero, preceded by a header line
/// "rows cols nonzeros cost".
void write_triplets(const TransportPlan& plan, std::ostream& out);

enum class SlicedMode { W2, TildeW2 };

struct SearchBudget {
  std::size_t starts = 8;
  std::size_t steps = 24;
  double initial_step = 0.5;
  double decay = 0.85;
  /// Only the best `refine` starts (after one evaluation each) are climbed.
  std::size_t refine = 4;
};

struct SliceVisit {
  std::size_t start = 0;
  std::size_t step = 0;
  SubspaceD subspace;
  double value = 0.0;
};

struct SlicedResult {
  double value = 0.0;
  SubspaceD argmax;
  std::vector<SliceVisit> trace;
};

/// W2 (of the normalized measures) or tilde W2 between P_alpha mu and P_alpha nu.
double sliced_value(const Measure& mu, const Measure& nu, const SubspaceD& alpha, SlicedMode mode,
                    MetricWeights weights = {}, const TransportOptions& options = {});

/// Multi-start hill climb over G(k, d). Starts are `extra_starts` followed by
/// Haar draws seeded split_seed(seed, s). Every start is evaluated once; the
/// `refine` best (ties to the lower index) are then climbed: step t of start s moves by
/// perturb(current, initial_step * decay^(t-1), split_seed(split_seed(seed, s), t))
/// and is accepted if it improves. The trace is ordered by (start, step) and
/// the value is its maximum, a lower bound of the sup.
SlicedResult max_sliced(const Measure& mu, const Measure& nu, Eigen::Index k, SlicedMode mode,
                        const SearchBudget& budget, std::uint64_t seed,
                        const std::vector<SubspaceD>& extra_starts = {}, MetricWeights weights = {},
                        const TransportOptions& options = {});

}  // namespace kplane
