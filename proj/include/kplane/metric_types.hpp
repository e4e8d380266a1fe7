#pragma once

namespace kplane {

/// Weights (a, b, c) of the centered, barycenter and mass terms.
struct MetricWeights {
  double a = 1.0;
  double b = 1.0;
  double c = 1.0;
};

/// a * centered + b * |m_mu - m_nu| + c * |M_mu - M_nu|, where `centered`
/// is the distance between the centered normalized measures (d2 or W2).
struct MetricBreakdown {
  double centered = 0.0;
  double bary_term = 0.0;
  double mass_term = 0.0;
  MetricWeights weights{};

  double total() const { return weights.a * centered + weights.b * bary_term + weights.c * mass_term; }
};

}  // namespace kplane
