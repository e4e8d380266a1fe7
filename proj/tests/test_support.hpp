#pragma once

#include <random>

#include <Eigen/Core>

#include "kplane/measures.hpp"
#include "kplane/random.hpp"

namespace kplane::testing {

inline Measure random_measure(Eigen::Index d, Eigen::Index n, std::uint64_t seed, double spread = 1.0,
                              bool equal_weights = false) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, spread);
  std::uniform_real_distribution<double> uniform(0.2, 2.0);
  Eigen::MatrixXd points(d, n);
  Eigen::VectorXd weights(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) points(i, j) = normal(rng);
    weights(j) = equal_weights ? 1.0 / static_cast<double>(n) : uniform(rng);
  }
  return Measure(points, weights);
}

inline Eigen::VectorXd random_vector(Eigen::Index d, std::uint64_t seed, double spread = 1.0) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, spread);
  Eigen::VectorXd v(d);
  for (Eigen::Index i = 0; i < d; ++i) v(i) = normal(rng);
  return v;
}

inline Measure gaussian_sample(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov_root, Eigen::Index n,
                               std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal;
  const auto d = mean.size();
  Eigen::MatrixXd points(d, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::VectorXd z(d);
    for (Eigen::Index i = 0; i < d; ++i) z(i) = normal(rng);
    points.col(j) = mean + cov_root * z;
  }
  return Measure(points, Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n)));
}

}  // namespace kplane::testing
