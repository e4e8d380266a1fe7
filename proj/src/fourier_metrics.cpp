#include "kplane/fourier_metrics.hpp"

#include <algorithm>
#include <cstring>
#include <random>

#include <Eigen/Eigenvalues>

#include "kplane/random.hpp"

namespace kplane {

namespace {

class Fnv1a {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      hash_ ^= p[i];
      hash_ *= 0x100000001b3ULL;
    }
  }
  template <typename T>
  void value(const T& v) {
    bytes(&v, sizeof(T));
  }
  void matrix(const Eigen::MatrixXd& m) {
    value(m.rows());
    value(m.cols());
    bytes(m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
  }
  std::uint64_t digest() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

std::vector<Eigen::VectorXd> unit_directions(Eigen::Index m, const RadialSpec& radial, std::uint64_t seed) {
  std::vector<Eigen::VectorXd> dirs;
  if (radial.axis_directions || m == 1) {
    for (Eigen::Index a = 0; a < m; ++a) {
      dirs.push_back(Eigen::VectorXd::Unit(m, a));
      dirs.push_back(-Eigen::VectorXd::Unit(m, a));
    }
  }
  if (m >= 2 && radial.random_directions_per_dim > 0) {
    Rng rng(seed);
    std::normal_distribution<double> normal;
    const auto count = static_cast<Eigen::Index>(radial.random_directions_per_dim) * m;
    for (Eigen::Index j = 0; j < count; ++j) {
      Eigen::VectorXd u(m);
      do {
        for (Eigen::Index a = 0; a < m; ++a) u(a) = normal(rng);
      } while (u.norm() == 0.0);
      dirs.push_back(u / u.norm());
    }
  }
  return dirs;
}

std::vector<double> log_radii(const RadialSpec& radial) {
  require(radial.r_min > 0.0 && std::isfinite(radial.r_min), "frequency plan: r_min must be positive");
  require(radial.r_max >= radial.r_min && std::isfinite(radial.r_max), "frequency plan: need r_max >= r_min");
  require(radial.radii >= 1, "frequency plan: need at least one radius");
  std::vector<double> radii(static_cast<std::size_t>(radial.radii));
  if (radial.radii == 1) {
    radii[0] = radial.r_min;
    return radii;
  }
  const double log_ratio = std::log(radial.r_max / radial.r_min);
  for (int i = 0; i < radial.radii; ++i) {
    radii[static_cast<std::size_t>(i)] = radial.r_min * std::exp(log_ratio * i / (radial.radii - 1));
  }
  radii.back() = radial.r_max;
  return radii;
}

FrequencySet frequency_set(const Eigen::MatrixXd& frame, const RadialSpec& radial, std::uint64_t seed) {
  FrequencySet set;
  const auto dirs = unit_directions(frame.rows(), radial, seed);
  for (double r : log_radii(radial)) {
    for (const auto& u : dirs) set.frequencies.push_back(frame.transpose() * (r * u));
  }
  set.taylor_frames.push_back(frame);
  return set;
}

double taylor_for_frame(const Eigen::MatrixXd& moment_difference, const Eigen::MatrixXd& frame) {
  const Eigen::MatrixXd compressed = frame * moment_difference * frame.transpose();
  if (compressed.rows() == 1) return 0.5 * std::abs(compressed(0, 0));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(compressed, Eigen::EigenvaluesOnly);
  return 0.5 * eig.eigenvalues().cwiseAbs().maxCoeff();
}

void check_moments(const Measure& mu, const Measure& nu, double s) {
  const double m_mu = total_mass(mu);
  const double m_nu = total_mass(nu);
  const double scale = std::max(m_mu, m_nu);
  bool equal = std::abs(m_mu - m_nu) <= 1e-9 * scale;
  if (equal && s > 1.0) {
    const Eigen::VectorXd first = barycenter(mu) * m_mu - barycenter(nu) * m_nu;
    const double spread = std::sqrt(std::max(centered_moment(mu, 2.0), centered_moment(nu, 2.0))) + 1.0;
    equal = first.norm() <= 1e-9 * scale * spread;
  }
  if (!equal) {
    warn_once("d_s_hat.moments", "d_s_hat: moments below order ceil(s-1) differ; the value is not a metric here");
  }
}

}  // namespace

std::uint64_t FrequencyPlan::hash() const {
  Fnv1a h;
  h.value(dim);
  h.value(radial.r_min);
  h.value(radial.r_max);
  h.value(radial.radii);
  h.value(radial.axis_directions);
  h.value(radial.random_directions_per_dim);
  h.value(radial.seed);
  for (const auto& alpha : subspaces) h.matrix(alpha.frame());
  for (const auto& xi : global.frequencies) h.matrix(xi);
  for (const auto& f : global.taylor_frames) h.matrix(f);
  return h.digest();
}

RadialSpec default_radial_spec(const Measure& mu, const Measure& nu) {
  require(mu.dim() == nu.dim(), "default_radial_spec: dimension mismatch");
  const double pooled = (centered_moment(mu, 2.0) + centered_moment(nu, 2.0)) / (2.0 * static_cast<double>(mu.dim()));
  double sigma = std::sqrt(pooled);
  if (!(sigma > 0.0) || !std::isfinite(sigma)) sigma = 1.0;
  RadialSpec spec;
  spec.r_min = 1e-3 / sigma;
  spec.r_max = 50.0 / sigma;
  return spec;
}

FrequencyPlan build_frequency_plan(std::vector<SubspaceD> subspaces, const RadialSpec& radial, const Measure& mu,
                                   const Measure& nu, bool augment) {
  require(!subspaces.empty(), "build_frequency_plan: no subspaces (use build_global_plan)");
  require(mu.dim() == nu.dim(), "build_frequency_plan: dimension mismatch");
  const auto d = subspaces.front().dim();
  const auto k = subspaces.front().plane_dim();
  require(mu.dim() == d, "build_frequency_plan: measures and subspaces disagree in dimension");
  for (const auto& alpha : subspaces) {
    require(alpha.dim() == d && alpha.plane_dim() == k, "build_frequency_plan: subspaces from different Grassmannians");
  }
  if (augment) {
    const Eigen::VectorXd bary_difference = barycenter(mu) - barycenter(nu);
    if (bary_difference.norm() > 0.0) subspaces.push_back(aligned_subspace<double>(bary_difference, k));
    const Eigen::MatrixXd cov_difference = covariance(mu) - covariance(nu);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov_difference);
    Eigen::Index lead = 0;
    const double top = eig.eigenvalues().cwiseAbs().maxCoeff(&lead);
    if (top > 0.0) subspaces.push_back(aligned_subspace<double>(eig.eigenvectors().col(lead), k));
  }
  FrequencyPlan plan;
  plan.dim = d;
  plan.radial = radial;
  plan.subspaces = std::move(subspaces);
  for (std::size_t j = 0; j < plan.subspaces.size(); ++j) {
    plan.per_subspace.push_back(frequency_set(plan.subspaces[j].frame(), radial, split_seed(radial.seed, j)));
    const auto& set = plan.per_subspace.back();
    plan.global.frequencies.insert(plan.global.frequencies.end(), set.frequencies.begin(), set.frequencies.end());
    plan.global.taylor_frames.push_back(set.taylor_frames.front());
  }
  return plan;
}

FrequencyPlan build_global_plan(Eigen::Index dim, const RadialSpec& radial) {
  require(dim >= 1, "build_global_plan: dimension must be positive");
  FrequencyPlan plan;
  plan.dim = dim;
  plan.radial = radial;
  plan.global = frequency_set(Eigen::MatrixXd::Identity(dim, dim), radial, radial.seed);
  return plan;
}

double taylor_term(const Measure& mu, const Measure& nu, const std::vector<Eigen::MatrixXd>& frames) {
  require(mu.dim() == nu.dim(), "taylor_term: dimension mismatch");
  const Eigen::MatrixXd difference = moment_matrix(mu) - moment_matrix(nu);
  double best = 0.0;
  for (const auto& frame : frames) {
    require(frame.cols() == mu.dim(), "taylor_term: frame dimension mismatch");
    best = std::max(best, taylor_for_frame(difference, frame));
  }
  return best;
}

double fourier_ratio(const Measure& mu, const Measure& nu, const Eigen::VectorXd& xi, double s) {
  const double norm2 = xi.squaredNorm();
  require(norm2 > 0.0, "fourier_ratio: zero frequency");
  const double numerator = std::abs(char_fn(mu, xi) - char_fn(nu, xi));
  const double denominator = s == 2.0 ? norm2 : std::pow(std::sqrt(norm2), s);
  return numerator / denominator;
}

double d_s_hat(const Measure& mu, const Measure& nu, double s, const FrequencySet& set, bool taylor) {
  require(s > 0.0, "d_s_hat: s must be positive");
  require(mu.dim() == nu.dim(), "d_s_hat: dimension mismatch");
  require(!set.frequencies.empty(), "d_s_hat: empty frequency set");
  check_moments(mu, nu, s);
  double best = 0.0;
  for (const auto& xi : set.frequencies) best = std::max(best, fourier_ratio(mu, nu, xi, s));
  if (taylor && s == 2.0) best = std::max(best, taylor_term(mu, nu, set.taylor_frames));
  return best;
}

MetricBreakdown tilde_d2_hat(const Measure& mu, const Measure& nu, const FrequencySet& set, MetricWeights weights,
                             bool taylor) {
  const auto dm = center_normalize(mu);
  const auto dn = center_normalize(nu);
  MetricBreakdown out;
  out.weights = weights;
  out.centered = d_s_hat(dm.centered, dn.centered, 2.0, set, taylor);
  out.bary_term = (dm.barycenter - dn.barycenter).norm();
  out.mass_term = std::abs(dm.mass - dn.mass);
  return out;
}

MetricBreakdown tilde_d2_hat(const Measure& mu, const Measure& nu, const FrequencyPlan& plan, MetricWeights weights,
                             bool taylor) {
  return tilde_d2_hat(mu, nu, plan.global, weights, taylor);
}

FourierDistances fourier_distances(const Measure& mu, const Measure& nu, const FrequencyPlan& plan,
                                   MetricWeights weights, bool taylor) {
  require(mu.dim() == plan.dim && nu.dim() == plan.dim, "fourier_distances: dimension mismatch with plan");
  if (plan.subspaces.empty()) {
    FourierDistances out;
    out.tilde_d2 = tilde_d2_hat(mu, nu, plan.global, weights, taylor);
    return out;
  }
  const auto dm = center_normalize(mu);
  const auto dn = center_normalize(nu);
  check_moments(dm.centered, dn.centered, 2.0);
  const Eigen::VectorXd bary_difference = dm.barycenter - dn.barycenter;
  const double mass_term = std::abs(dm.mass - dn.mass);

  FourierDistances out;
  out.tilde_d2.weights = weights;
  out.tilde_d2.bary_term = bary_difference.norm();
  out.tilde_d2.mass_term = mass_term;
  auto& kp = out.kplane;
  kp.per_subspace.reserve(plan.subspaces.size());
  const Eigen::MatrixXd moment_difference = moment_matrix(dm.centered) - moment_matrix(dn.centered);
  for (std::size_t j = 0; j < plan.subspaces.size(); ++j) {
    const auto& set = plan.per_subspace[j];
    double centered = 0.0;
    for (const auto& xi : set.frequencies) centered = std::max(centered, fourier_ratio(dm.centered, dn.centered, xi, 2.0));
    if (taylor) {
      for (const auto& frame : set.taylor_frames) centered = std::max(centered, taylor_for_frame(moment_difference, frame));
    }
    MetricBreakdown b;
    b.weights = weights;
    b.centered = centered;
    b.bary_term = (plan.subspaces[j].frame() * bary_difference).norm();
    b.mass_term = mass_term;
    if (j == 0 || b.total() > kp.value) {
      kp.value = b.total();
      kp.argmax = j;
    }
    kp.sup_centered = std::max(kp.sup_centered, centered);
    kp.per_subspace.push_back(b);
  }
  out.tilde_d2.centered = kp.sup_centered;
  return out;
}

KPlaneDistance D_hat(const Measure& mu, const Measure& nu, const FrequencyPlan& plan, MetricWeights weights,
                     bool taylor) {
  require(!plan.subspaces.empty(), "D_hat: plan has no subspaces");
  return fourier_distances(mu, nu, plan, weights, taylor).kplane;
}

}  // namespace kplane
