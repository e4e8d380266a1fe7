#include "kplane/transport.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>

#include <Eigen/Eigenvalues>

#include "kplane/network_simplex.hpp"
#include "kplane/parallel.hpp"
#include "kplane/summation.hpp"
#include "kplane/transform.hpp"

namespace kplane {

namespace {

constexpr double kCostScale = 1e12;
constexpr std::int64_t kMassQuanta = std::int64_t{1} << 40;

std::vector<std::int64_t> quantize(const Eigen::VectorXd& probabilities) {
  std::vector<std::int64_t> q(static_cast<std::size_t>(probabilities.size()));
  std::int64_t total = 0;
  std::size_t largest = 0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    q[i] = std::max<std::int64_t>(1, std::llround(probabilities(static_cast<Eigen::Index>(i)) * kMassQuanta));
    total += q[i];
    if (q[i] > q[largest]) largest = i;
  }
  q[largest] += kMassQuanta - total;
  require(q[largest] > 0, "transport: too many atoms for mass quantization");
  return q;
}

void check_masses(double m_mu, double m_nu, const TransportOptions& options) {
  if (options.mass_policy == MassPolicy::Strict) {
    require(std::abs(m_mu - m_nu) <= options.mass_tolerance * std::max(m_mu, m_nu),
            "transport: total masses differ (strict mass policy)");
  }
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& s, const char* what) {
  require(s.rows() == s.cols(), std::string(what) + ": covariance must be square");
  const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
  require((s - s.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale, std::string(what) + ": covariance not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s);
  require(eig.eigenvalues().minCoeff() >= -1e-12 * scale, std::string(what) + ": covariance not positive semidefinite");
  const Eigen::VectorXd roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * roots.asDiagonal() * eig.eigenvectors().transpose();
}

double centered_w2(const Measure& mu, const Measure& nu, const TransportOptions& options) {
  if (mu.dim() == 1) return w2_1d(mu, nu);
  TransportOptions normalized = options;
  normalized.mass_policy = MassPolicy::Rescale;
  normalized.convention = MassConvention::Probability;
  return w2_exact(mu, nu, normalized).value;
}

}  // namespace

W2Result w2_exact(const Measure& mu, const Measure& nu, const TransportOptions& options) {
  require(mu.dim() == nu.dim(), "w2_exact: dimension mismatch");
  const auto n = mu.size();
  const auto m = nu.size();
  require(static_cast<std::size_t>(n) <= options.atom_cap && static_cast<std::size_t>(m) <= options.atom_cap,
          "w2_exact: atom count exceeds the cap (" + std::to_string(options.atom_cap) + ")");
  const double m_mu = total_mass(mu);
  const double m_nu = total_mass(nu);
  check_masses(m_mu, m_nu, options);
  const Eigen::VectorXd p = mu.weights() / m_mu;
  const Eigen::VectorXd q = nu.weights() / m_nu;

  Eigen::MatrixXd cost(n, m);
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = 0; i < n; ++i) cost(i, j) = (mu.point(i) - nu.point(j)).squaredNorm();
  const double max_cost = cost.maxCoeff();
  std::vector<std::int64_t> integer_cost(static_cast<std::size_t>(n * m), 0);
  if (max_cost > 0.0) {
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < m; ++j)
        integer_cost[static_cast<std::size_t>(i * m + j)] = std::llround(cost(i, j) / max_cost * kCostScale);
  }
  const auto entries = solve_transportation(quantize(p), quantize(q), integer_cost);

  const double scale = options.convention == MassConvention::RawMass ? m_mu : 1.0;
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(entries.size());
  CompensatedSum<double> total;
  for (const auto& e : entries) {
    const double flow = scale * static_cast<double>(e.flow) / static_cast<double>(kMassQuanta);
    triplets.emplace_back(e.row, e.col, flow);
    total.add(flow * cost(e.row, e.col));
  }
  W2Result result;
  result.plan.row_marginal = scale * p;
  result.plan.col_marginal = scale * q;
  result.plan.flows.resize(n, m);
  result.plan.flows.setFromTriplets(triplets.begin(), triplets.end());
  result.plan.cost = std::max(0.0, total.value());
  result.value = std::sqrt(result.plan.cost);
  return result;
}

double w2_1d(const Measure& mu, const Measure& nu) {
  require(mu.dim() == 1 && nu.dim() == 1, "w2_1d: measures must be one-dimensional");
  auto sorted = [](const Measure& x) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(x.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return x.points()(0, a) < x.points()(0, b); });
    return order;
  };
  const auto a = sorted(mu);
  const auto b = sorted(nu);
  const double m_mu = total_mass(mu);
  const double m_nu = total_mass(nu);
  std::size_t i = 0;
  std::size_t j = 0;
  double left_a = mu.weight(a[0]) / m_mu;
  double left_b = nu.weight(b[0]) / m_nu;
  CompensatedSum<double> cost;
  while (i < a.size() && j < b.size()) {
    const double gap = mu.points()(0, a[i]) - nu.points()(0, b[j]);
    const double t = std::min(left_a, left_b);
    cost.add(t * gap * gap);
    if (left_a < left_b) {
      left_b -= left_a;
      if (++i < a.size()) left_a = mu.weight(a[i]) / m_mu;
    } else if (left_b < left_a) {
      left_a -= left_b;
      if (++j < b.size()) left_b = nu.weight(b[j]) / m_nu;
    } else {
      if (++i < a.size()) left_a = mu.weight(a[i]) / m_mu;
      if (++j < b.size()) left_b = nu.weight(b[j]) / m_nu;
    }
  }
  return std::sqrt(std::max(0.0, cost.value()));
}

double w2_gaussian(const Eigen::VectorXd& m1, const Eigen::MatrixXd& s1, const Eigen::VectorXd& m2,
                   const Eigen::MatrixXd& s2) {
  const auto d = m1.size();
  require(m2.size() == d && s1.rows() == d && s2.rows() == d, "w2_gaussian: dimension mismatch");
  const Eigen::MatrixXd root1 = psd_sqrt(s1, "w2_gaussian");
  psd_sqrt(s2, "w2_gaussian");
  Eigen::MatrixXd middle = root1 * s2 * root1;
  middle = 0.5 * (middle + middle.transpose());
  const Eigen::MatrixXd cross = psd_sqrt(middle, "w2_gaussian");
  const double bures = s1.trace() + s2.trace() - 2.0 * cross.trace();
  return std::sqrt((m1 - m2).squaredNorm() + std::max(0.0, bures));
}

MetricBreakdown tilde_w2(const Measure& mu, const Measure& nu, MetricWeights weights, const TransportOptions& options) {
  require(mu.dim() == nu.dim(), "tilde_w2: dimension mismatch");
  const auto dm = center_normalize(mu);
  const auto dn = center_normalize(nu);
  TransportOptions unit = options;
  unit.mass_policy = MassPolicy::Rescale;
  unit.convention = MassConvention::Probability;
  MetricBreakdown out;
  out.weights = weights;
  out.centered = w2_exact(dm.centered, dn.centered, unit).value;
  out.bary_term = (dm.barycenter - dn.barycenter).norm();
  out.mass_term = std::abs(dm.mass - dn.mass);
  return out;
}

void write_triplets(const TransportPlan& plan, std::ostream& out) {
  const auto precision = out.precision();
  out << std::setprecision(17);
  out << plan.flows.rows() << ' ' << plan.flows.cols() << ' ' << plan.flows.nonZeros() << ' ' << plan.cost << '\n';
  for (Eigen::Index col = 0; col < plan.flows.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(plan.flows, col); it; ++it) {
      out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
    }
  }
  out.precision(precision);
}

double sliced_value(const Measure& mu, const Measure& nu, const SubspaceD& alpha, SlicedMode mode,
                    MetricWeights weights, const TransportOptions& options) {
  require(mu.dim() == alpha.dim() && nu.dim() == alpha.dim(), "sliced_value: dimension mismatch");
  const Measure pm = pushforward(alpha, mu);
  const Measure pn = pushforward(alpha, nu);
  if (mode == SlicedMode::W2) {
    check_masses(total_mass(pm), total_mass(pn), options);
    return centered_w2(pm, pn, options);
  }
  const auto dm = center_normalize(pm);
  const auto dn = center_normalize(pn);
  MetricBreakdown b;
  b.weights = weights;
  b.centered = centered_w2(dm.centered, dn.centered, options);
  b.bary_term = (dm.barycenter - dn.barycenter).norm();
  b.mass_term = std::abs(dm.mass - dn.mass);
  return b.total();
}

SlicedResult max_sliced(const Measure& mu, const Measure& nu, Eigen::Index k, SlicedMode mode,
                        const SearchBudget& budget, std::uint64_t seed, const std::vector<SubspaceD>& extra_starts,
                        MetricWeights weights, const TransportOptions& options) {
  require(mu.dim() == nu.dim(), "max_sliced: dimension mismatch");
  const auto d = mu.dim();
  require(d >= 2 && k >= 1 && k <= d - 1, "max_sliced: need 1 <= k <= d - 1");
  const std::size_t starts = extra_starts.size() + budget.starts;
  require(starts > 0, "max_sliced: search budget is zero");
  require(budget.initial_step > 0.0 && budget.decay > 0.0 && budget.decay <= 1.0,
          "max_sliced: need initial_step > 0 and 0 < decay <= 1");
  for (const auto& alpha : extra_starts) {
    require(alpha.dim() == d && alpha.plane_dim() == k, "max_sliced: extra start has the wrong shape");
  }

  std::vector<std::vector<SliceVisit>> traces(starts);
  parallel_for(starts, [&](std::size_t s) {
    SubspaceD alpha = s < extra_starts.size() ? extra_starts[s] : haar_sample(d, k, split_seed(seed, s));
    const double value = sliced_value(mu, nu, alpha, mode, weights, options);
    traces[s].push_back({s, 0, std::move(alpha), value});
  });
  std::vector<std::size_t> order(starts);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return traces[a][0].value > traces[b][0].value; });
  order.resize(std::min(budget.refine, starts));

  parallel_for(order.size(), [&](std::size_t r) {
    const std::size_t s = order[r];
    const std::uint64_t start_seed = split_seed(seed, s);
    auto& trace = traces[s];
    SubspaceD current = trace[0].subspace;
    double current_value = trace[0].value;
    double step = budget.initial_step;
    for (std::size_t t = 1; t <= budget.steps; ++t) {
      SubspaceD candidate = perturb(current, step, split_seed(start_seed, t));
      const double value = sliced_value(mu, nu, candidate, mode, weights, options);
      trace.push_back({s, t, candidate, value});
      if (value > current_value) {
        current = std::move(candidate);
        current_value = value;
      }
      step *= budget.decay;
    }
  });

  std::vector<SliceVisit> trace;
  for (auto& t : traces) trace.insert(trace.end(), std::make_move_iterator(t.begin()), std::make_move_iterator(t.end()));
  std::size_t best = 0;
  for (std::size_t i = 1; i < trace.size(); ++i) {
    if (trace[i].value > trace[best].value) best = i;
  }
  return SlicedResult{trace[best].value, trace[best].subspace, std::move(trace)};
}

}  // namespace kplane
