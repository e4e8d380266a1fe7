#include "kplane/transform.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include <unsupported/Eigen/SpecialFunctions>

#include "kplane/random.hpp"
#include "kplane/summation.hpp"

namespace kplane {

namespace {

constexpr int kMaxTaps = 4;

/// Per-axis taps (flat offsets and weights) of the interpolation stencil at x.
/// Returns false when x is outside the support of the interpolant.
bool stencil(const RegularGrid<double>& grid, Interpolation order, const Eigen::Ref<const Eigen::VectorXd>& x,
             std::vector<std::array<Eigen::Index, kMaxTaps>>& offsets, std::vector<std::array<double, kMaxTaps>>& weights,
             int& taps) {
  const auto d = grid.dim();
  taps = order == Interpolation::Linear ? 2 : 4;
  const double margin = order == Interpolation::Linear ? 1.0 : 2.0;
  for (Eigen::Index a = 0; a < d; ++a) {
    const auto n = grid.shape(a);
    const double u = (x(a) - grid.origin()(a)) / grid.spacing()(a) - 0.5;
    if (!(u > -margin && u < static_cast<double>(n - 1) + margin)) return false;
    const double base = std::floor(u);
    const double t = u - base;
    const auto i0 = static_cast<Eigen::Index>(base);
    const auto stride = grid.strides()[static_cast<std::size_t>(a)];
    auto& off = offsets[static_cast<std::size_t>(a)];
    auto& w = weights[static_cast<std::size_t>(a)];
    if (order == Interpolation::Linear) {
      const std::array<double, 2> tw{1.0 - t, t};
      for (int s = 0; s < 2; ++s) {
        const auto i = i0 + s;
        const bool inside = i >= 0 && i < n;
        off[s] = inside ? i * stride : 0;
        w[s] = inside ? tw[s] : 0.0;
      }
    } else {
      const double t2 = t * t;
      const double t3 = t2 * t;
      const double omt = 1.0 - t;
      const std::array<double, 4> tw{omt * omt * omt / 6.0, (3.0 * t3 - 6.0 * t2 + 4.0) / 6.0,
                                     (-3.0 * t3 + 3.0 * t2 + 3.0 * t + 1.0) / 6.0, t3 / 6.0};
      for (int s = 0; s < 4; ++s) {
        const auto i = i0 - 1 + s;
        const bool inside = i >= 0 && i < n;
        off[s] = inside ? i * stride : 0;
        w[s] = inside ? tw[s] : 0.0;
      }
    }
  }
  return true;
}

double tensor_sum(const Eigen::VectorXd& coefficients, Eigen::Index axis, Eigen::Index dim, Eigen::Index offset,
                  double weight, const std::vector<std::array<Eigen::Index, kMaxTaps>>& offsets,
                  const std::vector<std::array<double, kMaxTaps>>& weights, int taps) {
  if (axis == dim) return weight * coefficients(offset);
  double acc = 0.0;
  const auto a = static_cast<std::size_t>(axis);
  for (int s = 0; s < taps; ++s) {
    const double w = weights[a][s];
    if (w == 0.0) continue;
    acc += tensor_sum(coefficients, axis + 1, dim, offset + offsets[a][s], weight * w, offsets, weights, taps);
  }
  return acc;
}

double interpolate(const RegularGrid<double>& grid, const Eigen::VectorXd& coefficients, Interpolation order,
                   const Eigen::Ref<const Eigen::VectorXd>& x) {
  const auto d = static_cast<std::size_t>(grid.dim());
  thread_local std::vector<std::array<Eigen::Index, kMaxTaps>> offsets;
  thread_local std::vector<std::array<double, kMaxTaps>> weights;
  offsets.resize(d);
  weights.resize(d);
  int taps = 0;
  if (!stencil(grid, order, x, offsets, weights, taps)) return 0.0;
  return tensor_sum(coefficients, 0, grid.dim(), 0, 1.0, offsets, weights, taps);
}

/// In-place solve of the cubic B-spline interpolation system (1, 4, 1) / 6
/// along every line of `axis`, with zero coefficients outside the grid.
void prefilter_axis(const RegularGrid<double>& grid, Eigen::Index axis, Eigen::VectorXd& c) {
  const auto n = grid.shape(axis);
  const auto stride = grid.strides()[static_cast<std::size_t>(axis)];
  constexpr double off = 1.0 / 6.0;
  constexpr double diag = 4.0 / 6.0;
  std::vector<double> cprime(static_cast<std::size_t>(n));
  std::vector<double> denom(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double prev = i == 0 ? 0.0 : cprime[static_cast<std::size_t>(i - 1)];
    denom[static_cast<std::size_t>(i)] = diag - off * prev;
    cprime[static_cast<std::size_t>(i)] = off / denom[static_cast<std::size_t>(i)];
  }
  std::vector<double> line(static_cast<std::size_t>(n));
  for (Eigen::Index start = 0; start < grid.size(); ++start) {
    if ((start / stride) % n != 0) continue;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double rhs = c(start + i * stride);
      const double prev = i == 0 ? 0.0 : line[static_cast<std::size_t>(i - 1)];
      line[static_cast<std::size_t>(i)] = (rhs - off * prev) / denom[static_cast<std::size_t>(i)];
    }
    for (Eigen::Index i = n - 1; i-- > 0;) {
      line[static_cast<std::size_t>(i)] -= cprime[static_cast<std::size_t>(i)] * line[static_cast<std::size_t>(i + 1)];
    }
    for (Eigen::Index i = 0; i < n; ++i) c(start + i * stride) = line[static_cast<std::size_t>(i)];
  }
}

std::vector<unsigned> first_primes(std::size_t count) {
  std::vector<unsigned> primes;
  for (unsigned candidate = 2; primes.size() < count; ++candidate) {
    bool prime = true;
    for (unsigned p : primes) {
      if (p * p > candidate) break;
      if (candidate % p == 0) {
        prime = false;
        break;
      }
    }
    if (prime) primes.push_back(candidate);
  }
  return primes;
}

double radical_inverse(std::uint64_t index, unsigned base) {
  double result = 0.0;
  double scale = 1.0 / base;
  while (index > 0) {
    result += static_cast<double>(index % base) * scale;
    index /= base;
    scale /= base;
  }
  return result;
}

bool same_nodes(const KPlaneData& a, const KPlaneData& b) {
  if (a.size() != b.size()) return false;
  if (!(a.quad_weights.array() == b.quad_weights.array()).all()) return false;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const auto& fa = a.subspaces[j].frame();
    const auto& fb = b.subspaces[j].frame();
    if (fa.rows() != fb.rows() || fa.cols() != fb.cols() || fa != fb) return false;
  }
  return true;
}

}  // namespace

GridSampler::GridSampler(const GridFunction<double>& f, Interpolation order)
    : grid_(f.grid), coefficients_(f.values), order_(order) {
  if (order_ == Interpolation::CubicBSpline) {
    for (Eigen::Index a = 0; a < grid_.dim(); ++a) prefilter_axis(grid_, a, coefficients_);
  }
}

double GridSampler::operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  require(x.size() == grid_.dim(), "grid sampler: dimension mismatch");
  return interpolate(grid_, coefficients_, order_, x);
}

RegularGrid<double> default_fiber_grid(const RegularGrid<double>& ambient, const SubspaceD& alpha, double spacing,
                                       double margin_cells) {
  require(ambient.dim() == alpha.dim(), "default_fiber_grid: dimension mismatch");
  const double h = spacing > 0.0 ? spacing : ambient.spacing().minCoeff();
  const Eigen::VectorXd center = alpha.frame() * ambient.center();
  const double radius =
      (ambient.upper_corner() - ambient.origin()).norm() / 2.0 + margin_cells * ambient.spacing().maxCoeff();
  const auto n = static_cast<Eigen::Index>(std::ceil(2.0 * radius / h)) + 1;
  const auto m = alpha.codim();
  return RegularGrid<double>(center.array() - 0.5 * static_cast<double>(n) * h, Eigen::VectorXd::Constant(m, h),
                             std::vector<Eigen::Index>(static_cast<std::size_t>(m), n));
}

GridFunction<double> kplane_density(const GridFunction<double>& f, const SubspaceD& alpha,
                                    const RegularGrid<double>& fiber_grid, const PlaneIntegralOptions& options) {
  const auto& grid = f.grid;
  const auto d = grid.dim();
  require(alpha.dim() == d, "kplane_density: dimension mismatch");
  require(fiber_grid.dim() == alpha.codim(), "kplane_density: fiber grid must have dimension d - k");

  const Eigen::MatrixXd& frame = alpha.frame();
  const Eigen::MatrixXd& basis = alpha.plane_basis();
  const Eigen::VectorXd lower = grid.origin();
  const Eigen::VectorXd upper = grid.upper_corner();
  const Eigen::VectorXd center = grid.center();
  const Eigen::VectorXd half = (upper - lower) / 2.0;

  // The fiber grid box must contain the projection of the support box.
  const Eigen::VectorXd fiber_lower = fiber_grid.origin();
  const Eigen::VectorXd fiber_upper = fiber_grid.upper_corner();
  for (Eigen::Index r = 0; r < frame.rows(); ++r) {
    const double mid = frame.row(r).dot(center);
    const double reach = frame.row(r).cwiseAbs().dot(half);
    const double slack = 1e-9 * fiber_grid.spacing()(r);
    require(mid - reach >= fiber_lower(r) - slack && mid + reach <= fiber_upper(r) + slack,
            "kplane_density: fiber grid does not cover the projected support");
  }

  GridSampler sampler(f, options.interpolation);
  const double step = options.plane_step > 0.0 ? options.plane_step : grid.spacing().minCoeff();
  const double margin = sampler.support_margin_cells();
  const Eigen::VectorXd reach_lower = lower - margin * grid.spacing();
  const Eigen::VectorXd reach_upper = upper + margin * grid.spacing();
  const double radius = (reach_upper - reach_lower).norm() / 2.0;
  const auto k = alpha.plane_dim();
  const auto half_count = static_cast<Eigen::Index>(std::ceil(radius / step));
  const Eigen::VectorXd plane_center = basis * center;
  const double cell = std::pow(step, static_cast<double>(k));

  Eigen::VectorXd out(fiber_grid.size());
  Eigen::VectorXd point(d);
  for (Eigen::Index node = 0; node < fiber_grid.size(); ++node) {
    const Eigen::VectorXd y = fiber_grid.node(node);
    const Eigen::VectorXd base = frame.transpose() * y + basis.transpose() * plane_center;
    CompensatedSum<double> acc;
    if (k == 1) {
      // Clip the line base + s * step * dir against the reachable box.
      const Eigen::VectorXd dir = basis.row(0).transpose() * step;
      double s_lo = -static_cast<double>(half_count);
      double s_hi = static_cast<double>(half_count);
      bool empty = false;
      for (Eigen::Index a = 0; a < d && !empty; ++a) {
        if (dir(a) == 0.0) {
          if (base(a) <= reach_lower(a) || base(a) >= reach_upper(a)) empty = true;
          continue;
        }
        double t1 = (reach_lower(a) - base(a)) / dir(a);
        double t2 = (reach_upper(a) - base(a)) / dir(a);
        if (t1 > t2) std::swap(t1, t2);
        s_lo = std::max(s_lo, t1);
        s_hi = std::min(s_hi, t2);
        if (s_lo > s_hi) empty = true;
      }
      if (!empty) {
        for (auto s = static_cast<Eigen::Index>(std::ceil(s_lo)); s <= static_cast<Eigen::Index>(std::floor(s_hi)); ++s) {
          point = base + static_cast<double>(s) * dir;
          acc.add(sampler(point));
        }
      }
    } else {
      std::vector<Eigen::Index> j(static_cast<std::size_t>(k), -half_count);
      while (true) {
        point = base;
        for (Eigen::Index a = 0; a < k; ++a) point += (static_cast<double>(j[static_cast<std::size_t>(a)]) * step) * basis.row(a).transpose();
        if ((point.array() > reach_lower.array()).all() && (point.array() < reach_upper.array()).all()) {
          acc.add(sampler(point));
        }
        Eigen::Index a = k - 1;
        while (a >= 0 && ++j[static_cast<std::size_t>(a)] > half_count) {
          j[static_cast<std::size_t>(a)] = -half_count;
          --a;
        }
        if (a < 0) break;
      }
    }
    out(node) = acc.value() * cell;
  }
  return GridFunction<double>(fiber_grid, std::move(out));
}

KPlaneData::KPlaneData(std::vector<SubspaceD> nodes, std::vector<Fiber> fiber_values, Eigen::VectorXd weights)
    : subspaces(std::move(nodes)), fibers(std::move(fiber_values)), quad_weights(std::move(weights)) {
  require(!subspaces.empty(), "k-plane data: no quadrature nodes");
  require(subspaces.size() == fibers.size(), "k-plane data: one fiber per subspace required");
  require(static_cast<std::size_t>(quad_weights.size()) == subspaces.size(), "k-plane data: one weight per subspace required");
  require((quad_weights.array() >= 0.0).all() && quad_weights.allFinite(), "k-plane data: weights must be nonnegative");
  require(std::abs(compensated_sum(quad_weights) - 1.0) <= 1e-12, "k-plane data: weights must sum to 1");
  const auto d = subspaces.front().dim();
  const auto m = subspaces.front().codim();
  for (std::size_t j = 0; j < subspaces.size(); ++j) {
    require(subspaces[j].dim() == d && subspaces[j].codim() == m, "k-plane data: nodes from different Grassmannians");
    const auto fiber_dim = std::visit(
        [](const auto& fiber) -> Eigen::Index {
          using T = std::decay_t<decltype(fiber)>;
          if constexpr (std::is_same_v<T, Measure>) {
            return fiber.dim();
          } else {
            return fiber.grid.dim();
          }
        },
        fibers[j]);
    require(fiber_dim == m, "k-plane data: fiber dimension must be d - k");
  }
}

GrassmannQuadrature grassmann_quadrature(Eigen::Index d, Eigen::Index k, std::size_t count, std::uint64_t seed,
                                         QuadratureKind kind) {
  require(count >= 1, "grassmann_quadrature: need at least one node");
  require(d >= 2 && k >= 1 && k <= d - 1, "grassmann_quadrature: need 1 <= k <= d - 1");
  GrassmannQuadrature out;
  out.nodes.reserve(count);
  out.weights = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(count), 1.0 / static_cast<double>(count));
  if (kind == QuadratureKind::MonteCarlo) {
    for (std::size_t j = 0; j < count; ++j) out.nodes.push_back(haar_sample(d, k, split_seed(seed, j)));
    return out;
  }
  Rng rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  if (d == 2) {
    const double offset = uniform(rng);
    const double pi = std::acos(-1.0);
    for (std::size_t j = 0; j < count; ++j) {
      const double theta = pi * (static_cast<double>(j) + offset) / static_cast<double>(count);
      Eigen::MatrixXd frame(1, 2);
      frame << std::cos(theta), std::sin(theta);
      out.nodes.emplace_back(frame);
    }
    return out;
  }
  const auto m = d - k;
  const auto dims = static_cast<std::size_t>(d * m);
  const auto primes = first_primes(dims);
  std::vector<double> shifts(dims);
  for (auto& s : shifts) s = uniform(rng);
  for (std::size_t j = 0; j < count; ++j) {
    Eigen::ArrayXd u(static_cast<Eigen::Index>(dims));
    for (std::size_t l = 0; l < dims; ++l) {
      double v = radical_inverse(j + 1, primes[l]) + shifts[l];
      v -= std::floor(v);
      u(static_cast<Eigen::Index>(l)) = std::clamp(v, 1e-12, 1.0 - 1e-12);
    }
    const Eigen::ArrayXd g = u.ndtri();
    const Eigen::MatrixXd gaussian = Eigen::Map<const Eigen::MatrixXd>(g.data(), d, m);
    out.nodes.emplace_back(detail::orthonormal_rows<double>(gaussian));
  }
  return out;
}

KPlaneData kplane_transform(const Measure& mu, const GrassmannQuadrature& quadrature) {
  std::vector<Fiber> fibers;
  fibers.reserve(quadrature.nodes.size());
  for (const auto& alpha : quadrature.nodes) fibers.emplace_back(pushforward(alpha, mu));
  return KPlaneData(quadrature.nodes, std::move(fibers), quadrature.weights);
}

KPlaneData kplane_transform(const GridFunction<double>& f, const GrassmannQuadrature& quadrature,
                            const PlaneIntegralOptions& options) {
  std::vector<Fiber> fibers;
  fibers.reserve(quadrature.nodes.size());
  const double margin = options.interpolation == Interpolation::Linear ? 1.0 : 2.0;
  for (const auto& alpha : quadrature.nodes) {
    fibers.emplace_back(kplane_density(f, alpha, default_fiber_grid(f.grid, alpha, 0.0, margin), options));
  }
  return KPlaneData(quadrature.nodes, std::move(fibers), quadrature.weights);
}

double backproject(const KPlaneData& psi, const Eigen::Ref<const Eigen::VectorXd>& x) {
  require(x.size() == psi.subspaces.front().dim(), "backproject: dimension mismatch");
  CompensatedSum<double> acc;
  for (std::size_t j = 0; j < psi.size(); ++j) {
    const auto* fiber = std::get_if<GridFunction<double>>(&psi.fibers[j]);
    require(fiber != nullptr, "backproject: fibers must be gridded functions");
    const Eigen::VectorXd y = psi.subspaces[j].frame() * x;
    const Eigen::VectorXd lower = fiber->grid.origin();
    const Eigen::VectorXd upper = fiber->grid.upper_corner();
    if ((y.array() < lower.array()).any() || (y.array() > upper.array()).any()) {
      warn_once("backproject.outside", "backproject: evaluation point outside a fiber grid treated as 0");
      continue;
    }
    acc.add(psi.quad_weights(static_cast<Eigen::Index>(j)) *
            interpolate(fiber->grid, fiber->values, Interpolation::Linear, y));
  }
  return acc.value();
}

double pairing(const KPlaneData& transformed, const KPlaneData& psi) {
  require(same_nodes(transformed, psi), "pairing: mismatched quadrature node sets");
  CompensatedSum<double> acc;
  for (std::size_t j = 0; j < psi.size(); ++j) {
    const auto* measure = std::get_if<Measure>(&transformed.fibers[j]);
    const auto* fiber = std::get_if<GridFunction<double>>(&psi.fibers[j]);
    require(measure != nullptr && fiber != nullptr, "pairing: expected measure fibers against gridded fibers");
    const Eigen::VectorXd lower = fiber->grid.origin();
    const Eigen::VectorXd upper = fiber->grid.upper_corner();
    const double w = psi.quad_weights(static_cast<Eigen::Index>(j));
    for (Eigen::Index i = 0; i < measure->size(); ++i) {
      const Eigen::VectorXd y = measure->point(i);
      if ((y.array() < lower.array()).any() || (y.array() > upper.array()).any()) {
        warn_once("backproject.outside", "backproject: evaluation point outside a fiber grid treated as 0");
        continue;
      }
      acc.add(w * measure->weight(i) * interpolate(fiber->grid, fiber->values, Interpolation::Linear, y));
    }
  }
  return acc.value();
}

double duality_residual(const Measure& mu, const KPlaneData& transformed, const KPlaneData& psi) {
  const double lhs = pairing(transformed, psi);
  CompensatedSum<double> rhs;
  for (Eigen::Index i = 0; i < mu.size(); ++i) rhs.add(mu.weight(i) * backproject(psi, mu.point(i)));
  return std::abs(lhs - rhs.value());
}

double duality_residual(const Measure& mu, const KPlaneData& psi) {
  return duality_residual(mu, kplane_transform(mu, GrassmannQuadrature{psi.subspaces, psi.quad_weights}), psi);
}

}  // namespace kplane
