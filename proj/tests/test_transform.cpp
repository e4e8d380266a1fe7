#include <cmath>

#include <Eigen/QR>

#include "doctest.h"
#include "kplane/transform.hpp"
#include "test_support.hpp"

using namespace kplane;
using kplane::testing::random_measure;
using kplane::testing::random_vector;

namespace {

const double kPi = std::acos(-1.0);

GridFunction<double> gaussian_grid(Eigen::Index d, double sigma, double spacing, double half_width) {
  const auto cells = static_cast<Eigen::Index>(std::llround(2.0 * half_width / spacing));
  const auto grid = RegularGrid<double>::cube(Eigen::VectorXd::Zero(d), half_width, cells);
  const double c = std::pow(2.0 * kPi * sigma * sigma, -0.5 * static_cast<double>(d));
  return sample_on_grid(grid, [&](const Eigen::VectorXd& x) { return c * std::exp(-x.squaredNorm() / (2 * sigma * sigma)); });
}

// psi(alpha, y) = phi(|y|) on every fiber, sampled on a cube of half-width r.
template <typename Phi>
KPlaneData radial_psi(const GrassmannQuadrature& q, double r, Eigen::Index cells, Phi phi) {
  std::vector<Fiber> fibers;
  for (const auto& alpha : q.nodes) {
    const auto grid = RegularGrid<double>::cube(Eigen::VectorXd::Zero(alpha.codim()), r, cells);
    fibers.emplace_back(sample_on_grid(grid, [&](const Eigen::VectorXd& y) { return phi(y.norm()); }));
  }
  return KPlaneData(q.nodes, std::move(fibers), q.weights);
}

}  // namespace

TEST_SUITE("transform") {
  TEST_CASE("pushforward of atoms, barycenters and centering") {
    const auto alpha = haar_sample(4, 2, 5);
    const Eigen::VectorXd x = random_vector(4, 1);
    const auto p = pushforward(alpha, Measure::dirac(x));
    CHECK((p.point(0) - project(alpha, x)).norm() < 1e-15);
    for (std::uint64_t s = 0; s < 20; ++s) {
      const auto mu = random_measure(4, 15, s, 1.5);
      const auto beta = haar_sample(4, 1 + static_cast<Eigen::Index>(s % 3), s + 1);
      const auto pushed = pushforward(beta, mu);
      CHECK((barycenter(pushed) - project(beta, barycenter(mu))).norm() < 1e-12);
      CHECK(std::abs(total_mass(pushed) - total_mass(mu)) < 1e-12);
      const auto a = center_normalize(pushed).centered;
      const auto b = pushforward(beta, center_normalize(mu).centered);
      CHECK((a.points() - b.points()).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((a.weights() - b.weights()).cwiseAbs().maxCoeff() < 1e-12);
    }
  }

  TEST_CASE("gaussian marginals") {
    const double sigma = 1.0;
    for (auto [d, k] : {std::pair<Eigen::Index, Eigen::Index>{2, 1}, {3, 1}, {3, 2}}) {
      const auto f = gaussian_grid(d, sigma, sigma / 8.0, 6.0 * sigma);
      const auto alpha = haar_sample(d, k, 40 + static_cast<std::uint64_t>(d * 10 + k));
      const auto pf = kplane_density(f, alpha, default_fiber_grid(f.grid, alpha));
      const auto& fiber = pf.grid;
      const double c = std::pow(2.0 * kPi * sigma * sigma, -0.5 * static_cast<double>(d - k));
      double worst = 0.0;
      for (Eigen::Index i = 0; i < fiber.size(); ++i) {
        const Eigen::VectorXd y = fiber.node(i);
        if (y.norm() > 3.0 * sigma) continue;
        const double exact = c * std::exp(-y.squaredNorm() / (2 * sigma * sigma));
        worst = std::max(worst, std::abs(pf.values(i) - exact) / exact);
      }
      CAPTURE(d);
      CAPTURE(k);
      CHECK(worst < 1e-4);
    }
  }

  TEST_CASE("indicator of the unit square") {
    const auto grid = RegularGrid<double>(Eigen::Vector2d(-1, -1), Eigen::Vector2d(1.0 / 32, 1.0 / 32), {96, 96});
    const auto f = sample_on_grid(grid, [](const Eigen::VectorXd& x) {
      return (x(0) >= 0 && x(0) <= 1 && x(1) >= 0 && x(1) <= 1) ? 1.0 : 0.0;
    });
    Eigen::MatrixXd frame(1, 2);
    frame << 0, 1;  // the plane is the x-axis, fibers are indexed by y
    const SubspaceD alpha(frame);
    const auto fiber = RegularGrid<double>(Eigen::VectorXd::Constant(1, -1.0), Eigen::VectorXd::Constant(1, 1.0 / 32), {96});
    PlaneIntegralOptions linear;
    linear.interpolation = Interpolation::Linear;
    const auto pf = kplane_density(f, alpha, fiber, linear);
    const double h = 1.0 / 32;
    for (Eigen::Index i = 0; i < fiber.size(); ++i) {
      const double y = fiber.coordinate(0, i);
      if (y > h && y < 1 - h) {
        CHECK(pf.values(i) == doctest::Approx(1.0).epsilon(1e-12));
      } else if (y < -h || y > 1 + h) {
        CHECK(std::abs(pf.values(i)) < 1e-12);
      }
    }
  }

  TEST_CASE("mass conservation along fibers") {
    for (auto [d, k] : {std::pair<Eigen::Index, Eigen::Index>{2, 1}, {3, 1}, {3, 2}}) {
      // The density must be negligible at the box edge for the support precondition to hold.
      const auto grid = RegularGrid<double>::cube(Eigen::VectorXd::Constant(d, 0.3), 4.0, 64);
      const Eigen::VectorXd c1 = random_vector(d, 3, 0.3);
      const auto f = sample_on_grid(grid, [&](const Eigen::VectorXd& x) {
        return std::exp(-2.0 * (x - c1).squaredNorm()) + 0.5 * std::exp(-2.5 * (x + c1).squaredNorm());
      });
      const auto alpha = haar_sample(d, k, 77);
      const auto pf = kplane_density(f, alpha, default_fiber_grid(f.grid, alpha));
      CAPTURE(d);
      CAPTURE(k);
      CHECK(std::abs(pf.integral() - f.integral()) / f.integral() < 1e-6);
    }
  }

  TEST_CASE("backprojection of radial data") {
    const auto q = grassmann_quadrature(3, 1, 512, 5);
    auto phi = [](double r) { return std::exp(-r * r); };
    const auto psi = radial_psi(q, 4.0, 64, phi);
    const Eigen::VectorXd x = random_vector(3, 9);
    const double r = x.norm();

    // Rotating the nodes together with x leaves every fiber coordinate unchanged.
    Eigen::MatrixXd seed_matrix(3, 3);
    seed_matrix << random_vector(3, 31), random_vector(3, 32), random_vector(3, 33);
    const Eigen::MatrixXd rotation = Eigen::HouseholderQR<Eigen::MatrixXd>(seed_matrix).householderQ();
    std::vector<SubspaceD> rotated;
    for (const auto& alpha : q.nodes) rotated.emplace_back(alpha.frame() * rotation.transpose());
    const auto psi_rotated = radial_psi(GrassmannQuadrature{rotated, q.weights}, 4.0, 64, phi);
    CHECK(std::abs(backproject(psi_rotated, rotation * x) - backproject(psi, x)) < 1e-12);

    // Sphere average: |pi x|^2 = r^2 (1 - t^2) with t uniform on [-1, 1].
    double exact = 0.0;
    const int m = 20000;
    for (int i = 0; i < m; ++i) {
      const double t = (i + 0.5) / m;
      exact += std::exp(-r * r * (1.0 - t * t)) / m;
    }
    double sum2 = 0.0;
    for (const auto& alpha : q.nodes) sum2 += std::pow(phi(project(alpha, x).norm()) - exact, 2);
    const double standard_error = std::sqrt(sum2 / q.nodes.size() / q.nodes.size());
    CHECK(std::abs(backproject(psi, x) - exact) < 3.0 * standard_error + 2e-3);

    const auto ones = radial_psi(q, 2.0, 16, [](double s) { return s <= 1.5 ? 1.0 : 0.0; });
    CHECK(backproject(ones, Eigen::VectorXd::Zero(3)) == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("monte carlo and low-discrepancy backprojection agree") {
    const Eigen::VectorXd x = (Eigen::VectorXd(3) << 0.8, -0.4, 0.3).finished();
    const std::size_t count = 400;
    const auto mc = grassmann_quadrature(3, 2, count, 21, QuadratureKind::MonteCarlo);
    const auto qmc = grassmann_quadrature(3, 2, count, 21, QuadratureKind::LowDiscrepancy);
    auto phi = [](double r) { return std::exp(-2.0 * r * r) * (1.0 + r); };
    const double v_mc = backproject(radial_psi(mc, 3.0, 256, phi), x);
    const double v_qmc = backproject(radial_psi(qmc, 3.0, 256, phi), x);
    double sum2 = 0.0;
    for (const auto& alpha : mc.nodes) {
      const double v = phi(project(alpha, x).norm());
      sum2 += (v - v_mc) * (v - v_mc);
    }
    const double standard_error = std::sqrt(sum2 / (count - 1.0) / count);
    CHECK(std::abs(v_mc - v_qmc) < 3.0 * standard_error);
  }

  TEST_CASE("duality residual") {
    for (std::uint64_t s = 0; s < 5; ++s) {
      const auto mu = random_measure(3, 3, s);
      const auto q = grassmann_quadrature(3, 1, 64, s);
      const auto psi = radial_psi(q, 4.0, 32, [](double r) { return r < 3.5 ? std::pow(std::cos(r * kPi / 7.0), 4) : 0.0; });
      CHECK(duality_residual(mu, psi) < 1e-10);
      const auto zero = radial_psi(q, 4.0, 8, [](double) { return 0.0; });
      CHECK(duality_residual(mu, zero) == 0.0);
    }
  }

  TEST_CASE("transform of a measure") {
    const auto mu = random_measure(3, 10, 4);
    const auto q = grassmann_quadrature(3, 2, 6, 4);
    const auto data = kplane_transform(mu, q);
    REQUIRE(data.size() == 6);
    for (std::size_t j = 0; j < data.size(); ++j) {
      const auto& fiber = std::get<Measure>(data.fibers[j]);
      CHECK(fiber.dim() == 1);
      CHECK(std::abs(total_mass(fiber) - total_mass(mu)) < 1e-12);
    }
    CHECK(q.weights.sum() == doctest::Approx(1.0));
  }
}
