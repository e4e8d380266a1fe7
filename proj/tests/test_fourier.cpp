#include <cmath>
#include <complex>

#include "doctest.h"
#include "kplane/fourier_metrics.hpp"
#include "kplane/grid.hpp"
#include "kplane/transform.hpp"
#include "test_support.hpp"

using namespace kplane;
using kplane::testing::gaussian_sample;
using kplane::testing::random_measure;
using kplane::testing::random_vector;

namespace {

Measure symmetric_pair_1d() {
  Eigen::MatrixXd p(1, 2);
  p << -1.0, 1.0;
  return Measure(p, Eigen::Vector2d(0.5, 0.5));
}

Measure origin(Eigen::Index d, double mass = 1.0) { return Measure::dirac(Eigen::VectorXd::Zero(d), mass); }

Measure centered_unit(const Measure& mu) { return center_normalize(mu).centered; }

}  // namespace

TEST_SUITE("fourier") {
  TEST_CASE("characteristic functions") {
    for (std::uint64_t s = 0; s < 5; ++s) {
      CHECK(std::abs(char_fn(origin(3), random_vector(3, s, 4.0)) - 1.0) < 1e-15);
    }
    const auto mu = symmetric_pair_1d();
    for (double xi : {0.1, 1.0, 2.7, -5.0}) {
      CHECK(std::abs(char_fn(mu, Eigen::VectorXd::Constant(1, xi)) - std::cos(xi)) < 1e-15);
    }
  }

  TEST_CASE("gridded gaussian") {
    const auto grid = RegularGrid<double>::cube(Eigen::VectorXd::Zero(2), 8.0, 256);
    const double c = 1.0 / (2.0 * std::acos(-1.0));
    const auto f = sample_on_grid(grid, [&](const Eigen::VectorXd& x) { return c * std::exp(-0.5 * x.squaredNorm()); });
    const auto mu = GriddedDensity<double>(grid, f.values).to_measure();
    for (std::uint64_t s = 0; s < 8; ++s) {
      Eigen::VectorXd xi = random_vector(2, s);
      xi *= (0.5 + 3.5 * static_cast<double>(s) / 7.0) / xi.norm();
      const double exact = std::exp(-0.5 * xi.squaredNorm());
      CHECK(std::abs(char_fn(mu, xi) - exact) / exact < 1e-4);
    }
  }

  TEST_CASE("fourier-slice identity") {
    for (Eigen::Index d : {2, 3, 5}) {
      for (std::uint64_t s = 0; s < 4; ++s) {
        const auto mu = random_measure(d, 40, s + 10 * static_cast<std::uint64_t>(d), 2.0);
        for (Eigen::Index k = 1; k < d; ++k) {
          const auto alpha = haar_sample(d, k, s + 100);
          const auto pushed = pushforward(alpha, mu);
          for (std::uint64_t t = 0; t < 8; ++t) {
            const Eigen::VectorXd eta = random_vector(d - k, t, 3.0);
            const Eigen::VectorXd xi = alpha.frame().transpose() * eta;
            CHECK(std::abs(char_fn(pushed, eta) - char_fn(mu, xi)) < 1e-12);
          }
        }
      }
    }
  }

  TEST_CASE("plan construction") {
    const auto mu = random_measure(3, 20, 1);
    const auto nu = random_measure(3, 20, 2);
    std::vector<SubspaceD> subspaces{haar_sample(3, 1, 1), haar_sample(3, 1, 2)};
    const auto radial = default_radial_spec(mu, nu);
    const auto plan = build_frequency_plan(subspaces, radial, mu, nu);
    CHECK(plan.subspaces.size() >= subspaces.size());
    CHECK(plan.per_subspace.size() == plan.subspaces.size());
    for (const auto& set : plan.per_subspace) {
      for (const auto& xi : set.frequencies) {
        bool found = false;
        for (const auto& g : plan.global.frequencies) found = found || g == xi;
        CHECK(found);
      }
    }
    CHECK(build_frequency_plan(subspaces, radial, mu, nu).hash() == plan.hash());

    auto spec = radial;
    spec.radii = 5;
    const auto line = build_global_plan(1, spec);
    CHECK(line.global.frequencies.size() == 10);
    for (const auto& xi : line.global.frequencies) CHECK(xi.size() == 1);
    CHECK_THROWS_AS(build_frequency_plan({}, radial, mu, nu), Error);
    spec.r_min = 0.0;
    CHECK_THROWS_AS(build_global_plan(2, spec), Error);
  }

  TEST_CASE("small-frequency term") {
    const auto mu = symmetric_pair_1d();
    const auto nu = origin(1);
    CHECK(taylor_term(mu, nu, {Eigen::MatrixXd::Identity(1, 1)}) == doctest::Approx(0.5).epsilon(1e-15));
    const auto plan = build_global_plan(1, default_radial_spec(mu, nu));
    CHECK(d_s_hat(mu, nu, 2.0, plan.global) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(d_s_hat(mu, nu, 2.0, plan.global, false) < 0.5);
  }

  TEST_CASE("translation ratio") {
    for (Eigen::Index d : {1, 2}) {
      const double a = 2.5;
      Eigen::VectorXd shift_to = Eigen::VectorXd::Zero(d);
      shift_to(0) = a;
      RadialSpec radial;
      radial.r_min = 1e-3 / a;
      radial.r_max = 10.0;
      radial.radii = 16;
      const auto plan = build_global_plan(d, radial);
      CHECK(d_s_hat(origin(d), Measure::dirac(shift_to), 1.0, plan.global) == doctest::Approx(a).epsilon(1e-6));
    }
  }

  TEST_CASE("generalized metric terms") {
    Eigen::VectorXd a(2);
    a << 0.6, -0.8;
    std::vector<SubspaceD> one{haar_sample(2, 1, 0)};
    const auto plan = build_frequency_plan(one, RadialSpec{}, origin(2), Measure::dirac(a));
    const auto translated = tilde_d2_hat(origin(2), Measure::dirac(a), plan);
    CHECK(translated.total() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(translated.centered == 0.0);
    const auto doubled = tilde_d2_hat(origin(2, 2.0), origin(2), plan);
    CHECK(doubled.total() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(doubled.mass_term == 1.0);

    const auto narrow = gaussian_sample(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1), 10000, 5);
    const auto wide = gaussian_sample(Eigen::VectorXd::Zero(1), 2.0 * Eigen::MatrixXd::Identity(1, 1), 10000, 6);
    const auto line = build_global_plan(1, default_radial_spec(narrow, wide));
    CHECK(tilde_d2_hat(narrow, wide, line).centered == doctest::Approx(1.5).epsilon(0.1));
  }

  TEST_CASE("identity and triangle inequality on a fixed set") {
    const auto plan = build_global_plan(3, RadialSpec{});
    for (std::uint64_t s = 0; s < 10; ++s) {
      const auto a = centered_unit(random_measure(3, 10, 3 * s));
      const auto b = centered_unit(random_measure(3, 10, 3 * s + 1));
      const auto c = centered_unit(random_measure(3, 10, 3 * s + 2));
      CHECK(d_s_hat(a, a, 2.0, plan.global) == 0.0);
      const double ab = d_s_hat(a, b, 2.0, plan.global);
      const double bc = d_s_hat(b, c, 2.0, plan.global);
      const double ac = d_s_hat(a, c, 2.0, plan.global);
      CHECK(ac <= ab + bc + 1e-14);
      CHECK(ab == doctest::Approx(d_s_hat(b, a, 2.0, plan.global)).epsilon(1e-14));
    }
  }

  TEST_CASE("k-plane distance") {
    for (std::uint64_t s = 0; s < 10; ++s) {
      const Eigen::Index d = 2 + static_cast<Eigen::Index>(s % 3);
      const auto mu = random_measure(d, 12, 10 * s, 1.0);
      const auto nu = scale_mass(shift(random_measure(d, 9, 10 * s + 1, 1.5), random_vector(d, s)), 1.3);
      std::vector<SubspaceD> subspaces;
      for (std::uint64_t j = 0; j < 6; ++j) subspaces.push_back(haar_sample(d, 1, split_seed(s, j)));
      const auto plan = build_frequency_plan(subspaces, default_radial_spec(mu, nu), mu, nu);
      CHECK(D_hat(mu, mu, plan).value == 0.0);
      const auto fd = fourier_distances(mu, nu, plan);
      const double t = fd.tilde_d2.total();
      CHECK(0.5 * t <= fd.kplane.value * (1 + 1e-12));
      CHECK(fd.kplane.value <= t * (1 + 1e-12));
      CHECK(D_hat(mu, nu, plan).value == fd.kplane.value);

      const auto cm = centered_unit(mu);
      const auto cn = centered_unit(nu);
      const auto centered_plan = build_frequency_plan(subspaces, default_radial_spec(cm, cn), cm, cn);
      const auto centered = D_hat(cm, cn, centered_plan);
      const double d2 = d_s_hat(cm, cn, 2.0, centered_plan.global);
      CHECK(std::abs(centered.value - d2) <= 1e-12 * d2);
      CHECK(centered.sup_centered == tilde_d2_hat(cm, cn, centered_plan).centered);
    }
  }
}
