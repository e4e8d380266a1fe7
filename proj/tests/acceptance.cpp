// Acceptance suite: one PASS/FAIL line per criterion, runtime budgets included.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>

#include "kplane/harness.hpp"
#include "kplane/sobolev.hpp"
#include "test_support.hpp"

using namespace kplane;
using kplane::testing::gaussian_sample;
using kplane::testing::random_measure;
using kplane::testing::random_vector;

namespace {

const double kPi = std::acos(-1.0);

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string format(const char* fmt, double a, double b = 0.0, double c = 0.0) {
  char buffer[256];
  std::snprintf(buffer, sizeof buffer, fmt, a, b, c);
  return buffer;
}

Measure centered_unit(const Measure& mu) { return center_normalize(mu).centered; }

std::vector<SubspaceD> haar_set(Eigen::Index d, Eigen::Index k, std::size_t count, std::uint64_t seed) {
  std::vector<SubspaceD> out;
  for (std::size_t j = 0; j < count; ++j) out.push_back(haar_sample(d, k, split_seed(seed, j)));
  return out;
}

Outcome fourier_slice() {
  double worst = 0.0;
  const Eigen::Index dims[] = {2, 3, 5};
  for (std::uint64_t m = 0; m < 20; ++m) {
    const Eigen::Index d = dims[m % 3];
    const auto mu = random_measure(d, 20 + static_cast<Eigen::Index>(4 * m), m, 1.5);
    for (std::uint64_t j = 0; j < 16; ++j) {
      const auto alpha = haar_sample(d, 1 + static_cast<Eigen::Index>(j % static_cast<std::uint64_t>(d - 1)),
                                     split_seed(m, j));
      const auto pushed = pushforward(alpha, mu);
      for (std::uint64_t f = 0; f < 32; ++f) {
        const Eigen::VectorXd eta = random_vector(alpha.codim(), split_seed(1000 + m, 32 * j + f), 2.0);
        worst = std::max(worst, std::abs(char_fn(pushed, eta) - char_fn(mu, Eigen::VectorXd(alpha.frame().transpose() * eta))));
      }
    }
  }
  return {worst < 1e-12, format("max |P_a mu^ - mu^| = %.2e", worst)};
}

Outcome projection_properties() {
  double mass = 0.0, bary = 0.0, shift_err = 0.0, commute = 0.0;
  for (std::uint64_t t = 0; t < 50; ++t) {
    const Eigen::Index d = 2 + static_cast<Eigen::Index>(t % 4);
    const Eigen::Index k = 1 + static_cast<Eigen::Index>(t % static_cast<std::uint64_t>(d - 1));
    const auto mu = scale_mass(random_measure(d, 25, t, 2.0), 0.5 + 0.1 * static_cast<double>(t % 7));
    const auto alpha = haar_sample(d, k, t + 500);
    const Eigen::VectorXd a = random_vector(d, t + 900, 3.0);
    const auto pushed = pushforward(alpha, mu);
    mass = std::max(mass, std::abs(total_mass(pushed) - total_mass(mu)));
    bary = std::max(bary, (barycenter(pushed) - project(alpha, barycenter(mu))).norm());
    const auto lhs = pushforward(alpha, shift(mu, a));
    const auto rhs = shift(pushed, project(alpha, a));
    shift_err = std::max(shift_err, (lhs.points() - rhs.points()).cwiseAbs().maxCoeff());
    const auto c1 = center_normalize(pushed).centered;
    const auto c2 = pushforward(alpha, center_normalize(mu).centered);
    commute = std::max({commute, (c1.points() - c2.points()).cwiseAbs().maxCoeff(),
                        (c1.weights() - c2.weights()).cwiseAbs().maxCoeff()});
  }
  const double worst = std::max({mass, bary, shift_err, commute});
  return {worst < 1e-12, format("mass %.1e, barycenter %.1e, shift/commute %.1e", mass, bary, std::max(shift_err, commute))};
}

Outcome sandwich() {
  double worst = -1e300;
  bool ok = true;
  for (std::uint64_t p = 0; p < 50; ++p) {
    GeneratorSpec spec;
    spec.family = static_cast<Family>(p % 3);
    spec.dim = 2 + static_cast<Eigen::Index>(p % 3);
    spec.k = 1 + static_cast<Eigen::Index>(p % static_cast<std::uint64_t>(spec.dim - 1));
    spec.n = 40;
    spec.mass_nu = 0.7 + 0.02 * static_cast<double>(p);
    const auto pair = generate_pair(spec, split_seed(3, p));
    const auto plan = build_frequency_plan(haar_set(spec.dim, spec.k, 8, p), default_radial_spec(pair.mu, pair.nu),
                                           pair.mu, pair.nu);
    const auto fd = fourier_distances(pair.mu, pair.nu, plan);
    const double t = fd.tilde_d2.total();
    const double residual = std::max(0.5 * t - fd.kplane.value, fd.kplane.value - t) / t;
    worst = std::max(worst, residual);
    ok = ok && residual <= 1e-12;
  }
  int equal = 0;
  for (std::uint64_t p = 0; p < 20; ++p) {
    const Eigen::Index d = 2 + static_cast<Eigen::Index>(p % 3);
    const auto mu = centered_unit(random_measure(d, 30, 700 + p));
    const auto nu = centered_unit(random_measure(d, 25, 800 + p, 1.4));
    const auto plan = build_frequency_plan(haar_set(d, 1, 8, p), default_radial_spec(mu, nu), mu, nu);
    const double d2 = d_s_hat(mu, nu, 2.0, plan.global);
    equal += std::abs(D_hat(mu, nu, plan).value - d2) <= 1e-12 * d2 ? 1 : 0;
  }
  ok = ok && equal == 20;
  return {ok, format("worst relative residual %.2e, centered equality %g/20", worst, equal)};
}

double brute_force(const Measure& mu, const Measure& nu) {
  std::vector<int> perm(static_cast<std::size_t>(mu.size()));
  std::iota(perm.begin(), perm.end(), 0);
  double best = 1e300;
  do {
    double cost = 0.0;
    for (std::size_t i = 0; i < perm.size(); ++i)
      cost += (mu.point(static_cast<Eigen::Index>(i)) - nu.point(perm[i])).squaredNorm();
    best = std::min(best, cost / static_cast<double>(perm.size()));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return std::sqrt(best);
}

Outcome exact_transport() {
  double perm_err = 0.0, line_err = 0.0, gauss_err = 0.0;
  for (std::uint64_t t = 0; t < 100; ++t) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(t % 4);
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(t % 3);
    const auto mu = random_measure(d, n, t, 1.0, true);
    const auto nu = random_measure(d, n, t + 1000, 1.5, true);
    perm_err = std::max(perm_err, std::abs(w2_exact(mu, nu).value - brute_force(mu, nu)));
  }
  for (std::uint64_t t = 0; t < 100; ++t) {
    const auto mu = random_measure(1, 5 + static_cast<Eigen::Index>(t % 40), 2000 + t);
    const auto nu = scale_mass(random_measure(1, 7 + static_cast<Eigen::Index>(t % 30), 3000 + t, 2.0),
                               1.0);
    const auto a = normalize(mu);
    const auto b = normalize(nu);
    line_err = std::max(line_err, std::abs(w2_exact(a, b).value - w2_1d(a, b)));
  }
  TransportOptions big;
  big.atom_cap = 4096;
  for (Eigen::Index d = 1; d <= 3; ++d) {
    Eigen::VectorXd m1 = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd m2 = Eigen::VectorXd::Constant(d, 3.0 / std::sqrt(static_cast<double>(d)));
    Eigen::MatrixXd r1 = Eigen::MatrixXd::Identity(d, d);
    Eigen::MatrixXd r2 = 1.5 * Eigen::MatrixXd::Identity(d, d);
    if (d > 1) r2(0, d - 1) = 0.4;
    const auto mu = gaussian_sample(m1, r1, 2000, 40 + static_cast<std::uint64_t>(d));
    const auto nu = gaussian_sample(m2, r2, 2000, 50 + static_cast<std::uint64_t>(d));
    const double oracle = w2_gaussian(m1, r1 * r1.transpose(), m2, r2 * r2.transpose());
    gauss_err = std::max(gauss_err, std::abs(w2_exact(mu, nu, big).value - oracle) / oracle);
  }
  const bool ok = perm_err < 1e-10 && line_err < 1e-10 && gauss_err < 0.05;
  return {ok, format("brute force %.1e, quantile %.1e, gaussian relative %.3f", perm_err, line_err, gauss_err)};
}

Outcome moment_bound() {
  double worst = -1e300;
  for (std::uint64_t p = 0; p < 50; ++p) {
    GeneratorSpec spec;
    spec.family = static_cast<Family>(p % 3);
    spec.dim = 1 + static_cast<Eigen::Index>(p % 3);
    spec.n = 60;
    const auto pair = generate_pair(spec, split_seed(5, p));
    const auto mu = centered_unit(pair.mu);
    const auto nu = centered_unit(pair.nu);
    const double m2 = std::max(centered_moment(mu, 2.0), centered_moment(nu, 2.0));
    const auto plan = build_global_plan(spec.dim, default_radial_spec(mu, nu));
    const double d2 = d_s_hat(mu, nu, 2.0, plan.global);
    worst = std::max(worst, d2 - 2.0 * std::sqrt(m2) * w2_exact(mu, nu).value);
  }
  return {worst <= 1e-9, format("max d2 - 2 sqrt(M2) W2 = %.3e", worst)};
}

Outcome contraction() {
  double worst = -1e300;
  const SearchBudget budget{2, 6, 0.5, 0.8, 3};
  for (std::uint64_t p = 0; p < 50; ++p) {
    const Eigen::Index d = 2 + static_cast<Eigen::Index>(p % 3);
    const Eigen::Index k = 1 + static_cast<Eigen::Index>(p % static_cast<std::uint64_t>(d - 1));
    const auto mu = normalize(random_measure(d, 40, 4000 + p));
    const auto nu = normalize(shift(random_measure(d, 35, 5000 + p, 1.3), random_vector(d, p)));
    const double w2 = w2_exact(mu, nu).value;
    const double ms = max_sliced(mu, nu, k, SlicedMode::W2, budget, p).value;
    worst = std::max(worst, ms - w2);
  }
  Eigen::VectorXd a(3);
  a << 1.5, -0.5, 2.0;
  const auto origin = Measure::dirac(Eigen::VectorXd::Zero(3));
  const auto moved = Measure::dirac(a);
  const double dirac = max_sliced(origin, moved, 1, SlicedMode::W2, {0, 0, 0.5, 0.8, 1}, 0,
                                  {aligned_subspace<double>(a, 1)})
                           .value;
  const bool ok = worst <= 1e-10 && std::abs(dirac - a.norm()) <= 1e-12 * a.norm();
  return {ok, format("max MSW2 - W2 = %.3e, dirac pair %.17g vs |a| %.17g", worst, dirac, a.norm())};
}

Outcome holder() {
  bool ok = true;
  std::string detail;
  for (auto family : {HolderFamily::Translation, HolderFamily::CovarianceScaling, HolderFamily::MixtureInterpolation}) {
    const auto study = run_holder_family(family, 1);
    const auto& f = study.fit;
    bool good = f.w_vs_d.slope > 0.0 && f.monotone && (!f.w_vs_msw || f.w_vs_msw->slope > 0.0);
    if (family != HolderFamily::MixtureInterpolation) good = good && std::abs(f.w_vs_d.slope - 1.0) <= 0.1;
    ok = ok && good;
    detail += holder_family_name(family) + format(" %.3f  ", f.w_vs_d.slope);
  }
  return {ok, "slopes: " + detail};
}

GridFunction<double> gaussian(const RegularGrid<double>& grid, const Eigen::VectorXd& center, double sigma) {
  const double c = std::pow(2.0 * kPi * sigma * sigma, -0.5 * static_cast<double>(grid.dim()));
  return sample_on_grid(grid, [&](const Eigen::VectorXd& x) {
    return c * std::exp(-(x - center).squaredNorm() / (2.0 * sigma * sigma));
  });
}

Outcome sobolev_gain() {
  bool ok = true;
  std::string detail;
  KPlaneSobolevOptions options;
  options.subspaces = 4;
  double parseval = 0.0;
  for (Eigen::Index k : {1, 2}) {
    std::vector<double> ratios;
    for (double sigma : {0.5, 1.0, 2.0}) {
      const auto grid = RegularGrid<double>::cube(Eigen::VectorXd::Zero(3), 6.0 * sigma, 48);
      const auto f = gaussian(grid, Eigen::VectorXd::Zero(3), sigma);
      parseval = std::max(parseval, parseval_defect(f, spectral_transform(f)));
      ratios.push_back(sobolev_gain_ratio(f, -1.0, k, options).ratio);
    }
    const double spread = *std::max_element(ratios.begin(), ratios.end()) / *std::min_element(ratios.begin(), ratios.end());
    ok = ok && spread <= 3.0;
    detail += format("k=%g spread %.3f  ", static_cast<double>(k), spread);
  }
  // Dilation on a shared grid: |f(2.)|_{Hdot^s} = 2^(s - d/2) |f|_{Hdot^s}.
  const auto grid = RegularGrid<double>::cube(Eigen::VectorXd::Zero(3), 6.0, 96);
  const auto f = gaussian(grid, Eigen::VectorXd::Zero(3), 1.0);
  const auto f2 = sample_on_grid(grid, [](const Eigen::VectorXd& x) {
    return std::pow(2.0 * kPi, -1.5) * std::exp(-0.5 * (2.0 * x).squaredNorm());
  });
  SobolevOptions homogeneous;
  homogeneous.homogeneous = true;
  const double s = 0.5;
  const double dilation = std::abs(hs_norm(f2, s, homogeneous) / hs_norm(f, s, homogeneous) / std::pow(2.0, s - 1.5) - 1.0);
  ok = ok && parseval <= 1e-2 && dilation <= 1e-2;
  return {ok, detail + format("parseval %.1e, dilation %.1e", parseval, dilation)};
}

Outcome negative_norms() {
  const auto grid = RegularGrid<double>::cube(Eigen::VectorXd::Zero(2), 3.0, 64);
  SobolevOptions homogeneous;
  homogeneous.homogeneous = true;
  double worst = -1e300;
  auto bump = [](const Eigen::VectorXd& x, const Eigen::VectorXd& c, double r) {
    const double q = (x - c).squaredNorm() / (r * r);
    return q < 1.0 ? std::pow(1.0 - q, 4) : 0.0;
  };
  for (std::uint64_t t = 0; t < 20; ++t) {
    const Eigen::VectorXd c1 = random_vector(2, t, 0.5);
    const Eigen::VectorXd c2 = random_vector(2, t + 100, 0.5);
    const double r1 = 0.8 + 0.05 * static_cast<double>(t % 5);
    const double r2 = 1.0;
    auto a = sample_on_grid(grid, [&](const Eigen::VectorXd& x) { return bump(x, c1, r1); });
    auto b = sample_on_grid(grid, [&](const Eigen::VectorXd& x) { return bump(x, c2, r2); });
    const GridFunction<double> f(grid, a.values / a.integral() - b.values / b.integral());
    worst = std::max(worst, hs_norm(f, -1.0) - hs_norm(f, -1.0, homogeneous));
    // Integrand by integrand: |f^|^2 / (1 + |xi|^2) against |f^|^2 / |xi|^2, and |f^(0)|^2 against 0.
    const auto spectrum = spectral_transform(f);
    for (Eigen::Index i = 0; i < spectrum.size(); ++i) {
      const double energy = std::norm(spectrum.values(i));
      const double r2 = spectrum.frequency(i).squaredNorm();
      worst = std::max(worst, r2 == 0.0 ? energy : energy / (1.0 + r2) - energy / r2);
    }
  }
  // Translated bump family: unit-mass Gaussians (sigma 0.6) at (2, 2) and (2 + dx, 2), dx in {0.1, 0.2, 0.4},
  // on [0, 4]^2 with 32 x 32 cells.
  const RegularGrid<double> box(Eigen::Vector2d(0, 0), Eigen::Vector2d(0.125, 0.125), {32, 32});
  auto density = [&](double dx) {
    const auto g = gaussian(box, Eigen::Vector2d(2.0 + dx, 2.0), 0.6);
    return GriddedDensity<double>(box, g.values / g.integral());
  };
  KPlaneSobolevOptions options;
  options.subspaces = 16;
  options.quadrature = QuadratureKind::LowDiscrepancy;
  std::vector<double> ratios;
  for (double offset : {0.1, 0.2, 0.4}) ratios.push_back(*w2_sobolev_ratio(density(0.0), density(offset), 1, options).ratio);
  const double spread = *std::max_element(ratios.begin(), ratios.end()) / *std::min_element(ratios.begin(), ratios.end());
  return {worst <= 1e-10 && spread <= 3.0,
          format("max H^-1 - Hdot^-1 (norms and integrands) = %.2e, ratio spread %.3f (%.4f ..)", worst, spread, ratios.front())};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

Outcome determinism(double& overhead) {
  // The standard suite: default configuration, 50 pairs.
  ExperimentConfig c;
  c.pairs = 50;
  const auto dir = std::filesystem::temp_directory_path();
  std::string texts[2][2];
  std::size_t failed = 0;
  for (int run = 0; run < 2; ++run) {
    const auto start = std::chrono::steady_clock::now();
    const auto report = run_experiment(c);
    if (run == 0)
      for (const auto& p : report.pairs)
        for (const auto& cert : p.certificates) failed += cert.passed ? 0 : 1;
    const auto json = (dir / ("kplane_acceptance_" + std::to_string(run) + ".json")).string();
    const auto csv = (dir / ("kplane_acceptance_" + std::to_string(run) + ".csv")).string();
    export_report(report, json);
    export_report(report, csv);
    texts[run][0] = slurp(json);
    texts[run][1] = slurp(csv);
    std::filesystem::remove(json);
    std::filesystem::remove(csv);
    if (run == 1) overhead = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  const bool ok = texts[0][0] == texts[1][0] && texts[0][1] == texts[1][1] && !texts[0][0].empty();
  return {ok, format("json %g bytes, csv %g bytes, certificate failures %g", static_cast<double>(texts[0][0].size()),
                     static_cast<double>(texts[0][1].size()), static_cast<double>(failed))};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget;
    std::function<Outcome()> run;
  };
  double overhead = 0.0;
  const std::vector<Criterion> criteria{
      {1, "Fourier-slice identity", 5.0, fourier_slice},
      {2, "projection of mass, barycenter, shifts, centering", 5.0, projection_properties},
      {3, "sampled sandwich and centered equality", 30.0, sandwich},
      {4, "exact transport oracles", 60.0, exact_transport},
      {5, "moment bound d2 <= 2 sqrt(M2) W2", 30.0, moment_bound},
      {6, "projection contraction MSW2 <= W2", 60.0, contraction},
      {7, "co-vanishing and fitted exponents", 120.0, holder},
      {8, "Sobolev gain of the k-plane transform", 120.0, sobolev_gain},
      {9, "negative-order norms and transport ratio", 180.0, negative_norms},
      {10, "byte-identical exports", 10.0, [&] { return determinism(overhead); }},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("error: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const double timed = c.id == 10 ? overhead : seconds;
    const bool in_budget = timed < c.budget;
    const bool passed = outcome.passed && in_budget;
    failures += passed ? 0 : 1;
    std::printf("criterion %2d: %s  %s: %s [%.2fs of %.0fs%s]\n", c.id, passed ? "PASS" : "FAIL", c.name,
                outcome.detail.c_str(), timed, c.budget, in_budget ? "" : ", over budget");
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
