#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "kplane/harness.hpp"
#include "test_support.hpp"

using namespace kplane;
using kplane::testing::random_measure;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("kplane_test_" + name)).string();
}

ExperimentConfig delta_config(const std::vector<double>& a) {
  ExperimentConfig c;
  c.generator.family = Family::DeltaConfigs;
  c.generator.dim = static_cast<Eigen::Index>(a.size());
  c.generator.points_mu = std::vector<double>(a.size(), 0.0);
  c.generator.points_nu = a;
  return c;
}

ExperimentConfig small_suite(std::size_t pairs) {
  ExperimentConfig c;
  c.pairs = pairs;
  c.seed = 12;
  c.generator.n = 60;
  c.subspaces = 6;
  c.search = {2, 4, 0.5, 0.8, 2};
  return c;
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("generators") {
    const auto delta = generate_pair(delta_config({0.5, -2.0}).generator, 3);
    CHECK(delta.mu.size() == 1);
    CHECK(delta.mu.point(0).norm() == 0.0);
    CHECK((delta.nu.point(0) - Eigen::Vector2d(0.5, -2.0)).norm() == 0.0);

    GeneratorSpec gauss;
    gauss.dim = 3;
    gauss.n = 2000;
    const auto g = generate_pair(gauss, 4);
    CHECK(centered_moment(g.mu, 2.0) == doctest::Approx(3.0).epsilon(0.05));
    CHECK(g.moment_mu == centered_moment(g.mu, 3.0));

    for (auto family : {Family::DeltaConfigs, Family::GaussianEmpirical, Family::MixtureEmpirical, Family::GriddedBumps}) {
      GeneratorSpec spec;
      spec.family = family;
      spec.n = 30;
      const auto a = generate_pair(spec, 9);
      const auto b = generate_pair(spec, 9);
      CHECK(a.mu.identical(b.mu));
      CHECK(a.nu.identical(b.nu));
      CHECK(parse_family(family_name(family)) == family);
    }
    CHECK_THROWS_AS(parse_family("uniform"), Error);

    GeneratorSpec bumps;
    bumps.family = Family::GriddedBumps;
    const auto pair = generate_pair(bumps, 1);
    REQUIRE(pair.f.has_value());
    CHECK(pair.f->mass() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pair.f->values().minCoeff() > 0.0);

    GeneratorSpec pinned;
    pinned.mass_mu = 2.5;
    pinned.barycenter_nu = {1.0, -1.0};
    const auto p = generate_pair(pinned, 2);
    CHECK(total_mass(p.mu) == doctest::Approx(2.5).epsilon(1e-14));
    CHECK((barycenter(p.nu) - Eigen::Vector2d(1.0, -1.0)).norm() < 1e-12);
  }

  TEST_CASE("identical pair") {
    auto c = small_suite(1);
    c.generator.identical = true;
    c.generator.dim = 3;
    const auto report = run_experiment(c);
    const auto& p = report.pairs.front();
    CHECK(p.tilde_d2->total() == 0.0);
    CHECK(*p.kplane_distance == 0.0);
    CHECK(*p.w2 == 0.0);
    CHECK(p.tilde_w2->total() == 0.0);
    CHECK(*p.msw2 == 0.0);
    CHECK(*p.mstw2 == 0.0);
    REQUIRE(p.certificates.size() == 5);
    for (const auto& cert : p.certificates) {
      CHECK(cert.passed);
      CHECK(cert.residual <= 0.0);
    }
  }

  TEST_CASE("translated diracs") {
    const std::vector<double> a{0.3, -1.2, 0.4};
    const double norm = std::sqrt(0.09 + 1.44 + 0.16);
    const auto report = run_experiment(delta_config(a));
    const auto& p = report.pairs.front();
    CHECK(std::abs(p.tilde_d2->total() - norm) < 1e-9);
    CHECK(std::abs(*p.kplane_distance - norm) < 1e-9);
    CHECK(std::abs(p.tilde_w2->total() - norm) < 1e-9);
    CHECK(std::abs(*p.msw2 - norm) < 1e-9);
    CHECK(report.passed());
  }

  TEST_CASE("gaussian suite and mutation") {
    const auto report = run_experiment(small_suite(3));
    CHECK(report.passed());
    for (const auto& p : report.pairs) {
      CHECK(std::isfinite(p.tilde_d2->total()));
      CHECK(std::isfinite(*p.kplane_distance));
      CHECK(std::isfinite(*p.w2));
      CHECK(std::isfinite(*p.msw2));
    }
    auto broken = report.pairs.front();
    *broken.kplane_distance *= 2.5;
    const auto certs = certify_inequalities(broken);
    CHECK_FALSE(certs[0].passed);
    CHECK(certs[0].id == "C1");

    PairReport empty;
    CHECK_THROWS_AS(certify_inequalities(empty), Error);
    CHECK(available_certificates(empty).empty());
  }

  TEST_CASE("config round trip") {
    auto c = small_suite(4);
    c.frequency.r_min = 0.01;
    c.generator.mass_nu = 1.5;
    c.weights = {1.0, 2.0, 0.5};
    const auto back = config_from_json(config_to_json(c));
    CHECK(canonical_dump(config_to_json(back)) == canonical_dump(config_to_json(c)));
    CHECK(config_hash(back) == config_hash(c));
    auto j = config_to_json(c);
    j["generator"]["colour"] = "blue";
    CHECK_THROWS_AS(config_from_json(j), Error);
    CHECK_THROWS_AS(config_from_json(Json{{"pairs", "many"}}), Error);
    CHECK(config_from_json(Json::object()).pairs == 1);
  }

  TEST_CASE("exports") {
    const auto report = run_experiment(small_suite(2));
    const auto json_path = temp_path("report.json");
    const auto csv_path = temp_path("report.csv");
    export_report(report, json_path);
    export_report(report, csv_path);
    const auto text = slurp(json_path);
    const auto back = report_from_json(Json::parse(text));
    CHECK(canonical_dump(report_to_json(back)) == text);

    std::istringstream csv(slurp(csv_path));
    std::string header;
    std::getline(csv, header);
    std::string joined;
    for (const auto& col : csv_columns()) joined += (joined.empty() ? "" : ",") + col;
    CHECK(header == joined);
    int rows = 0;
    for (std::string line; std::getline(csv, line);) ++rows;
    CHECK(rows == 2);

    const auto again = run_experiment(small_suite(2));
    export_report(again, json_path);
    CHECK(slurp(json_path) == text);
    std::filesystem::remove(json_path);
    std::filesystem::remove(csv_path);
  }

  TEST_CASE("canonical text") {
    const Json j{{"b", 1.0}, {"a", Json::array({0.1, 2})}, {"c", "x"}};
    CHECK(canonical_dump(j) == "{\n  \"a\": [0.10000000000000001, 2],\n  \"b\": 1.0,\n  \"c\": \"x\"\n}\n");
    CHECK_THROWS_AS(canonical_dump(Json{{"x", std::nan("")}}), Error);
  }

  TEST_CASE("measure and density files") {
    const auto mu = random_measure(3, 7, 2);
    const auto path = temp_path("mu.json");
    write_measure_file(path, mu);
    const auto back = read_measure_file(path);
    CHECK(back.identical(mu));

    const auto grid = RegularGrid<double>::cube(Eigen::VectorXd::Zero(2), 1.0, 5);
    const GriddedDensity<double> f(grid, Eigen::VectorXd::LinSpaced(grid.size(), 0.1, 2.0));
    write_density_file(path, f);
    const auto g = read_density_file(path);
    CHECK(g.values() == f.values());
    CHECK(g.grid().same_layout(f.grid()));

    const auto q = grassmann_quadrature(3, 1, 3, 0);
    const auto data = kplane_transform(mu, q);
    const auto data_back = kplane_data_from_json(Json::parse(canonical_dump(kplane_data_to_json(data))));
    CHECK(canonical_dump(kplane_data_to_json(data_back)) == canonical_dump(kplane_data_to_json(data)));

    CHECK_THROWS_AS(measure_from_json(Json{{"dim", 2}, {"points", {1.0}}, {"weights", {1.0}}}), Error);
    CHECK_THROWS_AS(read_measure_file(temp_path("missing.json")), Error);
    std::filesystem::remove(path);
  }

  TEST_CASE("holder fits") {
    std::vector<HolderPoint> few(4, HolderPoint{0.1, 1.0, 1.0, std::nullopt});
    CHECK_THROWS_AS(fit_holder(few), Error);
    std::vector<HolderPoint> flat;
    for (int i = 0; i < 6; ++i) flat.push_back({0.1 / (i + 1), 1.0 + i, 1.0, std::nullopt});
    CHECK_THROWS_AS(fit_holder(flat), Error);
    flat[2].d = 0.0;
    CHECK_THROWS_AS(fit_holder(flat), Error);

    const auto translation = run_holder_family(HolderFamily::Translation, 1);
    CHECK(translation.fit.w_vs_d.slope == doctest::Approx(1.0).epsilon(0.05));
    CHECK(translation.fit.passed());
    const auto scaling = run_holder_family(HolderFamily::CovarianceScaling, 1);
    CHECK(std::abs(scaling.fit.w_vs_d.slope - 1.0) < 0.1);
    CHECK(scaling.fit.monotone);
    const auto mixture = run_holder_family(HolderFamily::MixtureInterpolation, 1);
    CHECK(mixture.fit.w_vs_d.slope > 0.0);
    CHECK(mixture.fit.monotone);
    REQUIRE(mixture.fit.w_vs_msw.has_value());
    CHECK(mixture.fit.w_vs_msw->slope > 0.0);
  }
}
