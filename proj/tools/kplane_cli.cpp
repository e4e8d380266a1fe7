#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kplane/harness.hpp"
#include "kplane/sobolev.hpp"

using namespace kplane;

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

// Flag values left unset keep the config-file value.
struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> pairs;
  std::optional<std::string> family;
  std::optional<Eigen::Index> dim;
  std::optional<Eigen::Index> k;
  std::optional<Eigen::Index> n;
  std::optional<int> freq_radii;
  std::optional<int> freq_dirs;
  std::optional<std::string> taylor_term;
  std::optional<std::size_t> ot_cap;
  std::optional<std::size_t> ms_starts;
  std::optional<std::size_t> ms_steps;
  std::optional<std::size_t> subspaces;
  std::vector<double> weights;
  std::optional<std::string> json;
  std::optional<std::string> csv;
  bool sobolev = false;
  bool no_max_sliced = false;
  bool runtime = false;
};

void add_overrides(CLI::App* app, Overrides& o) {
  app->add_option("-c,--config", o.config, "experiment config (JSON)")->check(CLI::ExistingFile);
  app->add_option("--seed", o.seed, "suite seed");
  app->add_option("--pairs", o.pairs, "number of pairs");
  app->add_option("--family", o.family, "delta-configs | gaussian-empirical | mixture-empirical | gridded-bumps");
  app->add_option("--dim", o.dim, "ambient dimension d");
  app->add_option("--k", o.k, "plane dimension k");
  app->add_option("--n", o.n, "atoms per measure");
  app->add_option("--freq-radii", o.freq_radii, "radii per direction in the frequency plan");
  app->add_option("--freq-dirs", o.freq_dirs, "random directions per fiber dimension");
  app->add_option("--taylor-term", o.taylor_term, "include the small-frequency moment term")
      ->check(CLI::IsMember({"on", "off"}));
  app->add_option("--ot-cap", o.ot_cap, "atom cap of the exact transport solver");
  app->add_option("--ms-starts", o.ms_starts, "max-sliced random starts");
  app->add_option("--ms-steps", o.ms_steps, "max-sliced steps per refined start");
  app->add_option("--subspaces", o.subspaces, "shared subspace count");
  app->add_option("--weights", o.weights, "metric weights a b c")->expected(3);
  app->add_option("--json", o.json, "structured export path");
  app->add_option("--csv", o.csv, "tabular export path");
  app->add_flag("--sobolev", o.sobolev, "Sobolev norms of f - g (gridded-bumps)");
  app->add_flag("--no-max-sliced", o.no_max_sliced, "skip the max-sliced search");
  app->add_flag("--runtime", o.runtime, "include the wall time in the structured export");
}

ExperimentConfig resolve(const Overrides& o) {
  ExperimentConfig c = o.config.empty() ? ExperimentConfig{} : config_from_json(read_json_file(o.config));
  if (o.seed) c.seed = *o.seed;
  if (o.pairs) c.pairs = *o.pairs;
  if (o.family) c.generator.family = parse_family(*o.family);
  if (o.dim) c.generator.dim = *o.dim;
  if (o.k) c.generator.k = *o.k;
  if (o.n) c.generator.n = *o.n;
  if (o.freq_radii) c.frequency.radii = *o.freq_radii;
  if (o.freq_dirs) c.frequency.random_directions_per_dim = *o.freq_dirs;
  if (o.taylor_term) c.frequency.taylor_term = *o.taylor_term == "on";
  if (o.ot_cap) c.ot_cap = *o.ot_cap;
  if (o.ms_starts) c.search.starts = *o.ms_starts;
  if (o.ms_steps) c.search.steps = *o.ms_steps;
  if (o.subspaces) c.subspaces = *o.subspaces;
  if (!o.weights.empty()) c.weights = {o.weights[0], o.weights[1], o.weights[2]};
  if (o.json) c.output_json = *o.json;
  if (o.csv) c.output_csv = *o.csv;
  if (o.sobolev) c.metrics.sobolev = true;
  if (o.no_max_sliced) c.metrics.max_sliced = false;
  require(c.weights.a > 0.0 && c.weights.b > 0.0 && c.weights.c > 0.0, "weights must be positive");
  require(c.pairs >= 1, "pairs must be positive");
  return c;
}

std::string cell(const std::optional<double>& v) {
  if (!v) return "-";
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.6g", *v);
  return buffer;
}

void print_pairs(const MetricReport& report) {
  std::printf("config %s, %zu pair(s)\n", report.config_hash.c_str(), report.pairs.size());
  std::printf("%5s %12s %12s %12s %12s %12s %12s  %s\n", "pair", "d~2", "D", "W2", "W~2", "MSW2", "MSW~2",
              "certificates");
  for (const auto& p : report.pairs) {
    std::string certs;
    for (const auto& c : p.certificates) certs += c.id + (c.passed ? ":ok " : ":FAIL ");
    std::optional<double> td = p.tilde_d2 ? std::optional<double>(p.tilde_d2->total()) : std::nullopt;
    std::optional<double> tw = p.tilde_w2 ? std::optional<double>(p.tilde_w2->total()) : std::nullopt;
    std::printf("%5zu %12s %12s %12s %12s %12s %12s  %s\n", p.index, cell(td).c_str(), cell(p.kplane_distance).c_str(),
                cell(p.w2).c_str(), cell(tw).c_str(), cell(p.msw2).c_str(), cell(p.mstw2).c_str(), certs.c_str());
    if (p.sobolev) {
      std::printf("      H^-1 %.6g  Hdot^-1 %.6g  H^s %.6g  |P(f-g)| %.6g\n", p.sobolev->h_minus1,
                  p.sobolev->hdot_minus1, p.sobolev->hs, p.sobolev->kplane_norm);
    }
  }
}

void write_exports(const MetricReport& report, bool runtime) {
  if (!report.config.output_json.empty()) export_report(report, report.config.output_json, runtime);
  if (!report.config.output_csv.empty()) export_report(report, report.config.output_csv);
}

// Certificates recomputed from the stored values, compared with the stored verdicts.
int print_certificates(const MetricReport& report) {
  bool all = true;
  for (const auto& p : report.pairs) {
    const auto fresh = available_certificates(p);
    for (const auto& c : fresh) {
      bool stored_ok = true;
      for (const auto& s : p.certificates)
        if (s.id == c.id && s.passed != c.passed) stored_ok = false;
      all = all && c.passed && stored_ok;
      std::printf("pair %zu %s %s residual %.3e tol %.1e  %s%s\n", p.index, c.id.c_str(), c.passed ? "PASS" : "FAIL",
                  c.residual, c.tolerance, c.statement.c_str(), stored_ok ? "" : "  (stored verdict differs)");
    }
  }
  std::printf("%s\n", all ? "all certificates pass" : "certificate failure");
  return all ? kPass : kFail;
}

MetricReport report_for_files(const ExperimentConfig& config, const std::string& mu_path, const std::string& nu_path) {
  GeneratedPair pair{read_measure_file(mu_path), read_measure_file(nu_path), std::nullopt, std::nullopt, 0.0, 0.0};
  pair.moment_mu = centered_moment(pair.mu, 2.0 + config.generator.rho);
  pair.moment_nu = centered_moment(pair.nu, 2.0 + config.generator.rho);
  ExperimentConfig c = config;
  c.generator.dim = pair.mu.dim();
  c.pairs = 1;
  MetricReport report;
  report.config = c;
  report.config_hash = config_hash(c);
  report.pairs.push_back(evaluate_pair(pair, c, 0, c.seed));
  return report;
}

GridFunction<double> gaussian_on_grid(Eigen::Index d, double sigma, Eigen::Index cells, double half_width) {
  const auto grid = RegularGrid<double>::cube(Eigen::VectorXd::Zero(d), half_width, cells);
  const double norm = std::pow(2.0 * std::acos(-1.0) * sigma * sigma, -0.5 * static_cast<double>(d));
  return sample_on_grid(grid, [&](const Eigen::VectorXd& x) {
    return norm * std::exp(-x.squaredNorm() / (2.0 * sigma * sigma));
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"k-plane transform metrics and stability certificates"};
  app.require_subcommand(1);

  Overrides gen_o;
  std::string out_mu = "mu.json";
  std::string out_nu = "nu.json";
  std::string out_f;
  std::string out_g;
  std::size_t gen_index = 0;
  auto* gen = app.add_subcommand("gen", "generate a measure pair and write it as measure files");
  add_overrides(gen, gen_o);
  gen->add_option("--index", gen_index, "pair index within the suite");
  gen->add_option("--out-mu", out_mu, "output path of mu");
  gen->add_option("--out-nu", out_nu, "output path of nu");
  gen->add_option("--out-f", out_f, "density of mu (gridded-bumps)");
  gen->add_option("--out-g", out_g, "density of nu (gridded-bumps)");

  Overrides met_o;
  std::string met_mu;
  std::string met_nu;
  auto* metrics = app.add_subcommand("metrics", "compute metrics and certificates for a suite or a pair of files");
  add_overrides(metrics, met_o);
  auto* mu_opt = metrics->add_option("--mu", met_mu, "measure file")->check(CLI::ExistingFile);
  metrics->add_option("--nu", met_nu, "measure file")->check(CLI::ExistingFile)->needs(mu_opt);
  mu_opt->needs(metrics->get_option("--nu"));

  Overrides cert_o;
  std::string cert_report;
  auto* certify = app.add_subcommand("certify", "check the inequality certificates of a report or a fresh run");
  add_overrides(certify, cert_o);
  certify->add_option("--report", cert_report, "structured report to re-check")->check(CLI::ExistingFile);

  std::string holder_family = "all";
  std::uint64_t holder_seed = 0;
  std::size_t holder_points = 8;
  double t_max = 0.1;
  double t_min = 1e-3;
  Eigen::Index holder_n = 200;
  std::string holder_csv;
  auto* holder = app.add_subcommand("holder-fit", "fit log-log exponents along a family with vanishing distances");
  holder->add_option("--family", holder_family, "translation | covariance-scaling | mixture-interpolation | all");
  holder->add_option("--seed", holder_seed, "seed");
  holder->add_option("--points", holder_points, "family points (>= 5)");
  holder->add_option("--t-max", t_max, "largest family parameter");
  holder->add_option("--t-min", t_min, "smallest family parameter");
  holder->add_option("--n", holder_n, "atoms per measure");
  holder->add_option("--csv", holder_csv, "table of the family points");

  double sob_s = -1.0;
  Eigen::Index sob_k = 1;
  std::size_t sob_subspaces = 8;
  Eigen::Index sob_grid = 32;
  Eigen::Index sob_dim = 3;
  double sob_sigma = 1.0;
  std::uint64_t sob_seed = 0;
  std::string sob_f;
  std::string sob_g;
  bool sob_homogeneous = false;
  auto* sobolev = app.add_subcommand("sobolev", "Sobolev norms of a density and of its k-plane transform");
  sobolev->add_option("--s", sob_s, "Sobolev order");
  sobolev->add_option("--k", sob_k, "plane dimension");
  sobolev->add_option("--subspaces", sob_subspaces, "Grassmannian quadrature nodes");
  auto* grid_opt = sobolev->add_option("--grid", sob_grid, "cells per axis of the built-in Gaussian");
  sobolev->add_option("--dim", sob_dim, "dimension of the built-in Gaussian");
  sobolev->add_option("--sigma", sob_sigma, "width of the built-in Gaussian");
  sobolev->add_option("--seed", sob_seed, "quadrature seed");
  sobolev->add_flag("--homogeneous", sob_homogeneous, "homogeneous ambient norm");
  auto* f_opt = sobolev->add_option("--density", sob_f, "density file f")->check(CLI::ExistingFile)->excludes(grid_opt);
  sobolev->add_option("--density-g", sob_g, "second density g: report W2 against |Pf - Pg|")
      ->check(CLI::ExistingFile)
      ->needs(f_opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kUsage;
  }

  try {
    if (*gen) {
      const auto config = resolve(gen_o);
      const auto seed = split_seed(config.seed, gen_index);
      const auto pair = generate_pair(config.generator, seed);
      write_measure_file(out_mu, pair.mu);
      write_measure_file(out_nu, pair.nu);
      if (!out_f.empty() || !out_g.empty()) {
        require(pair.f && pair.g, "--out-f/--out-g need the gridded-bumps family");
        if (!out_f.empty()) write_density_file(out_f, *pair.f);
        if (!out_g.empty()) write_density_file(out_g, *pair.g);
      }
      std::printf("pair %zu (seed %llu): %lld + %lld atoms, centered %.3g-moments %.6g / %.6g\n", gen_index,
                  static_cast<unsigned long long>(seed), static_cast<long long>(pair.mu.size()),
                  static_cast<long long>(pair.nu.size()), 2.0 + config.generator.rho, pair.moment_mu, pair.moment_nu);
      return kPass;
    }
    if (*metrics) {
      const auto config = resolve(met_o);
      const auto report = met_mu.empty() ? run_experiment(config) : report_for_files(config, met_mu, met_nu);
      print_pairs(report);
      write_exports(report, met_o.runtime);
      return report.passed() ? kPass : kFail;
    }
    if (*certify) {
      if (!cert_report.empty()) return print_certificates(report_from_json(read_json_file(cert_report)));
      const auto report = run_experiment(resolve(cert_o));
      write_exports(report, cert_o.runtime);
      return print_certificates(report);
    }
    if (*holder) {
      std::vector<HolderFamily> families;
      if (holder_family == "all") {
        families = {HolderFamily::Translation, HolderFamily::CovarianceScaling, HolderFamily::MixtureInterpolation};
      } else {
        families.push_back(parse_holder_family(holder_family));
      }
      bool all = true;
      std::string table = "family,t,d,w,msw\n";
      for (auto family : families) {
        const auto study = run_holder_family(family, holder_seed, holder_points, t_max, t_min, holder_n);
        const auto& f = study.fit;
        std::printf("%-22s slope(W~2 vs d~2) %.4f [%.4f, %.4f]", holder_family_name(family).c_str(), f.w_vs_d.slope,
                    f.w_vs_d.ci_low, f.w_vs_d.ci_high);
        if (f.w_vs_msw) std::printf("  slope(W~2 vs MSW~2) %.4f", f.w_vs_msw->slope);
        std::printf("  monotone %s  %s\n", f.monotone ? "yes" : "no", f.passed() ? "PASS" : "FAIL");
        all = all && f.passed();
        for (const auto& p : study.points) {
          char row[160];
          std::snprintf(row, sizeof row, "%s,%.17g,%.17g,%.17g,", holder_family_name(family).c_str(), p.t, p.d, p.w);
          table += row;
          if (p.msw) {
            std::snprintf(row, sizeof row, "%.17g", *p.msw);
            table += row;
          }
          table += "\n";
        }
      }
      if (!holder_csv.empty()) write_text_file(holder_csv, table);
      return all ? kPass : kFail;
    }
    if (*sobolev) {
      KPlaneSobolevOptions options;
      options.subspaces = sob_subspaces;
      options.seed = sob_seed;
      if (!sob_g.empty()) {
        const auto f = read_density_file(sob_f);
        const auto g = read_density_file(sob_g);
        const auto r = w2_sobolev_ratio(f, g, sob_k, options);
        std::printf("H^-1 %.10g\nHdot^-1 %.10g\n|Pf - Pg|_{H^(k/2-1)} %.10g\nW2 %.10g\n", r.h_minus1, r.hdot_minus1,
                    r.kplane_norm, r.w2);
        if (r.ratio) std::printf("ratio %.10g\n", *r.ratio);
        return kPass;
      }
      const GridFunction<double> f =
          sob_f.empty() ? gaussian_on_grid(sob_dim, sob_sigma, sob_grid, 6.0 * sob_sigma)
                        : read_density_file(sob_f).function();
      SobolevOptions ambient;
      ambient.homogeneous = sob_homogeneous;
      std::printf("|f|_H^%g %.10g\n", sob_s, hs_norm(f, sob_s, ambient));
      const auto gain = sobolev_gain_ratio(f, sob_s, sob_k, options);
      std::printf("|Pf|_H^%g %.10g\nratio %.10g\n", sob_s + 0.5 * static_cast<double>(sob_k), gain.kplane_norm,
                  gain.ratio);
      return kPass;
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  }
  return kUsage;
}
