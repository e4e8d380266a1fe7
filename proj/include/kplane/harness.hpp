#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "kplane/fourier_metrics.hpp"
#include "kplane/io.hpp"
#include "kplane/measures.hpp"
#include "kplane/metric_types.hpp"
#include "kplane/transport.hpp"

namespace kplane {

enum class Family { DeltaConfigs, GaussianEmpirical, MixtureEmpirical, GriddedBumps };

std::string family_name(Family family);
Family parse_family(const std::string& name);

/// Measure-pair generator. Family-specific parameters are ignored by the
/// other families.
struct GeneratorSpec {
  Family family = Family::GaussianEmpirical;
  Eigen::Index dim = 2;
  Eigen::Index k = 1;
  /// Atoms per measure (delta-configs without explicit points, empirical families).
  Eigen::Index n = 200;
  /// nu is an exact copy of mu.
  bool identical = false;
  /// delta-configs: explicit row-major atom lists (equal weights). Empty: n
  /// random atoms in [-1, 1]^d with random weights.
  std::vector<double> points_mu;
  std::vector<double> points_nu;
  /// gaussian-empirical: mu ~ N(0, scale_mu^2 I); nu ~ N(shift * u, A A^T)
  /// with u a random unit vector and A = scale_nu (I + anisotropy G).
  double scale_mu = 1.0;
  double scale_nu = 1.3;
  double shift = 1.0;
  double anisotropy = 0.3;
  /// mixture-empirical: number of Gaussian components per measure.
  int components = 3;
  /// gridded-bumps: cells per axis on [-3, 3]^d.
  Eigen::Index grid_cells = 24;
  /// Pinned totals and barycenters (applied after sampling).
  std::optional<double> mass_mu;
  std::optional<double> mass_nu;
  std::vector<double> barycenter_mu;
  std::vector<double> barycenter_nu;
  /// Moment order 2 + rho reported with every pair.
  double rho = 1.0;
};

struct GeneratedPair {
  Measure mu;
  Measure nu;
  /// gridded-bumps only: the densities behind the cell-mass measures.
  std::optional<GriddedDensity<double>> f;
  std::optional<GriddedDensity<double>> g;
  double moment_mu = 0.0;
  double moment_nu = 0.0;
};

GeneratedPair generate_pair(const GeneratorSpec& spec, std::uint64_t seed);

struct MetricToggles {
  bool fourier = true;
  bool transport = true;
  bool max_sliced = true;
  /// Sobolev norms of f - g (gridded-bumps only).
  bool sobolev = false;
};

struct FrequencyConfig {
  int radii = 64;
  int random_directions_per_dim = 4;
  bool axis_directions = true;
  bool taylor_term = true;
  bool augment = true;
  /// Overrides of the data-driven defaults 1e-3 / sigma and 50 / sigma.
  std::optional<double> r_min;
  std::optional<double> r_max;
};

struct SobolevConfig {
  double s = -1.0;
  std::size_t subspaces = 8;
};

struct ExperimentConfig {
  GeneratorSpec generator;
  std::size_t pairs = 1;
  std::uint64_t seed = 0;
  MetricWeights weights;
  MetricToggles metrics;
  FrequencyConfig frequency;
  /// Haar subspaces shared by the frequency plan and the max-sliced search.
  std::size_t subspaces = 16;
  SearchBudget search{4, 16, 0.5, 0.85};
  std::size_t ot_cap = 1024;
  SobolevConfig sobolev;
  std::string output_json;
  std::string output_csv;
};

Json config_to_json(const ExperimentConfig& config);
/// Missing keys keep their defaults; unknown keys are rejected.
ExperimentConfig config_from_json(const Json& j);
/// FNV-1a of the canonical text of the config without output paths.
std::string config_hash(const ExperimentConfig& config);

struct Certificate {
  std::string id;
  std::string statement;
  double tolerance = 0.0;
  /// Amount by which the inequality is violated (<= 0 when it holds strictly).
  double residual = 0.0;
  bool passed = false;
};

struct SobolevReport {
  double h_minus1 = 0.0;
  double hdot_minus1 = 0.0;
  double hs = 0.0;
  double kplane_norm = 0.0;
};

struct PairReport {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  double moment_mu = 0.0;
  double moment_nu = 0.0;
  /// max of the centered second moments (of the normalized measures).
  double second_moment = 0.0;
  std::string plan_hash;
  std::optional<MetricBreakdown> tilde_d2;
  std::optional<double> kplane_distance;
  std::optional<double> kplane_sup_centered;
  std::vector<double> kplane_argmax_frame;
  /// W2 between the normalized measures.
  std::optional<double> w2;
  std::optional<MetricBreakdown> tilde_w2;
  std::optional<double> msw2;
  std::optional<double> mstw2;
  std::vector<double> msw2_argmax_frame;
  std::optional<SobolevReport> sobolev;
  std::vector<Certificate> certificates;

  bool passed() const;
};

struct MetricReport {
  std::string config_hash;
  ExperimentConfig config;
  std::vector<PairReport> pairs;
  double runtime_seconds = 0.0;

  bool passed() const;
};

/// Shared-plan evaluation of one pair: one subspace set (Haar draws seeded by
/// split_seed(seed, 1000 + j)) and one frequency plan feed d~2, D and the
/// max-sliced starts.
PairReport evaluate_pair(const GeneratedPair& pair, const ExperimentConfig& config, std::size_t index,
                         std::uint64_t seed);

/// Pairs use seeds split_seed(config.seed, i) and run in parallel; the
/// report is assembled in index order.
MetricReport run_experiment(const ExperimentConfig& config);

/// C1 ½ d~2 <= D <= d~2, C2 sup of centered terms = d2, C3 d2 <= 2 sqrt(M2) W2,
/// C4 MSW2 <= W2 and MSW~2 <= W~2, C5 c d~2 <= W~2. Throws when a value needed
/// by a certificate is missing.
std::vector<Certificate> certify_inequalities(const PairReport& pair);

/// Certificates whose inputs are present in `pair`.
std::vector<Certificate> available_certificates(const PairReport& pair);

Json report_to_json(const MetricReport& report, bool include_runtime = false);
MetricReport report_from_json(const Json& j);

/// Column order of the tabular export.
const std::vector<std::string>& csv_columns();
std::string report_to_csv(const MetricReport& report);

/// Writes the structured (".json") or tabular (".csv") export.
void export_report(const MetricReport& report, const std::string& path, bool include_runtime = false);

struct HolderPoint {
  double t = 0.0;
  /// Fourier-side distance (d~2).
  double d = 0.0;
  /// Transport distance (W~2).
  double w = 0.0;
  /// Max-sliced distance (MSW~2) when available.
  std::optional<double> msw;
};

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

struct HolderFit {
  /// log w against log d: the fitted exponent q.
  SlopeFit w_vs_d;
  /// log w against log msw.
  std::optional<SlopeFit> w_vs_msw;
  bool exponent_in_range = false;
  bool monotone = false;
  std::size_t points = 0;

  bool passed() const { return exponent_in_range && monotone; }
};

/// Least squares in log-log coordinates with a 95% Student-t interval.
/// Points are ordered by decreasing t; requires >= 5 points, positive
/// distances, and the last distances below the first.
HolderFit fit_holder(std::vector<HolderPoint> points);

enum class HolderFamily { Translation, CovarianceScaling, MixtureInterpolation };

std::string holder_family_name(HolderFamily family);
HolderFamily parse_holder_family(const std::string& name);

struct HolderStudy {
  HolderFamily family;
  std::vector<HolderPoint> points;
  HolderFit fit;
};

/// translation: nu_t = mu shifted by t u (d = 2); covariance-scaling: 1-D
/// normal quantile sample scaled by 1 + t; mixture-interpolation:
/// (1 - t) mu + t lambda (d = 2). t runs geometrically from t_max to t_min.
HolderStudy run_holder_family(HolderFamily family, std::uint64_t seed, std::size_t count = 8, double t_max = 0.1,
                              double t_min = 1e-3, Eigen::Index n = 200);

}  // namespace kplane
