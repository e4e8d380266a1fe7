#include "kplane/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>
#include <sstream>

#include <unsupported/Eigen/SpecialFunctions>

#include "kplane/parallel.hpp"
#include "kplane/sobolev.hpp"
#include "kplane/transform.hpp"

namespace kplane {

namespace {

const std::vector<std::pair<Family, std::string>> kFamilies{
    {Family::DeltaConfigs, "delta-configs"},
    {Family::GaussianEmpirical, "gaussian-empirical"},
    {Family::MixtureEmpirical, "mixture-empirical"},
    {Family::GriddedBumps, "gridded-bumps"},
};

const std::vector<std::pair<HolderFamily, std::string>> kHolderFamilies{
    {HolderFamily::Translation, "translation"},
    {HolderFamily::CovarianceScaling, "covariance-scaling"},
    {HolderFamily::MixtureInterpolation, "mixture-interpolation"},
};

Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd g(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) g(i, j) = normal(rng);
  return g;
}

Eigen::VectorXd unit_vector(Eigen::Index d, Rng& rng) {
  Eigen::VectorXd u;
  do {
    u = gaussian_matrix(d, 1, rng);
  } while (u.norm() == 0.0);
  return u / u.norm();
}

Measure gaussian_cloud(const Eigen::VectorXd& mean, const Eigen::MatrixXd& root, Eigen::Index n, Rng& rng) {
  Eigen::MatrixXd points = root * gaussian_matrix(mean.size(), n, rng);
  points.colwise() += mean;
  return Measure::uniform(std::move(points));
}

Measure atoms_from_list(const std::vector<double>& flat, Eigen::Index d, const char* which) {
  require(!flat.empty() && flat.size() % static_cast<std::size_t>(d) == 0,
          std::string("delta-configs: ") + which + " must hold a multiple of dim numbers");
  const auto n = static_cast<Eigen::Index>(flat.size()) / d;
  return Measure::uniform(Eigen::Map<const Eigen::MatrixXd>(flat.data(), d, n));
}

Measure random_atoms(Eigen::Index d, Eigen::Index n, Rng& rng) {
  std::uniform_real_distribution<double> coordinate(-1.0, 1.0);
  std::uniform_real_distribution<double> weight(0.5, 1.5);
  Eigen::MatrixXd points(d, n);
  Eigen::VectorXd weights(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) points(i, j) = coordinate(rng);
    weights(j) = weight(rng);
  }
  return Measure(std::move(points), weights / weights.sum());
}

Measure mixture_cloud(const std::vector<Eigen::VectorXd>& centers, const std::vector<double>& widths,
                      const std::vector<double>& proportions, Eigen::Index n, Rng& rng) {
  std::discrete_distribution<int> pick(proportions.begin(), proportions.end());
  std::normal_distribution<double> normal;
  const auto d = centers.front().size();
  Eigen::MatrixXd points(d, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto c = static_cast<std::size_t>(pick(rng));
    for (Eigen::Index i = 0; i < d; ++i) points(i, j) = centers[c](i) + widths[c] * normal(rng);
  }
  return Measure::uniform(std::move(points));
}

// A floor carrying 5% of the mass, identical for every draw, plus two
// normalized bumps; f - g is then smooth up to the box edge.
GriddedDensity<double> random_bumps(Eigen::Index d, Eigen::Index cells, Rng& rng) {
  std::uniform_real_distribution<double> position(-1.0, 1.0);
  std::uniform_real_distribution<double> width(0.4, 0.6);
  std::uniform_real_distribution<double> height(0.5, 1.5);
  const auto grid = RegularGrid<double>::cube(Eigen::VectorXd::Zero(d), 3.0, cells);
  std::vector<Eigen::VectorXd> centers;
  std::vector<double> widths;
  std::vector<double> heights;
  for (int b = 0; b < 2; ++b) {
    Eigen::VectorXd c(d);
    for (Eigen::Index i = 0; i < d; ++i) c(i) = position(rng);
    centers.push_back(c);
    widths.push_back(width(rng));
    heights.push_back(height(rng));
  }
  auto bumps = sample_on_grid(grid, [&](const Eigen::VectorXd& x) {
    double v = 0.0;
    for (std::size_t b = 0; b < centers.size(); ++b) {
      v += heights[b] * std::exp(-(x - centers[b]).squaredNorm() / (2.0 * widths[b] * widths[b]));
    }
    return v;
  });
  const double volume = grid.cell_volume() * static_cast<double>(grid.size());
  const Eigen::VectorXd values = Eigen::VectorXd::Constant(grid.size(), 0.05 / volume) + 0.95 / bumps.integral() * bumps.values;
  return GriddedDensity<double>(grid, values);
}

Measure pin(Measure mu, const std::optional<double>& mass, const std::vector<double>& bary, const char* which) {
  if (mass) {
    require(*mass > 0.0, std::string("generator: pinned mass of ") + which + " must be positive");
    mu = scale_mass(mu, *mass / total_mass(mu));
  }
  if (!bary.empty()) {
    require(static_cast<Eigen::Index>(bary.size()) == mu.dim(),
            std::string("generator: pinned barycenter of ") + which + " must have dim entries");
    const Eigen::VectorXd target = Eigen::Map<const Eigen::VectorXd>(bary.data(), mu.dim());
    mu = shift(mu, barycenter(mu) - target);
  }
  return mu;
}

Json breakdown_json(const MetricBreakdown& b) {
  return Json{{"centered", b.centered},
              {"bary_term", b.bary_term},
              {"mass_term", b.mass_term},
              {"total", b.total()},
              {"weights", Json{{"a", b.weights.a}, {"b", b.weights.b}, {"c", b.weights.c}}}};
}

MetricBreakdown breakdown_from_json(const Json& j) {
  MetricBreakdown b;
  b.centered = j.at("centered").get<double>();
  b.bary_term = j.at("bary_term").get<double>();
  b.mass_term = j.at("mass_term").get<double>();
  const auto& w = j.at("weights");
  b.weights = {w.at("a").get<double>(), w.at("b").get<double>(), w.at("c").get<double>()};
  return b;
}

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::vector<double> frame_values(const SubspaceD& alpha) { return frame_to_json(alpha).get<std::vector<double>>(); }

std::string format_number(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", v);
  return buffer;
}

void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  require(j.is_object(), "config: '" + where + "' must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    require(allowed.count(it.key()) > 0, "config: unknown key '" + it.key() + "' in '" + where + "'");
  }
}

template <typename T>
void read(const Json& j, const char* key, T& target) {
  if (!j.contains(key) || j.at(key).is_null()) return;
  try {
    target = j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw Error(std::string("config: key '") + key + "' has the wrong type");
  }
}

template <typename T>
void read_optional(const Json& j, const char* key, std::optional<T>& target) {
  if (!j.contains(key) || j.at(key).is_null()) return;
  T value{};
  read(j, key, value);
  target = value;
}

Certificate make_certificate(const char* id, const char* statement, double tolerance, double residual, double scale) {
  Certificate c;
  c.id = id;
  c.statement = statement;
  c.tolerance = tolerance;
  c.residual = residual;
  c.passed = std::isfinite(residual) && residual <= tolerance * scale;
  return c;
}

struct CertificateInputs {
  bool fourier;
  bool kplane;
  bool transport;
  bool sliced;
};

CertificateInputs inputs_of(const PairReport& p) {
  return {p.tilde_d2.has_value(), p.kplane_distance.has_value() && p.kplane_sup_centered.has_value(),
          p.w2.has_value() && p.tilde_w2.has_value(), p.msw2.has_value() && p.mstw2.has_value()};
}

std::vector<Certificate> certificates(const PairReport& p, bool strict) {
  const auto in = inputs_of(p);
  std::vector<Certificate> out;
  auto missing = [&](const char* id) {
    if (strict) throw Error(std::string("certify: missing inputs for ") + id);
  };
  if (in.fourier && in.kplane) {
    const double t = p.tilde_d2->total();
    const double d = *p.kplane_distance;
    out.push_back(make_certificate("C1", "sandwich: 1/2 d~2 <= D <= d~2 on the shared plan", 1e-12,
                                   std::max(0.5 * t - d, d - t), t));
    const double c = p.tilde_d2->centered;
    out.push_back(make_certificate("C2", "centered pairs: sup over subspaces of d2 equals d2", 1e-12,
                                   std::abs(*p.kplane_sup_centered - c), c));
  } else {
    missing("C1/C2");
  }
  if (in.fourier && in.transport) {
    const double root = std::sqrt(p.second_moment);
    out.push_back(make_certificate("C3", "moment bound: d2 <= 2 sqrt(M2) W2 on the centered normalized pair", 1e-9,
                                   p.tilde_d2->centered - 2.0 * root * p.tilde_w2->centered, 1.0));
  } else {
    missing("C3");
  }
  if (in.sliced && in.transport) {
    const double w = *p.w2;
    const double tw = p.tilde_w2->total();
    const double residual = std::max(*p.msw2 - w, *p.mstw2 - tw);
    out.push_back(make_certificate("C4", "projection contraction: MSW2 <= W2 and MSW~2 <= W~2", 1e-10, residual,
                                   std::max({1.0, w, tw})));
  } else {
    missing("C4");
  }
  if (in.fourier && in.transport) {
    const double root = std::sqrt(p.second_moment);
    const double c = root > 0.0 ? std::min(1.0, 1.0 / (2.0 * root)) : 1.0;
    out.push_back(make_certificate("C5", "generalized lower bound: c d~2 <= W~2 with c = min(1, 1/(2 sqrt(M2)))",
                                   1e-9, c * p.tilde_d2->total() - p.tilde_w2->total(), 1.0));
  } else {
    missing("C5");
  }
  return out;
}

double t_quantile_975(std::size_t df) {
  static const double table[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
                                 2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
                                 2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};
  if (df >= 1 && df <= 30) return table[df - 1];
  return 1.960;
}

SlopeFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  require(sxx > 0.0, "fit_holder: distances do not vary");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    rss += r * r;
  }
  const double se = std::sqrt(rss / (n - 2.0) / sxx);
  const double half = t_quantile_975(x.size() - 2) * se;
  fit.ci_low = fit.slope - half;
  fit.ci_high = fit.slope + half;
  return fit;
}

}  // namespace

std::string family_name(Family family) {
  for (const auto& [f, name] : kFamilies)
    if (f == family) return name;
  throw Error("unknown family");
}

Family parse_family(const std::string& name) {
  for (const auto& [f, n] : kFamilies)
    if (n == name) return f;
  throw Error("unknown generator family '" + name +
              "' (expected delta-configs, gaussian-empirical, mixture-empirical or gridded-bumps)");
}

std::string holder_family_name(HolderFamily family) {
  for (const auto& [f, name] : kHolderFamilies)
    if (f == family) return name;
  throw Error("unknown family");
}

HolderFamily parse_holder_family(const std::string& name) {
  for (const auto& [f, n] : kHolderFamilies)
    if (n == name) return f;
  throw Error("unknown Hölder family '" + name + "' (expected translation, covariance-scaling or mixture-interpolation)");
}

GeneratedPair generate_pair(const GeneratorSpec& spec, std::uint64_t seed) {
  const auto d = spec.dim;
  require(d >= 1, "generator: dim must be positive");
  require(spec.n >= 1, "generator: n must be positive");
  Rng rng(seed);
  std::optional<Measure> mu;
  std::optional<Measure> nu;
  std::optional<GriddedDensity<double>> f;
  std::optional<GriddedDensity<double>> g;
  switch (spec.family) {
    case Family::DeltaConfigs:
      mu = spec.points_mu.empty() ? random_atoms(d, spec.n, rng) : atoms_from_list(spec.points_mu, d, "points_mu");
      nu = spec.points_nu.empty() ? random_atoms(d, spec.n, rng) : atoms_from_list(spec.points_nu, d, "points_nu");
      break;
    case Family::GaussianEmpirical: {
      mu = gaussian_cloud(Eigen::VectorXd::Zero(d), spec.scale_mu * Eigen::MatrixXd::Identity(d, d), spec.n, rng);
      const Eigen::VectorXd mean = spec.shift * unit_vector(d, rng);
      const Eigen::MatrixXd root =
          spec.scale_nu * (Eigen::MatrixXd::Identity(d, d) + spec.anisotropy * gaussian_matrix(d, d, rng));
      nu = gaussian_cloud(mean, root, spec.n, rng);
      break;
    }
    case Family::MixtureEmpirical: {
      require(spec.components >= 1, "generator: components must be positive");
      std::normal_distribution<double> normal;
      std::uniform_real_distribution<double> width(0.3, 0.7);
      std::uniform_real_distribution<double> proportion(0.5, 1.5);
      std::vector<Eigen::VectorXd> centers;
      std::vector<double> widths;
      std::vector<double> proportions;
      for (int c = 0; c < spec.components; ++c) {
        centers.push_back(2.0 * gaussian_matrix(d, 1, rng));
        widths.push_back(width(rng));
        proportions.push_back(proportion(rng));
      }
      mu = mixture_cloud(centers, widths, proportions, spec.n, rng);
      for (std::size_t c = 0; c < centers.size(); ++c) {
        centers[c] += 0.5 * gaussian_matrix(d, 1, rng);
        widths[c] = width(rng);
        proportions[c] = proportion(rng);
      }
      nu = mixture_cloud(centers, widths, proportions, spec.n, rng);
      break;
    }
    case Family::GriddedBumps:
      require(spec.grid_cells >= 2, "generator: grid_cells must be at least 2");
      f = random_bumps(d, spec.grid_cells, rng);
      g = random_bumps(d, spec.grid_cells, rng);
      mu = f->to_measure();
      nu = g->to_measure();
      break;
  }
  if (spec.identical) {
    nu = mu;
    g = f;
  }
  GeneratedPair pair{pin(*mu, spec.mass_mu, spec.barycenter_mu, "mu"),
                     pin(*nu, spec.mass_nu, spec.barycenter_nu, "nu"), f, g, 0.0, 0.0};
  pair.moment_mu = centered_moment(pair.mu, 2.0 + spec.rho);
  pair.moment_nu = centered_moment(pair.nu, 2.0 + spec.rho);
  return pair;
}

Json config_to_json(const ExperimentConfig& c) {
  const auto& g = c.generator;
  Json generator{{"family", family_name(g.family)},
                 {"dim", g.dim},
                 {"k", g.k},
                 {"n", g.n},
                 {"identical", g.identical},
                 {"points_mu", g.points_mu},
                 {"points_nu", g.points_nu},
                 {"scale_mu", g.scale_mu},
                 {"scale_nu", g.scale_nu},
                 {"shift", g.shift},
                 {"anisotropy", g.anisotropy},
                 {"components", g.components},
                 {"grid_cells", g.grid_cells},
                 {"mass_mu", optional_number(g.mass_mu)},
                 {"mass_nu", optional_number(g.mass_nu)},
                 {"barycenter_mu", g.barycenter_mu},
                 {"barycenter_nu", g.barycenter_nu},
                 {"rho", g.rho}};
  return Json{{"generator", generator},
              {"pairs", c.pairs},
              {"seed", c.seed},
              {"weights", Json{{"a", c.weights.a}, {"b", c.weights.b}, {"c", c.weights.c}}},
              {"metrics", Json{{"fourier", c.metrics.fourier},
                               {"transport", c.metrics.transport},
                               {"max_sliced", c.metrics.max_sliced},
                               {"sobolev", c.metrics.sobolev}}},
              {"frequency", Json{{"radii", c.frequency.radii},
                                 {"random_directions_per_dim", c.frequency.random_directions_per_dim},
                                 {"axis_directions", c.frequency.axis_directions},
                                 {"taylor_term", c.frequency.taylor_term},
                                 {"augment", c.frequency.augment},
                                 {"r_min", optional_number(c.frequency.r_min)},
                                 {"r_max", optional_number(c.frequency.r_max)}}},
              {"subspaces", c.subspaces},
              {"search", Json{{"starts", c.search.starts},
                              {"steps", c.search.steps},
                              {"initial_step", c.search.initial_step},
                              {"decay", c.search.decay},
                              {"refine", c.search.refine}}},
              {"ot_cap", c.ot_cap},
              {"sobolev", Json{{"s", c.sobolev.s}, {"subspaces", c.sobolev.subspaces}}},
              {"output", Json{{"json", c.output_json}, {"csv", c.output_csv}}}};
}

ExperimentConfig config_from_json(const Json& j) {
  ExperimentConfig c;
  check_keys(j, {"generator", "pairs", "seed", "weights", "metrics", "frequency", "subspaces", "search", "ot_cap",
                 "sobolev", "output"},
             "top level");
  if (j.contains("generator")) {
    const auto& g = j.at("generator");
    check_keys(g, {"family", "dim", "k", "n", "identical", "points_mu", "points_nu", "scale_mu", "scale_nu", "shift",
                   "anisotropy", "components", "grid_cells", "mass_mu", "mass_nu", "barycenter_mu", "barycenter_nu",
                   "rho"},
               "generator");
    auto& s = c.generator;
    if (g.contains("family")) s.family = parse_family(g.at("family").get<std::string>());
    read(g, "dim", s.dim);
    read(g, "k", s.k);
    read(g, "n", s.n);
    read(g, "identical", s.identical);
    read(g, "points_mu", s.points_mu);
    read(g, "points_nu", s.points_nu);
    read(g, "scale_mu", s.scale_mu);
    read(g, "scale_nu", s.scale_nu);
    read(g, "shift", s.shift);
    read(g, "anisotropy", s.anisotropy);
    read(g, "components", s.components);
    read(g, "grid_cells", s.grid_cells);
    read_optional(g, "mass_mu", s.mass_mu);
    read_optional(g, "mass_nu", s.mass_nu);
    read(g, "barycenter_mu", s.barycenter_mu);
    read(g, "barycenter_nu", s.barycenter_nu);
    read(g, "rho", s.rho);
  }
  read(j, "pairs", c.pairs);
  read(j, "seed", c.seed);
  if (j.contains("weights")) {
    const auto& w = j.at("weights");
    check_keys(w, {"a", "b", "c"}, "weights");
    read(w, "a", c.weights.a);
    read(w, "b", c.weights.b);
    read(w, "c", c.weights.c);
  }
  if (j.contains("metrics")) {
    const auto& m = j.at("metrics");
    check_keys(m, {"fourier", "transport", "max_sliced", "sobolev"}, "metrics");
    read(m, "fourier", c.metrics.fourier);
    read(m, "transport", c.metrics.transport);
    read(m, "max_sliced", c.metrics.max_sliced);
    read(m, "sobolev", c.metrics.sobolev);
  }
  if (j.contains("frequency")) {
    const auto& f = j.at("frequency");
    check_keys(f, {"radii", "random_directions_per_dim", "axis_directions", "taylor_term", "augment", "r_min", "r_max"},
               "frequency");
    read(f, "radii", c.frequency.radii);
    read(f, "random_directions_per_dim", c.frequency.random_directions_per_dim);
    read(f, "axis_directions", c.frequency.axis_directions);
    read(f, "taylor_term", c.frequency.taylor_term);
    read(f, "augment", c.frequency.augment);
    read_optional(f, "r_min", c.frequency.r_min);
    read_optional(f, "r_max", c.frequency.r_max);
  }
  read(j, "subspaces", c.subspaces);
  if (j.contains("search")) {
    const auto& s = j.at("search");
    check_keys(s, {"starts", "steps", "initial_step", "decay", "refine"}, "search");
    read(s, "starts", c.search.starts);
    read(s, "steps", c.search.steps);
    read(s, "initial_step", c.search.initial_step);
    read(s, "decay", c.search.decay);
    read(s, "refine", c.search.refine);
  }
  read(j, "ot_cap", c.ot_cap);
  if (j.contains("sobolev")) {
    const auto& s = j.at("sobolev");
    check_keys(s, {"s", "subspaces"}, "sobolev");
    read(s, "s", c.sobolev.s);
    read(s, "subspaces", c.sobolev.subspaces);
  }
  if (j.contains("output")) {
    const auto& o = j.at("output");
    check_keys(o, {"json", "csv"}, "output");
    read(o, "json", c.output_json);
    read(o, "csv", c.output_csv);
  }
  require(c.weights.a > 0.0 && c.weights.b > 0.0 && c.weights.c > 0.0, "config: weights must be positive");
  require(c.pairs >= 1, "config: pairs must be positive");
  require(c.frequency.radii >= 1, "config: frequency.radii must be positive");
  return c;
}

std::string config_hash(const ExperimentConfig& config) {
  Json j = config_to_json(config);
  j.erase("output");
  return hex64(fnv1a(canonical_dump(j)));
}

bool PairReport::passed() const {
  return std::all_of(certificates.begin(), certificates.end(), [](const Certificate& c) { return c.passed; });
}

bool MetricReport::passed() const {
  return std::all_of(pairs.begin(), pairs.end(), [](const PairReport& p) { return p.passed(); });
}

PairReport evaluate_pair(const GeneratedPair& pair, const ExperimentConfig& config, std::size_t index,
                         std::uint64_t seed) {
  const auto& mu = pair.mu;
  const auto& nu = pair.nu;
  require(mu.dim() == nu.dim(), "evaluate_pair: dimension mismatch");
  const auto d = mu.dim();
  const auto k = config.generator.k;
  const bool sliced = d >= 2;
  if (sliced) require(k >= 1 && k <= d - 1, "evaluate_pair: need 1 <= k <= d - 1");

  PairReport r;
  r.index = index;
  r.seed = seed;
  r.moment_mu = pair.moment_mu;
  r.moment_nu = pair.moment_nu;
  r.second_moment = std::max(centered_moment(mu, 2.0), centered_moment(nu, 2.0));

  std::vector<SubspaceD> subspaces;
  if (sliced) {
    for (std::size_t j = 0; j < config.subspaces; ++j) subspaces.push_back(haar_sample(d, k, split_seed(seed, 1000 + j)));
  }
  RadialSpec radial = default_radial_spec(mu, nu);
  radial.radii = config.frequency.radii;
  radial.axis_directions = config.frequency.axis_directions;
  radial.random_directions_per_dim = config.frequency.random_directions_per_dim;
  radial.seed = split_seed(seed, 7);
  if (config.frequency.r_min) radial.r_min = *config.frequency.r_min;
  if (config.frequency.r_max) radial.r_max = *config.frequency.r_max;
  const FrequencyPlan plan = subspaces.empty() ? build_global_plan(d, radial)
                                               : build_frequency_plan(subspaces, radial, mu, nu, config.frequency.augment);
  r.plan_hash = hex64(plan.hash());

  if (config.metrics.fourier) {
    const auto fd = fourier_distances(mu, nu, plan, config.weights, config.frequency.taylor_term);
    r.tilde_d2 = fd.tilde_d2;
    if (!plan.subspaces.empty()) {
      r.kplane_distance = fd.kplane.value;
      r.kplane_sup_centered = fd.kplane.sup_centered;
      r.kplane_argmax_frame = frame_values(plan.subspaces[fd.kplane.argmax]);
    }
  }
  TransportOptions transport;
  transport.atom_cap = config.ot_cap;
  transport.mass_policy = MassPolicy::Rescale;
  if (config.metrics.transport) {
    r.w2 = w2_exact(mu, nu, transport).value;
    r.tilde_w2 = tilde_w2(mu, nu, config.weights, transport);
  }
  if (config.metrics.max_sliced && sliced) {
    const auto ms = max_sliced(mu, nu, k, SlicedMode::W2, config.search, split_seed(seed, 2), plan.subspaces,
                               config.weights, transport);
    const auto mst = max_sliced(mu, nu, k, SlicedMode::TildeW2, config.search, split_seed(seed, 3), plan.subspaces,
                                config.weights, transport);
    r.msw2 = ms.value;
    r.mstw2 = mst.value;
    r.msw2_argmax_frame = frame_values(ms.argmax);
  }
  if (config.metrics.sobolev && pair.f && pair.g && d >= 2) {
    const GridFunction<double> difference = pair.f->function() - pair.g->function();
    SobolevReport s;
    SobolevOptions inhomogeneous;
    SobolevOptions homogeneous;
    homogeneous.homogeneous = true;
    s.h_minus1 = hs_norm(difference, -1.0, inhomogeneous);
    s.hdot_minus1 = hs_norm(difference, -1.0, homogeneous);
    s.hs = hs_norm(difference, config.sobolev.s, inhomogeneous);
    const auto quadrature = grassmann_quadrature(d, k, config.sobolev.subspaces, split_seed(seed, 4));
    s.kplane_norm = hs_norm_kplane(kplane_transform(difference, quadrature),
                                   config.sobolev.s + 0.5 * static_cast<double>(k), inhomogeneous);
    r.sobolev = s;
  }
  r.certificates = available_certificates(r);
  return r;
}

MetricReport run_experiment(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  MetricReport report;
  report.config = config;
  report.config_hash = config_hash(config);
  std::vector<std::optional<PairReport>> slots(config.pairs);
  parallel_for(config.pairs, [&](std::size_t i) {
    const std::uint64_t seed = split_seed(config.seed, i);
    try {
      slots[i] = evaluate_pair(generate_pair(config.generator, seed), config, i, seed);
    } catch (const Error& e) {
      throw Error("pair " + std::to_string(i) + ": " + e.what());
    }
  });
  for (auto& s : slots) report.pairs.push_back(std::move(*s));
  report.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::vector<Certificate> certify_inequalities(const PairReport& pair) { return certificates(pair, true); }

std::vector<Certificate> available_certificates(const PairReport& pair) { return certificates(pair, false); }

Json report_to_json(const MetricReport& report, bool include_runtime) {
  Json pairs = Json::array();
  std::size_t failed = 0;
  for (const auto& p : report.pairs) {
    Json j{{"index", p.index},
           {"seed", p.seed},
           {"moment_mu", p.moment_mu},
           {"moment_nu", p.moment_nu},
           {"second_moment", p.second_moment},
           {"plan_hash", p.plan_hash}};
    if (p.tilde_d2) j["tilde_d2"] = breakdown_json(*p.tilde_d2);
    if (p.kplane_distance) {
      j["kplane"] = Json{{"value", *p.kplane_distance},
                         {"sup_centered", *p.kplane_sup_centered},
                         {"argmax_frame", p.kplane_argmax_frame}};
    }
    if (p.w2) j["w2"] = *p.w2;
    if (p.tilde_w2) j["tilde_w2"] = breakdown_json(*p.tilde_w2);
    if (p.msw2) {
      j["msw2"] = *p.msw2;
      j["mstw2"] = *p.mstw2;
      j["msw2_argmax_frame"] = p.msw2_argmax_frame;
    }
    if (p.sobolev) {
      j["sobolev"] = Json{{"h_minus1", p.sobolev->h_minus1},
                          {"hdot_minus1", p.sobolev->hdot_minus1},
                          {"hs", p.sobolev->hs},
                          {"kplane_norm", p.sobolev->kplane_norm}};
    }
    Json certs = Json::array();
    for (const auto& c : p.certificates) {
      certs.push_back(Json{{"id", c.id},
                           {"statement", c.statement},
                           {"tolerance", c.tolerance},
                           {"residual", c.residual},
                           {"passed", c.passed}});
      if (!c.passed) ++failed;
    }
    j["certificates"] = std::move(certs);
    pairs.push_back(std::move(j));
  }
  Json out{{"config", config_to_json(report.config)},
           {"config_hash", report.config_hash},
           {"pairs", std::move(pairs)},
           {"summary", Json{{"pairs", report.pairs.size()}, {"failed_certificates", failed}, {"passed", failed == 0}}}};
  if (include_runtime) out["runtime_seconds"] = report.runtime_seconds;
  return out;
}

MetricReport report_from_json(const Json& j) {
  MetricReport report;
  try {
    report.config = config_from_json(j.at("config"));
    report.config_hash = j.at("config_hash").get<std::string>();
    if (j.contains("runtime_seconds")) report.runtime_seconds = j.at("runtime_seconds").get<double>();
    for (const auto& pj : j.at("pairs")) {
      PairReport p;
      p.index = pj.at("index").get<std::size_t>();
      p.seed = pj.at("seed").get<std::uint64_t>();
      p.moment_mu = pj.at("moment_mu").get<double>();
      p.moment_nu = pj.at("moment_nu").get<double>();
      p.second_moment = pj.at("second_moment").get<double>();
      p.plan_hash = pj.at("plan_hash").get<std::string>();
      if (pj.contains("tilde_d2")) p.tilde_d2 = breakdown_from_json(pj.at("tilde_d2"));
      if (pj.contains("kplane")) {
        const auto& k = pj.at("kplane");
        p.kplane_distance = k.at("value").get<double>();
        p.kplane_sup_centered = k.at("sup_centered").get<double>();
        p.kplane_argmax_frame = k.at("argmax_frame").get<std::vector<double>>();
      }
      if (pj.contains("w2")) p.w2 = pj.at("w2").get<double>();
      if (pj.contains("tilde_w2")) p.tilde_w2 = breakdown_from_json(pj.at("tilde_w2"));
      if (pj.contains("msw2")) {
        p.msw2 = pj.at("msw2").get<double>();
        p.mstw2 = pj.at("mstw2").get<double>();
        p.msw2_argmax_frame = pj.at("msw2_argmax_frame").get<std::vector<double>>();
      }
      if (pj.contains("sobolev")) {
        const auto& s = pj.at("sobolev");
        p.sobolev = SobolevReport{s.at("h_minus1").get<double>(), s.at("hdot_minus1").get<double>(),
                                  s.at("hs").get<double>(), s.at("kplane_norm").get<double>()};
      }
      for (const auto& cj : pj.at("certificates")) {
        p.certificates.push_back(Certificate{cj.at("id").get<std::string>(), cj.at("statement").get<std::string>(),
                                             cj.at("tolerance").get<double>(), cj.at("residual").get<double>(),
                                             cj.at("passed").get<bool>()});
      }
      report.pairs.push_back(std::move(p));
    }
  } catch (const Json::exception& e) {
    throw Error(std::string("report: malformed JSON: ") + e.what());
  }
  return report;
}

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> columns{
      "index",    "seed",      "moment_mu",     "moment_nu", "second_moment",      "tilde_d2", "d2_centered",
      "d2_bary",  "d2_mass",   "kplane_D",      "kplane_sup_centered", "w2",      "tilde_w2", "w2_centered",
      "msw2",     "mstw2",     "C1",            "C2",        "C3",                 "C4",       "C5",
      "plan_hash"};
  return columns;
}

std::string report_to_csv(const MetricReport& report) {
  std::ostringstream out;
  const auto& columns = csv_columns();
  for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
  out << '\n';
  auto number = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
  for (const auto& p : report.pairs) {
    std::vector<std::string> row;
    row.push_back(std::to_string(p.index));
    row.push_back(std::to_string(p.seed));
    row.push_back(format_number(p.moment_mu));
    row.push_back(format_number(p.moment_nu));
    row.push_back(format_number(p.second_moment));
    row.push_back(p.tilde_d2 ? format_number(p.tilde_d2->total()) : "");
    row.push_back(p.tilde_d2 ? format_number(p.tilde_d2->centered) : "");
    row.push_back(p.tilde_d2 ? format_number(p.tilde_d2->bary_term) : "");
    row.push_back(p.tilde_d2 ? format_number(p.tilde_d2->mass_term) : "");
    row.push_back(number(p.kplane_distance));
    row.push_back(number(p.kplane_sup_centered));
    row.push_back(number(p.w2));
    row.push_back(p.tilde_w2 ? format_number(p.tilde_w2->total()) : "");
    row.push_back(p.tilde_w2 ? format_number(p.tilde_w2->centered) : "");
    row.push_back(number(p.msw2));
    row.push_back(number(p.mstw2));
    for (const char* id : {"C1", "C2", "C3", "C4", "C5"}) {
      std::string cell;
      for (const auto& c : p.certificates)
        if (c.id == id) cell = c.passed ? "pass" : "fail";
      row.push_back(cell);
    }
    row.push_back(p.plan_hash);
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << row[c];
    out << '\n';
  }
  return out.str();
}

void export_report(const MetricReport& report, const std::string& path, bool include_runtime) {
  const bool csv = path.size() >= 4 && path.substr(path.size() - 4) == ".csv";
  write_text_file(path, csv ? report_to_csv(report) : canonical_dump(report_to_json(report, include_runtime)));
}

HolderFit fit_holder(std::vector<HolderPoint> points) {
  require(points.size() >= 5, "fit_holder: need at least 5 family points");
  std::stable_sort(points.begin(), points.end(), [](const HolderPoint& a, const HolderPoint& b) { return a.t > b.t; });
  const bool with_msw = std::all_of(points.begin(), points.end(), [](const HolderPoint& p) { return p.msw.has_value(); });
  for (const auto& p : points) {
    require(p.d > 0.0 && p.w > 0.0 && std::isfinite(p.d) && std::isfinite(p.w),
            "fit_holder: distances must be positive and finite");
    if (with_msw) require(*p.msw > 0.0 && std::isfinite(*p.msw), "fit_holder: distances must be positive and finite");
  }
  require(points.back().d < points.front().d && points.back().w < points.front().w,
          "fit_holder: non-vanishing family (distances do not decrease along t)");
  HolderFit fit;
  fit.points = points.size();
  std::vector<double> log_d;
  std::vector<double> log_w;
  std::vector<double> log_m;
  for (const auto& p : points) {
    log_d.push_back(std::log(p.d));
    log_w.push_back(std::log(p.w));
    if (with_msw) log_m.push_back(std::log(*p.msw));
  }
  fit.w_vs_d = least_squares(log_d, log_w);
  if (with_msw) fit.w_vs_msw = least_squares(log_m, log_w);
  fit.exponent_in_range = fit.w_vs_d.slope > 0.0 && fit.w_vs_d.slope <= 1.05;
  fit.monotone = true;
  for (std::size_t i = 1; i < points.size(); ++i) {
    fit.monotone = fit.monotone && points[i].d < points[i - 1].d && points[i].w < points[i - 1].w;
    if (with_msw) fit.monotone = fit.monotone && *points[i].msw < *points[i - 1].msw;
  }
  return fit;
}

HolderStudy run_holder_family(HolderFamily family, std::uint64_t seed, std::size_t count, double t_max, double t_min,
                              Eigen::Index n) {
  require(count >= 5, "holder family: need at least 5 points");
  require(t_max > t_min && t_min > 0.0, "holder family: need t_max > t_min > 0");
  Rng rng(seed);
  const Eigen::Index d = family == HolderFamily::CovarianceScaling ? 1 : 2;
  Measure base = gaussian_cloud(Eigen::VectorXd::Zero(d), Eigen::MatrixXd::Identity(d, d), n, rng);
  if (family == HolderFamily::CovarianceScaling) {
    Eigen::ArrayXd levels(n);
    for (Eigen::Index i = 0; i < n; ++i) levels(i) = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    const Eigen::ArrayXd quantiles = levels.ndtri();
    base = Measure::uniform(Eigen::MatrixXd(quantiles.transpose().matrix()));
  }
  const Eigen::VectorXd direction = unit_vector(d, rng);
  Eigen::VectorXd far_mean = Eigen::VectorXd::Zero(d);
  far_mean(0) = 2.0;
  const Measure lambda = gaussian_cloud(far_mean, 0.5 * Eigen::MatrixXd::Identity(d, d), n, rng);

  std::vector<SubspaceD> subspaces;
  if (d >= 2) {
    for (std::size_t j = 0; j < 8; ++j) subspaces.push_back(haar_sample(d, 1, split_seed(seed, 1000 + j)));
  }
  TransportOptions transport;
  transport.atom_cap = static_cast<std::size_t>(2 * n);
  const SearchBudget budget{2, 6, 0.5, 0.7};

  HolderStudy study{family, {}, {}};
  study.points.resize(count);
  parallel_for(count, [&](std::size_t i) {
    const double t = t_max * std::pow(t_min / t_max, static_cast<double>(i) / static_cast<double>(count - 1));
    Measure nu = base;
    switch (family) {
      case HolderFamily::Translation:
        nu = shift(base, -t * direction);
        break;
      case HolderFamily::CovarianceScaling:
        nu = Measure(base.points() * (1.0 + t), base.weights());
        break;
      case HolderFamily::MixtureInterpolation: {
        Eigen::MatrixXd points(d, 2 * n);
        points << base.points(), lambda.points();
        Eigen::VectorXd weights(2 * n);
        weights << (1.0 - t) * base.weights(), t * lambda.weights();
        nu = Measure(std::move(points), weights);
        break;
      }
    }
    RadialSpec radial = default_radial_spec(base, nu);
    radial.seed = split_seed(seed, 7);
    const FrequencyPlan plan =
        subspaces.empty() ? build_global_plan(d, radial) : build_frequency_plan(subspaces, radial, base, nu);
    HolderPoint p;
    p.t = t;
    p.d = fourier_distances(base, nu, plan).tilde_d2.total();
    p.w = tilde_w2(base, nu, {}, transport).total();
    if (!plan.subspaces.empty()) {
      p.msw = max_sliced(base, nu, 1, SlicedMode::TildeW2, budget, split_seed(seed, 3), plan.subspaces, {}, transport)
                  .value;
    }
    study.points[i] = p;
  });
  study.fit = fit_holder(study.points);
  return study;
}

}  // namespace kplane
