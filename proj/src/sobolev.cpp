#include "kplane/sobolev.hpp"

#include <cmath>
#include <complex>
#include <string>

#include <unsupported/Eigen/FFT>

#include "kplane/parallel.hpp"
#include "kplane/summation.hpp"
#include "kplane/transport.hpp"

namespace kplane {

namespace {

const double kPi = std::acos(-1.0);

void fft_axis(const RegularGrid<double>& grid, Eigen::Index axis, Eigen::VectorXcd& data) {
  const auto n = grid.shape(axis);
  if (n == 1) return;
  const auto stride = grid.strides()[static_cast<std::size_t>(axis)];
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> in(static_cast<std::size_t>(n));
  std::vector<std::complex<double>> out;
  for (Eigen::Index start = 0; start < grid.size(); ++start) {
    if ((start / stride) % n != 0) continue;
    for (Eigen::Index i = 0; i < n; ++i) in[static_cast<std::size_t>(i)] = data(start + i * stride);
    fft.fwd(out, in);
    for (Eigen::Index i = 0; i < n; ++i) data(start + i * stride) = out[static_cast<std::size_t>(i)];
  }
}

double frequency_weight(double xi2, double s, bool homogeneous, bool at_origin) {
  if (!homogeneous) return s == 0.0 ? 1.0 : std::pow(1.0 + xi2, s);
  if (s == 0.0) return 1.0;
  if (at_origin) return 0.0;
  return s == 1.0 ? xi2 : std::pow(xi2, s);
}

// Weighted spectral energy (2 pi)^-d sum |f-hat|^2 w dxi, with the share above
// half the Nyquist frequency checked against the tolerance.
double weighted_energy(const SpectralGrid& spectrum, double s, const SobolevOptions& options, const char* what) {
  const auto& grid = spectrum.grid;
  const auto d = grid.dim();
  CompensatedSum<double> total;
  CompensatedSum<double> high;
  std::vector<Eigen::Index> index(static_cast<std::size_t>(d), 0);
  for (Eigen::Index flat = 0; flat < spectrum.size(); ++flat) {
    double xi2 = 0.0;
    bool origin = true;
    bool beyond = false;
    for (Eigen::Index a = 0; a < d; ++a) {
      const double xi = spectrum.axis_frequencies[static_cast<std::size_t>(a)](index[static_cast<std::size_t>(a)]);
      xi2 += xi * xi;
      origin = origin && xi == 0.0;
      beyond = beyond || std::abs(xi) > 0.5 * kPi / grid.spacing()(a);
    }
    const double term = std::norm(spectrum.values(flat)) * frequency_weight(xi2, s, options.homogeneous, origin);
    total.add(term);
    if (beyond) high.add(term);
    for (Eigen::Index a = d - 1; a >= 0; --a) {
      if (++index[static_cast<std::size_t>(a)] < grid.shape(a)) break;
      index[static_cast<std::size_t>(a)] = 0;
    }
  }
  const double energy = total.value();
  if (energy > 0.0) {
    const double share = high.value() / energy;
    require(share <= options.nyquist_tolerance,
            std::string(what) + ": insufficient grid resolution for s = " + std::to_string(s) + " (" +
                std::to_string(100.0 * share) + "% of the weighted energy above half the Nyquist frequency)");
  }
  return std::max(0.0, energy) * spectrum.frequency_cell * std::pow(2.0 * kPi, -static_cast<double>(d));
}

void check_mean(const GridFunction<double>& f, double s, const SobolevOptions& options) {
  if (!options.homogeneous || s >= 0.0) return;
  const auto d = static_cast<double>(f.grid.dim());
  const double mean = f.integral();
  const double scale = f.values.cwiseAbs().sum() * f.grid.cell_volume();
  const bool zero_mean = std::abs(mean) <= options.zero_mean_tolerance * scale;
  if (s <= -d / 2.0) {
    require(zero_mean, "hs_norm: homogeneous norm with s <= -d/2 requires zero mean");
  } else if (!zero_mean) {
    warn_once("hs_norm.mean", "hs_norm: nonzero mean with homogeneous s < 0; the xi = 0 cell is left out");
  }
}

}  // namespace

Eigen::VectorXd SpectralGrid::frequency(Eigen::Index index) const {
  const auto d = grid.dim();
  Eigen::VectorXd xi(d);
  for (Eigen::Index a = 0; a < d; ++a) {
    const auto stride = grid.strides()[static_cast<std::size_t>(a)];
    xi(a) = axis_frequencies[static_cast<std::size_t>(a)]((index / stride) % grid.shape(a));
  }
  return xi;
}

SpectralGrid spectral_transform(const GridFunction<double>& f) {
  const auto& grid = f.grid;
  const auto d = grid.dim();
  SpectralGrid out{grid, {}, f.values.cast<std::complex<double>>(), 1.0};
  for (Eigen::Index a = 0; a < d; ++a) {
    const auto n = grid.shape(a);
    const double h = grid.spacing()(a);
    Eigen::VectorXd xi(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto shifted = i < (n + 1) / 2 ? i : i - n;
      xi(i) = 2.0 * kPi * static_cast<double>(shifted) / (static_cast<double>(n) * h);
    }
    out.axis_frequencies.push_back(std::move(xi));
    out.frequency_cell *= 2.0 * kPi / (static_cast<double>(n) * h);
    fft_axis(grid, a, out.values);
  }
  // Node positions are origin + (i + 1/2) h, hence the phase factor.
  const Eigen::VectorXd first = grid.origin() + 0.5 * grid.spacing();
  const double volume = grid.cell_volume();
  for (Eigen::Index flat = 0; flat < out.size(); ++flat) {
    const double phase = first.dot(out.frequency(flat));
    out.values(flat) *= volume * std::polar(1.0, -phase);
  }
  return out;
}

double parseval_defect(const GridFunction<double>& f, const SpectralGrid& spectrum) {
  const double physical = compensated_sum(f.values.cwiseAbs2()) * f.grid.cell_volume();
  CompensatedSum<double> spectral;
  for (Eigen::Index i = 0; i < spectrum.size(); ++i) spectral.add(std::norm(spectrum.values(i)));
  const double transformed =
      spectral.value() * spectrum.frequency_cell * std::pow(2.0 * kPi, -static_cast<double>(f.grid.dim()));
  if (physical == 0.0) return transformed;
  return std::abs(physical - transformed) / physical;
}

double hs_norm(const GridFunction<double>& f, double s, const SobolevOptions& options) {
  require(std::isfinite(s), "hs_norm: s must be finite");
  check_mean(f, s, options);
  return std::sqrt(weighted_energy(spectral_transform(f), s, options, "hs_norm"));
}

double hs_norm(const GridFunction<double>& f, const GridFunction<double>& g, double s, const SobolevOptions& options) {
  return hs_norm(f - g, s, options);
}

double hs_norm_kplane(const KPlaneData& u, double s, const SobolevOptions& options) {
  require(std::isfinite(s), "hs_norm_kplane: s must be finite");
  SobolevOptions fiber_options = options;
  fiber_options.homogeneous = false;
  std::vector<double> energies(u.size(), 0.0);
  parallel_for(u.size(), [&](std::size_t j) {
    const auto* fiber = std::get_if<GridFunction<double>>(&u.fibers[j]);
    require(fiber != nullptr, "hs_norm_kplane: fibers must be gridded functions");
    energies[j] = weighted_energy(spectral_transform(*fiber), s, fiber_options, "hs_norm_kplane");
  });
  CompensatedSum<double> total;
  for (std::size_t j = 0; j < u.size(); ++j) total.add(u.quad_weights(static_cast<Eigen::Index>(j)) * energies[j]);
  return std::sqrt(std::max(0.0, total.value()));
}

namespace {

KPlaneData transform_fibers(const GridFunction<double>& f, Eigen::Index k, const KPlaneSobolevOptions& options) {
  const auto quadrature = grassmann_quadrature(f.grid.dim(), k, options.subspaces, options.seed, options.quadrature);
  const double margin = options.plane.interpolation == Interpolation::Linear ? 1.0 : 2.0;
  std::vector<Fiber> fibers(quadrature.nodes.size(), Fiber(Measure::dirac(Eigen::VectorXd::Zero(1))));
  parallel_for(quadrature.nodes.size(), [&](std::size_t j) {
    const auto& alpha = quadrature.nodes[j];
    fibers[j] = kplane_density(f, alpha, default_fiber_grid(f.grid, alpha, 0.0, margin), options.plane);
  });
  return KPlaneData(quadrature.nodes, std::move(fibers), quadrature.weights);
}

}  // namespace

SobolevGain sobolev_gain_ratio(const GridFunction<double>& f, double s, Eigen::Index k,
                               const KPlaneSobolevOptions& options) {
  const auto d = f.grid.dim();
  require(d >= 2 && k >= 1 && k <= d - 1, "sobolev_gain_ratio: need 1 <= k <= d - 1");
  SobolevOptions ambient = options.norm;
  ambient.homogeneous = false;
  SobolevGain out;
  out.ambient_norm = hs_norm(f, s, ambient);
  require(out.ambient_norm > 0.0, "sobolev_gain_ratio: zero function (0/0)");
  const auto transformed = transform_fibers(f, k, options);
  out.kplane_norm = hs_norm_kplane(transformed, s + 0.5 * static_cast<double>(k), ambient);
  out.ratio = out.kplane_norm / out.ambient_norm;
  return out;
}

W2SobolevRatio w2_sobolev_ratio(const GriddedDensity<double>& f, const GriddedDensity<double>& g, Eigen::Index k,
                                const KPlaneSobolevOptions& options, std::size_t atom_cap) {
  const auto d = f.dim();
  require(f.grid().same_layout(g.grid()), "w2_sobolev_ratio: densities must share one grid");
  require(d >= 2 && k >= 1 && k <= d - 1, "w2_sobolev_ratio: need 1 <= k <= d - 1");
  require(std::abs(f.mass() - 1.0) <= 1e-9 && std::abs(g.mass() - 1.0) <= 1e-9,
          "w2_sobolev_ratio: densities must be probability densities");
  require(f.values().minCoeff() > 0.0 && g.values().minCoeff() > 0.0,
          "w2_sobolev_ratio: densities must be bounded below by a positive constant on the grid box");
  W2SobolevRatio out;
  if (f.values() == g.values()) return out;

  const GridFunction<double> difference = f.function() - g.function();
  SobolevOptions inhomogeneous = options.norm;
  inhomogeneous.homogeneous = false;
  SobolevOptions homogeneous = options.norm;
  homogeneous.homogeneous = true;
  out.h_minus1 = hs_norm(difference, -1.0, inhomogeneous);
  out.hdot_minus1 = hs_norm(difference, -1.0, homogeneous);
  out.kplane_norm = hs_norm_kplane(transform_fibers(difference, k, options), 0.5 * static_cast<double>(k) - 1.0,
                                   inhomogeneous);

  TransportOptions transport;
  transport.atom_cap = atom_cap;
  transport.mass_policy = MassPolicy::Rescale;
  out.w2 = w2_exact(f.to_measure(), g.to_measure(), transport).value;
  if (out.w2 > 0.0) out.ratio = out.kplane_norm / out.w2;
  return out;
}

}  // namespace kplane
