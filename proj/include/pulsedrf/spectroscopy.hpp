// Copyright 2026 The pulsedrf Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Spectral lineshapes (Voigt) and their fitting, etalon / Fabry-Perot
// filtering, signal-to-background accounting and IRF-convolved lifetime fits.
// Frequencies in GHz, times in ns.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <tuple>
#include <vector>

#include "pulsedrf/error.hpp"
#include "pulsedrf/histogram.hpp"
#include "pulsedrf/least_squares.hpp"
#include "pulsedrf/random.hpp"
#include "pulsedrf/shapes.hpp"
#include "pulsedrf/special.hpp"

namespace pulsedrf::spectroscopy {

struct SpectrumTrace {
  std::vector<double> frequency_ghz;
  std::vector<double> intensity;

  std::size_t size() const { return frequency_ghz.size(); }

  double spacing() const {
    return (frequency_ghz.back() - frequency_ghz.front()) / static_cast<double>(size() - 1);
  }

  void validate() const {
    detail::require(frequency_ghz.size() == intensity.size(), "trace columns differ in length");
    detail::require(size() >= 2, "trace needs at least two points");
    const double d = spacing();
    detail::require(d > 0.0, "frequency grid must be strictly increasing");
    for (std::size_t i = 1; i < size(); ++i) {
      const double step = frequency_ghz[i] - frequency_ghz[i - 1];
      detail::require(step > 0.0 && std::abs(step - d) <= 1e-6 * d,
                      "frequency grid must be strictly increasing and uniform");
    }
    for (double v : intensity)
      detail::require(v >= 0.0 && std::isfinite(v), "trace intensities must be non-negative");
  }

  bool same_grid(const SpectrumTrace& o) const {
    if (o.size() != size()) return false;
    for (std::size_t i = 0; i < size(); ++i)
      if (std::abs(o.frequency_ghz[i] - frequency_ghz[i]) > 1e-9 * std::abs(spacing())) return false;
    return true;
  }

  // Trapezoid-free rectangle rule, exact for the uniform grids used here.
  double integral() const {
    double s = 0.0;
    for (double v : intensity) s += v;
    return s * spacing();
  }
};

inline std::vector<double> uniform_grid(double lo, double hi, std::size_t n) {
  detail::require(n >= 2 && hi > lo, "grid needs two or more points over a positive span");
  std::vector<double> g(n);
  const double d = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) g[i] = lo + d * static_cast<double>(i);
  return g;
}

template <class F>
SpectrumTrace make_trace(const std::vector<double>& grid, F&& fn) {
  SpectrumTrace t{grid, std::vector<double>(grid.size())};
  for (std::size_t i = 0; i < grid.size(); ++i) t.intensity[i] = fn(grid[i]);
  return t;
}

inline double lorentzian(double f, double centre, double fwhm) {
  const double g = 0.5 * fwhm;
  const double x = f - centre;
  return g / (std::numbers::pi * (x * x + g * g));
}

inline double gaussian(double f, double centre, double fwhm) {
  const double s = shapes::fwhm_to_sigma(fwhm);
  const double x = (f - centre) / s;
  return std::exp(-0.5 * x * x) / (s * std::sqrt(2.0 * std::numbers::pi));
}

// Unit-area Voigt profile parameterized by the Lorentzian and Gaussian FWHMs.
inline double voigt_eval(double f, double centre, double lorentzian_fwhm, double gaussian_fwhm) {
  detail::require(lorentzian_fwhm >= 0.0 && gaussian_fwhm >= 0.0, "Voigt widths must be non-negative");
  detail::require(lorentzian_fwhm > 0.0 || gaussian_fwhm > 0.0,
                  "Voigt profile with both widths zero is a delta function");
  if (gaussian_fwhm == 0.0) return lorentzian(f, centre, lorentzian_fwhm);
  if (lorentzian_fwhm == 0.0) return gaussian(f, centre, gaussian_fwhm);
  const double s = shapes::fwhm_to_sigma(gaussian_fwhm);
  const std::complex<double> z{(f - centre) / (s * std::numbers::sqrt2),
                               0.5 * lorentzian_fwhm / (s * std::numbers::sqrt2)};
  return special::faddeeva(z).real() / (s * std::sqrt(2.0 * std::numbers::pi));
}

// Olivero-Longbothum approximation of the Voigt FWHM (about 0.02 % accurate).
inline double voigt_fwhm_approx(double lorentzian_fwhm, double gaussian_fwhm) {
  const double l = lorentzian_fwhm;
  const double g = gaussian_fwhm;
  return 0.5346 * l + std::sqrt(0.2166 * l * l + g * g);
}

struct VoigtGuess {
  double center_ghz = 0.0;
  double lorentzian_fwhm_ghz = 0.0;
  double gaussian_fwhm_ghz = 0.0;
  double amplitude = 0.0;
  double baseline = 0.0;
};

struct VoigtFitResult {
  double center_ghz = 0.0;
  double lorentzian_fwhm_ghz = 0.0;
  double gaussian_fwhm_ghz = 0.0;
  // Integrated area above the baseline.
  double amplitude = 0.0;
  double baseline = 0.0;
  // Standard errors, same order as the fields above.
  std::array<double, 5> errors{};
  Eigen::MatrixXd covariance;
  double ssr = 0.0;

  double fwhm() const { return voigt_fwhm_approx(lorentzian_fwhm_ghz, gaussian_fwhm_ghz); }
};

inline constexpr std::size_t kMinBinsAcrossFwhm = 20;

// Starting point from the trace moments.
inline VoigtGuess moment_guess(const SpectrumTrace& trace) {
  const auto& y = trace.intensity;
  const auto& f = trace.frequency_ghz;
  VoigtGuess g;
  g.baseline = *std::min_element(y.begin(), y.end());
  double sum = 0.0;
  double first = 0.0;
  std::size_t peak = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double v = y[i] - g.baseline;
    sum += v;
    first += v * f[i];
    if (y[i] > y[peak]) peak = i;
  }
  detail::require(sum > 0.0, "trace has no peak above its baseline");
  g.center_ghz = first / sum;
  const double half = 0.5 * (y[peak] - g.baseline);
  std::size_t above = 0;
  for (double v : y)
    if (v - g.baseline >= half) ++above;
  const double fwhm = static_cast<double>(above) * trace.spacing();
  g.lorentzian_fwhm_ghz = fwhm / 1.6376;
  g.gaussian_fwhm_ghz = fwhm / 1.6376;
  g.amplitude = sum * trace.spacing();
  return g;
}

// Levenberg-Marquardt fit of amplitude * Voigt + baseline.
inline VoigtFitResult voigt_fit(const SpectrumTrace& trace, std::optional<VoigtGuess> init = {},
                                const fit::LsqOptions& options = {}) {
  trace.validate();
  const VoigtGuess g = init ? *init : moment_guess(trace);
  const double est_fwhm = voigt_fwhm_approx(g.lorentzian_fwhm_ghz, g.gaussian_fwhm_ghz);
  detail::require(est_fwhm / trace.spacing() >= static_cast<double>(kMinBinsAcrossFwhm),
                  "trace resolves the peak with fewer than 20 bins across its FWHM");

  const auto& f = trace.frequency_ghz;
  const auto& y = trace.intensity;
  const auto n = static_cast<int>(trace.size());
  auto widths = [](double l, double gw) {
    l = std::abs(l);
    gw = std::abs(gw);
    if (l + gw < 1e-12) gw = 1e-12;
    return std::pair{l, gw};
  };
  const fit::Residuals residuals = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
    const auto [l, gw] = widths(p(1), p(2));
    for (int i = 0; i < n; ++i)
      r(i) = p(3) * voigt_eval(f[static_cast<std::size_t>(i)], p(0), l, gw) + p(4) -
             y[static_cast<std::size_t>(i)];
  };
  Eigen::VectorXd x0(5);
  x0 << g.center_ghz, g.lorentzian_fwhm_ghz, g.gaussian_fwhm_ghz, g.amplitude, g.baseline;
  const auto r = fit::least_squares(residuals, x0, n, options);

  VoigtFitResult out;
  out.center_ghz = r.params(0);
  std::tie(out.lorentzian_fwhm_ghz, out.gaussian_fwhm_ghz) = widths(r.params(1), r.params(2));
  out.amplitude = r.params(3);
  out.baseline = r.params(4);
  out.covariance = r.covariance;
  for (int i = 0; i < 5; ++i) out.errors[static_cast<std::size_t>(i)] = r.standard_error(i);
  out.ssr = r.ssr;
  return out;
}

enum class FilterKind { etalon_lorentzian, fabry_perot_airy };

struct FilterParams {
  FilterKind kind = FilterKind::etalon_lorentzian;
  double bandwidth_fwhm_ghz = 20.0;
  double center_ghz = 0.0;
  // Fabry-Perot only; the free spectral range is finesse * bandwidth.
  double finesse = 0.0;
  double peak_transmittance = 1.0;

  void validate() const {
    detail::require(bandwidth_fwhm_ghz > 0.0, "filter bandwidth must be positive");
    detail::require(peak_transmittance > 0.0 && peak_transmittance <= 1.0,
                    "filter transmittance must lie in (0, 1]");
    if (kind == FilterKind::fabry_perot_airy)
      detail::require(finesse > 1.0, "Fabry-Perot finesse must exceed 1");
  }

  double free_spectral_range_ghz() const { return finesse * bandwidth_fwhm_ghz; }

  double transmission(double f) const {
    const double x = f - center_ghz;
    if (kind == FilterKind::etalon_lorentzian) {
      const double u = 2.0 * x / bandwidth_fwhm_ghz;
      return peak_transmittance / (1.0 + u * u);
    }
    const double c = 2.0 * finesse / std::numbers::pi;
    const double s = std::sin(std::numbers::pi * x / free_spectral_range_ghz());
    return peak_transmittance / (1.0 + c * c * s * s);
  }
};

inline void require_resolvable(const SpectrumTrace& trace, const FilterParams& filter) {
  detail::require(trace.spacing() <= filter.bandwidth_fwhm_ghz / 4.0,
                  "frequency grid too coarse to resolve the filter bandwidth");
}

// Light transmitted through the filter: pointwise product with its
// transmission profile.
inline SpectrumTrace apply_filter(const SpectrumTrace& trace, const FilterParams& filter) {
  trace.validate();
  filter.validate();
  require_resolvable(trace, filter);
  SpectrumTrace out = trace;
  for (std::size_t i = 0; i < out.size(); ++i)
    out.intensity[i] *= filter.transmission(trace.frequency_ghz[i]);
  return out;
}

// Scanning-cavity record: transmitted power with the cavity resonance tuned
// to each grid frequency, i.e. the source spectrum convolved with the
// cavity line. `filter.center_ghz` is ignored.
inline SpectrumTrace scan_cavity(const SpectrumTrace& trace, const FilterParams& filter) {
  trace.validate();
  filter.validate();
  require_resolvable(trace, filter);
  FilterParams centred = filter;
  centred.center_ghz = 0.0;
  const std::size_t n = trace.size();
  const double d = trace.spacing();
  std::vector<double> kernel(2 * n - 1);
  for (std::size_t k = 0; k < kernel.size(); ++k)
    kernel[k] = centred.transmission((static_cast<double>(k) - static_cast<double>(n - 1)) * d);
  SpectrumTrace out{trace.frequency_ghz, std::vector<double>(n, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += trace.intensity[j] * kernel[j + n - 1 - i];
    out.intensity[i] = s * d;
  }
  return out;
}

// FWHM of a single-peaked trace by linear interpolation of the half-maximum
// crossings.
inline double trace_fwhm(const SpectrumTrace& trace) {
  const auto& y = trace.intensity;
  const auto& f = trace.frequency_ghz;
  const auto peak = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
  const double half = 0.5 * y[peak];
  std::size_t lo = peak;
  while (lo > 0 && y[lo - 1] >= half) --lo;
  std::size_t hi = peak;
  while (hi + 1 < y.size() && y[hi + 1] >= half) ++hi;
  detail::require(lo > 0 && hi + 1 < y.size(), "peak half-maximum lies outside the trace");
  auto cross = [&](std::size_t a, std::size_t b) {
    return f[a] + (half - y[a]) * (f[b] - f[a]) / (y[b] - y[a]);
  };
  return cross(hi, hi + 1) - cross(lo - 1, lo);
}

// Transform-limited spectrum of a Gaussian pulse: intensity FWHM in GHz is
// 441 / duration_ps. Normalized to unit area times `area`.
inline SpectrumTrace laser_spectrum(const std::vector<double>& grid, double pulse_fwhm_ps,
                                    double area = 1.0, double centre_ghz = 0.0) {
  detail::require(pulse_fwhm_ps > 0.0, "pulse duration must be positive");
  const double fwhm = 2.0 * std::numbers::ln2 / std::numbers::pi / (pulse_fwhm_ps * 1e-3);
  return make_trace(grid, [&](double f) { return area * gaussian(f, centre_ghz, fwhm); });
}

inline double transform_limited_bandwidth_ghz(double pulse_fwhm_ps) {
  return 2.0 * std::numbers::ln2 / std::numbers::pi / (pulse_fwhm_ps * 1e-3);
}

struct SignalToBackground {
  double ratio = 0.0;
  // Set when the background integrates to zero.
  bool infinite = false;
};

// Integrated signal over integrated background plus a constant dark term
// (same units as the integrals), optionally behind a filter.
inline SignalToBackground signal_to_background(const SpectrumTrace& signal,
                                               const SpectrumTrace& background,
                                               const std::optional<FilterParams>& filter = {},
                                               double dark = 0.0) {
  signal.validate();
  background.validate();
  detail::require(signal.same_grid(background), "signal and background must share a grid");
  detail::require(dark >= 0.0, "dark term must be non-negative");
  const SpectrumTrace s = filter ? apply_filter(signal, *filter) : signal;
  const SpectrumTrace b = filter ? apply_filter(background, *filter) : background;
  const double den = b.integral() + dark;
  if (den <= 0.0) return {std::numeric_limits<double>::infinity(), true};
  return {s.integral() / den, false};
}

struct LifetimeFitResult {
  double T1_ns = 0.0;
  double T1_error_ns = 0.0;
  double amplitude = 0.0;
  double offset = 0.0;
  double onset_ns = 0.0;
  Eigen::MatrixXd covariance;
  double ssr = 0.0;
};

// Expected counts in bin i for an exponential decay of total area
// `amplitude` starting at `onset`, smeared by a Gaussian IRF, on top of a
// constant per-ns `offset`.
inline double decay_bin(const DecayHistogram& h, std::size_t i, double amplitude, double onset,
                        double T1, double irf_sigma, double offset) {
  return amplitude * shapes::exp_gauss_mass(h.edge(i), h.edge(i + 1), onset, T1, irf_sigma) +
         offset * h.bin_width_ns;
}

enum class Weighting { poisson, uniform };

// Least-squares fit of (Gaussian IRF) * exponential with free amplitude,
// offset, onset and T1. A zero IRF width fits a bare exponential. Poisson
// weighting divides each residual by the square root of the model count
// (floored at one count).
inline LifetimeFitResult lifetime_fit(const DecayHistogram& hist, double irf_fwhm_ns,
                                      Weighting weighting = Weighting::poisson,
                                      const fit::LsqOptions& options = {}) {
  hist.validate();
  detail::require(irf_fwhm_ns >= 0.0, "IRF width must be non-negative");
  const double sigma = shapes::fwhm_to_sigma(irf_fwhm_ns);
  const auto& c = hist.counts;
  const auto n = static_cast<int>(hist.size());
  const auto peak = static_cast<std::size_t>(std::max_element(c.begin(), c.end()) - c.begin());
  const double floor = *std::min_element(c.begin(), c.end());
  double tau0 = hist.bin_width_ns;
  for (std::size_t i = peak; i < c.size(); ++i) {
    if (c[i] - floor < (c[peak] - floor) / std::numbers::e) {
      tau0 = std::max(hist.center(i) - hist.center(peak), hist.bin_width_ns);
      break;
    }
  }
  const double onset0 = sigma > 0.0 ? hist.center(peak) - sigma : hist.edge(peak);
  const double area0 = hist.total() - floor * static_cast<double>(n);

  const fit::Residuals residuals = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
    const double tau = std::abs(p(2));
    for (int i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(i);
      const double model = decay_bin(hist, k, p(0), p(1), tau, sigma, p(3));
      r(i) = model - c[k];
      if (weighting == Weighting::poisson) r(i) /= std::sqrt(std::max(model, 1.0));
    }
  };
  Eigen::VectorXd x0(4);
  x0 << area0, onset0, tau0, floor / hist.bin_width_ns;
  const auto r = fit::least_squares(residuals, x0, n, options);

  LifetimeFitResult out;
  out.amplitude = r.params(0);
  out.onset_ns = r.params(1);
  out.T1_ns = std::abs(r.params(2));
  out.offset = r.params(3);
  out.T1_error_ns = r.standard_error(2);
  out.covariance = r.covariance;
  out.ssr = r.ssr;
  detail::require(hist.upper() - out.onset_ns >= 10.0 * out.T1_ns,
                  "decay histogram spans fewer than 10 lifetimes after the onset");
  return out;
}

// Synthetic data for fitting studies.

// area * Voigt + baseline plus Gaussian noise of standard deviation
// `noise_sigma`; values are floored at zero.
inline SpectrumTrace synthetic_voigt_trace(const std::vector<double>& grid, double centre, double lorentzian_fwhm,
                                           double gaussian_fwhm, double area, double baseline,
                                           double noise_sigma, std::uint64_t seed) {
  detail::require(noise_sigma >= 0.0 && baseline >= 0.0, "noise and baseline must be non-negative");
  auto rng = block_engine(seed, 0, Stream::noise);
  std::normal_distribution<double> noise(0.0, 1.0);
  return make_trace(grid, [&](double f) {
    const double y = area * voigt_eval(f, centre, lorentzian_fwhm, gaussian_fwhm) + baseline;
    return std::max(0.0, y + noise_sigma * noise(rng));
  });
}

// Decay histogram: `counts` photons with lifetime T1 from `onset`, Gaussian
// IRF, and a flat background of `background` counts per bin. With a seed the
// bins are Poisson-sampled.
inline DecayHistogram synthetic_decay(double T1_ns, double irf_fwhm_ns, double bin_width_ns, double span_ns,
                                      double onset_ns, double counts, double background,
                                      std::optional<std::uint64_t> seed = {}) {
  detail::require(T1_ns > 0.0 && counts > 0.0 && background >= 0.0, "decay parameters out of range");
  auto h = DecayHistogram::zeros(0.0, span_ns, bin_width_ns);
  const double sigma = shapes::fwhm_to_sigma(irf_fwhm_ns);
  for (std::size_t i = 0; i < h.size(); ++i)
    h.counts[i] = decay_bin(h, i, counts, onset_ns, T1_ns, sigma, background / bin_width_ns);
  if (seed) {
    auto rng = block_engine(*seed, 0, Stream::noise);
    for (auto& c : h.counts) {
      std::poisson_distribution<long long> p(c);
      c = c > 0.0 ? static_cast<double>(p(rng)) : 0.0;
    }
  }
  return h;
}

}  // namespace pulsedrf::spectroscopy
