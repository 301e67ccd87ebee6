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

// Hanbury Brown-Twiss and Hong-Ou-Mandel experiments: the analytic
// five-peak model of an unbalanced Mach-Zehnder, histogram synthesis and
// peak-area fitting, g2(0) estimation, visibilities, and an event-level
// Monte-Carlo of the whole chain.
//
// Coincidence delays are tau = t_d - t_c between detectors c and d. Areas
// are expected coincidences per excitation cycle in the limit of low
// detection efficiency, where every photon pair landing on different
// detectors registers.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "pulsedrf/emitter.hpp"
#include "pulsedrf/error.hpp"
#include "pulsedrf/histogram.hpp"
#include "pulsedrf/photonics.hpp"
#include "pulsedrf/random.hpp"
#include "pulsedrf/shapes.hpp"

namespace pulsedrf::interferometry {

struct HOMConfig {
  double R = 0.5;
  double T = 0.5;
  // 1 - first-order visibility of the Mach-Zehnder.
  double epsilon = 0.0;
  double delay_ns = 2.0;
  double rep_period_ns = 12.2;
  // FWHM of the two-detector coincidence response.
  double detector_irf_fwhm_ns = 0.5;
  double M = 1.0;
  double g2 = 0.0;

  void validate() const {
    detail::require(R >= 0.0 && T >= 0.0 && std::abs(R + T - 1.0) <= 1e-9, "HOM splitter needs R + T = 1");
    detail::require(epsilon >= 0.0 && epsilon <= 1.0, "epsilon must lie in [0, 1]");
    detail::require(M >= 0.0 && M <= 1.0, "indistinguishability M must lie in [0, 1]");
    detail::require(g2 >= 0.0 && g2 < 1.0, "g2 must lie in [0, 1)");
    detail::require(delay_ns > 0.0 && 4.0 * delay_ns < rep_period_ns,
                    "five-peak clusters must fit inside the repetition period");
    detail::require(detector_irf_fwhm_ns >= 0.0, "IRF width must be non-negative");
  }

  void set_ratio(double r_over_t) {
    detail::require(r_over_t > 0.0, "R/T must be positive");
    T = 1.0 / (1.0 + r_over_t);
    R = 1.0 - T;
  }

  // Overlap entering the two-photon cross term, M (1 - epsilon)^2.
  double effective_overlap() const { return M * (1.0 - epsilon) * (1.0 - epsilon); }
};

// Peak areas of the central cluster (delays -2D, -D, 0, D, 2D) and of the
// neighbouring clusters at +/- one repetition period, plus the intra-cycle
// pairs that land on the same detector.
struct PeakAreas {
  std::array<double, 5> central{};
  std::array<double, 5> side_positive{};
  std::array<double, 5> side_negative{};
  double same_detector = 0.0;

  double zero_delay() const { return central[2]; }
  double side_reference() const {
    return std::accumulate(side_positive.begin(), side_positive.end(), 0.0);
  }
  double central_total() const { return std::accumulate(central.begin(), central.end(), 0.0); }
  // Every intra-cycle photon pair, wherever it is detected.
  double total_pairs() const { return central_total() + same_detector; }
};

namespace detail {

using pulsedrf::detail::require;

struct PathClass {
  int pulse;  // 0 early, 1 late
  bool long_arm;
  int offset() const { return pulse + (long_arm ? 1 : 0); }
  int port() const { return long_arm ? 1 : 0; }
};

inline constexpr std::array<PathClass, 4> kPaths{{{0, false}, {0, true}, {1, false}, {1, true}}};

struct Splitter {
  double R, T;
  double path_probability(const PathClass& p) const { return p.long_arm ? R : T; }
  // Probability to reach detector c (channel 0) from a port.
  double to_c(int port) const { return port == 0 ? T : R; }
  double to_d(int port) const { return port == 0 ? R : T; }
};

}  // namespace detail

// Exact enumeration of photon-pair paths through the unbalanced
// Mach-Zehnder for one excitation cycle (early and late pulse separated by
// the MZ delay). Each pulse carries one photon plus, with the contamination
// probability of the emitter model, a second photon from the same ensemble.
// Pairs meeting at the final splitter from opposite ports interfere through
// the two-photon engine with overlap M (1 - epsilon)^2. In the crossed
// configuration the long arm is V-polarized.
inline PeakAreas hom_peak_areas(const HOMConfig& cfg, bool copolarized) {
  cfg.validate();
  using photonics::PhotonWavepacket;
  const detail::Splitter bs{cfg.R, cfg.T};
  const auto unitary = photonics::beam_splitter(cfg.R, cfg.T);
  const auto overlap = photonics::OverlapModel::pair(cfg.effective_overlap());
  const double p2 = emitter::contamination_probability(cfg.g2);
  const double cross_weight = (1.0 + p2) * (1.0 + p2);

  PeakAreas a;
  auto independent = [&](const detail::PathClass& x, const detail::PathClass& y, double w) {
    const double xc = bs.to_c(x.port()), xd = bs.to_d(x.port());
    const double yc = bs.to_c(y.port()), yd = bs.to_d(y.port());
    a.central[static_cast<std::size_t>(y.offset() - x.offset() + 2)] += w * xc * yd;
    a.central[static_cast<std::size_t>(x.offset() - y.offset() + 2)] += w * xd * yc;
    a.same_detector += w * (xc * yc + xd * yd);
  };
  auto interfering = [&](const detail::PathClass& x, const detail::PathClass& y, double w) {
    auto photon = [&](const detail::PathClass& p, int label) {
      const bool vertical = p.long_arm && !copolarized;
      return PhotonWavepacket::polarized(p.port(), vertical ? 0.0 : 1.0, vertical ? 1.0 : 0.0, label);
    };
    const auto d = photonics::two_photon_probs(unitary, {photon(x, 0), photon(y, 1)}, overlap);
    a.central[2] += w * d.spatial(0, 1);
    a.same_detector += w * (d.spatial(0, 0) + d.spatial(1, 1));
  };

  for (const auto& x : detail::kPaths) {
    for (const auto& y : detail::kPaths) {
      const double w = bs.path_probability(x) * bs.path_probability(y);
      if (x.pulse == 0 && y.pulse == 1) {
        if (x.offset() == y.offset() && x.port() != y.port())
          interfering(x, y, cross_weight * w);
        else
          independent(x, y, cross_weight * w);
      } else if (x.pulse == y.pulse && p2 > 0.0) {
        // Both photons of a doubly occupied pulse; the ordered sum over the
        // two photons' paths visits each assignment once.
        independent(x, y, p2 * w);
      }
    }
  }
  for (const auto& x : detail::kPaths) {
    for (const auto& y : detail::kPaths) {
      // x in cycle k, y in cycle k + 1.
      const double w = cross_weight * bs.path_probability(x) * bs.path_probability(y);
      const auto k = static_cast<std::size_t>(y.offset() - x.offset() + 2);
      a.side_positive[k] += w * bs.to_c(x.port()) * bs.to_d(y.port());
      a.side_negative[4 - k] += w * bs.to_d(x.port()) * bs.to_c(y.port());
    }
  }
  return a;
}

struct Visibility {
  double value = 0.0;
  double bunching_probability() const { return 0.5 * (1.0 + value); }
};

// V_raw = 1 - A0(parallel) / A0(cross).
inline Visibility raw_visibility(const PeakAreas& parallel, const PeakAreas& cross) {
  detail::require(cross.zero_delay() > 0.0, "cross-polarized zero-delay area is zero");
  return {1.0 - parallel.zero_delay() / cross.zero_delay()};
}

struct CorrectedVisibility {
  double M = 0.0;
  // Set when the raw estimate fell outside [0, 1] and was clamped.
  bool clamped = false;
};

// M = (V_raw + 2 g2) (R^2 + T^2) / (2 R T (1 - epsilon)^2).
inline CorrectedVisibility corrected_visibility(double v_raw, double g2, double R, double T,
                                                double epsilon) {
  detail::require(R > 0.0 && T > 0.0 && std::abs(R + T - 1.0) <= 1e-9, "splitter needs R + T = 1");
  detail::require(g2 >= 0.0 && g2 < 1.0, "g2 must lie in [0, 1)");
  detail::require(epsilon >= 0.0 && epsilon < 1.0, "MZ visibility 1 - epsilon must be positive");
  detail::require(v_raw >= -1.0 && v_raw <= 1.0, "raw visibility must lie in [-1, 1]");
  const double m = (v_raw + 2.0 * g2) * (R * R + T * T) / (2.0 * R * T * (1.0 - epsilon) * (1.0 - epsilon));
  if (m < 0.0) return {0.0, true};
  if (m > 1.0) return {1.0, true};
  return {m, false};
}

struct Peak {
  double position_ns = 0.0;
  double area = 0.0;
};

inline std::array<double, 5> cluster_offsets(double delay_ns) {
  return {-2.0 * delay_ns, -delay_ns, 0.0, delay_ns, 2.0 * delay_ns};
}

// Central cluster plus `side_clusters` clusters on each side.
inline std::vector<Peak> hom_peak_train(const PeakAreas& areas, const HOMConfig& cfg, int side_clusters) {
  detail::require(side_clusters >= 0, "side cluster count must be non-negative");
  const auto offsets = cluster_offsets(cfg.delay_ns);
  std::vector<Peak> peaks;
  for (int c = -side_clusters; c <= side_clusters; ++c) {
    const auto& src = c == 0 ? areas.central : (c > 0 ? areas.side_positive : areas.side_negative);
    for (std::size_t k = 0; k < 5; ++k)
      peaks.push_back({c * cfg.rep_period_ns + offsets[k], src[k]});
  }
  return peaks;
}

inline std::vector<double> peak_positions(const std::vector<Peak>& peaks) {
  std::vector<double> p;
  p.reserve(peaks.size());
  for (const auto& k : peaks) p.push_back(k.position_ns);
  return p;
}

inline void require_resolved(const CoincidenceHistogram& grid, double T1_ns) {
  detail::require(T1_ns > 0.0, "T1 must be positive");
  detail::require(grid.bin_width_ns <= T1_ns / 4.0, "bin width exceeds T1/4; peak shape unresolvable");
}

// Peaks shaped as exp(-|t - t_k| / T1) convolved with the Gaussian IRF,
// integrated over each bin of `grid`. With a seed, counts are Poisson-sampled.
inline CoincidenceHistogram synthesize_histogram(const std::vector<Peak>& peaks, double T1_ns,
                                                 double irf_fwhm_ns, CoincidenceHistogram grid,
                                                 std::optional<std::uint64_t> noise_seed = {}) {
  require_resolved(grid, T1_ns);
  detail::require(irf_fwhm_ns >= 0.0, "IRF width must be non-negative");
  const double sigma = shapes::fwhm_to_sigma(irf_fwhm_ns);
  std::fill(grid.counts.begin(), grid.counts.end(), 0.0);
  for (const auto& p : peaks) {
    detail::require(p.area >= 0.0, "peak areas must be non-negative");
    for (std::size_t i = 0; i < grid.size(); ++i)
      grid.counts[i] += p.area * shapes::laplace_gauss_mass(grid.edge(i), grid.edge(i + 1), p.position_ns, T1_ns, sigma);
  }
  if (noise_seed) {
    auto rng = block_engine(*noise_seed, 0, Stream::noise);
    for (auto& c : grid.counts) {
      std::poisson_distribution<long long> pois(c);
      c = c > 0.0 ? static_cast<double>(pois(rng)) : 0.0;
    }
  }
  return grid;
}

struct AreaFit {
  std::vector<double> areas;
  std::vector<double> errors;
  Eigen::MatrixXd covariance;
};

// Linear least squares for the areas of peaks at known positions, using
// Poisson (model-variance) weights refined over a few passes. Only bins
// whose centres lie within `margin_ns` of some peak take part; by default
// the margin is 8 T1 + 4 sigma.
inline AreaFit extract_peak_areas(const CoincidenceHistogram& hist, const std::vector<double>& positions,
                                  double T1_ns, double irf_fwhm_ns,
                                  std::optional<double> margin_ns = {}) {
  hist.validate();
  require_resolved(hist, T1_ns);
  detail::require(!positions.empty(), "no peak positions given");
  const double sigma = shapes::fwhm_to_sigma(irf_fwhm_ns);
  const double margin = margin_ns.value_or(8.0 * T1_ns + 4.0 * sigma);
  const double lo = *std::min_element(positions.begin(), positions.end()) - margin;
  const double hi = *std::max_element(positions.begin(), positions.end()) + margin;
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < hist.size(); ++i) {
    const double c = hist.center(i);
    if (c < lo || c > hi) continue;
    bool near = false;
    for (double p : positions) near = near || std::abs(c - p) <= margin;
    if (near) rows.push_back(i);
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto m = static_cast<Eigen::Index>(positions.size());
  detail::require(n > m, "too few bins to fit the peak areas");
  Eigen::MatrixXd design(n, m);
  Eigen::VectorXd y(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto i = rows[static_cast<std::size_t>(r)];
    y(r) = hist.counts[i];
    for (Eigen::Index k = 0; k < m; ++k)
      design(r, k) = shapes::laplace_gauss_mass(hist.edge(i), hist.edge(i + 1),
                                                positions[static_cast<std::size_t>(k)], T1_ns, sigma);
  }
  const double floor = std::max(1e-12, 1e-9 * y.cwiseAbs().maxCoeff());
  Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd x;
  for (int pass = 0; pass < 4; ++pass) {
    const Eigen::VectorXd sw = w.cwiseSqrt();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sw.asDiagonal() * design);
    if (qr.rank() < m) throw ConvergenceError("peak-area design matrix is rank deficient");
    x = qr.solve(sw.asDiagonal() * y);
    const Eigen::VectorXd model = design * x;
    for (Eigen::Index r = 0; r < n; ++r) w(r) = 1.0 / std::max(model(r), floor);
  }
  if (!x.allFinite()) throw ConvergenceError("peak-area fit produced non-finite areas");
  AreaFit out;
  out.covariance = (design.transpose() * w.asDiagonal() * design).inverse();
  for (Eigen::Index k = 0; k < m; ++k) {
    out.areas.push_back(x(k));
    out.errors.push_back(std::sqrt(std::max(out.covariance(k, k), 0.0)));
  }
  return out;
}

struct G2Estimate {
  double value = 0.0;
  double error = 0.0;
  double zero_area = 0.0;
  double side_mean = 0.0;
  std::vector<std::string> warnings;
};

// Default integration half-width around each peak: 3 (T1 + sigma_IRF).
inline double peak_window(double T1_ns, double irf_fwhm_ns) {
  return 3.0 * (T1_ns + shapes::fwhm_to_sigma(irf_fwhm_ns));
}

// Zero-delay peak area over the mean of the six adjacent peaks, with
// Poisson errors propagated from the raw counts.
inline G2Estimate g2_from_histogram(const CoincidenceHistogram& hist, double rep_period_ns,
                                    double half_window_ns) {
  hist.validate();
  detail::require(rep_period_ns > 0.0 && half_window_ns > 0.0, "period and window must be positive");
  G2Estimate g;
  const double ratio = rep_period_ns / hist.bin_width_ns;
  if (std::abs(ratio - std::round(ratio)) > 1e-6)
    g.warnings.push_back("bin width does not divide the repetition period");
  if (2.0 * half_window_ns > rep_period_ns) {
    g.warnings.push_back("peak windows overlap; clamping to half the period");
    half_window_ns = 0.5 * rep_period_ns;
  }
  detail::require(hist.origin_ns <= -3.0 * rep_period_ns - half_window_ns &&
                      hist.upper() >= 3.0 * rep_period_ns + half_window_ns,
                  "histogram must resolve the zero-delay peak and three peaks on each side");
  auto area = [&](double c) { return hist.window_sum(c - half_window_ns, c + half_window_ns); };
  g.zero_area = area(0.0);
  double side = 0.0;
  for (int k : {-3, -2, -1, 1, 2, 3}) side += area(k * rep_period_ns);
  detail::require(side > 0.0, "side peaks are empty");
  g.side_mean = side / 6.0;
  g.value = g.zero_area / g.side_mean;
  // sigma^2(Z/S) / (Z/S)^2 = 1/Z + 1/S; an empty zero peak gets one count.
  g.error = std::sqrt(std::max(g.zero_area, 1.0)) / g.side_mean *
            std::sqrt(1.0 + std::max(g.zero_area, 1.0) / side);
  return g;
}

// ---------------------------------------------------------------------------
// Event-level Monte-Carlo.

// Photon-number distribution of identical photons sent into the two ports
// of a splitter: P(k photons at detector c) for k = 0..na+nb.
inline std::vector<double> fock_split(int na, int nb, double R, double T) {
  using C = std::complex<double>;
  const C t{std::sqrt(T), 0.0};
  const C r{0.0, std::sqrt(R)};
  // Polynomial in x counting creation operators on output c.
  std::vector<C> poly{1.0};
  auto multiply = [&](C cx, C c1) {
    std::vector<C> next(poly.size() + 1, 0.0);
    for (std::size_t i = 0; i < poly.size(); ++i) {
      next[i + 1] += poly[i] * cx;
      next[i] += poly[i] * c1;
    }
    poly = std::move(next);
  };
  for (int i = 0; i < na; ++i) multiply(t, r);
  for (int i = 0; i < nb; ++i) multiply(r, t);
  const int n = na + nb;
  std::vector<double> p(static_cast<std::size_t>(n) + 1);
  const double norm = std::tgamma(na + 1.0) * std::tgamma(nb + 1.0);
  for (int k = 0; k <= n; ++k)
    p[static_cast<std::size_t>(k)] =
        std::norm(poly[static_cast<std::size_t>(k)]) * std::tgamma(k + 1.0) * std::tgamma(n - k + 1.0) / norm;
  return p;
}

struct Detection {
  double time_ns = 0.0;
  // 0 = detector c, 1 = detector d.
  int detector = 0;
};

// Photon source for the Monte-Carlo: the emitter sampler.
struct EmitterSource {
  emitter::EmitterParams emitter;
  emitter::PulseParams pulse;
  std::uint64_t pulses = 0;
  std::uint64_t seed = 0;
  emitter::TrainOptions options;

  void emit_block(std::uint64_t block, std::vector<emitter::EmissionEvent>& out) const {
    emitter::sample_pulse_block(emitter, pulse, pulses, block, seed, options, out);
  }
};

// Attenuated laser: Poisson photon number per pulse, no emission delay,
// every photon in its own mode.
struct CoherentSource {
  double mean_photons = 1.0;
  emitter::PulseParams pulse;
  std::uint64_t pulses = 0;
  std::uint64_t seed = 0;

  void emit_block(std::uint64_t block, std::vector<emitter::EmissionEvent>& out) const {
    auto rng = block_engine(seed, block, Stream::emission);
    std::poisson_distribution<int> number(mean_photons);
    const std::uint64_t first = block * kBlockSize;
    const std::uint64_t last = std::min(pulses, first + kBlockSize);
    for (std::uint64_t k = first; k < last; ++k) {
      const int n = number(rng);
      for (int j = 0; j < n; ++j)
        out.push_back({k, emitter::pulse_time(pulse, k), 0.0, 1 + k * 64 + static_cast<std::uint64_t>(j)});
    }
  }
};

struct HbtSetup {
  double R = 0.5;
  double irf_fwhm_ns = 0.3;
  double bin_width_ns = 0.05;
  // Histogram half range; must cover three periods plus a peak window.
  double half_range_ns = 42.0;
};

struct MonteCarloOptions {
  unsigned workers = 1;
};

namespace detail {

using pulsedrf::detail::require;

// Turns emission events of one block into detections.
template <class Router>
std::vector<Detection> detect_block(const std::vector<emitter::EmissionEvent>& events, Router& route) {
  std::vector<Detection> d;
  d.reserve(events.size());
  route(events, d);
  std::sort(d.begin(), d.end(), [](const Detection& a, const Detection& b) { return a.time_ns < b.time_ns; });
  return d;
}

// Adds every c/d pair within the histogram range. `history` holds earlier
// detections, time-ordered.
inline void accumulate_pairs(std::vector<Detection>& history, const std::vector<Detection>& fresh,
                             CoincidenceHistogram& hist, double reach) {
  for (const auto& det : fresh) {
    for (auto it = history.rbegin(); it != history.rend(); ++it) {
      const double dt = det.time_ns - it->time_ns;
      if (dt > reach) break;
      if (it->detector == det.detector) continue;
      hist.add(det.detector == 1 ? dt : -dt);
    }
    history.push_back(det);
  }
  const double newest = history.empty() ? 0.0 : history.back().time_ns;
  const auto keep = std::find_if(history.begin(), history.end(),
                                 [&](const Detection& x) { return newest - x.time_ns <= reach; });
  history.erase(history.begin(), keep);
}

template <class Source, class MakeRouter>
CoincidenceHistogram run_blocks(const Source& source, const CoincidenceHistogram& grid, MakeRouter make_router,
                                const MonteCarloOptions& options) {
  const std::uint64_t blocks = block_count(source.pulses);
  const unsigned workers = std::max(1u, std::min<unsigned>(options.workers, static_cast<unsigned>(blocks)));
  const double reach = std::max(-grid.origin_ns, grid.upper());
  std::vector<CoincidenceHistogram> partial(workers, grid);
  auto work = [&](unsigned w) {
    const std::uint64_t begin = blocks * w / workers;
    const std::uint64_t end = blocks * (w + 1) / workers;
    std::vector<Detection> history;
    std::vector<emitter::EmissionEvent> events;
    auto detections_of = [&](std::uint64_t b) {
      events.clear();
      source.emit_block(b, events);
      auto router = make_router(b);
      return detect_block(events, router);
    };
    if (begin > 0) history = detections_of(begin - 1);
    for (std::uint64_t b = begin; b < end; ++b)
      accumulate_pairs(history, detections_of(b), partial[w], reach);
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  CoincidenceHistogram out = grid;
  std::fill(out.counts.begin(), out.counts.end(), 0.0);
  for (const auto& p : partial) out.merge(p);
  return out;
}

}  // namespace detail

// HBT: one splitter, two detectors, each with Gaussian timing jitter whose
// pair difference has FWHM `irf_fwhm_ns`.
template <class Source>
CoincidenceHistogram simulate_hbt(const Source& source, const HbtSetup& setup, std::uint64_t seed,
                                  const MonteCarloOptions& options = {}) {
  detail::require(setup.R >= 0.0 && setup.R <= 1.0, "HBT splitter reflectance must lie in [0, 1]");
  const auto grid = CoincidenceHistogram::symmetric(setup.half_range_ns, setup.bin_width_ns);
  const double jitter = shapes::fwhm_to_sigma(setup.irf_fwhm_ns) / std::numbers::sqrt2;
  auto make_router = [&](std::uint64_t block) {
    return [rng = block_engine(seed, block, Stream::detection), R = setup.R, jitter](
               const std::vector<emitter::EmissionEvent>& ev, std::vector<Detection>& out) mutable {
      std::uniform_real_distribution<double> u(0.0, 1.0);
      std::normal_distribution<double> g(0.0, 1.0);
      for (const auto& e : ev) {
        const int det = u(rng) < R ? 1 : 0;
        out.push_back({e.time_ns() + jitter * g(rng), det});
      }
    };
  };
  return detail::run_blocks(source, grid, make_router, options);
}

struct HomSetup {
  HOMConfig config;
  bool copolarized = true;
  double bin_width_ns = 0.05;
  double half_range_ns = 42.0;
};

// HOM: double-pulse excitation, unbalanced Mach-Zehnder, two detectors.
// Photons meeting at the final splitter in the same slot and the same
// internal, polarization and spatial mode are sampled as identical bosons;
// the spatial mode of the long arm is mismatched with probability
// 1 - (1 - epsilon)^2.
template <class Source>
CoincidenceHistogram simulate_hom(const Source& source, const HomSetup& setup, std::uint64_t seed,
                                  const MonteCarloOptions& options = {}) {
  const auto& cfg = setup.config;
  cfg.validate();
  detail::require(source.pulse.double_pulse_delay_ns.has_value(), "HOM simulation needs double-pulse excitation");
  detail::require(std::abs(*source.pulse.double_pulse_delay_ns - cfg.delay_ns) <= 1e-12,
                  "double-pulse delay must match the Mach-Zehnder delay");
  const auto grid = CoincidenceHistogram::symmetric(setup.half_range_ns, setup.bin_width_ns);
  const double jitter = shapes::fwhm_to_sigma(cfg.detector_irf_fwhm_ns) / std::numbers::sqrt2;
  const double mismatch = 1.0 - (1.0 - cfg.epsilon) * (1.0 - cfg.epsilon);
  const bool copol = setup.copolarized;

  auto make_router = [&](std::uint64_t block) {
    return [rng = block_engine(seed, block, Stream::paths), cfg, jitter, mismatch, copol](
               const std::vector<emitter::EmissionEvent>& ev, std::vector<Detection>& out) mutable {
      std::uniform_real_distribution<double> u(0.0, 1.0);
      std::normal_distribution<double> g(0.0, 1.0);
      struct InFlight {
        double time_ns;   // detection time before the output port choice
        std::uint64_t key_label;
        int slot;         // arrival slot within the cycle, 0..2
        int port;
        int polarization;
        int spatial;      // 1 when the long-arm mode is mismatched
      };
      std::vector<InFlight> cycle;
      auto flush = [&]() {
        // Group by slot and identity; groups of one photon go independently.
        std::vector<bool> done(cycle.size(), false);
        for (std::size_t i = 0; i < cycle.size(); ++i) {
          if (done[i]) continue;
          std::vector<std::size_t> members;
          for (std::size_t j = i; j < cycle.size(); ++j) {
            const auto& a = cycle[i];
            const auto& b = cycle[j];
            if (!done[j] && a.slot == b.slot && a.key_label == b.key_label && a.polarization == b.polarization &&
                a.spatial == b.spatial) {
              members.push_back(j);
              done[j] = true;
            }
          }
          int na = 0;
          int nb = 0;
          for (auto j : members) (cycle[j].port == 0 ? na : nb)++;
          const auto dist = fock_split(na, nb, cfg.R, cfg.T);
          std::discrete_distribution<int> pick(dist.begin(), dist.end());
          const int to_c = pick(rng);
          std::shuffle(members.begin(), members.end(), rng);
          for (std::size_t m = 0; m < members.size(); ++m) {
            const int det = static_cast<int>(m) < to_c ? 0 : 1;
            out.push_back({cycle[members[m]].time_ns + jitter * g(rng), det});
          }
        }
        cycle.clear();
      };
      std::uint64_t current = ev.empty() ? 0 : ev.front().pulse / 2;
      for (const auto& e : ev) {
        const std::uint64_t c = e.pulse / 2;
        if (c != current) {
          flush();
          current = c;
        }
        const bool long_arm = u(rng) < cfg.R;
        const int spatial = (long_arm && u(rng) < mismatch) ? 1 : 0;
        const int sub = static_cast<int>(e.pulse % 2);
        cycle.push_back({e.time_ns() + (long_arm ? cfg.delay_ns : 0.0),
                         e.label, sub + (long_arm ? 1 : 0), long_arm ? 1 : 0,
                         (long_arm && !copol) ? 1 : 0, spatial});
      }
      flush();
    };
  };
  return detail::run_blocks(source, grid, make_router, options);
}

struct MeasuredAreas {
  // Per-cycle areas.
  PeakAreas areas;
  // Standard errors, same layout (same_detector unused).
  PeakAreas errors;
};

// Fits every five-peak cluster inside the histogram and returns per-cycle
// areas of the central and +/- first side clusters.
inline MeasuredAreas measure_hom_areas(const CoincidenceHistogram& hist, const HOMConfig& cfg, double T1_ns,
                                       std::uint64_t cycles) {
  detail::require(cycles > 0, "cycle count must be positive");
  const double reach = std::min(-hist.origin_ns, hist.upper());
  const int clusters = static_cast<int>(std::floor((reach - 2.0 * cfg.delay_ns - 4.0 * T1_ns) / cfg.rep_period_ns));
  detail::require(clusters >= 1, "histogram must contain the first side clusters");
  const auto peaks = hom_peak_train(PeakAreas{}, cfg, clusters);
  const auto fit = extract_peak_areas(hist, peak_positions(peaks), T1_ns, cfg.detector_irf_fwhm_ns);
  MeasuredAreas m;
  const double n = static_cast<double>(cycles);
  auto take = [&](int cluster, std::array<double, 5>& a, std::array<double, 5>& e) {
    const auto base = static_cast<std::size_t>((cluster + clusters) * 5);
    for (std::size_t k = 0; k < 5; ++k) {
      a[k] = fit.areas[base + k] / n;
      e[k] = fit.errors[base + k] / n;
    }
  };
  take(0, m.areas.central, m.errors.central);
  take(1, m.areas.side_positive, m.errors.side_positive);
  take(-1, m.areas.side_negative, m.errors.side_negative);
  return m;
}

struct VisibilityBootstrap {
  double v_raw_mean = 0.0;
  double v_raw_std = 0.0;
  double m_mean = 0.0;
  double m_std = 0.0;
};

// Poisson bootstrap of the parallel/cross zero-delay areas: both clusters
// are synthesized at `cycles` excitation cycles, resampled, refitted and
// pushed through the visibility chain.
inline VisibilityBootstrap bootstrap_visibility(const HOMConfig& cfg, double T1_ns, double cycles, int samples,
                                                std::uint64_t seed, double bin_width_ns = 0.05) {
  detail::require(samples >= 2, "bootstrap needs at least two samples");
  const auto par = hom_peak_areas(cfg, true);
  const auto cross = hom_peak_areas(cfg, false);
  auto scaled = [&](const PeakAreas& a) {
    auto peaks = hom_peak_train(a, cfg, 0);
    for (auto& p : peaks) p.area *= cycles;
    return peaks;
  };
  const auto grid = CoincidenceHistogram::symmetric(0.5 * cfg.rep_period_ns, bin_width_ns);
  const auto par_peaks = scaled(par);
  const auto cross_peaks = scaled(cross);
  const auto positions = peak_positions(par_peaks);
  std::vector<double> v;
  std::vector<double> m;
  for (int s = 0; s < samples; ++s) {
    const auto hp = synthesize_histogram(par_peaks, T1_ns, cfg.detector_irf_fwhm_ns, grid, seed + 2 * static_cast<std::uint64_t>(s));
    const auto hc = synthesize_histogram(cross_peaks, T1_ns, cfg.detector_irf_fwhm_ns, grid, seed + 2 * static_cast<std::uint64_t>(s) + 1);
    const double a_par = extract_peak_areas(hp, positions, T1_ns, cfg.detector_irf_fwhm_ns).areas[2];
    const double a_cross = extract_peak_areas(hc, positions, T1_ns, cfg.detector_irf_fwhm_ns).areas[2];
    const double vr = 1.0 - a_par / a_cross;
    v.push_back(vr);
    m.push_back(corrected_visibility(std::clamp(vr, -1.0, 1.0), cfg.g2, cfg.R, cfg.T, cfg.epsilon).M);
  }
  auto stats = [](const std::vector<double>& x) {
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    double var = 0.0;
    for (double xi : x) var += (xi - mean) * (xi - mean);
    return std::pair{mean, std::sqrt(var / static_cast<double>(x.size() - 1))};
  };
  VisibilityBootstrap b;
  std::tie(b.v_raw_mean, b.v_raw_std) = stats(v);
  std::tie(b.m_mean, b.m_std) = stats(m);
  return b;
}

}  // namespace pulsedrf::interferometry
