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

// Two-level emitter under pulsed resonant drive: optical Bloch equations,
// coherence-time algebra and a stochastic photon-train sampler.
//
// Units: time in ns, frequency in GHz, pulse duration in ps, pulse area in
// units of pi.

#include <boost/numeric/odeint.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "pulsedrf/error.hpp"
#include "pulsedrf/random.hpp"

namespace pulsedrf::emitter {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct EmitterParams {
  double T1_ns = 0.41;
  double T2_ns = 0.82;
  double T2_star_ns = kInfinity;
  double inhomogeneous_fwhm_ghz = 0.0;
  double g2 = 0.0;

  // T2 may exceed 2 T1 by this relative amount before being rejected.
  static constexpr double kCoherenceTolerance = 0.05;

  void validate() const {
    detail::require(T1_ns > 0.0, "T1 must be positive");
    detail::require(T2_ns > 0.0, "T2 must be positive");
    detail::require(T2_star_ns > 0.0, "T2* must be positive");
    detail::require(std::isinf(T1_ns) || T2_ns <= 2.0 * T1_ns * (1.0 + kCoherenceTolerance),
                    "T2 exceeds the 2 T1 bound");
    detail::require(inhomogeneous_fwhm_ghz >= 0.0, "inhomogeneous width must be non-negative");
    detail::require(g2 >= 0.0 && g2 < 1.0, "g2 must lie in [0, 1)");
  }

  // Completes T2* from T1 and T2.
  static EmitterParams from_coherence(double T1, double T2, double inhomogeneous_fwhm = 0.0,
                                      double g2 = 0.0);

  // Emitter with decay and dephasing switched off.
  static EmitterParams ideal() { return {kInfinity, kInfinity, kInfinity, 0.0, 0.0}; }
};

enum class PulseShape { gaussian, sech };

struct PulseParams {
  double area_pi = 1.0;
  double fwhm_ps = 3.0;
  PulseShape shape = PulseShape::gaussian;
  double rep_period_ns = 12.2;
  std::optional<double> double_pulse_delay_ns;

  void validate() const {
    detail::require(area_pi >= 0.0, "pulse area must be non-negative");
    detail::require(fwhm_ps > 0.0, "pulse duration must be positive");
    detail::require(rep_period_ns > 0.0, "repetition period must be positive");
    if (double_pulse_delay_ns) {
      detail::require(*double_pulse_delay_ns > 0.0 && *double_pulse_delay_ns < rep_period_ns,
                      "double-pulse delay must lie inside the repetition period");
    }
  }

  double fwhm_ns() const { return fwhm_ps * 1e-3; }
  int pulses_per_period() const { return double_pulse_delay_ns ? 2 : 1; }

  // Rabi frequency (rad/ns) at time t relative to the pulse centre.
  double rabi_frequency(double t_ns) const {
    const double area = area_pi * std::numbers::pi;
    const double tau = fwhm_ns();
    if (shape == PulseShape::gaussian) {
      const double k = 4.0 * std::numbers::ln2 / (tau * tau);
      return area * std::sqrt(k / std::numbers::pi) * std::exp(-k * t_ns * t_ns);
    }
    const double ts = tau / (2.0 * std::acosh(2.0));
    return area / (std::numbers::pi * ts) / std::cosh(t_ns / ts);
  }

  // Half-width of the integration window: the drive area outside it is
  // below 1e-12 of the total.
  double half_window_ns() const {
    const double tau = fwhm_ns();
    if (shape == PulseShape::gaussian) return 3.5 * tau;
    return 30.0 * tau / (2.0 * std::acosh(2.0));
  }
};

// Warnings for parameter combinations where the per-pulse picture is shaky.
inline std::vector<std::string> pulse_warnings(const EmitterParams& e, const PulseParams& p) {
  std::vector<std::string> w;
  if (p.fwhm_ns() > e.T1_ns / 10.0)
    w.push_back("pulse duration exceeds T1/10; emission during the pulse is not negligible");
  return w;
}

struct BlochState {
  double u = 0.0;
  double v = 0.0;
  double w = -1.0;

  double norm() const { return std::sqrt(u * u + v * v + w * w); }
  double excited_population() const { return 0.5 * (1.0 + w); }
};

enum class Integrator { adaptive, fixed_step };

struct BlochOptions {
  Integrator integrator = Integrator::adaptive;
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  // Fixed-step size as a fraction of the pulse FWHM.
  double fixed_step_fraction = 1.0 / 400.0;
  std::size_t max_steps = 2'000'000;
  // Excitation-induced dephasing: extra coherence decay rate kappa * Omega(t)^2
  // with kappa in ns. Zero disables it.
  double eid_coefficient_ns = 0.0;
  bool record_trajectory = true;
};

struct BlochResult {
  // Excited population left when the drive has ended.
  double final_population = 0.0;
  // Population that decayed radiatively while the pulse was on.
  double emitted_during_pulse = 0.0;
  std::vector<double> times_ns;
  std::vector<BlochState> trajectory;

  // Excitation delivered by the pulse: every decay during the window plus
  // what is left in the excited state, i.e. the mean photon number.
  double excitation() const { return final_population + emitted_during_pulse; }
};

namespace detail {

using pulsedrf::detail::require;

// Bloch vector plus the integrated radiative decay.
using OdeState = std::array<double, 4>;

struct BlochSystem {
  const EmitterParams& emitter;
  const PulseParams& pulse;
  double eid;

  void operator()(const OdeState& x, OdeState& dxdt, double t) const {
    const double omega = pulse.rabi_frequency(t);
    const double g1 = 1.0 / emitter.T1_ns;
    const double g2 = 1.0 / emitter.T2_ns + eid * omega * omega;
    dxdt[0] = -g2 * x[0];
    dxdt[1] = -g2 * x[1] + omega * x[2];
    dxdt[2] = -g1 * (x[2] + 1.0) - omega * x[1];
    dxdt[3] = 0.5 * g1 * (1.0 + x[2]);
  }
};

}  // namespace detail

// Integrates the resonant Bloch equations across one pulse starting from the
// ground state:
//   u' = -u/T2,  v' = -v/T2 + Omega w,  w' = -(w+1)/T1 - Omega v.
inline BlochResult bloch_evolve(const EmitterParams& emitter, const PulseParams& pulse,
                                const BlochOptions& options = {}) {
  emitter.validate();
  pulse.validate();
  namespace ode = boost::numeric::odeint;
  using detail::OdeState;

  const detail::BlochSystem system{emitter, pulse, options.eid_coefficient_ns};
  const double t0 = -pulse.half_window_ns();
  const double t1 = pulse.half_window_ns();
  OdeState x{0.0, 0.0, -1.0, 0.0};
  BlochResult result;
  auto record = [&](double t) {
    if (!options.record_trajectory) return;
    result.times_ns.push_back(t);
    result.trajectory.push_back({x[0], x[1], x[2]});
  };
  record(t0);

  double t = t0;
  std::size_t steps = 0;
  if (options.integrator == Integrator::adaptive) {
    auto stepper = ode::make_controlled(options.abs_tol, options.rel_tol,
                                        ode::runge_kutta_dopri5<OdeState>());
    double dt = pulse.fwhm_ns() / 100.0;
    while (t < t1) {
      if (++steps > options.max_steps)
        throw ConvergenceError("Bloch integration exceeded " + std::to_string(options.max_steps) +
                               " steps at t = " + std::to_string(t) + " ns");
      dt = std::min(dt, t1 - t);
      if (stepper.try_step(system, x, t, dt) == ode::success) {
        record(t);
      } else if (dt < 1e-14 * pulse.fwhm_ns()) {
        throw ConvergenceError("Bloch integration step size underflow at t = " +
                               std::to_string(t) + " ns");
      }
    }
  } else {
    ode::runge_kutta4<OdeState> stepper;
    const auto n = static_cast<std::size_t>(
        std::ceil((t1 - t0) / (pulse.fwhm_ns() * options.fixed_step_fraction)));
    detail::require(n > 0 && n <= options.max_steps, "fixed step count out of range");
    const double h = (t1 - t0) / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      stepper.do_step(system, x, t, h);
      t = t0 + static_cast<double>(i + 1) * h;
      record(t);
    }
  }
  for (double c : x) {
    if (!std::isfinite(c)) throw ConvergenceError("Bloch integration produced a non-finite state");
  }
  result.final_population = 0.5 * (1.0 + x[2]);
  result.emitted_during_pulse = x[3];
  return result;
}

// Mean photons per pulse for each pulse area (units of pi).
inline std::vector<double> rabi_curve(const EmitterParams& emitter, const PulseParams& pulse,
                                      std::span<const double> areas_pi,
                                      BlochOptions options = {}) {
  options.record_trajectory = false;
  std::vector<double> out;
  out.reserve(areas_pi.size());
  for (double a : areas_pi) {
    detail::require(a >= 0.0, "pulse areas must be non-negative");
    PulseParams p = pulse;
    p.area_pi = a;
    out.push_back(bloch_evolve(emitter, p, options).excitation());
  }
  return out;
}

struct DephasingTime {
  double value_ns = kInfinity;
  // Set when the inputs sit at or beyond the lifetime limit T2 = 2 T1.
  bool lifetime_limited = false;
};

// Solves 1/T2 = 1/(2 T1) + 1/T2* for T2*.
inline DephasingTime pure_dephasing_time(double T1_ns, double T2_ns) {
  detail::require(T1_ns > 0.0 && T2_ns > 0.0, "T1 and T2 must be positive");
  const double rate = 1.0 / T2_ns - 1.0 / (2.0 * T1_ns);
  if (rate <= 0.0) return {kInfinity, true};
  return {1.0 / rate, false};
}

// Solves 1/T2 = 1/(2 T1) + 1/T2* for T2.
inline double coherence_time(double T1_ns, double T2_star_ns) {
  detail::require(T1_ns > 0.0 && T2_star_ns > 0.0, "T1 and T2* must be positive");
  return 1.0 / (1.0 / (2.0 * T1_ns) + 1.0 / T2_star_ns);
}

inline EmitterParams EmitterParams::from_coherence(double T1, double T2, double inhomogeneous_fwhm,
                                                   double g2) {
  EmitterParams e{T1, T2, pure_dephasing_time(T1, T2).value_ns, inhomogeneous_fwhm, g2};
  e.validate();
  return e;
}

// Homogeneous Lorentzian FWHM (GHz) = 1 / (pi T2).
inline double linewidth_from_T2(double T2_ns) {
  detail::require(T2_ns > 0.0, "T2 must be positive");
  return 1.0 / (std::numbers::pi * T2_ns);
}

inline double T2_from_linewidth(double fwhm_ghz) {
  detail::require(fwhm_ghz > 0.0, "linewidth must be positive");
  return 1.0 / (std::numbers::pi * fwhm_ghz);
}

// One emitted photon.
struct EmissionEvent {
  std::uint64_t pulse = 0;
  double pulse_time_ns = 0.0;
  double delay_ns = 0.0;
  // Photons with equal labels are in the same internal mode.
  std::uint64_t label = 0;

  double time_ns() const { return pulse_time_ns + delay_ns; }
  friend bool operator==(const EmissionEvent&, const EmissionEvent&) = default;
};

struct TrainOptions {
  // Pairwise indistinguishability M of the emitted photons.
  double indistinguishability = 1.0;
};

// Probability p2 of an extra photon in a pulse such that the pulsed HBT
// estimator 2 p2 / (1 + p2)^2 returns g2.
inline double contamination_probability(double g2) {
  detail::require(g2 >= 0.0 && g2 < 1.0, "g2 must lie in [0, 1)");
  if (g2 == 0.0) return 0.0;
  return g2 / (1.0 - g2 + std::sqrt(1.0 - 2.0 * g2));
}

inline double pulse_time(const PulseParams& pulse, std::uint64_t index) {
  if (!pulse.double_pulse_delay_ns) return static_cast<double>(index) * pulse.rep_period_ns;
  return static_cast<double>(index / 2) * pulse.rep_period_ns +
         (index % 2 == 1 ? *pulse.double_pulse_delay_ns : 0.0);
}

// Appends the emissions of pulses [block * kBlockSize, ...) up to n_pulses.
// Each pulse yields one photon, plus a second with the contamination
// probability. A photon carries the shared label 0 with probability sqrt(M)
// and a unique label otherwise, so two photons share a mode with probability M.
inline void sample_pulse_block(const EmitterParams& emitter, const PulseParams& pulse,
                               std::uint64_t n_pulses, std::uint64_t block, std::uint64_t seed,
                               const TrainOptions& options, std::vector<EmissionEvent>& out) {
  const double p2 = contamination_probability(emitter.g2);
  const double shared = std::sqrt(options.indistinguishability);
  auto rng = block_engine(seed, block, Stream::emission);
  std::exponential_distribution<double> delay(1.0 / emitter.T1_ns);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const std::uint64_t first = block * kBlockSize;
  const std::uint64_t last = std::min(n_pulses, first + kBlockSize);
  for (std::uint64_t k = first; k < last; ++k) {
    const int photons = (p2 > 0.0 && uniform(rng) < p2) ? 2 : 1;
    for (int j = 0; j < photons; ++j) {
      EmissionEvent e;
      e.pulse = k;
      e.pulse_time_ns = pulse_time(pulse, k);
      e.delay_ns = delay(rng);
      e.label = (uniform(rng) < shared) ? 0 : 2 * k + static_cast<std::uint64_t>(j) + 1;
      out.push_back(e);
    }
  }
}

inline std::vector<EmissionEvent> sample_photon_train(const EmitterParams& emitter,
                                                      const PulseParams& pulse,
                                                      std::uint64_t n_pulses, std::uint64_t seed,
                                                      const TrainOptions& options = {}) {
  emitter.validate();
  pulse.validate();
  detail::require(n_pulses >= 1, "photon train needs at least one pulse");
  detail::require(options.indistinguishability >= 0.0 && options.indistinguishability <= 1.0,
                  "indistinguishability must lie in [0, 1]");
  std::vector<EmissionEvent> out;
  out.reserve(n_pulses + n_pulses / 16);
  for (std::uint64_t b = 0; b < block_count(n_pulses); ++b)
    sample_pulse_block(emitter, pulse, n_pulses, b, seed, options, out);
  return out;
}

}  // namespace pulsedrf::emitter
