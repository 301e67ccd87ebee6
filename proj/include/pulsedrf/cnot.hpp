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

// Post-selected linear-optical CNOT: two photons meet on a partial PBS, two
// compensating partial PBSs balance the amplitudes, and half-wave plates on
// the target turn the controlled phase into a controlled flip. Logical 0 is
// H, logical 1 is V. The gate succeeds when one photon leaves through each
// output channel.

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>

#include "pulsedrf/error.hpp"
#include "pulsedrf/photonics.hpp"
#include "pulsedrf/random.hpp"

namespace pulsedrf::cnot {

using photonics::Complex;

struct QubitState {
  Complex alpha{1.0, 0.0};
  Complex beta{0.0, 0.0};

  QubitState() = default;
  QubitState(Complex a, Complex b) : alpha(a), beta(b) {
    detail::require(std::abs(std::norm(a) + std::norm(b) - 1.0) <= 1e-12, "qubit state must be normalized");
  }

  static QubitState zero() { return {1.0, 0.0}; }
  static QubitState one() { return {0.0, 1.0}; }
  static QubitState plus() { return {std::sqrt(0.5), std::sqrt(0.5)}; }
  static QubitState minus() { return {std::sqrt(0.5), -std::sqrt(0.5)}; }

  Eigen::Vector2cd jones() const { return {alpha, beta}; }
};

enum class Basis { ZZ, XX };

inline std::string to_string(Basis b) { return b == Basis::ZZ ? "ZZ" : "XX"; }

// Per-element deviations from the ideal circuit. Defaults are ideal.
struct ElementErrors {
  double central_v_transmission = 1.0 / 3.0;
  double compensating_v_transmission = 1.0 / 3.0;
  double hadamard_angle_deg = 22.5;
  double swap_angle_deg = 45.0;
};

// Channel layout of the gate network.
inline constexpr int kTarget = 0;
inline constexpr int kControl = 1;
inline constexpr int kChannels = 4;

// Central p-PBS alone on (target, control).
inline photonics::NetworkUnitary central_ppbs(const ElementErrors& e = {}) {
  return photonics::partial_pbs(1.0, e.central_v_transmission);
}

// The full gate on channels target, control, dump_t, dump_c. With the XX
// basis, Hadamard plates on both outputs precede the H/V projection.
inline photonics::NetworkUnitary build_cnot_network(Basis analysis = Basis::ZZ, const ElementErrors& e = {}) {
  using namespace photonics;
  Circuit c({"target", "control", "dump_t", "dump_c"});
  c.add(half_wave_plate(e.hadamard_angle_deg), {"target"});
  c.add(partial_pbs(1.0, e.central_v_transmission), {"target", "control"});
  c.add(half_wave_plate(e.swap_angle_deg), {"target"});
  c.add(half_wave_plate(e.swap_angle_deg), {"control"});
  c.add(partial_pbs(1.0, e.compensating_v_transmission), {"target", "dump_t"});
  c.add(partial_pbs(1.0, e.compensating_v_transmission), {"control", "dump_c"});
  c.add(half_wave_plate(e.swap_angle_deg), {"target"});
  c.add(half_wave_plate(e.swap_angle_deg), {"control"});
  c.add(half_wave_plate(e.hadamard_angle_deg), {"target"});
  if (analysis == Basis::XX) {
    c.add(half_wave_plate(22.5), {"target"});
    c.add(half_wave_plate(22.5), {"control"});
  }
  return c.unitary();
}

// Post-selected amplitudes for identical photons, indexed
// [control polarization][target polarization] at the outputs of channels
// kControl and kTarget. Not normalized.
inline Eigen::Matrix2cd post_selected_amplitudes(const photonics::NetworkUnitary& u, const QubitState& control,
                                                 const QubitState& target) {
  const int channels = u.channels();
  detail::require(channels >= 2, "gate network needs target and control channels");
  Eigen::VectorXcd vt = Eigen::VectorXcd::Zero(2 * channels);
  Eigen::VectorXcd vc = Eigen::VectorXcd::Zero(2 * channels);
  vt.segment<2>(2 * kTarget) = target.jones();
  vc.segment<2>(2 * kControl) = control.jones();
  const Eigen::VectorXcd a = u.matrix() * vt;
  const Eigen::VectorXcd b = u.matrix() * vc;
  Eigen::Matrix2cd amp;
  for (int pc = 0; pc < 2; ++pc) {
    for (int pt = 0; pt < 2; ++pt) {
      const int i = 2 * kTarget + pt;
      const int j = 2 * kControl + pc;
      amp(pc, pt) = a(i) * b(j) + a(j) * b(i);
    }
  }
  return amp;
}

struct GateOutput {
  // Post-selected joint distribution, [control bit][target bit], normalized.
  Eigen::Matrix2d distribution = Eigen::Matrix2d::Zero();
  // Probability that one photon leaves through each output channel.
  double success_probability = 0.0;
};

// Runs the product input through the network with two-photon overlap M.
inline GateOutput run_gate(const photonics::NetworkUnitary& u, const QubitState& control, const QubitState& target,
                           double M) {
  detail::require(M >= 0.0 && M <= 1.0, "indistinguishability M must lie in [0, 1]");
  using photonics::PhotonWavepacket;
  const auto t = PhotonWavepacket::polarized(kTarget, target.alpha, target.beta, 0);
  const auto c = PhotonWavepacket::polarized(kControl, control.alpha, control.beta, 1);
  const auto d = photonics::two_photon_probs(u, {t, c}, photonics::OverlapModel::pair(M));
  GateOutput out;
  for (int pc = 0; pc < 2; ++pc)
    for (int pt = 0; pt < 2; ++pt)
      out.distribution(pc, pt) = d.at(2 * kTarget + pt, 2 * kControl + pc);
  out.success_probability = out.distribution.sum();
  detail::require(out.success_probability > 0.0, "post-selection probability is zero");
  out.distribution /= out.success_probability;
  return out;
}

inline GateOutput run_gate(const QubitState& control, const QubitState& target, double M,
                           Basis analysis = Basis::ZZ, const ElementErrors& e = {}) {
  return run_gate(build_cnot_network(analysis, e), control, target, M);
}

// Input basis states ordered 00, 01, 10, 11 as (control, target). In XX,
// 0 is |+> and 1 is |->.
inline std::array<std::pair<QubitState, QubitState>, 4> basis_inputs(Basis b) {
  const QubitState s0 = b == Basis::ZZ ? QubitState::zero() : QubitState::plus();
  const QubitState s1 = b == Basis::ZZ ? QubitState::one() : QubitState::minus();
  return {{{s0, s0}, {s0, s1}, {s1, s0}, {s1, s1}}};
}

// Ideal output index for each input index.
inline std::array<int, 4> ideal_map(Basis b) {
  return b == Basis::ZZ ? std::array<int, 4>{0, 1, 3, 2} : std::array<int, 4>{0, 3, 2, 1};
}

struct TruthTable {
  Basis basis = Basis::ZZ;
  // Rows: inputs, columns: outputs; index = 2 * control + target.
  Eigen::Matrix4d probabilities = Eigen::Matrix4d::Zero();
  // Sampled coincidence counts when shot noise is on.
  std::optional<Eigen::Matrix<std::int64_t, 4, 4>> counts;
  std::array<double, 4> success_probability{};

  void validate() const {
    for (int r = 0; r < 4; ++r)
      detail::require(std::abs(probabilities.row(r).sum() - 1.0) <= 1e-9, "truth table rows must sum to 1");
  }
};

struct TableOptions {
  ElementErrors elements;
  // Coincidences per input row; absent means exact probabilities.
  std::optional<std::uint64_t> shots;
  std::uint64_t seed = 0;
};

inline TruthTable truth_table(Basis basis, double M, const TableOptions& options = {}) {
  const auto u = build_cnot_network(basis, options.elements);
  const auto inputs = basis_inputs(basis);
  TruthTable t;
  t.basis = basis;
  for (int r = 0; r < 4; ++r) {
    const auto out = run_gate(u, inputs[static_cast<std::size_t>(r)].first, inputs[static_cast<std::size_t>(r)].second, M);
    t.success_probability[static_cast<std::size_t>(r)] = out.success_probability;
    for (int k = 0; k < 4; ++k) t.probabilities(r, k) = out.distribution(k / 2, k % 2);
  }
  if (options.shots) {
    detail::require(*options.shots > 0, "shot count must be positive");
    Eigen::Matrix<std::int64_t, 4, 4> counts = Eigen::Matrix<std::int64_t, 4, 4>::Zero();
    for (int r = 0; r < 4; ++r) {
      auto rng = block_engine(options.seed, static_cast<std::uint64_t>(r) + (basis == Basis::XX ? 4u : 0u),
                              Stream::shots);
      std::uint64_t left = *options.shots;
      double mass = 1.0;
      // Multinomial by sequential binomials.
      for (int k = 0; k < 4; ++k) {
        const double p = k == 3 ? 1.0 : std::clamp(t.probabilities(r, k) / mass, 0.0, 1.0);
        std::binomial_distribution<std::uint64_t> bin(left, p);
        const std::uint64_t n = k == 3 ? left : bin(rng);
        counts(r, k) = static_cast<std::int64_t>(n);
        left -= n;
        mass -= t.probabilities(r, k);
        if (mass <= 0.0) mass = 1e-300;
      }
      for (int k = 0; k < 4; ++k)
        t.probabilities(r, k) = static_cast<double>(counts(r, k)) / static_cast<double>(*options.shots);
    }
    t.counts = counts;
  }
  t.validate();
  return t;
}

// Mean probability of the ideal output over the four inputs.
inline double basis_fidelity(const TruthTable& t) {
  const auto map = ideal_map(t.basis);
  double f = 0.0;
  for (int r = 0; r < 4; ++r) f += t.probabilities(r, map[static_cast<std::size_t>(r)]);
  return f / 4.0;
}

struct GateFidelities {
  double F_zz = 0.0;
  double F_xx = 0.0;
  double F_proc_lower = 0.0;
  double F_proc_upper = 0.0;
  bool entangling = false;
};

inline GateFidelities fidelities(double F_zz, double F_xx) {
  detail::require(F_zz >= 0.0 && F_zz <= 1.0 && F_xx >= 0.0 && F_xx <= 1.0, "fidelities must lie in [0, 1]");
  GateFidelities g;
  g.F_zz = F_zz;
  g.F_xx = F_xx;
  g.F_proc_lower = F_zz + F_xx - 1.0;
  g.F_proc_upper = std::min(F_zz, F_xx);
  g.entangling = g.F_proc_lower > 0.5;
  return g;
}

inline GateFidelities fidelities(const TruthTable& zz, const TruthTable& xx) {
  detail::require(zz.basis == Basis::ZZ && xx.basis == Basis::XX, "need one ZZ and one XX table");
  zz.validate();
  xx.validate();
  return fidelities(basis_fidelity(zz), basis_fidelity(xx));
}

struct IndistinguishabilityFit {
  double M = 0.0;
  GateFidelities model;
  double residual = 0.0;
};

// One-parameter fit of M to measured (F_zz, F_xx) with the element errors
// held fixed.
inline IndistinguishabilityFit fit_indistinguishability(double F_zz, double F_xx, const ElementErrors& e = {}) {
  const auto measured = fidelities(F_zz, F_xx);
  auto model = [&](double m) {
    TableOptions o;
    o.elements = e;
    return fidelities(truth_table(Basis::ZZ, m, o), truth_table(Basis::XX, m, o));
  };
  auto cost = [&](double m) {
    const auto g = model(m);
    return (g.F_zz - measured.F_zz) * (g.F_zz - measured.F_zz) + (g.F_xx - measured.F_xx) * (g.F_xx - measured.F_xx);
  };
  const auto [m, c] = boost::math::tools::brent_find_minima(cost, 0.0, 1.0, 40);
  return {m, model(m), std::sqrt(c)};
}

}  // namespace pulsedrf::cnot
