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


#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "pulsedrf/emitter.hpp"

namespace {

using namespace pulsedrf;
using namespace pulsedrf::emitter;

double ideal_population(double area_pi) {
  const double s = std::sin(0.5 * std::numbers::pi * area_pi);
  return s * s;
}

TEST(Bloch, AreaTheoremWithoutDecay) {
  PulseParams p;
  for (int k = 0; k <= 40; ++k) {
    p.area_pi = 0.1 * k;
    const auto r = bloch_evolve(EmitterParams::ideal(), p);
    EXPECT_NEAR(r.final_population, ideal_population(p.area_pi), 1e-6) << "area " << p.area_pi;
    EXPECT_EQ(r.emitted_during_pulse, 0.0);
  }
}

TEST(Bloch, SechPulseObeysAreaTheorem) {
  PulseParams p;
  p.shape = PulseShape::sech;
  for (double a : {0.5, 1.0, 2.0, 3.0}) {
    p.area_pi = a;
    EXPECT_NEAR(bloch_evolve(EmitterParams::ideal(), p).final_population, ideal_population(a), 1e-6);
  }
}

TEST(Bloch, DriveIntegratesToTheArea) {
  for (auto shape : {PulseShape::gaussian, PulseShape::sech}) {
    PulseParams p;
    p.shape = shape;
    p.area_pi = 1.7;
    const double w = p.half_window_ns();
    const int n = 200000;
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += p.rabi_frequency(-w + (i + 0.5) * 2.0 * w / n);
    EXPECT_NEAR(s * 2.0 * w / n, 1.7 * std::numbers::pi, 1e-8);
  }
}

TEST(Bloch, PiPulseWithRadiativeDecay) {
  EmitterParams e;
  e.T1_ns = 0.41;
  e.T2_ns = 0.82;
  PulseParams p;
  const auto r = bloch_evolve(e, p);
  // Decay during the pulse costs at most of order fwhm / T1.
  EXPECT_NEAR(r.excitation(), 1.0, p.fwhm_ns() / e.T1_ns);
  EXPECT_GE(r.excitation(), 0.99);
  EXPECT_GT(r.emitted_during_pulse, 0.0);
}

TEST(Bloch, NormStaysInsideTheBlochBall) {
  EmitterParams e;
  e.T1_ns = 0.05;
  e.T2_ns = 0.06;
  PulseParams p;
  p.fwhm_ps = 20.0;
  for (double a : {0.5, 1.0, 2.5, 4.0}) {
    p.area_pi = a;
    const auto r = bloch_evolve(e, p);
    ASSERT_FALSE(r.trajectory.empty());
    for (const auto& s : r.trajectory) EXPECT_LE(s.norm(), 1.0 + 1e-9);
  }
}

TEST(Bloch, FixedStepConvergesAndAgreesWithAdaptive) {
  EmitterParams e;
  PulseParams p;
  p.area_pi = 1.3;
  BlochOptions fixed;
  fixed.integrator = Integrator::fixed_step;
  fixed.record_trajectory = false;
  const double coarse = bloch_evolve(e, p, fixed).final_population;
  fixed.fixed_step_fraction /= 2.0;
  const double fine = bloch_evolve(e, p, fixed).final_population;
  EXPECT_LT(std::abs(coarse - fine), 1e-8);
  EXPECT_NEAR(bloch_evolve(e, p).final_population, fine, 1e-8);
}

TEST(Bloch, ReportsStepBudgetExhaustion) {
  BlochOptions o;
  o.max_steps = 3;
  EXPECT_THROW(bloch_evolve(EmitterParams{}, PulseParams{}, o), ConvergenceError);
}

TEST(Rabi, IdealCurveAndFirstLobe) {
  const std::vector<double> areas{0.0, 1.0, 2.0, 3.0};
  const auto c = rabi_curve(EmitterParams::ideal(), PulseParams{}, areas);
  const double expected[] = {0.0, 1.0, 0.0, 1.0};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(c[i], expected[i], 1e-6);

  std::vector<double> lobe;
  for (int k = 0; k <= 20; ++k) lobe.push_back(0.05 * k);
  const auto y = rabi_curve(EmitterParams{}, PulseParams{}, lobe);
  for (std::size_t i = 1; i < y.size(); ++i) EXPECT_GT(y[i], y[i - 1]);
}

TEST(Rabi, ExcitationInducedDampingLowersSuccessiveMaxima) {
  BlochOptions o;
  o.eid_coefficient_ns = 2e-4;
  std::vector<double> areas;
  for (int k = 0; k <= 600; ++k) areas.push_back(0.01 * k);
  const auto y = rabi_curve(EmitterParams{}, PulseParams{}, areas, o);
  std::vector<double> maxima;
  for (std::size_t i = 1; i + 1 < y.size(); ++i)
    if (y[i] > y[i - 1] && y[i] >= y[i + 1]) maxima.push_back(y[i]);
  ASSERT_GE(maxima.size(), 3u);
  for (std::size_t i = 1; i < maxima.size(); ++i) EXPECT_LT(maxima[i], maxima[i - 1]);
}

TEST(Rabi, RejectsNegativeAreas) {
  const std::vector<double> areas{-0.1};
  EXPECT_THROW(rabi_curve(EmitterParams{}, PulseParams{}, areas), InvalidArgument);
}

TEST(Dephasing, RelationAndInverse) {
  const auto lim = pure_dephasing_time(0.41, 0.82);
  EXPECT_TRUE(std::isinf(lim.value_ns));
  EXPECT_TRUE(lim.lifetime_limited);
  const auto beyond = pure_dephasing_time(0.41, 0.9);
  EXPECT_TRUE(std::isinf(beyond.value_ns));
  EXPECT_TRUE(beyond.lifetime_limited);
  // 1/T2* = 1/0.7 - 1/0.82.
  EXPECT_NEAR(pure_dephasing_time(0.41, 0.7).value_ns, 1.0 / (1.0 / 0.7 - 1.0 / 0.82), 1e-12);
  EXPECT_NEAR(pure_dephasing_time(0.41, 0.7).value_ns, 4.78, 0.01);
  for (double T1 : {0.2, 0.41, 1.0}) {
    for (double f : {0.1, 0.5, 0.9, 0.999}) {
      const double T2 = 2.0 * T1 * f;
      const double star = pure_dephasing_time(T1, T2).value_ns;
      EXPECT_NEAR(coherence_time(T1, star), T2, 1e-12 * T2);
      EXPECT_NEAR(pure_dephasing_time(T1, coherence_time(T1, star)).value_ns, star, 1e-9 * star);
    }
  }
  EXPECT_NEAR(linewidth_from_T2(T2_from_linewidth(0.4)), 0.4, 1e-15);
}

TEST(Params, Validation) {
  EmitterParams e;
  e.g2 = 1.0;
  EXPECT_THROW(e.validate(), InvalidArgument);
  e = EmitterParams{};
  e.T2_ns = 3.0;
  EXPECT_THROW(e.validate(), InvalidArgument);
  PulseParams p;
  p.fwhm_ps = 100.0;
  EXPECT_EQ(pulse_warnings(EmitterParams{}, p).size(), 1u);
  EXPECT_TRUE(pulse_warnings(EmitterParams{}, PulseParams{}).empty());
  p = PulseParams{};
  p.double_pulse_delay_ns = 20.0;
  EXPECT_THROW(p.validate(), InvalidArgument);
}

TEST(PhotonTrain, PerfectSourceGivesOnePhotonPerPulse) {
  const auto t = sample_photon_train(EmitterParams{}, PulseParams{}, 10000, 5);
  ASSERT_EQ(t.size(), 10000u);
  for (std::size_t i = 0; i < t.size(); ++i) EXPECT_EQ(t[i].pulse, i);
}

TEST(PhotonTrain, ReproducibleAndPrefixStable) {
  EmitterParams e;
  e.g2 = 0.05;
  const auto a = sample_photon_train(e, PulseParams{}, 20000, 42);
  const auto b = sample_photon_train(e, PulseParams{}, 20000, 42);
  const auto c = sample_photon_train(e, PulseParams{}, 20000, 43);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  const auto shorter = sample_photon_train(e, PulseParams{}, 9000, 42);
  ASSERT_LE(shorter.size(), a.size());
  for (std::size_t i = 0; i < shorter.size(); ++i) EXPECT_EQ(shorter[i], a[i]);
}

TEST(PhotonTrain, DelaysFollowTheLifetime) {
  EmitterParams e;
  e.T1_ns = 0.416;
  const std::size_t n = 200000;
  const auto t = sample_photon_train(e, PulseParams{}, n, 9);
  // Maximum-likelihood lifetime of an exponential sample is its mean.
  double s = 0.0;
  for (const auto& ev : t) s += ev.delay_ns;
  const double mle = s / static_cast<double>(t.size());
  EXPECT_NEAR(mle, e.T1_ns, 3.0 * e.T1_ns / std::sqrt(static_cast<double>(t.size())));
}

TEST(PhotonTrain, ContaminationMatchesEstimatorDefinition) {
  for (double g2 : {0.001, 0.012, 0.1, 0.4}) {
    const double p2 = contamination_probability(g2);
    EXPECT_NEAR(2.0 * p2 / ((1.0 + p2) * (1.0 + p2)), g2, 1e-14);
  }
  EmitterParams e;
  e.g2 = 0.05;
  const std::size_t n = 400000;
  const auto t = sample_photon_train(e, PulseParams{}, n, 77);
  const double doubles = static_cast<double>(t.size() - n);
  const double p2 = contamination_probability(e.g2);
  EXPECT_NEAR(doubles / n, p2, 4.0 * std::sqrt(p2 / n));
}

TEST(PhotonTrain, LabelsRealizePairwiseOverlap) {
  TrainOptions o;
  o.indistinguishability = 0.64;
  const std::size_t n = 200000;
  const auto t = sample_photon_train(EmitterParams{}, PulseParams{}, n, 3, o);
  std::size_t same = 0;
  for (std::size_t i = 0; i + 1 < t.size(); i += 2) same += (t[i].label == t[i + 1].label) ? 1 : 0;
  const double pairs = static_cast<double>(t.size() / 2);
  EXPECT_NEAR(same / pairs, 0.64, 4.0 * std::sqrt(0.64 * 0.36 / pairs));
}

TEST(PhotonTrain, DoublePulseTiming) {
  PulseParams p;
  p.double_pulse_delay_ns = 2.0;
  EXPECT_DOUBLE_EQ(pulse_time(p, 0), 0.0);
  EXPECT_DOUBLE_EQ(pulse_time(p, 1), 2.0);
  EXPECT_DOUBLE_EQ(pulse_time(p, 2), 12.2);
  EXPECT_DOUBLE_EQ(pulse_time(p, 5), 2.0 * 12.2 + 2.0);
}

}  // namespace
