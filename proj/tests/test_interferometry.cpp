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
#include <vector>

#include "pulsedrf/interferometry.hpp"

namespace {

using namespace pulsedrf;
using namespace pulsedrf::interferometry;

HOMConfig balanced(double M) {
  HOMConfig c;
  c.M = M;
  return c;
}

// Distinguishable photons, R = T: every path pair carries 1/16 and reaches
// different detectors with probability 1/2, the sign of the delay set by
// which detector fires first.
std::array<double, 5> classical_central() {
  std::array<double, 5> a{};
  const double D = 1.0;
  for (double tx : {0.0, D})          // first photon: short or long arm
    for (double ty : {D, 2.0 * D}) {  // second photon, one delay later
      const int k = static_cast<int>(std::lround(ty - tx));
      a[static_cast<std::size_t>(2 + k)] += 0.25 * 0.25;
      a[static_cast<std::size_t>(2 - k)] += 0.25 * 0.25;
    }
  return a;
}

TEST(PeakAreas, DistinguishableMatchesClassicalCounting) {
  const auto ref = classical_central();
  const auto cross = hom_peak_areas(balanced(1.0), false);
  const auto m0 = hom_peak_areas(balanced(0.0), true);
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_NEAR(cross.central[k], ref[k], 1e-15);
    EXPECT_NEAR(m0.central[k], ref[k], 1e-15);
  }
  const double ratio[5] = {1, 2, 2, 2, 1};
  for (std::size_t k = 0; k < 5; ++k) EXPECT_NEAR(cross.central[k], ratio[k] / 16.0, 1e-15);
  EXPECT_NEAR(cross.same_detector, 0.5, 1e-15);
  const double side[5] = {1, 4, 6, 4, 1};
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_NEAR(cross.side_positive[k], side[k] / 16.0, 1e-15);
    EXPECT_NEAR(cross.side_negative[k], side[k] / 16.0, 1e-15);
  }
}

TEST(PeakAreas, IdealInterferenceEmptiesTheZeroPeak) {
  const auto par = hom_peak_areas(balanced(1.0), true);
  const auto cross = hom_peak_areas(balanced(1.0), false);
  EXPECT_NEAR(par.zero_delay(), 0.0, 1e-15);
  for (std::size_t k : {0u, 1u, 3u, 4u}) EXPECT_NEAR(par.central[k], cross.central[k], 1e-15);
  EXPECT_NEAR(raw_visibility(par, cross).value, 1.0, 1e-15);
}

class HomGrid : public ::testing::TestWithParam<std::tuple<double, double, double>> {
 protected:
  HOMConfig config(double M) const {
    HOMConfig c;
    c.set_ratio(std::get<0>(GetParam()));
    c.epsilon = std::get<1>(GetParam());
    c.g2 = std::get<2>(GetParam());
    c.M = M;
    return c;
  }
};

TEST_P(HomGrid, TotalPairsConservedAndAffineInM) {
  const auto a0 = hom_peak_areas(config(0.0), true);
  const auto a1 = hom_peak_areas(config(1.0), true);
  const auto x = hom_peak_areas(config(0.3), false);
  double prev = 2.0;
  for (double M : {0.0, 0.2, 0.45, 0.7, 0.9, 1.0}) {
    const auto a = hom_peak_areas(config(M), true);
    EXPECT_NEAR(a.total_pairs(), a0.total_pairs(), 1e-14);
    EXPECT_NEAR(a.total_pairs(), x.total_pairs(), 1e-14);
    for (std::size_t k = 0; k < 5; ++k) {
      EXPECT_NEAR(a.central[k], (1.0 - M) * a0.central[k] + M * a1.central[k], 1e-14);
      EXPECT_NEAR(a.side_positive[k], a0.side_positive[k], 1e-14);
    }
    EXPECT_LE(a.zero_delay(), prev + 1e-15);
    prev = a.zero_delay();
  }
}

TEST_P(HomGrid, ZeroOverlapCopolarizedEqualsCross) {
  const auto a = hom_peak_areas(config(0.0), true);
  const auto x = hom_peak_areas(config(0.0), false);
  for (std::size_t k = 0; k < 5; ++k) EXPECT_NEAR(a.central[k], x.central[k], 1e-15);
}

TEST_P(HomGrid, CorrectionRoundTrip) {
  const auto c = config(0.8);
  const double V = raw_visibility(hom_peak_areas(c, true), hom_peak_areas(c, false)).value;
  const double X = c.R * c.R + c.T * c.T;
  const double den = 2.0 * c.R * c.T * (1.0 - c.epsilon) * (1.0 - c.epsilon);
  if (c.g2 == 0.0) {
    EXPECT_NEAR(V, 0.8 * den / X, 1e-12);
  }
  const auto corr = corrected_visibility(V, c.g2, c.R, c.T, c.epsilon);
  // The correction inverts the model exactly only without multi-photon
  // events; with them it overshoots by X 2 g2 (1 - V) / den.
  EXPECT_NEAR(corr.M - 0.8, X * 2.0 * c.g2 * (1.0 - V) / den, 1e-9);
}

INSTANTIATE_TEST_SUITE_P(Setups, HomGrid,
                         ::testing::Combine(::testing::Values(1.0, 1.01, 1.3), ::testing::Values(0.0, 0.02, 0.1),
                                            ::testing::Values(0.0, 0.012, 0.05)));

TEST(Visibility, RawAndCorrectedExamples) {
  PeakAreas par;
  PeakAreas cross;
  par.central[2] = 0.09;
  cross.central[2] = 1.0;
  EXPECT_NEAR(raw_visibility(par, cross).value, 0.91, 1e-15);
  EXPECT_NEAR(raw_visibility(par, cross).bunching_probability(), 0.955, 1e-15);
  cross.central[2] = 0.0;
  EXPECT_THROW(raw_visibility(par, cross), InvalidArgument);

  const double T = 1.0 / 2.01;
  const double R = 1.0 - T;
  const auto m = corrected_visibility(0.91, 0.012, R, T, 0.02);
  const double expect = (0.91 + 0.024) * (R * R + T * T) / (2.0 * R * T * 0.98 * 0.98);
  EXPECT_NEAR(m.M, expect, 1e-15);
  EXPECT_FALSE(m.clamped);
  const auto hi = corrected_visibility(0.99, 0.05, 0.5, 0.5, 0.02);
  EXPECT_TRUE(hi.clamped);
  EXPECT_EQ(hi.M, 1.0);
  const auto lo = corrected_visibility(-0.5, 0.0, 0.5, 0.5, 0.0);
  EXPECT_TRUE(lo.clamped);
  EXPECT_EQ(lo.M, 0.0);
  EXPECT_THROW(corrected_visibility(0.9, 0.0, 0.6, 0.6, 0.0), InvalidArgument);
}

TEST(Histogram, SynthesizedPeakHasUnitArea) {
  const auto grid = CoincidenceHistogram::symmetric(20.0, 0.02);
  const auto h = synthesize_histogram({{0.37, 1.0}}, 0.41, 0.5, grid);
  EXPECT_NEAR(h.total(), 1.0, 1e-9);
  EXPECT_THROW(synthesize_histogram({{0.0, 1.0}}, 0.41, 0.5, CoincidenceHistogram::symmetric(20.0, 0.2)),
               InvalidArgument);
}

struct RoundTripCase {
  double delay;
  double irf;
  double tolerance;
};

class AreaRoundTrip : public ::testing::TestWithParam<RoundTripCase> {};

TEST_P(AreaRoundTrip, RecoversSynthesizedAreas) {
  const auto p = GetParam();
  HOMConfig cfg = balanced(0.9);
  cfg.set_ratio(1.01);
  cfg.epsilon = 0.02;
  cfg.g2 = 0.012;
  cfg.delay_ns = p.delay;
  cfg.detector_irf_fwhm_ns = p.irf;
  const auto areas = hom_peak_areas(cfg, true);
  PeakAreas scaled = areas;
  for (auto* arr : {&scaled.central, &scaled.side_positive, &scaled.side_negative})
    for (auto& v : *arr) v *= 1e5;
  const auto peaks = hom_peak_train(scaled, cfg, 1);
  const auto h = synthesize_histogram(peaks, 0.41, p.irf, CoincidenceHistogram::symmetric(20.0, 0.05));
  const auto fit = extract_peak_areas(h, peak_positions(peaks), 0.41, p.irf);
  ASSERT_EQ(fit.areas.size(), peaks.size());
  for (std::size_t i = 0; i < peaks.size(); ++i)
    EXPECT_NEAR(fit.areas[i] / peaks[i].area, 1.0, p.tolerance) << "peak " << i;
}

INSTANTIATE_TEST_SUITE_P(Cases, AreaRoundTrip,
                         ::testing::Values(RoundTripCase{2.0, 0.5, 1e-3}, RoundTripCase{1.0, 0.5, 0.02},
                                           RoundTripCase{2.0, 0.9, 1e-3}));

CoincidenceHistogram hbt_train(double zero_area, double side_area, double bin) {
  std::vector<Peak> peaks;
  for (int k = -4; k <= 4; ++k) peaks.push_back({k * 12.2, k == 0 ? zero_area : side_area});
  return synthesize_histogram(peaks, 0.41, 0.3, CoincidenceHistogram::symmetric(55.0, bin));
}

TEST(G2, EstimatorOnSynthesizedTrains) {
  const double w = peak_window(0.41, 0.3);
  // Neighbouring tails reach the zero window at the exp(-(12.2 - w) / T1) level.
  EXPECT_NEAR(g2_from_histogram(hbt_train(0.0, 1000.0, 0.05), 12.2, w).value, 0.0, 1e-10);
  const auto a = g2_from_histogram(hbt_train(12.0, 1000.0, 0.05), 12.2, w);
  const auto b = g2_from_histogram(hbt_train(120.0, 10000.0, 0.05), 12.2, w);
  EXPECT_NEAR(a.value, b.value, 1e-12);
  EXPECT_NEAR(a.value, 0.012, 1e-4);
  EXPECT_NEAR(b.error * std::sqrt(10.0), a.error, 1e-9);
  const auto odd = g2_from_histogram(hbt_train(12.0, 1000.0, 0.07), 12.2, w);
  EXPECT_FALSE(odd.warnings.empty());
  EXPECT_THROW(g2_from_histogram(CoincidenceHistogram::symmetric(20.0, 0.05), 12.2, w), InvalidArgument);
}

TEST(FockSplit, KnownDistributions) {
  for (double R : {0.5, 0.3}) {
    const double T = 1.0 - R;
    const auto p11 = fock_split(1, 1, R, T);
    EXPECT_NEAR(p11[1], (T - R) * (T - R), 1e-14);
    EXPECT_NEAR(p11[0], 2.0 * R * T, 1e-14);
    EXPECT_NEAR(p11[2], 2.0 * R * T, 1e-14);
    const auto p30 = fock_split(3, 0, R, T);
    for (int k = 0; k <= 3; ++k)
      EXPECT_NEAR(p30[static_cast<std::size_t>(k)], std::tgamma(4.0) / (std::tgamma(k + 1.0) * std::tgamma(4.0 - k)) *
                                                        std::pow(T, k) * std::pow(R, 3 - k),
                  1e-14);
    const auto p22 = fock_split(2, 2, R, T);
    double s = 0.0;
    for (double v : p22) s += v;
    EXPECT_NEAR(s, 1.0, 1e-13);
  }
  // Two photons in each port of a balanced splitter never split 1:3.
  const auto p22 = fock_split(2, 2, 0.5, 0.5);
  EXPECT_NEAR(p22[1], 0.0, 1e-15);
  EXPECT_NEAR(p22[3], 0.0, 1e-15);
}

TEST(MonteCarlo, HbtIdenticalAcrossWorkerCounts) {
  EmitterSource src;
  src.emitter.g2 = 0.05;
  src.pulses = 300000;
  src.seed = 4;
  const auto one = simulate_hbt(src, HbtSetup{}, 9, {1});
  const auto four = simulate_hbt(src, HbtSetup{}, 9, {4});
  EXPECT_EQ(one.counts, four.counts);
  EXPECT_GT(one.total(), 0.0);
}

TEST(MonteCarlo, HbtRecoversSourceStatistics) {
  EmitterSource single;
  single.emitter.g2 = 0.0;
  single.pulses = 400000;
  single.seed = 1;
  const double w = peak_window(0.41, 0.3);
  const auto g0 = g2_from_histogram(simulate_hbt(single, HbtSetup{}, 2, {4}), 12.2, w);
  EXPECT_EQ(g0.zero_area, 0.0);

  CoherentSource laser;
  laser.mean_photons = 0.5;
  laser.pulses = 400000;
  laser.seed = 3;
  const auto gc = g2_from_histogram(simulate_hbt(laser, HbtSetup{}, 5, {4}), 12.2, w);
  EXPECT_NEAR(gc.value, 1.0, 3.0 * gc.error);

  EmitterSource dirty = single;
  dirty.emitter.g2 = 0.05;
  const auto gd = g2_from_histogram(simulate_hbt(dirty, HbtSetup{}, 2, {4}), 12.2, w);
  EXPECT_NEAR(gd.value, 0.05, 3.0 * gd.error);
}

class HomMonteCarlo : public ::testing::TestWithParam<std::tuple<double, double, double>> {};

TEST_P(HomMonteCarlo, AgreesWithAnalyticVisibility) {
  const auto [M, g2, eps] = GetParam();
  HOMConfig cfg;
  cfg.set_ratio(1.01);
  cfg.M = M;
  cfg.g2 = g2;
  cfg.epsilon = eps;
  const std::uint64_t cycles = 200000;
  emitter::EmitterParams e;
  e.g2 = g2;
  emitter::PulseParams pulse;
  pulse.double_pulse_delay_ns = cfg.delay_ns;
  emitter::TrainOptions train;
  train.indistinguishability = M;
  const EmitterSource src{e, pulse, 2 * cycles, 21, train};
  HomSetup setup{cfg, true, 0.05, 20.0};
  const auto par = measure_hom_areas(simulate_hom(src, setup, 22, {4}), cfg, e.T1_ns, cycles);
  setup.copolarized = false;
  const auto cross = measure_hom_areas(simulate_hom(src, setup, 23, {4}), cfg, e.T1_ns, cycles);

  const double p = par.areas.zero_delay();
  const double x = cross.areas.zero_delay();
  const double v = 1.0 - p / x;
  const double sp = par.errors.central[2];
  const double sx = cross.errors.central[2];
  const double sigma = (p / x) * std::sqrt((sp / p) * (sp / p) + (sx / x) * (sx / x));
  const double model = raw_visibility(hom_peak_areas(cfg, true), hom_peak_areas(cfg, false)).value;
  EXPECT_NEAR(v, model, 3.0 * sigma) << "sigma " << sigma;
  EXPECT_NEAR(cross.areas.zero_delay(), hom_peak_areas(cfg, false).zero_delay(), 3.0 * sx);
}

INSTANTIATE_TEST_SUITE_P(Grid, HomMonteCarlo,
                         ::testing::Values(std::tuple{0.972, 0.012, 0.02}, std::tuple{0.5, 0.0, 0.0},
                                           std::tuple{0.8, 0.05, 0.1}, std::tuple{0.0, 0.012, 0.02}));

}  // namespace
