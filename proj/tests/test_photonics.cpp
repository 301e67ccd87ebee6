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
#include <random>

#include "oracles.hpp"
#include "pulsedrf/photonics.hpp"

namespace {

using namespace pulsedrf;
using namespace pulsedrf::photonics;

double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

PhotonWavepacket photon(int spatial, Complex h, Complex v, int internal) {
  return PhotonWavepacket::polarized(spatial, h, v, internal);
}

double coincidence(const TwoPhotonDistribution& d) { return d.spatial(0, 1); }

TEST(ModeIndex, FlatIndexIsBijective) {
  for (int s = 0; s < 5; ++s) {
    for (auto p : {Polarization::H, Polarization::V}) {
      const ModeIndex m{s, p};
      const auto back = ModeIndex::from_flat(m.flat());
      EXPECT_EQ(back.spatial, s);
      EXPECT_EQ(back.polarization, p);
    }
  }
  EXPECT_EQ(NetworkUnitary::identity(3).modes(), 6);
}

TEST(BeamSplitter, UnitaryAndAmplitudes) {
  const auto bs = beam_splitter(0.5, 0.5);
  EXPECT_LT(bs.unitarity_error(), 1e-12);
  EXPECT_NEAR(std::abs(bs.matrix()(0, 0)), std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(bs.matrix()(2, 0).imag(), std::sqrt(0.5), 1e-15);
  const auto id = beam_splitter(0.0, 1.0);
  EXPECT_LT(max_abs(id.matrix() - Eigen::MatrixXcd::Identity(4, 4)), 1e-15);
  const auto uneven = beam_splitter_from_ratio(1.01);
  EXPECT_NEAR(std::norm(uneven.matrix()(2, 0)), 1.01 / 2.01, 1e-14);
  EXPECT_LT(uneven.unitarity_error(), 1e-12);
  EXPECT_THROW(beam_splitter(0.6, 0.5), InvalidArgument);
  EXPECT_THROW(beam_splitter(-0.1, 1.1), InvalidArgument);
}

TEST(HalfWavePlate, MatchesQuotedRotation) {
  const auto swap = half_wave_plate(45.0);
  EXPECT_NEAR(std::abs(swap.matrix()(0, 1)), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(swap.matrix()(0, 0)), 0.0, 1e-15);
  const auto had = half_wave_plate(22.5);
  EXPECT_NEAR(had.matrix()(0, 0).real(), std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(had.matrix()(1, 0).real(), std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(had.matrix()(1, 1).real(), -std::sqrt(0.5), 1e-15);
  const auto zero = half_wave_plate(0.0);
  EXPECT_NEAR(zero.matrix()(0, 0).real(), 1.0, 1e-15);
  EXPECT_NEAR(zero.matrix()(1, 1).real(), -1.0, 1e-15);
  for (double t : {-73.0, 0.0, 13.0, 22.5, 45.0, 181.0}) EXPECT_LT(half_wave_plate(t).unitarity_error(), 1e-12);
}

TEST(PartialPbs, TransmissionsAndVvAmplitude) {
  const auto p = partial_pbs();
  EXPECT_LT(p.unitarity_error(), 1e-12);
  EXPECT_NEAR(std::norm(p.matrix()(0, 0)), 1.0, 1e-15);
  EXPECT_NEAR(std::norm(p.matrix()(2, 0)), 0.0, 1e-15);
  EXPECT_NEAR(std::norm(p.matrix()(1, 1)), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(std::norm(p.matrix()(3, 1)), 2.0 / 3.0, 1e-15);
  // One V photon per port, both leaving separately: t*t + r*r.
  const Complex both = p.matrix()(1, 1) * p.matrix()(3, 3) + p.matrix()(3, 1) * p.matrix()(1, 3);
  EXPECT_NEAR(both.real(), -1.0 / 3.0, 1e-15);
  EXPECT_NEAR(both.imag(), 0.0, 1e-15);
}

TEST(Compose, IdentityAndInvolution) {
  const std::vector<NetworkUnitary> ids{NetworkUnitary::identity(2), NetworkUnitary::identity(2)};
  EXPECT_LT(max_abs(compose(ids).matrix() - Eigen::MatrixXcd::Identity(4, 4)), 1e-15);
  const std::vector<NetworkUnitary> hwps{half_wave_plate(45.0), half_wave_plate(45.0)};
  EXPECT_LT(max_abs(compose(hwps).matrix() - Eigen::MatrixXcd::Identity(2, 2)), 1e-15);
}

TEST(Compose, ApplicationOrderAndWiring) {
  // HWP(22.5) then HWP(0) differs from the reverse order.
  Circuit a({"x"});
  a.add(half_wave_plate(22.5), {"x"}).add(half_wave_plate(0.0), {"x"});
  const Eigen::MatrixXcd expected = half_wave_plate(0.0).matrix() * half_wave_plate(22.5).matrix();
  EXPECT_LT(max_abs(a.unitary().matrix() - expected), 1e-15);

  // A splitter wired onto channels (2, 0) of three.
  const auto bs = beam_splitter(0.3, 0.7);
  const auto u = embed({bs, {2, 0}}, 3);
  EXPECT_NEAR(std::abs(u.matrix()(4, 4) - bs.matrix()(0, 0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(u.matrix()(0, 4) - bs.matrix()(2, 0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(u.matrix()(2, 2) - Complex(1.0)), 0.0, 1e-15);
  EXPECT_LT(u.unitarity_error(), 1e-12);
}

TEST(Compose, RejectsBadWiring) {
  EXPECT_THROW(embed({beam_splitter(0.5, 0.5), {0, 3}}, 2), InvalidArgument);
  EXPECT_THROW(embed({beam_splitter(0.5, 0.5), {0}}, 2), InvalidArgument);
  EXPECT_THROW(embed({beam_splitter(0.5, 0.5), {1, 1}}, 2), InvalidArgument);
  Circuit c({"a", "b"});
  EXPECT_THROW(c.add(half_wave_plate(0.0), {"z"}), InvalidArgument);
  const std::vector<NetworkUnitary> mixed{NetworkUnitary::identity(1), NetworkUnitary::identity(2)};
  EXPECT_THROW(compose(mixed), InvalidArgument);
}

TEST(Wavepacket, RejectsUnnormalizedJones) {
  EXPECT_THROW(photon(0, 1.0, 0.1, 0).validate(), InvalidArgument);
  EXPECT_NO_THROW(photon(0, std::sqrt(0.5), Complex(0, std::sqrt(0.5)), 0).validate());
}

TEST(OverlapModelTest, ValidatesEntries) {
  EXPECT_NO_THROW(OverlapModel::pair(0.3));
  EXPECT_THROW(OverlapModel::pair(1.2), InvalidArgument);
  EXPECT_THROW(OverlapModel::pair(-0.1), InvalidArgument);
  Eigen::Matrix2d bad;
  bad << 0.9, 0.5, 0.5, 1.0;
  EXPECT_THROW(OverlapModel{bad}, InvalidArgument);
  bad << 1.0, 0.4, 0.5, 1.0;
  EXPECT_THROW(OverlapModel{bad}, InvalidArgument);
}

TEST(TwoPhoton, HongOuMandelOnBalancedSplitter) {
  const auto bs = beam_splitter(0.5, 0.5);
  const auto h0 = photon(0, 1.0, 0.0, 0);
  const auto h1 = photon(1, 1.0, 0.0, 1);
  EXPECT_NEAR(coincidence(two_photon_probs(bs, {h0, h1}, OverlapModel::pair(1.0))), 0.0, 1e-15);
  EXPECT_NEAR(coincidence(two_photon_probs(bs, {h0, h1}, OverlapModel::pair(0.0))), 0.5, 1e-15);
  const auto d = two_photon_probs(bs, {h0, h1}, OverlapModel::pair(0.5));
  EXPECT_NEAR(coincidence(d), 0.25, 1e-15);
  for (double m : {0.0, 0.13, 0.5, 0.97, 1.0})
    EXPECT_NEAR(coincidence(two_photon_probs(bs, {h0, h1}, OverlapModel::pair(m))), (1.0 - m) / 2.0, 1e-15);
}

TEST(TwoPhoton, QuarterAtHalfOverlapAgreesWithSymmetrizedOracle) {
  const auto bs = beam_splitter(0.5, 0.5);
  const auto h0 = photon(0, 1.0, 0.0, 0);
  const auto h1 = photon(1, 1.0, 0.0, 1);
  const auto ref = oracle::symmetrized_pair(bs.matrix(), h0.mode_vector(2), h1.mode_vector(2), 0.5);
  // Spatial coincidence: modes {0,1} x {2,3}.
  double c = 0.0;
  for (int i : {0, 1})
    for (int j : {2, 3}) c += ref.at({i, j});
  EXPECT_NEAR(c, 0.25, 1e-14);
}

TEST(TwoPhoton, RejectsOverlappingInputModes) {
  const auto bs = beam_splitter(0.5, 0.5);
  EXPECT_THROW(two_photon_probs(bs, {photon(0, 1.0, 0.0, 0), photon(0, 1.0, 0.0, 1)}, OverlapModel::pair(1.0)),
               InvalidArgument);
  // Same spatial mode with orthogonal polarizations is allowed.
  EXPECT_NO_THROW(
      two_photon_probs(bs, {photon(0, 1.0, 0.0, 0), photon(0, 0.0, 1.0, 1)}, OverlapModel::pair(1.0)));
}

// Random lossless networks over three channels built from random elements.
NetworkUnitary random_network(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Circuit c({"a", "b", "c"});
  const char* names[] = {"a", "b", "c"};
  for (int k = 0; k < 6; ++k) {
    const int i = static_cast<int>(u(rng) * 3) % 3;
    const int j = (i + 1 + static_cast<int>(u(rng) * 2) % 2) % 3;
    const double r = u(rng);
    switch (k % 3) {
      case 0: c.add(beam_splitter(r, 1.0 - r), {names[i], names[j]}); break;
      case 1: c.add(partial_pbs(u(rng), u(rng)), {names[i], names[j]}); break;
      default: c.add(half_wave_plate(360.0 * r), {names[i]}); break;
    }
  }
  return c.unitary();
}

PhotonWavepacket random_photon(std::mt19937_64& rng, int spatial, int internal) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::Vector2cd j(Complex(g(rng), g(rng)), Complex(g(rng), g(rng)));
  j.normalize();
  return photon(spatial, j(0), j(1), internal);
}

class TwoPhotonProperties : public ::testing::TestWithParam<int> {};

TEST_P(TwoPhotonProperties, NormalizationSymmetryAffinityAndOracles) {
  std::mt19937_64 rng(static_cast<std::uint64_t>(GetParam()));
  const auto u = random_network(rng);
  ASSERT_LT(u.unitarity_error(), 1e-12);
  const auto p1 = random_photon(rng, 0, 0);
  const auto p2 = random_photon(rng, 2, 1);
  const int n = u.modes();
  const auto d0 = two_photon_probs(u, {p1, p2}, OverlapModel::pair(0.0));
  const auto d1 = two_photon_probs(u, {p1, p2}, OverlapModel::pair(1.0));
  const auto dist = oracle::distinguishable_pair(u.matrix(), p1.mode_vector(3), p2.mode_vector(3));
  const auto ind = oracle::symmetrized_pair(u.matrix(), p1.mode_vector(3), p2.mode_vector(3), 1.0);
  for (double m : {0.0, 0.21, 0.5, 0.77, 1.0}) {
    const auto d = two_photon_probs(u, {p1, p2}, OverlapModel::pair(m));
    const auto swapped = two_photon_probs(u, {p2, p1}, OverlapModel::pair(m));
    const auto ref = oracle::symmetrized_pair(u.matrix(), p1.mode_vector(3), p2.mode_vector(3), m);
    EXPECT_NEAR(d.total(), 1.0, 1e-9);
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        EXPECT_NEAR(d.at(i, j), swapped.at(i, j), 1e-14);
        EXPECT_NEAR(d.at(i, j), (1.0 - m) * d0.at(i, j) + m * d1.at(i, j), 1e-14);
        EXPECT_NEAR(d.at(i, j), ref.at({i, j}), 1e-13);
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      EXPECT_NEAR(d0.at(i, j), dist.at({i, j}), 1e-13);
      EXPECT_NEAR(d1.at(i, j), ind.at({i, j}), 1e-13);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(RandomNetworks, TwoPhotonProperties, ::testing::Range(1, 41));

TEST(Unitarity, ElementConstructorsOverParameterSweep) {
  for (int k = 0; k <= 20; ++k) {
    const double r = k / 20.0;
    EXPECT_LT(beam_splitter(r, 1.0 - r).unitarity_error(), 1e-12);
    EXPECT_LT(partial_pbs(r, 1.0 - r).unitarity_error(), 1e-12);
    EXPECT_LT(half_wave_plate(18.0 * k).unitarity_error(), 1e-12);
  }
}

}  // namespace
