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

// Mode-indexed single-photon linear optics and the two-photon detection
// engine with partial distinguishability.
//
// A network over `s` spatial channels acts on 2s modes. Mode (channel k,
// polarization p) maps to row/column 2k + p with H = 0, V = 1.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pulsedrf/error.hpp"

namespace pulsedrf::photonics {

using Complex = std::complex<double>;

enum class Polarization : std::uint8_t { H = 0, V = 1 };

struct ModeIndex {
  int spatial = 0;
  Polarization polarization = Polarization::H;

  constexpr int flat() const { return 2 * spatial + static_cast<int>(polarization); }

  static constexpr ModeIndex from_flat(int index) {
    return {index / 2, (index % 2 == 0) ? Polarization::H : Polarization::V};
  }

  friend constexpr bool operator==(const ModeIndex&, const ModeIndex&) = default;
};

inline constexpr double kUnitarityTolerance = 1e-12;

class NetworkUnitary {
 public:
  explicit NetworkUnitary(Eigen::MatrixXcd matrix) : matrix_(std::move(matrix)) {
    detail::require(matrix_.rows() == matrix_.cols(), "network matrix must be square");
    detail::require(matrix_.rows() > 0 && matrix_.rows() % 2 == 0,
                    "network matrix must cover two polarizations per spatial channel");
  }

  static NetworkUnitary identity(int channels) {
    detail::require(channels > 0, "identity needs at least one channel");
    return NetworkUnitary(Eigen::MatrixXcd::Identity(2 * channels, 2 * channels));
  }

  int channels() const { return static_cast<int>(matrix_.rows() / 2); }
  int modes() const { return static_cast<int>(matrix_.rows()); }
  const Eigen::MatrixXcd& matrix() const { return matrix_; }

  Complex operator()(ModeIndex out, ModeIndex in) const { return matrix_(out.flat(), in.flat()); }

  // max |(U^dagger U - I)_ij|
  double unitarity_error() const {
    const Eigen::MatrixXcd d =
        matrix_.adjoint() * matrix_ - Eigen::MatrixXcd::Identity(modes(), modes());
    return d.cwiseAbs().maxCoeff();
  }

  bool is_unitary(double tol = kUnitarityTolerance) const { return unitarity_error() < tol; }

  // Apply `this` first, then `next`.
  NetworkUnitary then(const NetworkUnitary& next) const {
    detail::require(next.modes() == modes(), "dimension mismatch in network composition");
    return NetworkUnitary(next.matrix_ * matrix_);
  }

 private:
  Eigen::MatrixXcd matrix_;
};

// Splitter acting identically on H and V: sqrt(T) on transmission, i sqrt(R)
// on reflection. Channel 0 transmits to 0, reflects to 1.
inline NetworkUnitary beam_splitter(double reflectance, double transmittance) {
  detail::require(reflectance >= 0.0 && transmittance >= 0.0,
                  "beam splitter reflectance and transmittance must be non-negative");
  detail::require(std::abs(reflectance + transmittance - 1.0) <= 1e-9,
                  "lossless beam splitter requires R + T = 1");
  const Complex t{std::sqrt(transmittance), 0.0};
  const Complex r{0.0, std::sqrt(reflectance)};
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(4, 4);
  for (int p = 0; p < 2; ++p) {
    m(p, p) = t;
    m(2 + p, 2 + p) = t;
    m(2 + p, p) = r;
    m(p, 2 + p) = r;
  }
  return NetworkUnitary(std::move(m));
}

// Splitter with the given reflectance-to-transmittance ratio.
inline NetworkUnitary beam_splitter_from_ratio(double r_over_t) {
  detail::require(r_over_t >= 0.0, "R/T must be non-negative");
  const double t = 1.0 / (1.0 + r_over_t);
  return beam_splitter(1.0 - t, t);
}

// Arbitrary 2x2 Jones matrix on a single spatial channel.
inline NetworkUnitary polarization_element(const Eigen::Matrix2cd& jones) {
  return NetworkUnitary(Eigen::MatrixXcd(jones));
}

// H -> cos2t H + sin2t V, V -> sin2t H - cos2t V.
inline NetworkUnitary half_wave_plate(double theta_deg) {
  const double two_theta = 2.0 * theta_deg * std::numbers::pi / 180.0;
  const double c = std::cos(two_theta);
  const double s = std::sin(two_theta);
  Eigen::Matrix2cd j;
  j << c, s, s, -c;
  return polarization_element(j);
}

// Partial polarizing beam splitter over two channels. Intensity transmissions
// default to 1 for H and 1/3 for V; reflection carries a factor i so two
// reflected V photons pick up -2/3 against the +1/3 of double transmission.
inline NetworkUnitary partial_pbs(double h_transmission = 1.0, double v_transmission = 1.0 / 3.0) {
  detail::require(h_transmission >= 0.0 && h_transmission <= 1.0,
                  "p-PBS H transmission must lie in [0, 1]");
  detail::require(v_transmission >= 0.0 && v_transmission <= 1.0,
                  "p-PBS V transmission must lie in [0, 1]");
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(4, 4);
  const double trans[2] = {h_transmission, v_transmission};
  for (int p = 0; p < 2; ++p) {
    const Complex t{std::sqrt(trans[p]), 0.0};
    const Complex r{0.0, std::sqrt(1.0 - trans[p])};
    m(p, p) = t;
    m(2 + p, 2 + p) = t;
    m(2 + p, p) = r;
    m(p, 2 + p) = r;
  }
  return NetworkUnitary(std::move(m));
}

// An element wired onto specific channels of a larger network. The element's
// local channel k is attached to global channel `channels[k]`.
struct Placement {
  NetworkUnitary element;
  std::vector<int> channels;
};

inline NetworkUnitary embed(const Placement& placement, int total_channels) {
  const auto& el = placement.element;
  detail::require(static_cast<int>(placement.channels.size()) == el.channels(),
                  "placement wires " + std::to_string(placement.channels.size()) +
                      " channels but element has " + std::to_string(el.channels()));
  std::vector<bool> used(static_cast<std::size_t>(total_channels), false);
  for (int c : placement.channels) {
    detail::require(c >= 0 && c < total_channels,
                    "dangling channel " + std::to_string(c) + " in a " +
                        std::to_string(total_channels) + "-channel network");
    detail::require(!used[static_cast<std::size_t>(c)], "channel wired twice in one placement");
    used[static_cast<std::size_t>(c)] = true;
  }
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(2 * total_channels, 2 * total_channels);
  const int n = el.channels();
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      for (int p = 0; p < 2; ++p) {
        for (int q = 0; q < 2; ++q) {
          m(2 * placement.channels[a] + p, 2 * placement.channels[b] + q) =
              el.matrix()(2 * a + p, 2 * b + q);
        }
      }
    }
  }
  return NetworkUnitary(std::move(m));
}

// Product of the embedded elements in application order.
inline NetworkUnitary compose(int total_channels, std::span<const Placement> elements) {
  auto u = NetworkUnitary::identity(total_channels);
  for (const auto& p : elements) u = u.then(embed(p, total_channels));
  return u;
}

// Composes elements of identical size acting on all channels.
inline NetworkUnitary compose(std::span<const NetworkUnitary> elements) {
  detail::require(!elements.empty(), "compose needs at least one element");
  NetworkUnitary u = NetworkUnitary::identity(elements.front().channels());
  for (const auto& e : elements) u = u.then(e);
  return u;
}

// Builder with named spatial channels.
class Circuit {
 public:
  explicit Circuit(std::vector<std::string> channel_names) : names_(std::move(channel_names)) {
    detail::require(!names_.empty(), "circuit needs at least one channel");
  }

  int channel(const std::string& name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
      if (names_[i] == name) return static_cast<int>(i);
    throw InvalidArgument("dangling channel '" + name + "'");
  }

  int channels() const { return static_cast<int>(names_.size()); }

  Circuit& add(NetworkUnitary element, const std::vector<std::string>& on) {
    std::vector<int> idx;
    idx.reserve(on.size());
    for (const auto& n : on) idx.push_back(channel(n));
    placements_.push_back({std::move(element), std::move(idx)});
    return *this;
  }

  NetworkUnitary unitary() const { return compose(channels(), placements_); }

 private:
  std::vector<std::string> names_;
  std::vector<Placement> placements_;
};

// A single photon: spatial channel, Jones vector, internal-mode label into an
// OverlapModel and its nominal emission slot.
struct PhotonWavepacket {
  int spatial = 0;
  Eigen::Vector2cd jones = Eigen::Vector2cd(1.0, 0.0);
  int internal = 0;
  double emission_slot_ns = 0.0;

  static PhotonWavepacket polarized(int spatial, Complex h, Complex v, int internal = 0) {
    PhotonWavepacket p;
    p.spatial = spatial;
    p.jones << h, v;
    p.internal = internal;
    return p;
  }

  void validate() const {
    detail::require(spatial >= 0, "photon spatial channel must be non-negative");
    detail::require(std::abs(jones.squaredNorm() - 1.0) <= 1e-12,
                    "photon Jones vector must be normalized");
  }

  // Amplitude vector over the modes of an n-channel network.
  Eigen::VectorXcd mode_vector(int channels) const {
    detail::require(spatial < channels, "photon channel outside the network");
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(2 * channels);
    v(2 * spatial) = jones(0);
    v(2 * spatial + 1) = jones(1);
    return v;
  }
};

// Pairwise internal-mode overlaps M = |<xi_i|xi_j>|^2.
class OverlapModel {
 public:
  explicit OverlapModel(Eigen::MatrixXd overlaps) : m_(std::move(overlaps)) {
    detail::require(m_.rows() == m_.cols() && m_.rows() > 0, "overlap matrix must be square");
    for (Eigen::Index i = 0; i < m_.rows(); ++i) {
      detail::require(m_(i, i) == 1.0, "overlap matrix diagonal must be exactly 1");
      for (Eigen::Index j = 0; j < m_.cols(); ++j) {
        detail::require(m_(i, j) >= 0.0 && m_(i, j) <= 1.0, "overlap M outside [0, 1]");
        detail::require(m_(i, j) == m_(j, i), "overlap matrix must be symmetric");
      }
    }
  }

  // Two internal modes (labels 0 and 1) with mutual overlap M.
  static OverlapModel pair(double m) {
    detail::require(m >= 0.0 && m <= 1.0, "overlap M outside [0, 1]");
    Eigen::Matrix2d o;
    o << 1.0, m, m, 1.0;
    return OverlapModel(o);
  }

  int size() const { return static_cast<int>(m_.rows()); }

  double operator()(int a, int b) const {
    detail::require(a >= 0 && b >= 0 && a < size() && b < size(), "internal label out of range");
    return m_(a, b);
  }

 private:
  Eigen::MatrixXd m_;
};

// Probabilities over unordered output-mode pairs {i, j}, i <= j.
class TwoPhotonDistribution {
 public:
  explicit TwoPhotonDistribution(int modes) : n_(modes), p_(Eigen::MatrixXd::Zero(modes, modes)) {}

  int modes() const { return n_; }

  double operator()(ModeIndex a, ModeIndex b) const { return at(a.flat(), b.flat()); }

  double at(int i, int j) const { return i <= j ? p_(i, j) : p_(j, i); }

  void set(int i, int j, double value) {
    if (i <= j)
      p_(i, j) = value;
    else
      p_(j, i) = value;
  }

  // Probability of one photon in spatial channel a and one in channel b,
  // any polarizations.
  double spatial(int a, int b) const {
    double s = 0.0;
    if (a == b) {
      for (int p = 0; p < 2; ++p)
        for (int q = p; q < 2; ++q) s += at(2 * a + p, 2 * a + q);
      return s;
    }
    for (int p = 0; p < 2; ++p)
      for (int q = 0; q < 2; ++q) s += at(2 * a + p, 2 * b + q);
    return s;
  }

  double total() const { return p_.sum(); }

 private:
  int n_;
  Eigen::MatrixXd p_;
};

// Detection probabilities for two photons sent through U. For outputs i != j
// P = |A|^2 + |B|^2 + 2 M Re(A B*) with A = a_i b_j and B = a_j b_i, where a
// and b are the single-photon output amplitudes; for i == j
// P = (1 + M) |a_i b_i|^2. Inputs must occupy orthogonal modes.
inline TwoPhotonDistribution two_photon_probs(const NetworkUnitary& u,
                                              const std::pair<PhotonWavepacket, PhotonWavepacket>& in,
                                              const OverlapModel& overlap) {
  in.first.validate();
  in.second.validate();
  const double m = overlap(in.first.internal, in.second.internal);
  const int channels = u.channels();
  const Eigen::VectorXcd v1 = in.first.mode_vector(channels);
  const Eigen::VectorXcd v2 = in.second.mode_vector(channels);
  detail::require(std::abs(v1.dot(v2)) <= 1e-12,
                  "two-photon inputs must occupy orthogonal modes");
  const Eigen::VectorXcd a = u.matrix() * v1;
  const Eigen::VectorXcd b = u.matrix() * v2;
  TwoPhotonDistribution d(u.modes());
  for (int i = 0; i < u.modes(); ++i) {
    const double same = std::norm(a(i) * b(i));
    d.set(i, i, (1.0 + m) * same);
    for (int j = i + 1; j < u.modes(); ++j) {
      const Complex amp_a = a(i) * b(j);
      const Complex amp_b = a(j) * b(i);
      d.set(i, j, std::norm(amp_a) + std::norm(amp_b) + 2.0 * m * (amp_a * std::conj(amp_b)).real());
    }
  }
  return d;
}

}  // namespace pulsedrf::photonics
