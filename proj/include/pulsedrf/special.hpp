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

// Faddeeva function w(z) = exp(-z^2) erfc(-iz) in the upper half plane via
// Weideman's rational expansion (SIAM J. Numer. Anal. 31, 1994), and the
// scaled complementary error function built on it.

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

namespace pulsedrf::special {

namespace detail {

using pulsedrf::detail::require;

inline constexpr int kTerms = 40;

struct WeidemanTable {
  double L;
  std::array<double, kTerms> a;  // a[n-1] multiplies Z^(n-1)
};

inline const WeidemanTable& weideman_table() {
  static const WeidemanTable table = [] {
    constexpr int m = 2 * kTerms;
    WeidemanTable t{};
    t.L = std::sqrt(kTerms / std::numbers::sqrt2);
    // f(k) = exp(-x^2) (L^2 + x^2) sampled at x = L tan(k pi / 2M), k in
    // [-M+1, M-1]; f(-M) = 0. a_n are its cosine coefficients.
    std::array<double, 2 * m> f{};
    for (int k = -m + 1; k <= m - 1; ++k) {
      const double x = t.L * std::tan(k * std::numbers::pi / (2.0 * m));
      f[static_cast<std::size_t>(k + m)] = std::exp(-x * x) * (t.L * t.L + x * x);
    }
    for (int n = 1; n <= kTerms; ++n) {
      double s = 0.0;
      for (int k = -m; k <= m - 1; ++k)
        s += f[static_cast<std::size_t>(k + m)] * std::cos(std::numbers::pi * n * k / m);
      t.a[static_cast<std::size_t>(n - 1)] = s / (2.0 * m);
    }
    return t;
  }();
  return table;
}

}  // namespace detail

// Valid for Im(z) >= 0.
inline std::complex<double> faddeeva(std::complex<double> z) {
  const auto& t = detail::weideman_table();
  const std::complex<double> i{0.0, 1.0};
  const std::complex<double> denom = t.L - i * z;
  const std::complex<double> zz = (t.L + i * z) / denom;
  std::complex<double> p = 0.0;
  for (int n = detail::kTerms - 1; n >= 0; --n) p = p * zz + t.a[static_cast<std::size_t>(n)];
  return 2.0 * p / (denom * denom) + 1.0 / (std::sqrt(std::numbers::pi) * denom);
}

// exp(x^2) erfc(x) for any real x.
inline double erfcx(double x) {
  if (x >= 0.0) return faddeeva({0.0, x}).real();
  if (x < -26.0) return std::numeric_limits<double>::infinity();
  return 2.0 * std::exp(x * x) - faddeeva({0.0, -x}).real();
}

// exp(a) * Phi(b) with Phi the standard normal CDF, without overflow when a
// is large and b very negative.
inline double exp_times_normal_cdf(double a, double b) {
  if (b >= 0.0) return std::exp(a) * 0.5 * std::erfc(-b / std::numbers::sqrt2);
  const double z = -b / std::numbers::sqrt2;
  return 0.5 * std::exp(a - z * z) * erfcx(z);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

}  // namespace pulsedrf::special
