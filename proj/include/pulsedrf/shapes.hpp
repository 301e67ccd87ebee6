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

// Time-domain peak shapes: exponential decays smeared by a Gaussian
// instrument response.

#include <cmath>
#include <numbers>

#include "pulsedrf/special.hpp"

namespace pulsedrf::shapes {

inline double fwhm_to_sigma(double fwhm) { return fwhm / (2.0 * std::sqrt(2.0 * std::numbers::ln2)); }

// CDF of Exp(tau) + N(0, sigma^2).
inline double exp_gauss_cdf(double t, double tau, double sigma) {
  if (sigma <= 0.0) return t <= 0.0 ? 0.0 : -std::expm1(-t / tau);
  const double a = -t / tau + 0.5 * (sigma / tau) * (sigma / tau);
  const double b = t / sigma - sigma / tau;
  return special::normal_cdf(t / sigma) - special::exp_times_normal_cdf(a, b);
}

// CDF of the two-sided exponential exp(-|t|/tau)/(2 tau) convolved with
// N(0, sigma^2).
inline double laplace_gauss_cdf(double t, double tau, double sigma) {
  return 0.5 * exp_gauss_cdf(t, tau, sigma) + 0.5 * (1.0 - exp_gauss_cdf(-t, tau, sigma));
}

// Integral of the unit-area two-sided peak centred at `centre` over [lo, hi].
inline double laplace_gauss_mass(double lo, double hi, double centre, double tau, double sigma) {
  // The shape is symmetric, so the right tail uses CDF(-t) = 1 - CDF(t).
  const double a = lo - centre;
  const double b = hi - centre;
  if (a >= 0.0) return laplace_gauss_cdf(-a, tau, sigma) - laplace_gauss_cdf(-b, tau, sigma);
  return laplace_gauss_cdf(b, tau, sigma) - laplace_gauss_cdf(a, tau, sigma);
}

inline double exp_gauss_mass(double lo, double hi, double onset, double tau, double sigma) {
  return exp_gauss_cdf(hi - onset, tau, sigma) - exp_gauss_cdf(lo - onset, tau, sigma);
}

}  // namespace pulsedrf::shapes
