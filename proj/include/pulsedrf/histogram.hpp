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

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "pulsedrf/error.hpp"

namespace pulsedrf {

// Uniformly binned counts over time. Bin i covers
// [origin + i * width, origin + (i + 1) * width).
struct CoincidenceHistogram {
  double origin_ns = 0.0;
  double bin_width_ns = 1.0;
  std::vector<double> counts;

  static CoincidenceHistogram zeros(double lo_ns, double hi_ns, double bin_width_ns) {
    detail::require(bin_width_ns > 0.0 && hi_ns > lo_ns, "histogram range must be non-empty");
    const auto n = static_cast<std::size_t>(std::llround((hi_ns - lo_ns) / bin_width_ns));
    detail::require(n > 0, "histogram needs at least one bin");
    return {lo_ns, bin_width_ns, std::vector<double>(n, 0.0)};
  }

  // Histogram spanning [-half_range, half_range] with a bin centred on zero.
  static CoincidenceHistogram symmetric(double half_range_ns, double bin_width_ns) {
    const auto half = static_cast<std::size_t>(std::ceil(half_range_ns / bin_width_ns - 0.5));
    return {-(static_cast<double>(half) + 0.5) * bin_width_ns, bin_width_ns,
            std::vector<double>(2 * half + 1, 0.0)};
  }

  std::size_t size() const { return counts.size(); }
  double edge(std::size_t i) const { return origin_ns + static_cast<double>(i) * bin_width_ns; }
  double center(std::size_t i) const { return edge(i) + 0.5 * bin_width_ns; }
  double upper() const { return edge(size()); }

  void validate() const {
    detail::require(bin_width_ns > 0.0, "histogram bin width must be positive");
    detail::require(!counts.empty(), "histogram has no bins");
    for (double c : counts)
      detail::require(c >= 0.0 && std::isfinite(c), "histogram counts must be non-negative");
  }

  // Bin containing t, or size() when outside.
  std::size_t bin_of(double t) const {
    if (t < origin_ns) return size();
    const auto i = static_cast<std::size_t>((t - origin_ns) / bin_width_ns);
    return i < size() ? i : size();
  }

  void add(double t, double weight = 1.0) {
    const auto i = bin_of(t);
    if (i < size()) counts[i] += weight;
  }

  // Sum of bins whose centres lie in [lo, hi].
  double window_sum(double lo, double hi) const {
    double s = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
      const double c = center(i);
      if (c >= lo && c <= hi) s += counts[i];
    }
    return s;
  }

  double total() const {
    double s = 0.0;
    for (double c : counts) s += c;
    return s;
  }

  bool same_grid(const CoincidenceHistogram& o) const {
    return o.size() == size() && o.bin_width_ns == bin_width_ns && o.origin_ns == origin_ns;
  }

  // Associative, commutative merge of partial histograms on the same grid.
  CoincidenceHistogram& merge(const CoincidenceHistogram& o) {
    detail::require(same_grid(o), "cannot merge histograms on different grids");
    for (std::size_t i = 0; i < size(); ++i) counts[i] += o.counts[i];
    return *this;
  }
};

using DecayHistogram = CoincidenceHistogram;

}  // namespace pulsedrf
