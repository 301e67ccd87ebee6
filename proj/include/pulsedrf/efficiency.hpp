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

// Collection-efficiency budget: detected = source rate x product of stages.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "pulsedrf/error.hpp"

namespace pulsedrf::efficiency {

struct Stage {
  std::string name;
  // Absent for the unknown stage.
  std::optional<double> efficiency;
};

struct EfficiencyChain {
  std::vector<Stage> stages;
  std::optional<double> source_rate_mhz;
  std::optional<double> detected_rate_cps;

  double product() const {
    double p = 1.0;
    for (const auto& s : stages) {
      detail::require(s.efficiency.has_value(), "chain has an unknown stage '" + s.name + "'");
      p *= *s.efficiency;
    }
    return p;
  }

  // Product of every stage except those named.
  double product_excluding(const std::vector<std::string>& names) const {
    double p = 1.0;
    for (const auto& s : stages) {
      bool skip = false;
      for (const auto& n : names) skip = skip || n == s.name;
      if (skip) continue;
      detail::require(s.efficiency.has_value(), "chain has an unknown stage '" + s.name + "'");
      p *= *s.efficiency;
    }
    return p;
  }

  const Stage& stage(const std::string& name) const {
    for (const auto& s : stages)
      if (s.name == name) return s;
    throw InvalidArgument("no stage named '" + name + "'");
  }
};

inline constexpr const char* kSourceRate = "source_rate";
inline constexpr const char* kDetectedRate = "detected_rate";

namespace detail {

using pulsedrf::detail::require;

inline void check_known(const EfficiencyChain& c) {
  for (const auto& s : c.stages) {
    detail::require(!s.name.empty(), "stage names must be non-empty");
    if (s.efficiency)
      detail::require(*s.efficiency > 0.0 && *s.efficiency <= 1.0,
                      "stage '" + s.name + "' efficiency must lie in (0, 1]");
  }
  if (c.source_rate_mhz) detail::require(*c.source_rate_mhz > 0.0, "source rate must be positive");
  if (c.detected_rate_cps) detail::require(*c.detected_rate_cps >= 0.0, "detected rate must be non-negative");
}

}  // namespace detail

// Fills the single unknown: a stage efficiency, the source rate or the
// detected rate. `solve_for` names it and must be the only missing entry.
inline EfficiencyChain efficiency_chain(EfficiencyChain chain, const std::string& solve_for) {
  detail::check_known(chain);
  int unknown = (chain.source_rate_mhz ? 0 : 1) + (chain.detected_rate_cps ? 0 : 1);
  for (const auto& s : chain.stages) unknown += s.efficiency ? 0 : 1;
  detail::require(unknown == 1, "efficiency chain needs exactly one unknown, found " + std::to_string(unknown));
  const double hz_per_mhz = 1e6;
  if (solve_for == kDetectedRate) {
    detail::require(!chain.detected_rate_cps, "detected rate is not the unknown");
    chain.detected_rate_cps = *chain.source_rate_mhz * hz_per_mhz * chain.product();
  } else if (solve_for == kSourceRate) {
    detail::require(!chain.source_rate_mhz, "source rate is not the unknown");
    chain.source_rate_mhz = *chain.detected_rate_cps / (hz_per_mhz * chain.product());
  } else {
    Stage* target = nullptr;
    for (auto& s : chain.stages)
      if (s.name == solve_for) target = &s;
    detail::require(target != nullptr, "no stage named '" + solve_for + "'");
    detail::require(!target->efficiency, "stage '" + solve_for + "' is not the unknown");
    const double rest = chain.product_excluding({solve_for});
    const double e = *chain.detected_rate_cps / (*chain.source_rate_mhz * hz_per_mhz * rest);
    detail::require(e > 0.0 && e <= 1.0, "solved efficiency of '" + solve_for + "' falls outside (0, 1]");
    target->efficiency = e;
  }
  detail::require(chain.product() > 0.0 && chain.product() <= 1.0, "stage product must lie in (0, 1]");
  return chain;
}

}  // namespace pulsedrf::efficiency
