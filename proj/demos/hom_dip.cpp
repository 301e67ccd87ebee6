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


// Prints the copolarized and cross-polarized five-peak areas and the
// visibility chain for a range of indistinguishabilities.

#include <cstdio>

#include "pulsedrf/interferometry.hpp"

int main() {
  using namespace pulsedrf::interferometry;
  HOMConfig cfg;
  cfg.set_ratio(1.01);
  cfg.epsilon = 0.02;
  cfg.g2 = 0.012;
  std::printf("%6s %10s %10s %10s %10s\n", "M", "A0_par", "A0_cross", "V_raw", "M_corr");
  for (int i = 0; i <= 10; ++i) {
    cfg.M = 0.1 * i;
    const auto par = hom_peak_areas(cfg, true);
    const auto cross = hom_peak_areas(cfg, false);
    const auto v = raw_visibility(par, cross);
    const auto m = corrected_visibility(v.value, cfg.g2, cfg.R, cfg.T, cfg.epsilon);
    std::printf("%6.2f %10.5f %10.5f %10.5f %10.5f%s\n", cfg.M, par.zero_delay(), cross.zero_delay(), v.value, m.M,
                m.clamped ? " (clamped)" : "");
  }
}
