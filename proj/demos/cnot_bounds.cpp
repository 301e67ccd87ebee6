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


// CNOT truth tables and Hofmann bounds as the photon overlap degrades.

#include <cstdio>

#include "pulsedrf/cnot.hpp"

int main() {
  using namespace pulsedrf::cnot;
  const auto zz = truth_table(Basis::ZZ, 1.0);
  std::printf("ZZ truth table at M = 1 (rows HH HV VH VV):\n");
  for (int r = 0; r < 4; ++r)
    std::printf("  %.3f %.3f %.3f %.3f\n", zz.probabilities(r, 0), zz.probabilities(r, 1), zz.probabilities(r, 2),
                zz.probabilities(r, 3));
  std::printf("\n%5s %7s %7s %7s %7s %s\n", "M", "F_zz", "F_xx", "lower", "upper", "entangling");
  for (int i = 0; i <= 10; ++i) {
    const double m = 0.1 * i;
    const auto f = fidelities(truth_table(Basis::ZZ, m), truth_table(Basis::XX, m));
    std::printf("%5.2f %7.4f %7.4f %7.4f %7.4f %s\n", m, f.F_zz, f.F_xx, f.F_proc_lower, f.F_proc_upper,
                f.entangling ? "yes" : "no");
  }
}
