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


// sim <experiment> --config <path> --seed <u64> --workers <n> --out <dir>

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "pulsedrf/config.hpp"
#include "pulsedrf/experiments.hpp"
#include "pulsedrf/io.hpp"

int main(int argc, char** argv) {
  using namespace pulsedrf;
  CLI::App app{"Pulsed resonance-fluorescence simulation runner"};
  std::string experiment;
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::optional<std::string> out;
  app.add_option("experiment", experiment, "rabi, hbt, spectrum, hom, cnot or efficiency")->required();
  app.add_option("--config", config_path, "TOML configuration file");
  app.add_option("--seed", seed, "Random seed");
  app.add_option("--workers", workers, "Monte-Carlo worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", out, "Output directory");
  CLI11_PARSE(app, argc, argv);

  try {
    const auto kind = config::parse_experiment(experiment);
    const std::string text = config_path ? io::read_file(*config_path) : std::string{};
    auto cfg = config::load(text, config_path.value_or("<defaults>"), config::process_environment());
    if (cfg.experiment && *cfg.experiment != kind)
      throw InvalidArgument("config is for experiment '" + config::to_string(*cfg.experiment) + "', not '" +
                            experiment + "'");
    if (seed) cfg.seed = *seed;
    if (workers) cfg.workers = *workers;
    if (out) cfg.out = *out;
    const auto result = experiments::run(cfg, kind, cfg.out);
    std::cout << io::dump(result);
  } catch (const std::exception& e) {
    std::cerr << "sim: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
