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

// Experiment configuration: a TOML-subset file bound onto typed settings,
// with SIM_<SECTION>_<KEY> environment overrides. Unknown sections, keys and
// SIM_ variables are errors; all problems are reported together.

#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pulsedrf/cnot.hpp"
#include "pulsedrf/emitter.hpp"
#include "pulsedrf/error.hpp"
#include "pulsedrf/interferometry.hpp"
#include "pulsedrf/spectroscopy.hpp"
#include "pulsedrf/toml.hpp"

extern char** environ;

namespace pulsedrf::config {

enum class Experiment { rabi, hbt, spectrum, hom, cnot, efficiency };

inline const std::vector<std::pair<std::string, Experiment>>& experiment_names() {
  static const std::vector<std::pair<std::string, Experiment>> names{
      {"rabi", Experiment::rabi}, {"hbt", Experiment::hbt},   {"spectrum", Experiment::spectrum},
      {"hom", Experiment::hom},   {"cnot", Experiment::cnot}, {"efficiency", Experiment::efficiency}};
  return names;
}

inline std::string to_string(Experiment e) {
  for (const auto& [n, x] : experiment_names())
    if (x == e) return n;
  return "?";
}

inline Experiment parse_experiment(const std::string& s) {
  for (const auto& [n, x] : experiment_names())
    if (n == s) return x;
  throw InvalidArgument("unknown experiment '" + s + "'");
}

struct RabiSettings {
  double area_max_pi = 4.0;
  int points = 161;
  emitter::Integrator integrator = emitter::Integrator::adaptive;
  double eid_coefficient_ns = 0.0;
};

struct HbtSettings {
  std::uint64_t pulses = 10'000'000;
  double R = 0.5;
  double irf_fwhm_ns = 0.3;
  double bin_width_ns = 0.05;
  double half_range_ns = 42.0;
  // "emitter" or "coherent".
  std::string source = "emitter";
  double mean_photons = 0.1;
  // Peak integration half-width; absent selects 3 (T1 + sigma_IRF).
  std::optional<double> window_ns;
};

struct SpectrumSettings {
  double lorentzian_fwhm_ghz = 0.4;
  double gaussian_fwhm_ghz = 1.0;
  double span_ghz = 12.0;
  int points = 1201;
  double noise_fraction = 0.01;
  // Flat detector background under the line, relative to the peak.
  double baseline_fraction = 0.05;
  spectroscopy::FilterParams filter;
  // Laser background: span and grid for the signal-to-background study.
  double sbr_span_ghz = 2000.0;
  int sbr_points = 40001;
  double unfiltered_sbr = 20.0;
  double lifetime_T1_ns = 0.416;
  double lifetime_irf_fwhm_ns = 0.1;
  double lifetime_bin_ns = 0.016;
  double lifetime_span_ns = 12.0;
  double lifetime_counts = 200000.0;
  double lifetime_background = 5.0;
};

struct HomSettings {
  interferometry::HOMConfig config;
  // When set, overrides R and T.
  std::optional<double> r_over_t;
  std::uint64_t pulses = 0;
  double bin_width_ns = 0.05;
  double half_range_ns = 42.0;
  int bootstrap_samples = 200;
  double bootstrap_cycles = 3.0e5;
  // Extra measured raw visibilities corrected with `extra_g2`.
  std::vector<double> extra_raw_visibilities;
  double extra_g2 = 0.0;
};

struct CnotSettings {
  double M = 1.0;
  std::optional<std::uint64_t> shots;
  cnot::ElementErrors elements;
  // Measured fidelities to fit M against.
  std::optional<double> target_F_zz;
  std::optional<double> target_F_xx;
};

struct EfficiencySettings {
  std::vector<std::string> stage_names;
  std::vector<double> stage_efficiencies;
  std::string solve_for;
  std::optional<double> source_rate_mhz;
  std::optional<double> detected_rate_cps;
  // Stages left out of the quoted pre-detector efficiency.
  std::vector<std::string> detector_stages;
};

struct ExperimentConfig {
  std::optional<Experiment> experiment;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  std::string out = "out";
  emitter::EmitterParams emitter;
  emitter::PulseParams pulse;
  RabiSettings rabi;
  HbtSettings hbt;
  SpectrumSettings spectrum;
  HomSettings hom;
  CnotSettings cnot;
  EfficiencySettings efficiency;

  void validate() const;
};

namespace detail {

using pulsedrf::detail::require;
using Setter = std::function<void(const toml::Value&)>;

inline double number(const toml::Value& v) {
  if (!v.is_number()) throw FormatError("expected a number");
  return std::get<double>(v.data);
}

inline std::uint64_t count(const toml::Value& v) {
  const double x = number(v);
  if (!(x >= 0.0) || x != std::floor(x) || x > 1.8e19) throw FormatError("expected a non-negative integer");
  return static_cast<std::uint64_t>(x);
}

inline std::string text(const toml::Value& v) {
  if (!v.is_string()) throw FormatError("expected a string");
  return std::get<std::string>(v.data);
}

inline bool flag(const toml::Value& v) {
  if (!v.is_bool()) throw FormatError("expected true or false");
  return std::get<bool>(v.data);
}

inline std::vector<double> numbers(const toml::Value& v) {
  if (!v.is_array()) throw FormatError("expected an array of numbers");
  std::vector<double> out;
  for (const auto& x : std::get<toml::Array>(v.data)) out.push_back(number(x));
  return out;
}

inline std::vector<std::string> texts(const toml::Value& v) {
  if (!v.is_array()) throw FormatError("expected an array of strings");
  std::vector<std::string> out;
  for (const auto& x : std::get<toml::Array>(v.data)) out.push_back(text(x));
  return out;
}

struct Binding {
  std::string section;
  std::string key;
  Setter set;
};

inline Setter to(double& d) { return [&d](const toml::Value& v) { d = number(v); }; }
inline Setter to(int& d) {
  return [&d](const toml::Value& v) { d = static_cast<int>(count(v)); };
}
inline Setter to(unsigned& d) {
  return [&d](const toml::Value& v) { d = static_cast<unsigned>(count(v)); };
}
inline Setter to(std::uint64_t& d) { return [&d](const toml::Value& v) { d = count(v); }; }
inline Setter to(std::string& d) { return [&d](const toml::Value& v) { d = text(v); }; }
inline Setter to(std::optional<double>& d) { return [&d](const toml::Value& v) { d = number(v); }; }
inline Setter to(std::optional<std::uint64_t>& d) { return [&d](const toml::Value& v) { d = count(v); }; }
inline Setter to(std::vector<double>& d) { return [&d](const toml::Value& v) { d = numbers(v); }; }
inline Setter to(std::vector<std::string>& d) { return [&d](const toml::Value& v) { d = texts(v); }; }

inline std::vector<Binding> bindings(ExperimentConfig& c) {
  std::vector<Binding> b{
      {"", "experiment", [&c](const toml::Value& v) { c.experiment = parse_experiment(text(v)); }},
      {"", "seed", to(c.seed)},
      {"", "workers", to(c.workers)},
      {"", "out", to(c.out)},

      {"emitter", "T1_ns", to(c.emitter.T1_ns)},
      {"emitter", "T2_ns", to(c.emitter.T2_ns)},
      {"emitter", "T2_star_ns", to(c.emitter.T2_star_ns)},
      {"emitter", "inhomogeneous_fwhm_ghz", to(c.emitter.inhomogeneous_fwhm_ghz)},
      {"emitter", "g2", to(c.emitter.g2)},

      {"pulse", "area_pi", to(c.pulse.area_pi)},
      {"pulse", "fwhm_ps", to(c.pulse.fwhm_ps)},
      {"pulse", "shape",
       [&c](const toml::Value& v) {
         const auto s = text(v);
         if (s == "gaussian") c.pulse.shape = emitter::PulseShape::gaussian;
         else if (s == "sech") c.pulse.shape = emitter::PulseShape::sech;
         else throw FormatError("shape must be \"gaussian\" or \"sech\"");
       }},
      {"pulse", "rep_period_ns", to(c.pulse.rep_period_ns)},
      {"pulse", "double_pulse_delay_ns", to(c.pulse.double_pulse_delay_ns)},

      {"rabi", "area_max_pi", to(c.rabi.area_max_pi)},
      {"rabi", "points", to(c.rabi.points)},
      {"rabi", "integrator",
       [&c](const toml::Value& v) {
         const auto s = text(v);
         if (s == "adaptive") c.rabi.integrator = emitter::Integrator::adaptive;
         else if (s == "fixed_step") c.rabi.integrator = emitter::Integrator::fixed_step;
         else throw FormatError("integrator must be \"adaptive\" or \"fixed_step\"");
       }},
      {"rabi", "eid_coefficient_ns", to(c.rabi.eid_coefficient_ns)},

      {"hbt", "pulses", to(c.hbt.pulses)},
      {"hbt", "R", to(c.hbt.R)},
      {"hbt", "irf_fwhm_ns", to(c.hbt.irf_fwhm_ns)},
      {"hbt", "bin_width_ns", to(c.hbt.bin_width_ns)},
      {"hbt", "half_range_ns", to(c.hbt.half_range_ns)},
      {"hbt", "source", to(c.hbt.source)},
      {"hbt", "mean_photons", to(c.hbt.mean_photons)},
      {"hbt", "window_ns", to(c.hbt.window_ns)},

      {"spectrum", "lorentzian_fwhm_ghz", to(c.spectrum.lorentzian_fwhm_ghz)},
      {"spectrum", "gaussian_fwhm_ghz", to(c.spectrum.gaussian_fwhm_ghz)},
      {"spectrum", "span_ghz", to(c.spectrum.span_ghz)},
      {"spectrum", "points", to(c.spectrum.points)},
      {"spectrum", "noise_fraction", to(c.spectrum.noise_fraction)},
      {"spectrum", "baseline_fraction", to(c.spectrum.baseline_fraction)},
      {"spectrum", "filter_kind",
       [&c](const toml::Value& v) {
         const auto s = text(v);
         if (s == "etalon_lorentzian") c.spectrum.filter.kind = spectroscopy::FilterKind::etalon_lorentzian;
         else if (s == "fabry_perot_airy") c.spectrum.filter.kind = spectroscopy::FilterKind::fabry_perot_airy;
         else throw FormatError("filter_kind must be \"etalon_lorentzian\" or \"fabry_perot_airy\"");
       }},
      {"spectrum", "filter_bandwidth_ghz", to(c.spectrum.filter.bandwidth_fwhm_ghz)},
      {"spectrum", "filter_center_ghz", to(c.spectrum.filter.center_ghz)},
      {"spectrum", "filter_finesse", to(c.spectrum.filter.finesse)},
      {"spectrum", "filter_transmittance", to(c.spectrum.filter.peak_transmittance)},
      {"spectrum", "sbr_span_ghz", to(c.spectrum.sbr_span_ghz)},
      {"spectrum", "sbr_points", to(c.spectrum.sbr_points)},
      {"spectrum", "unfiltered_sbr", to(c.spectrum.unfiltered_sbr)},
      {"spectrum", "lifetime_T1_ns", to(c.spectrum.lifetime_T1_ns)},
      {"spectrum", "lifetime_irf_fwhm_ns", to(c.spectrum.lifetime_irf_fwhm_ns)},
      {"spectrum", "lifetime_bin_ns", to(c.spectrum.lifetime_bin_ns)},
      {"spectrum", "lifetime_span_ns", to(c.spectrum.lifetime_span_ns)},
      {"spectrum", "lifetime_counts", to(c.spectrum.lifetime_counts)},
      {"spectrum", "lifetime_background", to(c.spectrum.lifetime_background)},

      {"hom", "R", to(c.hom.config.R)},
      {"hom", "T", to(c.hom.config.T)},
      {"hom", "r_over_t", to(c.hom.r_over_t)},
      {"hom", "epsilon", to(c.hom.config.epsilon)},
      {"hom", "delay_ns", to(c.hom.config.delay_ns)},
      {"hom", "detector_irf_fwhm_ns", to(c.hom.config.detector_irf_fwhm_ns)},
      {"hom", "M", to(c.hom.config.M)},
      {"hom", "pulses", to(c.hom.pulses)},
      {"hom", "bin_width_ns", to(c.hom.bin_width_ns)},
      {"hom", "half_range_ns", to(c.hom.half_range_ns)},
      {"hom", "bootstrap_samples", to(c.hom.bootstrap_samples)},
      {"hom", "bootstrap_cycles", to(c.hom.bootstrap_cycles)},
      {"hom", "extra_raw_visibilities", to(c.hom.extra_raw_visibilities)},
      {"hom", "extra_g2", to(c.hom.extra_g2)},

      {"cnot", "M", to(c.cnot.M)},
      {"cnot", "shots", to(c.cnot.shots)},
      {"cnot", "central_v_transmission", to(c.cnot.elements.central_v_transmission)},
      {"cnot", "compensating_v_transmission", to(c.cnot.elements.compensating_v_transmission)},
      {"cnot", "hadamard_angle_deg", to(c.cnot.elements.hadamard_angle_deg)},
      {"cnot", "swap_angle_deg", to(c.cnot.elements.swap_angle_deg)},
      {"cnot", "target_F_zz", to(c.cnot.target_F_zz)},
      {"cnot", "target_F_xx", to(c.cnot.target_F_xx)},

      {"efficiency", "stage_names", to(c.efficiency.stage_names)},
      {"efficiency", "stage_efficiencies", to(c.efficiency.stage_efficiencies)},
      {"efficiency", "solve_for", to(c.efficiency.solve_for)},
      {"efficiency", "source_rate_mhz", to(c.efficiency.source_rate_mhz)},
      {"efficiency", "detected_rate_cps", to(c.efficiency.detected_rate_cps)},
      {"efficiency", "detector_stages", to(c.efficiency.detector_stages)},
  };
  return b;
}

inline std::string env_name(const std::string& section, const std::string& key) {
  std::string n = "SIM_";
  for (char ch : section.empty() ? key : section + "_" + key)
    n += static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return n;
}

}  // namespace detail

// Binds a parsed document; `origin` names the source in messages.
inline void apply(ExperimentConfig& c, const toml::Document& doc, const std::string& origin,
                  std::vector<std::string>& errors) {
  auto table = detail::bindings(c);
  for (const auto& [section, keys] : doc) {
    bool section_known = section.empty();
    for (const auto& b : table) section_known = section_known || b.section == section;
    if (!section_known) {
      const int line = keys.empty() ? 0 : keys.begin()->second.line;
      errors.push_back(origin + ": unknown section [" + section + "]" +
                       (line ? " (first key on line " + std::to_string(line) + ")" : ""));
      continue;
    }
    for (const auto& [key, value] : keys) {
      const std::string where = origin + ":" + std::to_string(value.line) + ": ";
      const detail::Binding* hit = nullptr;
      for (const auto& b : table)
        if (b.section == section && b.key == key) hit = &b;
      if (!hit) {
        errors.push_back(where + "unknown key '" + key + "'" + (section.empty() ? "" : " in [" + section + "]"));
        continue;
      }
      try {
        hit->set(value);
      } catch (const FormatError& e) {
        errors.push_back(where + "key '" + key + "': " + e.what());
      }
    }
  }
}

// Applies SIM_* variables from `env` (NAME=VALUE strings). Values use the
// same syntax as the file; a bare word is taken as a string.
inline void apply_environment(ExperimentConfig& c, const std::vector<std::string>& env,
                              std::vector<std::string>& errors) {
  auto table = detail::bindings(c);
  for (const auto& entry : env) {
    if (entry.rfind("SIM_", 0) != 0) continue;
    const auto eq = entry.find('=');
    const std::string name = entry.substr(0, eq);
    const std::string raw = eq == std::string::npos ? "" : entry.substr(eq + 1);
    const detail::Binding* hit = nullptr;
    for (const auto& b : table)
      if (detail::env_name(b.section, b.key) == name) hit = &b;
    if (!hit) {
      errors.push_back("environment: unknown variable " + name);
      continue;
    }
    try {
      toml::Value v;
      try {
        v = toml::parse_value(raw);
      } catch (const FormatError&) {
        v = toml::Value{raw};
      }
      hit->set(v);
    } catch (const FormatError& e) {
      errors.push_back("environment: " + name + ": " + e.what());
    }
  }
}

inline std::vector<std::string> process_environment() {
  std::vector<std::string> env;
  for (char** e = environ; e && *e; ++e) env.emplace_back(*e);
  return env;
}

inline void ExperimentConfig::validate() const {
  std::vector<std::string> errors;
  auto check = [&](const std::string& what, auto&& fn) {
    try {
      fn();
    } catch (const InvalidArgument& e) {
      errors.push_back(what + ": " + e.what());
    }
  };
  check("[emitter]", [&] { emitter.validate(); });
  check("[pulse]", [&] { pulse.validate(); });
  check("workers", [&] { detail::require(workers >= 1, "must be at least 1"); });
  check("[rabi]", [&] {
    detail::require(rabi.points >= 2, "points must be at least 2");
    detail::require(rabi.area_max_pi > 0.0, "area_max_pi must be positive");
    detail::require(rabi.eid_coefficient_ns >= 0.0, "eid_coefficient_ns must be non-negative");
  });
  check("[hbt]", [&] {
    detail::require(hbt.pulses >= 1, "pulses must be positive");
    detail::require(hbt.R >= 0.0 && hbt.R <= 1.0, "R must lie in [0, 1]");
    detail::require(hbt.bin_width_ns > 0.0 && hbt.half_range_ns > 0.0, "histogram grid must be positive");
    detail::require(hbt.source == "emitter" || hbt.source == "coherent", "source must be emitter or coherent");
    detail::require(hbt.mean_photons > 0.0, "mean_photons must be positive");
  });
  check("[spectrum]", [&] {
    detail::require(spectrum.points >= 3 && spectrum.sbr_points >= 3, "grids need at least 3 points");
    detail::require(spectrum.span_ghz > 0.0 && spectrum.sbr_span_ghz > 0.0, "spans must be positive");
    detail::require(spectrum.noise_fraction >= 0.0 && spectrum.baseline_fraction >= 0.0,
                    "noise_fraction and baseline_fraction must be non-negative");
    detail::require(spectrum.unfiltered_sbr > 0.0, "unfiltered_sbr must be positive");
    detail::require(spectrum.lifetime_counts > 0.0 && spectrum.lifetime_background >= 0.0,
                    "lifetime counts must be positive");
    spectrum.filter.validate();
  });
  check("[hom]", [&] {
    auto cfg = hom.config;
    cfg.g2 = emitter.g2;
    if (hom.r_over_t) cfg.set_ratio(*hom.r_over_t);
    cfg.rep_period_ns = pulse.rep_period_ns;
    cfg.validate();
    detail::require(hom.bootstrap_samples == 0 || hom.bootstrap_samples >= 2, "bootstrap_samples must be 0 or >= 2");
    detail::require(hom.bootstrap_cycles > 0.0, "bootstrap_cycles must be positive");
    detail::require(hom.extra_g2 >= 0.0 && hom.extra_g2 < 1.0, "extra_g2 must lie in [0, 1)");
  });
  check("[cnot]", [&] {
    detail::require(cnot.M >= 0.0 && cnot.M <= 1.0, "M must lie in [0, 1]");
    detail::require(cnot.target_F_zz.has_value() == cnot.target_F_xx.has_value(),
                    "target_F_zz and target_F_xx go together");
  });
  check("[efficiency]", [&] {
    if (!efficiency.stage_names.empty() || !efficiency.stage_efficiencies.empty())
      detail::require(efficiency.stage_names.size() == efficiency.stage_efficiencies.size() + 1 ||
                          efficiency.stage_names.size() == efficiency.stage_efficiencies.size(),
                      "stage_efficiencies must list every stage except the unknown one");
  });
  if (!errors.empty()) throw toml::ParseError(std::move(errors));
}

// Loads a config file, then the environment. Throws ParseError listing every
// problem.
inline ExperimentConfig load(const std::string& text, const std::string& origin,
                             const std::vector<std::string>& env) {
  ExperimentConfig c;
  std::vector<std::string> errors;
  try {
    apply(c, toml::parse(text), origin, errors);
  } catch (const toml::ParseError& e) {
    for (const auto& m : e.messages()) errors.push_back(origin + ": " + m);
  }
  apply_environment(c, env, errors);
  if (!errors.empty()) throw toml::ParseError(std::move(errors));
  return c;
}

}  // namespace pulsedrf::config
