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

// Runs one configured experiment and writes its result bundle: result.json,
// CSV tables and manifest.json describing every CSV column.

#include <cmath>
#include <filesystem>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "pulsedrf/cnot.hpp"
#include "pulsedrf/config.hpp"
#include "pulsedrf/efficiency.hpp"
#include "pulsedrf/emitter.hpp"
#include "pulsedrf/interferometry.hpp"
#include "pulsedrf/io.hpp"
#include "pulsedrf/spectroscopy.hpp"

namespace pulsedrf::experiments {

using io::Json;

struct Column {
  std::string name;
  std::string unit;
};

// Collects output files before writing them.
class Bundle {
 public:
  void table(const std::string& file, const std::string& description, const std::vector<Column>& columns,
             io::Table t) {
    Json cols = Json::array();
    for (const auto& c : columns) cols.push_back({{"name", c.name}, {"unit", c.unit}});
    manifest_.push_back({{"file", file}, {"description", description}, {"columns", cols}});
    files_.emplace_back(file, io::to_csv(t));
  }

  Json& result() { return result_; }

  void write(const std::filesystem::path& dir) const {
    for (const auto& [name, content] : files_) io::write_atomic(dir / name, content);
    Json m;
    m["schema"] = io::kSchemaVersion;
    m["files"] = manifest_;
    io::write_atomic(dir / "manifest.json", io::dump(m));
    io::write_atomic(dir / "result.json", io::dump(result_));
  }

 private:
  Json result_;
  Json manifest_ = Json::array();
  std::vector<std::pair<std::string, std::string>> files_;
};

inline io::Table histogram_table(const CoincidenceHistogram& h) {
  io::Table t{{"time_ns", "counts"}, {}};
  for (std::size_t i = 0; i < h.size(); ++i) t.add_row({h.center(i), h.counts[i]});
  return t;
}

inline Json areas_json(const interferometry::PeakAreas& a) {
  return {{"central", a.central},
          {"side_positive", a.side_positive},
          {"side_negative", a.side_negative},
          {"same_detector", a.same_detector}};
}

inline Json emitter_json(const emitter::EmitterParams& e) {
  auto num = [](double x) { return std::isinf(x) ? Json("inf") : Json(x); };
  return {{"T1_ns", num(e.T1_ns)},
          {"T2_ns", num(e.T2_ns)},
          {"T2_star_ns", num(e.T2_star_ns)},
          {"inhomogeneous_fwhm_ghz", e.inhomogeneous_fwhm_ghz},
          {"g2", e.g2}};
}

inline void run_rabi(const config::ExperimentConfig& c, Bundle& b) {
  const auto& s = c.rabi;
  std::vector<double> areas;
  for (int i = 0; i < s.points; ++i) areas.push_back(s.area_max_pi * i / (s.points - 1));
  emitter::BlochOptions opts;
  opts.integrator = s.integrator;
  opts.eid_coefficient_ns = s.eid_coefficient_ns;
  const auto pop = emitter::rabi_curve(c.emitter, c.pulse, areas, opts);
  io::Table t{{"area_pi", "intensity", "ideal"}, {}};
  for (std::size_t i = 0; i < areas.size(); ++i) {
    const double ideal = std::pow(std::sin(0.5 * std::numbers::pi * areas[i]), 2);
    t.add_row({areas[i], pop[i], ideal});
  }
  b.table("rabi.csv", "Mean photons per pulse versus pulse area (area scales with the square root of power)",
          {{"area_pi", "pi"}, {"intensity", "photons/pulse"}, {"ideal", "photons/pulse"}}, t);
  std::size_t first_max = 0;
  while (first_max + 1 < pop.size() && pop[first_max + 1] >= pop[first_max]) ++first_max;
  auto pi_pulse = c.pulse;
  pi_pulse.area_pi = 1.0;
  opts.record_trajectory = false;
  const auto r = emitter::bloch_evolve(c.emitter, pi_pulse, opts);
  auto& j = b.result();
  j["pi_pulse_excitation"] = r.excitation();
  j["pi_pulse_final_population"] = r.final_population;
  j["first_maximum_area_pi"] = areas[first_max];
  j["first_maximum_intensity"] = pop[first_max];
  j["warnings"] = emitter::pulse_warnings(c.emitter, c.pulse);
}

inline void run_hbt(const config::ExperimentConfig& c, Bundle& b) {
  const auto& s = c.hbt;
  interferometry::HbtSetup setup{s.R, s.irf_fwhm_ns, s.bin_width_ns, s.half_range_ns};
  auto pulse = c.pulse;
  pulse.double_pulse_delay_ns.reset();
  CoincidenceHistogram h;
  if (s.source == "coherent") {
    interferometry::CoherentSource src{s.mean_photons, pulse, s.pulses, c.seed};
    h = interferometry::simulate_hbt(src, setup, c.seed, {c.workers});
  } else {
    interferometry::EmitterSource src{c.emitter, pulse, s.pulses, c.seed, {}};
    h = interferometry::simulate_hbt(src, setup, c.seed, {c.workers});
  }
  const double window = s.window_ns.value_or(interferometry::peak_window(
      s.source == "coherent" ? 0.0 : c.emitter.T1_ns, s.irf_fwhm_ns));
  const auto g = interferometry::g2_from_histogram(h, pulse.rep_period_ns, window);
  b.table("hbt_histogram.csv", "Coincidences versus delay t_d - t_c", {{"time_ns", "ns"}, {"counts", "counts"}},
          histogram_table(h));
  auto& j = b.result();
  j["source"] = s.source;
  j["pulses"] = s.pulses;
  j["g2"] = g.value;
  j["g2_error"] = g.error;
  j["zero_delay_area"] = g.zero_area;
  j["side_peak_mean"] = g.side_mean;
  j["window_half_width_ns"] = window;
  j["warnings"] = g.warnings;
}

inline void run_spectrum(const config::ExperimentConfig& c, Bundle& b) {
  using namespace spectroscopy;
  const auto& s = c.spectrum;
  auto& j = b.result();

  // Lineshape fit.
  const auto grid = uniform_grid(-0.5 * s.span_ghz, 0.5 * s.span_ghz, static_cast<std::size_t>(s.points));
  const double peak = voigt_eval(0.0, 0.0, s.lorentzian_fwhm_ghz, s.gaussian_fwhm_ghz);
  const auto trace = synthetic_voigt_trace(grid, 0.0, s.lorentzian_fwhm_ghz, s.gaussian_fwhm_ghz, 1.0,
                                           s.baseline_fraction * peak, s.noise_fraction * peak, c.seed);
  const auto fit = voigt_fit(trace);
  io::Table spec{{"frequency_ghz", "intensity", "fit"}, {}};
  for (std::size_t i = 0; i < grid.size(); ++i)
    spec.add_row({grid[i], trace.intensity[i],
                  fit.amplitude * voigt_eval(grid[i], fit.center_ghz, fit.lorentzian_fwhm_ghz, fit.gaussian_fwhm_ghz) +
                      fit.baseline});
  b.table("spectrum.csv", "Synthetic emission line and its Voigt fit",
          {{"frequency_ghz", "GHz"}, {"intensity", "arb."}, {"fit", "arb."}}, spec);
  j["voigt"] = {{"generator", {{"lorentzian_fwhm_ghz", s.lorentzian_fwhm_ghz},
                               {"gaussian_fwhm_ghz", s.gaussian_fwhm_ghz},
                               {"noise_fraction", s.noise_fraction}}},
                {"center_ghz", fit.center_ghz},
                {"lorentzian_fwhm_ghz", fit.lorentzian_fwhm_ghz},
                {"gaussian_fwhm_ghz", fit.gaussian_fwhm_ghz},
                {"area", fit.amplitude},
                {"baseline", fit.baseline},
                {"errors", fit.errors},
                {"fwhm_ghz", fit.fwhm()},
                {"T2_ns", emitter::T2_from_linewidth(fit.lorentzian_fwhm_ghz)}};

  // Signal to background against a transform-limited laser.
  const auto wide = uniform_grid(-0.5 * s.sbr_span_ghz, 0.5 * s.sbr_span_ghz, static_cast<std::size_t>(s.sbr_points));
  const auto signal = make_trace(wide, [&](double f) {
    return s.unfiltered_sbr * voigt_eval(f, 0.0, s.lorentzian_fwhm_ghz, s.gaussian_fwhm_ghz);
  });
  const auto laser = laser_spectrum(wide, c.pulse.fwhm_ps);
  const auto raw = signal_to_background(signal, laser);
  const auto filtered = signal_to_background(signal, laser, s.filter);
  io::Table sbr{{"frequency_ghz", "signal", "background", "transmission"}, {}};
  for (std::size_t i = 0; i < wide.size(); i += 10)
    sbr.add_row({wide[i], signal.intensity[i], laser.intensity[i], s.filter.transmission(wide[i])});
  b.table("sbr.csv", "Emission line, laser background and filter transmission",
          {{"frequency_ghz", "GHz"}, {"signal", "1/GHz"}, {"background", "1/GHz"}, {"transmission", "1"}}, sbr);
  j["signal_to_background"] = {{"laser_fwhm_ghz", transform_limited_bandwidth_ghz(c.pulse.fwhm_ps)},
                               {"filter_bandwidth_ghz", s.filter.bandwidth_fwhm_ghz},
                               {"unfiltered", raw.ratio},
                               {"filtered", filtered.ratio},
                               {"improvement", filtered.ratio / raw.ratio}};

  // Lifetime.
  const double onset = 2.0;
  const auto decay = synthetic_decay(s.lifetime_T1_ns, s.lifetime_irf_fwhm_ns, s.lifetime_bin_ns, s.lifetime_span_ns,
                                     onset, s.lifetime_counts, s.lifetime_background, c.seed + 1);
  const auto life = lifetime_fit(decay, s.lifetime_irf_fwhm_ns);
  io::Table dt{{"time_ns", "counts", "fit"}, {}};
  const double sigma = shapes::fwhm_to_sigma(s.lifetime_irf_fwhm_ns);
  for (std::size_t i = 0; i < decay.size(); ++i)
    dt.add_row({decay.center(i), decay.counts[i],
                decay_bin(decay, i, life.amplitude, life.onset_ns, life.T1_ns, sigma, life.offset)});
  b.table("decay.csv", "Synthetic time-resolved emission and its IRF-convolved fit",
          {{"time_ns", "ns"}, {"counts", "counts"}, {"fit", "counts"}}, dt);
  j["lifetime"] = {{"generator_T1_ns", s.lifetime_T1_ns},
                   {"T1_ns", life.T1_ns},
                   {"T1_error_ns", life.T1_error_ns},
                   {"onset_ns", life.onset_ns}};
}

inline interferometry::HOMConfig hom_config(const config::ExperimentConfig& c) {
  auto cfg = c.hom.config;
  if (c.hom.r_over_t) cfg.set_ratio(*c.hom.r_over_t);
  cfg.g2 = c.emitter.g2;
  cfg.rep_period_ns = c.pulse.rep_period_ns;
  return cfg;
}

inline void run_hom(const config::ExperimentConfig& c, Bundle& b) {
  using namespace interferometry;
  const auto& s = c.hom;
  const auto cfg = hom_config(c);
  auto& j = b.result();
  const auto par = hom_peak_areas(cfg, true);
  const auto cross = hom_peak_areas(cfg, false);
  const auto v = raw_visibility(par, cross);
  const auto m = corrected_visibility(v.value, cfg.g2, cfg.R, cfg.T, cfg.epsilon);
  j["R"] = cfg.R;
  j["T"] = cfg.T;
  j["epsilon"] = cfg.epsilon;
  j["M"] = cfg.M;
  j["g2"] = cfg.g2;
  j["model"] = {{"parallel", areas_json(par)},
                {"cross", areas_json(cross)},
                {"v_raw", v.value},
                {"bunching_probability", v.bunching_probability()},
                {"v_corrected", m.M},
                {"clamped", m.clamped}};

  const auto grid = CoincidenceHistogram::symmetric(s.half_range_ns, s.bin_width_ns);
  const auto hp = synthesize_histogram(hom_peak_train(par, cfg, 3), c.emitter.T1_ns, cfg.detector_irf_fwhm_ns, grid);
  const auto hc = synthesize_histogram(hom_peak_train(cross, cfg, 3), c.emitter.T1_ns, cfg.detector_irf_fwhm_ns, grid);
  io::Table model{{"time_ns", "parallel", "cross"}, {}};
  for (std::size_t i = 0; i < grid.size(); ++i) model.add_row({grid.center(i), hp.counts[i], hc.counts[i]});
  b.table("hom_model.csv", "Expected coincidences per excitation cycle versus delay",
          {{"time_ns", "ns"}, {"parallel", "1/cycle"}, {"cross", "1/cycle"}}, model);

  if (s.bootstrap_samples > 0) {
    const auto bs = bootstrap_visibility(cfg, c.emitter.T1_ns, s.bootstrap_cycles, s.bootstrap_samples, c.seed,
                                         s.bin_width_ns);
    j["bootstrap"] = {{"cycles", s.bootstrap_cycles},
                      {"samples", s.bootstrap_samples},
                      {"v_raw_mean", bs.v_raw_mean},
                      {"v_raw_error", bs.v_raw_std},
                      {"v_corrected_mean", bs.m_mean},
                      {"v_corrected_error", bs.m_std}};
  }

  if (s.pulses > 0) {
    auto pulse = c.pulse;
    pulse.double_pulse_delay_ns = cfg.delay_ns;
    emitter::TrainOptions train;
    train.indistinguishability = cfg.M;
    const EmitterSource src{c.emitter, pulse, 2 * s.pulses, c.seed, train};
    HomSetup setup{cfg, true, s.bin_width_ns, s.half_range_ns};
    const auto mc_par = simulate_hom(src, setup, c.seed + 1, {c.workers});
    setup.copolarized = false;
    const auto mc_cross = simulate_hom(src, setup, c.seed + 2, {c.workers});
    const auto a = measure_hom_areas(mc_par, cfg, c.emitter.T1_ns, s.pulses);
    const auto x = measure_hom_areas(mc_cross, cfg, c.emitter.T1_ns, s.pulses);
    const double ratio = a.areas.zero_delay() / x.areas.zero_delay();
    const double err = ratio * std::hypot(a.errors.zero_delay() / a.areas.zero_delay(),
                                          x.errors.zero_delay() / x.areas.zero_delay());
    const double vr = 1.0 - ratio;
    const auto mc = corrected_visibility(std::clamp(vr, -1.0, 1.0), cfg.g2, cfg.R, cfg.T, cfg.epsilon);
    io::Table t{{"time_ns", "parallel", "cross"}, {}};
    for (std::size_t i = 0; i < mc_par.size(); ++i) t.add_row({mc_par.center(i), mc_par.counts[i], mc_cross.counts[i]});
    b.table("hom_monte_carlo.csv", "Simulated coincidence histograms",
            {{"time_ns", "ns"}, {"parallel", "counts"}, {"cross", "counts"}}, t);
    j["monte_carlo"] = {{"cycles", s.pulses},
                        {"parallel", areas_json(a.areas)},
                        {"parallel_errors", areas_json(a.errors)},
                        {"cross", areas_json(x.areas)},
                        {"cross_errors", areas_json(x.errors)},
                        {"v_raw", vr},
                        {"v_raw_error", err},
                        {"v_corrected", mc.M},
                        {"clamped", mc.clamped}};
  }

  if (!s.extra_raw_visibilities.empty()) {
    Json extra = Json::array();
    for (double vr : s.extra_raw_visibilities) {
      const auto e = corrected_visibility(vr, s.extra_g2, cfg.R, cfg.T, cfg.epsilon);
      extra.push_back({{"v_raw", vr}, {"g2", s.extra_g2}, {"v_corrected", e.M}, {"clamped", e.clamped}});
    }
    j["corrected_series"] = extra;
  }
}

inline void run_cnot(const config::ExperimentConfig& c, Bundle& b) {
  const auto& s = c.cnot;
  cnot::TableOptions o;
  o.elements = s.elements;
  o.shots = s.shots;
  o.seed = c.seed;
  const auto zz = cnot::truth_table(cnot::Basis::ZZ, s.M, o);
  const auto xx = cnot::truth_table(cnot::Basis::XX, s.M, o);
  const auto f = cnot::fidelities(zz, xx);
  auto& j = b.result();
  auto table_json = [](const cnot::TruthTable& t) {
    Json rows = Json::array();
    for (int r = 0; r < 4; ++r) {
      Json row = Json::array();
      for (int k = 0; k < 4; ++k) row.push_back(t.probabilities(r, k));
      rows.push_back(row);
    }
    Json out{{"basis", cnot::to_string(t.basis)}, {"probabilities", rows}, {"success_probability", t.success_probability}};
    if (t.counts) {
      Json counts = Json::array();
      for (int r = 0; r < 4; ++r) {
        Json row = Json::array();
        for (int k = 0; k < 4; ++k) row.push_back((*t.counts)(r, k));
        counts.push_back(row);
      }
      out["counts"] = counts;
    }
    return out;
  };
  j["M"] = s.M;
  j["truth_tables"] = {table_json(zz), table_json(xx)};
  j["fidelities"] = {{"F_zz", f.F_zz},
                     {"F_xx", f.F_xx},
                     {"F_proc_lower", f.F_proc_lower},
                     {"F_proc_upper", f.F_proc_upper},
                     {"entangling", f.entangling}};
  for (const auto* t : {&zz, &xx}) {
    io::Table csv{{"input", "p00", "p01", "p10", "p11"}, {}};
    for (int r = 0; r < 4; ++r)
      csv.add_row({static_cast<double>(r), t->probabilities(r, 0), t->probabilities(r, 1), t->probabilities(r, 2),
                   t->probabilities(r, 3)});
    const auto name = cnot::to_string(t->basis);
    b.table("truth_" + name + ".csv", name + " truth table; index = 2 * control + target",
            {{"input", "index"}, {"p00", "1"}, {"p01", "1"}, {"p10", "1"}, {"p11", "1"}}, csv);
  }
  if (s.target_F_zz) {
    const auto fit = cnot::fit_indistinguishability(*s.target_F_zz, *s.target_F_xx, s.elements);
    const auto bounds = cnot::fidelities(*s.target_F_zz, *s.target_F_xx);
    j["measured"] = {{"F_zz", *s.target_F_zz},
                     {"F_xx", *s.target_F_xx},
                     {"F_proc_lower", bounds.F_proc_lower},
                     {"F_proc_upper", bounds.F_proc_upper},
                     {"entangling", bounds.entangling},
                     {"fitted_M", fit.M},
                     {"fit_residual", fit.residual}};
  }
}

inline void run_efficiency(const config::ExperimentConfig& c, Bundle& b) {
  const auto& s = c.efficiency;
  efficiency::EfficiencyChain chain;
  chain.source_rate_mhz = s.source_rate_mhz;
  chain.detected_rate_cps = s.detected_rate_cps;
  std::size_t k = 0;
  for (const auto& name : s.stage_names) {
    if (name == s.solve_for) {
      chain.stages.push_back({name, std::nullopt});
    } else {
      detail::require(k < s.stage_efficiencies.size(), "missing efficiency for stage '" + name + "'");
      chain.stages.push_back({name, s.stage_efficiencies[k++]});
    }
  }
  detail::require(k == s.stage_efficiencies.size(), "more efficiencies than stages");
  const auto done = efficiency::efficiency_chain(chain, s.solve_for);
  Json stages = Json::array();
  for (const auto& st : done.stages) stages.push_back({{"name", st.name}, {"efficiency", *st.efficiency}});
  auto& j = b.result();
  j["solve_for"] = s.solve_for;
  j["stages"] = stages;
  j["source_rate_mhz"] = *done.source_rate_mhz;
  j["detected_rate_cps"] = *done.detected_rate_cps;
  j["overall_efficiency"] = done.product();
  j["pre_detector_efficiency"] = done.product_excluding(s.detector_stages);
}

// Runs the experiment and returns the result document (also written to
// `out_dir`).
inline Json run(const config::ExperimentConfig& c, config::Experiment e, const std::filesystem::path& out_dir) {
  c.validate();
  Bundle b;
  auto& j = b.result();
  j["schema"] = io::kSchemaVersion;
  j["experiment"] = config::to_string(e);
  j["seed"] = c.seed;
  j["emitter"] = emitter_json(c.emitter);
  switch (e) {
    case config::Experiment::rabi: run_rabi(c, b); break;
    case config::Experiment::hbt: run_hbt(c, b); break;
    case config::Experiment::spectrum: run_spectrum(c, b); break;
    case config::Experiment::hom: run_hom(c, b); break;
    case config::Experiment::cnot: run_cnot(c, b); break;
    case config::Experiment::efficiency: run_efficiency(c, b); break;
  }
  b.write(out_dir);
  return b.result();
}

}  // namespace pulsedrf::experiments
