// Copyright 2026 The donorq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// donorq command-line driver.
//
//   donorq solve-field layout.json [--donor x,y,z] [-o table.csv]
//   donorq levels [--A hz] [--B0 t]
//   donorq calibrate ESR_nUp [--A hz] [--B0 t] [--B-ac t] [--t-max s]
//   donorq run config.json [-o dir]
//   donorq ensemble config.json [-o dir]
//
// Results go to stdout as JSON; diagnostics go to stderr as "error: [stage] ...".

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "donorq/electrostatics.hpp"
#include "donorq/pipeline.hpp"
#include "donorq/spin_system.hpp"
#include "donorq/workflow.hpp"
#include "json.hpp"

namespace {

namespace fs = std::filesystem;
namespace es = donorq::electrostatics;
namespace wf = donorq::workflow;
using nlohmann::json;

constexpr int kStageFailure = 2;

struct DeviceFlags {
  std::optional<double> a_hz;
  std::optional<double> b0;
  std::optional<double> b_ac;
  bool one_tesla = false;

  void add(CLI::App* app, bool with_drive) {
    app->add_option("--A", a_hz, "isotropic hyperfine coupling (Hz)");
    app->add_option("--B0", b0, "static field (T)");
    if (with_drive) app->add_option("--B-ac", b_ac, "drive amplitude (T)");
    app->add_flag("--one-tesla", one_tesla, "start from the 1 T preset instead of 0.9977 T");
  }

  donorq::spin::DeviceParams params() const {
    auto p = one_tesla ? donorq::spin::si_p_params_one_tesla() : donorq::spin::default_si_p_params();
    if (a_hz) p.a_iso = *a_hz;
    if (b0) p.b0 = *b0;
    if (b_ac) p.b_ac = *b_ac;
    donorq::spin::validate(p);
    return p;
  }
};

int solve_field(const std::string& layout_path, const std::vector<double>& donor, const std::string& table_out,
                double tolerance) {
  const json doc = wf::load_json(layout_path, "field");
  es::Solution solution;
  try {
    const auto layout = es::layout_from_json(doc);
    es::SolveOptions options;
    options.tolerance = tolerance;
    solution = es::solve_poisson(es::rasterize(layout), options);
  } catch (const std::exception& e) {
    throw wf::PipelineError("field", e.what());
  }
  json out{{"grid", {{"nx", solution.field.nx}, {"ny", solution.field.ny}, {"nz", solution.field.nz},
                     {"spacing_m", solution.field.spacing}}},
           {"iterations", solution.report.iterations},
           {"relative_residual", solution.report.relative_residual},
           {"maximum_principle_holds", solution.report.maximum_principle_holds}};
  if (!donor.empty()) {
    if (donor.size() != 3) throw wf::PipelineError("field", "--donor needs three coordinates");
    try {
      const auto s = es::sample_field(solution.field, {donor[0], donor[1], donor[2]});
      out["donor_position_m"] = donor;
      out["potential_at_donor_V"] = s.potential;
      out["E_at_donor_Vpm"] = {s.field[0], s.field[1], s.field[2]};
    } catch (const std::exception& e) {
      throw wf::PipelineError("field", e.what());
    }
  }
  if (!table_out.empty()) {
    std::ofstream table(table_out);
    if (!table) throw wf::PipelineError("output", "cannot write '" + table_out + "'");
    es::export_field_table(table, solution.field);
    out["table"] = table_out;
  }
  std::cout << out.dump(2) << '\n';
  return 0;
}

int levels(const DeviceFlags& flags) {
  donorq::spin::DeviceParams p;
  donorq::spin::LevelStructure ls;
  try {
    p = flags.params();
    ls = donorq::spin::level_structure(p);
  } catch (const std::exception& e) {
    throw wf::PipelineError("device", e.what());
  }
  json out = wf::levels_to_json(ls);
  out["device"] = {{"a_iso_hz", p.a_iso}, {"b0_T", p.b0}};
  std::cout << out.dump(2) << '\n';
  return 0;
}

int calibrate(const std::string& transition_name, const DeviceFlags& flags, std::optional<double> t_max) {
  donorq::spin::DeviceParams p;
  donorq::spin::Transition t;
  try {
    t = donorq::spin::parse_transition(transition_name);
    p = flags.params();
  } catch (const std::exception& e) {
    throw wf::PipelineError("device", e.what());
  }
  try {
    const auto cal = wf::calibrate_rabi(p, t, t_max.value_or(wf::default_calibration_horizon(t)));
    std::cout << wf::calibration_to_json(cal).dump(2) << '\n';
  } catch (const std::exception& e) {
    throw wf::PipelineError("calibration", e.what());
  }
  return 0;
}

int pipeline(const std::string& config_path, const std::string& out_dir, wf::PipelineMode mode) {
  const json config = wf::load_json(config_path, "config");
  wf::PipelineOptions options;
  options.mode = mode;
  options.base_dir = fs::path(config_path).parent_path();
  if (options.base_dir.empty()) options.base_dir = ".";
  if (!out_dir.empty()) options.output_dir = out_dir;
  const auto result = wf::run_pipeline(config, options);
  json summary{{"mode", result.report["mode"]}, {"a_iso_hz", result.report["hfs"]["a_iso_hz"]}};
  if (result.trace) summary["final_fidelity"] = result.trace->final_fidelity;
  if (result.ensemble) {
    summary["mean_fidelity"] = result.ensemble->mean_fidelity;
    summary["std_error"] = result.ensemble->std_error;
  }
  if (result.report.contains("outputs")) summary["outputs"] = result.report["outputs"];
  std::cout << summary.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"donorq: single-donor silicon qubit workbench"};
  app.require_subcommand(1);

  std::string layout_path, table_out;
  std::vector<double> donor;
  double tolerance = es::SolveOptions{}.tolerance;
  auto* solve = app.add_subcommand("solve-field", "solve the electrostatic problem for a layout");
  solve->add_option("layout", layout_path, "layout JSON")->required()->check(CLI::ExistingFile);
  solve->add_option("--donor", donor, "donor position x y z (m)")->expected(3)->delimiter(',');
  solve->add_option("-o,--table", table_out, "write the field table CSV here");
  solve->add_option("--tolerance", tolerance, "relative residual target");

  DeviceFlags level_flags;
  auto* lv = app.add_subcommand("levels", "exact spectrum and transition lines");
  level_flags.add(lv, false);

  DeviceFlags cal_flags;
  std::string transition;
  std::optional<double> t_max;
  auto* cal = app.add_subcommand("calibrate", "Rabi calibration of one transition");
  cal->add_option("transition", transition, "ESR_nUp, ESR_nDown, NMR_eDown or NMR_eUp")->required();
  cal->add_option("--t-max", t_max, "scan horizon (s)");
  cal_flags.add(cal, true);

  std::string config_path, out_dir;
  auto* run = app.add_subcommand("run", "run the pipeline and one experiment");
  run->add_option("config", config_path, "config JSON")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--out-dir", out_dir, "output directory (overrides output.directory)");
  auto* ens = app.add_subcommand("ensemble", "run the pipeline and a Monte Carlo ensemble");
  ens->add_option("config", config_path, "config JSON")->required()->check(CLI::ExistingFile);
  ens->add_option("-o,--out-dir", out_dir, "output directory (overrides output.directory)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve) return solve_field(layout_path, donor, table_out, tolerance);
    if (*lv) return levels(level_flags);
    if (*cal) return calibrate(transition, cal_flags, t_max);
    if (*run) return pipeline(config_path, out_dir, wf::PipelineMode::kExperiment);
    if (*ens) return pipeline(config_path, out_dir, wf::PipelineMode::kEnsemble);
  } catch (const wf::PipelineError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kStageFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: [internal] " << e.what() << '\n';
    return kStageFailure;
  }
  return EXIT_FAILURE;
}
