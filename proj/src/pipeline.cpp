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

#include "donorq/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <memory>

#include "donorq/electrostatics.hpp"
#include "donorq/hfs.hpp"

namespace donorq::workflow {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

const json& section(const json& config, const char* name) {
  static const json empty = json::object();
  if (!config.contains(name)) return empty;
  const json& s = config.at(name);
  if (!s.is_object()) throw ConfigError(std::string("section '") + name + "' must be an object");
  return s;
}

double number(const json& obj, const char* key) {
  if (!obj.contains(key)) throw ConfigError(std::string("missing number '") + key + "'");
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(std::string("'") + key + "' must be a number");
  return v.get<double>();
}

double number_or(const json& obj, const char* key, double fallback) {
  return obj.contains(key) ? number(obj, key) : fallback;
}

std::string string_or(const json& obj, const char* key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_string()) throw ConfigError(std::string("'") + key + "' must be a string");
  return obj.at(key).get<std::string>();
}

electrostatics::Vec3 vec3(const json& obj, const char* key) {
  if (!obj.contains(key)) throw ConfigError(std::string("missing '") + key + "'");
  const json& v = obj.at(key);
  if (!v.is_array() || v.size() != 3) throw ConfigError(std::string("'") + key + "' must be a 3-vector");
  electrostatics::Vec3 out{};
  for (std::size_t i = 0; i < 3; ++i) {
    if (!v[i].is_number()) throw ConfigError(std::string("'") + key + "' must hold numbers");
    out[i] = v[i].get<double>();
  }
  return out;
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

// Runs one stage, converting any failure into a PipelineError naming it.
template <class F>
auto stage(const std::string& name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const PipelineError&) {
    throw;
  } catch (const std::exception& e) {
    throw PipelineError(name, e.what());
  }
}

json vec_json(const electrostatics::Vec3& v) { return json::array({v[0], v[1], v[2]}); }

std::unique_ptr<hfs::StarkRatioModel> stark_model(const json& spec, const fs::path& base, json& report) {
  const std::string model = string_or(spec, "model", "identity");
  report["model"] = model;
  if (model == "identity") return std::make_unique<hfs::IdentityStarkModel>();
  if (model == "constant") {
    report["ratio"] = number(spec, "ratio");
    return std::make_unique<hfs::ConstantStarkModel>(number(spec, "ratio"));
  }
  if (model == "quadratic") {
    report["eta_m2_per_V2"] = number(spec, "eta_m2_per_V2");
    return std::make_unique<hfs::QuadraticStarkModel>(number(spec, "eta_m2_per_V2"));
  }
  if (model == "table") {
    std::vector<std::pair<double, double>> rows;
    if (spec.contains("rows")) {
      for (const auto& r : spec.at("rows")) {
        if (!r.is_array() || r.size() != 2) throw ConfigError("stark rows must be [field_Vpm, ratio] pairs");
        rows.emplace_back(r[0].get<double>(), r[1].get<double>());
      }
    } else {
      const std::string file = string_or(spec, "table_file", "");
      if (file.empty()) throw ConfigError("table Stark model needs 'rows' or 'table_file'");
      std::ifstream in(resolve(base, file));
      if (!in) throw ConfigError("cannot open Stark table '" + file + "'");
      rows = hfs::read_two_column_csv(in);
      report["table_file"] = file;
    }
    return std::make_unique<hfs::TabulatedStarkModel>(std::move(rows));
  }
  throw ConfigError("unknown Stark model '" + model + "' (identity, constant, quadratic, table)");
}

QuantumState state_from_json(const json& v) {
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "bell") return bell_target();
    for (std::size_t i = 0; i < evolution::kDim; ++i)
      if (s == spin::basis_label(i)) return QuantumState::basis(i);
    throw ConfigError("unknown state '" + s + "' (uU, uD, dU, dD or bell)");
  }
  if (v.is_array() && v.size() == evolution::kDim) {
    QuantumState q;
    for (std::size_t i = 0; i < evolution::kDim; ++i) {
      const json& a = v[i];
      if (a.is_number()) {
        q.amplitudes[i] = a.get<double>();
      } else if (a.is_array() && a.size() == 2) {
        q.amplitudes[i] = {a[0].get<double>(), a[1].get<double>()};
      } else {
        throw ConfigError("state amplitudes must be numbers or [re, im] pairs");
      }
    }
    if (!q.is_normalised()) throw ConfigError("state is not normalised");
    return q;
  }
  throw ConfigError("state must be a basis label, 'bell' or four amplitudes");
}

PulseSegment segment_from_json(const json& s, const spin::LevelStructure& levels) {
  PulseSegment seg;
  seg.channel = parse_channel(string_or(s, "channel", "idle"));
  seg.duration = number(s, "duration_s");
  if (s.contains("a_target_hz")) seg.a_target = number(s, "a_target_hz");
  seg.ramp_time = number_or(s, "ramp_time_s", 0.0);
  seg.b_ac = number_or(s, "b_ac_T", seg.channel == Channel::kIdle ? 0.0 : spin::kDriveAmplitude);
  seg.phase = number_or(s, "phase_rad", 0.0);
  if (s.contains("omega_rad_s")) {
    const json& w = s.at("omega_rad_s");
    seg.omega = w.is_string() ? levels.angular(spin::parse_transition(w.get<std::string>())) : number(s, "omega_rad_s");
  }
  seg.validate();
  return seg;
}

json segment_to_json(const PulseSegment& s) {
  json j{{"channel", channel_name(s.channel)}, {"duration_s", s.duration}, {"ramp_time_s", s.ramp_time},
         {"b_ac_T", s.b_ac}, {"omega_rad_s", s.omega}, {"phase_rad", s.phase}};
  j["a_target_hz"] = s.a_target ? json(*s.a_target) : json(nullptr);
  return j;
}

DepthDistribution depth_from_json(const json& d) {
  const std::string kind = string_or(d, "distribution", "delta");
  if (kind == "delta") return DepthDistribution::delta(number(d, "value_m"));
  if (kind == "normal") return DepthDistribution::normal(number(d, "mean_m"), number(d, "sigma_m"));
  if (kind == "uniform") return DepthDistribution::uniform(number(d, "low_m"), number(d, "high_m"));
  throw ConfigError("unknown depth distribution '" + kind + "' (delta, normal, uniform)");
}

bool same_params(const DeviceParams& a, const DeviceParams& b) {
  return a.gamma_e == b.gamma_e && a.gamma_n == b.gamma_n && a.b0 == b.b0 && a.a_iso == b.a_iso &&
         a.b_ac == b.b_ac;
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  body(out);
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

}  // namespace

json load_json(const fs::path& path, const std::string& stage_name) {
  std::ifstream in(path);
  if (!in) throw PipelineError(stage_name, "cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw PipelineError(stage_name, "'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

DeviceParams device_from_json(const json& s) {
  const std::string preset = string_or(s, "preset", "si_p");
  DeviceParams p;
  if (preset == "si_p") {
    p = spin::default_si_p_params();
  } else if (preset == "si_p_1T") {
    p = spin::si_p_params_one_tesla();
  } else {
    throw ConfigError("unknown device preset '" + preset + "' (si_p, si_p_1T)");
  }
  p.gamma_e = number_or(s, "gamma_e_hz_per_T", p.gamma_e);
  p.gamma_n = number_or(s, "gamma_n_hz_per_T", p.gamma_n);
  p.b0 = number_or(s, "b0_T", p.b0);
  p.b_ac = number_or(s, "b_ac_T", p.b_ac);
  p.a_iso = number_or(s, "a_iso_hz", p.a_iso);
  spin::validate(p);
  return p;
}

StepPolicy step_policy_from_json(const json& s) {
  StepPolicy policy;
  if (s.contains("step")) {
    const json& st = s.at("step");
    policy.dt_max = number_or(st, "dt_max_s", policy.dt_max);
    if (st.contains("points_per_drive_period"))
      policy.points_per_drive_period = st.at("points_per_drive_period").get<std::size_t>();
  }
  if (s.contains("dephasing")) {
    const json& d = s.at("dephasing");
    if (d.is_string() && d.get<std::string>() == "si_p") {
      policy.dephasing = evolution::kSiPDephasing;
    } else if (d.is_object()) {
      policy.dephasing = evolution::DephasingRates{number(d, "electron_hz"), number(d, "nucleus_hz")};
    } else if (!d.is_null()) {
      throw ConfigError("dephasing must be \"si_p\", null or {electron_hz, nucleus_hz}");
    }
  }
  policy.validate();
  return policy;
}

json calibration_to_json(const RabiCalibration& cal) {
  return json{{"transition", spin::transition_name(cal.transition)},
              {"drive_omega_rad_s", cal.drive_omega},
              {"first_order_omega_rad_s", cal.nominal_omega},
              {"t_pi_s", cal.t_pi},
              {"t_pi_half_s", cal.t_pi_half},
              {"t_pi_half_definition", "first rising crossing of flipped population 1/2"},
              {"rabi_frequency_hz", cal.rabi_frequency},
              {"peak_population", cal.peak_population},
              {"leakage", cal.leakage}};
}

json levels_to_json(const spin::LevelStructure& levels) {
  json lines = json::object();
  for (auto t : {Transition::kEsrNuclearUp, Transition::kEsrNuclearDown, Transition::kNmrElectronDown,
                 Transition::kNmrElectronUp}) {
    const auto& l = levels.line(t);
    lines[std::string(spin::transition_name(t))] = {{"exact_hz", l.exact_hz},
                                                    {"first_order_hz", l.first_order_hz},
                                                    {"relative_deviation", l.relative_deviation()},
                                                    {"exact_omega_rad_s", levels.angular(t)}};
  }
  json energies = json::object();
  for (std::size_t i = 0; i < evolution::kDim; ++i)
    energies[std::string(spin::basis_label(i))] = levels.basis_energy[i];
  return json{{"basis_energies_hz", energies}, {"lines", lines}};
}

PipelineResult run_pipeline(const json& config, const PipelineOptions& options) {
  PipelineResult result;
  json& report = result.report;
  const bool ensemble_mode = options.mode == PipelineMode::kEnsemble;
  report["mode"] = ensemble_mode ? "ensemble" : "experiment";

  // config: sections and base device parameters.
  const auto [field_cfg, hfs_cfg, device_cfg, seq_cfg, ens_cfg, out_cfg, base_params, policy] = stage("config", [&] {
    if (!config.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& [key, value] : config.items()) {
      static const std::vector<std::string> known{"field", "hfs", "device", "sequence", "ensemble", "output"};
      if (std::find(known.begin(), known.end(), key) == known.end())
        throw ConfigError("unknown section '" + key + "'");
    }
    if (!config.contains("field")) throw ConfigError("no field source: add a 'field' section");
    if (ensemble_mode && !config.contains("ensemble")) throw ConfigError("ensemble mode needs an 'ensemble' section");
    const json& dev = section(config, "device");
    if (dev.contains("a_iso_hz")) throw ConfigError("device.a_iso_hz is set by the hfs stage; remove it");
    const json& seq = section(config, "sequence");
    return std::tuple{section(config, "field"), section(config, "hfs"), dev, seq, section(config, "ensemble"),
                      section(config, "output"), device_from_json(dev), step_policy_from_json(seq)};
  });

  const fs::path out_dir = options.output_dir ? *options.output_dir
                                              : resolve(options.base_dir, string_or(out_cfg, "directory", "."));

  // field: solve or import, then sample at the donor.
  const electrostatics::Vec3 e_donor = stage("field", [&] {
    json fr;
    electrostatics::FieldGrid grid;
    if (field_cfg.contains("layout") || field_cfg.contains("layout_file")) {
      const json layout_doc = field_cfg.contains("layout")
                                  ? field_cfg.at("layout")
                                  : load_json(resolve(options.base_dir, string_or(field_cfg, "layout_file", "")), "field");
      const auto layout = electrostatics::layout_from_json(layout_doc);
      electrostatics::SolveOptions so;
      if (field_cfg.contains("solver")) {
        const json& s = field_cfg.at("solver");
        so.tolerance = number_or(s, "tolerance", so.tolerance);
        so.relaxation = number_or(s, "relaxation", so.relaxation);
        if (s.contains("max_iterations")) so.max_iterations = s.at("max_iterations").get<std::size_t>();
      }
      const auto solution = electrostatics::solve_poisson(electrostatics::rasterize(layout), so);
      grid = solution.field;
      fr["source"] = "solve";
      fr["solver"] = {{"iterations", solution.report.iterations},
                      {"relative_residual", solution.report.relative_residual},
                      {"maximum_principle_holds", solution.report.maximum_principle_holds}};
    } else if (field_cfg.contains("table_file")) {
      const std::string file = string_or(field_cfg, "table_file", "");
      std::ifstream in(resolve(options.base_dir, file));
      if (!in) throw ConfigError("cannot open field table '" + file + "'");
      grid = electrostatics::import_field_table(in);
      fr["source"] = "import";
      fr["table_file"] = file;
    } else {
      throw ConfigError("field section needs 'layout', 'layout_file' or 'table_file'");
    }
    fr["grid"] = {{"nx", grid.nx}, {"ny", grid.ny}, {"nz", grid.nz}, {"spacing_m", grid.spacing},
                  {"origin_m", vec_json(grid.origin)}};
    const auto donor = vec3(field_cfg, "donor_position_m");
    const auto sample = electrostatics::sample_field(grid, donor);
    const double mag = std::hypot(sample.field[0], sample.field[1], sample.field[2]);
    fr["donor_position_m"] = vec_json(donor);
    fr["potential_at_donor_V"] = sample.potential;
    fr["E_at_donor_Vpm"] = vec_json(sample.field);
    fr["E_magnitude_Vpm"] = mag;
    fr["E_magnitude_V_per_um"] = electrostatics::to_v_per_um(mag);
    if (options.write_outputs && out_cfg.contains("field_table")) {
      fs::create_directories(out_dir);
      const std::string name = string_or(out_cfg, "field_table", "");
      write_file(out_dir / name, [&](std::ostream& o) { electrostatics::export_field_table(o, grid); });
      fr["exported_table"] = name;
    }
    report["field"] = fr;
    return sample.field;
  });

  // hfs: reference coupling, Stark ratio at |E|.
  const double a_iso = stage("hfs", [&] {
    json hr;
    hfs::HfsValue ref = hfs::HfsValue::hz(spin::kTunedHyperfine);
    if (hfs_cfg.contains("reference")) {
      const json& r = hfs_cfg.at("reference");
      const std::string unit = string_or(r, "unit", "Hz");
      if (unit == "G") {
        ref = hfs::HfsValue::gauss(number(r, "value"));
      } else if (unit == "Hz") {
        ref = hfs::HfsValue::hz(number(r, "value"));
      } else {
        throw ConfigError("reference unit must be 'G' or 'Hz'");
      }
      hr["reference"] = {{"value", ref.value}, {"unit", unit}};
    }
    const double ref_hz = hfs::as_hz(ref, base_params.gamma_e);
    const double correction = number_or(hfs_cfg, "spin_density_correction", 1.0);
    json sr;
    const auto model = stark_model(hfs_cfg.contains("stark") ? hfs_cfg.at("stark") : json::object(),
                                   options.base_dir, sr);
    const double e_mag = std::hypot(e_donor[0], e_donor[1], e_donor[2]);
    const double ratio = model->ratio(e_mag);
    const double a = hfs::stark_scale(ratio, 1.0, hfs::fermi_contact_relative(1.0, 1.0, hfs::HfsValue::hz(ref_hz),
                                                                              correction))
                         .value;
    sr["ratio"] = ratio;
    hr["reference_hz"] = ref_hz;
    hr["spin_density_correction"] = correction;
    hr["stark"] = sr;
    hr["a_iso_hz"] = a;
    report["hfs"] = hr;
    return a;
  });

  // device: full parameters and the exact spectrum.
  DeviceParams p = base_params;
  const spin::LevelStructure levels = stage("device", [&] {
    p.a_iso = a_iso;
    spin::validate(p);
    const auto ls = spin::level_structure(p);
    report["device"] = {{"gamma_e_hz_per_T", p.gamma_e}, {"gamma_n_hz_per_T", p.gamma_n}, {"b0_T", p.b0},
                        {"b_ac_T", p.b_ac}, {"a_iso_hz", p.a_iso}};
    report["levels"] = levels_to_json(ls);
    return ls;
  });

  // calibration / sequence construction.
  const std::string kind = string_or(seq_cfg, "kind", "bell");
  const PulseSequence sequence = stage("calibration", [&] {
    if (kind == "bell") {
      const auto prep = bell_preparation(p, policy);
      report["calibration"] = {{"nmr", calibration_to_json(prep.nmr)}, {"esr", calibration_to_json(prep.esr)}};
      return prep.sequence;
    }
    if (kind != "custom") throw ConfigError("sequence kind must be 'bell' or 'custom'");
    PulseSequence seq;
    if (!seq_cfg.contains("segments") || !seq_cfg.at("segments").is_array())
      throw ConfigError("custom sequence needs a 'segments' array");
    for (const auto& s : seq_cfg.at("segments")) seq.segments.push_back(segment_from_json(s, levels));
    seq.initial = state_from_json(seq_cfg.contains("initial") ? seq_cfg.at("initial") : json("dD"));
    seq.target = state_from_json(seq_cfg.contains("target") ? seq_cfg.at("target") : json("bell"));
    seq.validate();
    return seq;
  });
  json segs = json::array();
  for (const auto& s : sequence.segments) segs.push_back(segment_to_json(s));
  report["sequence"] = {{"kind", kind}, {"segments", segs}};
  if (policy.dephasing)
    report["sequence"]["dephasing"] = {{"electron_hz", policy.dephasing->electron},
                                       {"nucleus_hz", policy.dephasing->nucleus}};

  ExperimentOptions xo;
  if (seq_cfg.contains("samples_per_segment"))
    xo.samples_per_segment = seq_cfg.at("samples_per_segment").get<std::size_t>();
  xo.orbital_gap_ev = number_or(seq_cfg, "orbital_gap_eV", xo.orbital_gap_ev);

  if (!ensemble_mode) {
    result.trace = stage("experiment", [&] { return run_experiment(sequence, p, policy, xo); });
    const auto& tr = *result.trace;
    json ramps = json::array();
    for (const auto& r : tr.ramps) ramps.push_back({{"t_min_s", r.t_min}, {"margin", r.margin}});
    report["experiment"] = {{"final_fidelity", tr.final_fidelity},
                            {"segment_boundaries_s", tr.segment_boundaries},
                            {"max_norm_drift", tr.max_norm_drift},
                            {"steps", tr.steps},
                            {"ramps", ramps}};
  } else {
    result.ensemble = stage("ensemble", [&] {
      EnsembleSpec spec;
      spec.sample_count = ens_cfg.value("samples", std::size_t{1});
      spec.seed = ens_cfg.value("seed", std::uint64_t{0});
      const std::string rng = string_or(ens_cfg, "rng", Rng::kAlgorithm);
      if (rng != Rng::kAlgorithm) throw ConfigError("rng must be '" + std::string(Rng::kAlgorithm) + "'");
      spec.depth = depth_from_json(ens_cfg.contains("depth") ? ens_cfg.at("depth") : json::object());
      spec.recalibrate = ens_cfg.value("recalibrate", false);
      spec.threads = ens_cfg.value("threads", std::size_t{1});
      const json pos = hfs_cfg.contains("position") ? hfs_cfg.at("position") : json::object();
      spec.position_model.a_reference_hz = p.a_iso;
      spec.position_model.depth_scale = number(pos, "depth_scale_m");
      spec.position_model.reference_depth = number(pos, "reference_depth_m");
      if (pos.contains("bulk_cap_hz")) spec.position_model.bulk_cap_hz = number(pos, "bulk_cap_hz");

      const DeviceParams nominal = p;
      SequenceFactory factory;
      if (kind == "bell") {
        factory = [&](const DeviceParams& q) {
          return same_params(q, nominal) ? sequence : bell_prep_sequence(q, policy);
        };
      } else {
        factory = [&](const DeviceParams&) { return sequence; };
      }
      auto res = run_ensemble(factory, spec, p, policy, xo);
      json samples = json::array();
      for (const auto& s : res.samples)
        samples.push_back({{"index", s.index}, {"depth_m", s.depth}, {"a_iso_hz", s.a_iso_hz},
                           {"final_fidelity", s.final_fidelity}});
      report["ensemble"] = {{"rng", Rng::kAlgorithm},
                            {"seed", spec.seed},
                            {"samples", spec.sample_count},
                            {"recalibrate", spec.recalibrate},
                            {"mean_fidelity", res.mean_fidelity},
                            {"std_error", res.std_error},
                            {"records", samples}};
      return res;
    });
  }

  stage("output", [&] {
    if (!options.write_outputs) return 0;
    fs::create_directories(out_dir);
    json outputs = json::object();
    if (result.trace) {
      const std::string name = string_or(out_cfg, "trace_csv", "fidelity_trace.csv");
      write_file(out_dir / name, [&](std::ostream& o) { write_fidelity_csv(o, *result.trace); });
      outputs["trace_csv"] = name;
    }
    const std::string report_name = string_or(out_cfg, "report_json", "report.json");
    outputs["report_json"] = report_name;
    report["outputs"] = outputs;
    write_file(out_dir / report_name, [&](std::ostream& o) { o << report.dump(2) << '\n'; });
    return 0;
  });
  return result;
}

}  // namespace donorq::workflow
