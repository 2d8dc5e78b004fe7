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

// Python extension. Structured arguments and results cross as JSON text; the
// donorq package wraps them as dicts.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <utility>
#include <vector>

#include "donorq/electrostatics.hpp"
#include "donorq/hfs.hpp"
#include "donorq/pipeline.hpp"
#include "donorq/spin_system.hpp"
#include "donorq/workflow.hpp"
#include "json.hpp"

namespace py = pybind11;
namespace es = donorq::electrostatics;
namespace hf = donorq::hfs;
namespace sp = donorq::spin;
namespace wf = donorq::workflow;
using nlohmann::json;

namespace {

sp::DeviceParams device(const std::string& device_json) {
  return wf::device_from_json(json::parse(device_json));
}

std::string levels(const std::string& device_json) {
  const auto p = device(device_json);
  json out = wf::levels_to_json(sp::level_structure(p));
  out["device"] = {{"a_iso_hz", p.a_iso}, {"b0_T", p.b0}};
  return out.dump();
}

std::string calibrate(const std::string& transition, const std::string& device_json, double t_max) {
  const auto t = sp::parse_transition(transition);
  const auto p = device(device_json);
  return wf::calibration_to_json(wf::calibrate_rabi(p, t, t_max > 0 ? t_max : wf::default_calibration_horizon(t)))
      .dump();
}

std::string bell(const std::string& device_json, std::size_t samples_per_segment) {
  const auto p = device(device_json);
  const auto prep = wf::bell_preparation(p);
  wf::ExperimentOptions options;
  options.samples_per_segment = samples_per_segment;
  const auto trace = wf::run_experiment(prep.sequence, p, {}, options);
  json t = json::array(), f = json::array(), seg = json::array();
  for (const auto& s : trace.samples) {
    t.push_back(s.t);
    f.push_back(s.fidelity);
    seg.push_back(s.segment);
  }
  return json{{"final_fidelity", trace.final_fidelity},
              {"max_norm_drift", trace.max_norm_drift},
              {"steps", trace.steps},
              {"segment_boundaries_s", trace.segment_boundaries},
              {"calibration", {{"nmr", wf::calibration_to_json(prep.nmr)}, {"esr", wf::calibration_to_json(prep.esr)}}},
              {"trace", {{"t_s", t}, {"fidelity", f}, {"segment", seg}}}}
      .dump();
}

std::string solve_field(const std::string& layout_json, const std::vector<double>& donor) {
  const auto sol = es::solve_poisson(es::rasterize(es::layout_from_json(json::parse(layout_json))));
  json out{{"iterations", sol.report.iterations},
           {"relative_residual", sol.report.relative_residual},
           {"maximum_principle_holds", sol.report.maximum_principle_holds}};
  if (!donor.empty()) {
    if (donor.size() != 3) throw std::invalid_argument("donor position needs three coordinates");
    const auto s = es::sample_field(sol.field, {donor[0], donor[1], donor[2]});
    out["potential_at_donor_V"] = s.potential;
    out["E_at_donor_Vpm"] = {s.field[0], s.field[1], s.field[2]};
  }
  return out.dump();
}

std::string run_pipeline(const std::string& config_json, bool ensemble, const std::string& base_dir,
                         const std::string& output_dir) {
  wf::PipelineOptions options;
  options.mode = ensemble ? wf::PipelineMode::kEnsemble : wf::PipelineMode::kExperiment;
  options.base_dir = base_dir;
  options.write_outputs = !output_dir.empty();
  if (!output_dir.empty()) options.output_dir = output_dir;
  json config;
  try {
    config = json::parse(config_json);
  } catch (const json::exception& e) {
    throw wf::PipelineError("config", e.what());
  }
  return wf::run_pipeline(config, options).report.dump();
}

}  // namespace

PYBIND11_MODULE(_donorq, m) {
  m.doc() = "donorq core: spin dynamics, electrostatics and hyperfine tools";

  py::register_exception<wf::PipelineError>(m, "PipelineError", PyExc_RuntimeError);

  m.def("levels", &levels, py::arg("device_json"));
  m.def("calibrate", &calibrate, py::arg("transition"), py::arg("device_json"), py::arg("t_max") = 0.0);
  m.def("bell", &bell, py::arg("device_json"), py::arg("samples_per_segment") = 200,
        py::call_guard<py::gil_scoped_release>());
  m.def("solve_field", &solve_field, py::arg("layout_json"), py::arg("donor") = std::vector<double>{},
        py::call_guard<py::gil_scoped_release>());
  m.def("run_pipeline", &run_pipeline, py::arg("config_json"), py::arg("ensemble") = false,
        py::arg("base_dir") = ".", py::arg("output_dir") = "", py::call_guard<py::gil_scoped_release>());

  m.def("gauss_to_hz", [](double gauss, double gamma_e) {
    return hf::gauss_to_hz(hf::HfsValue::gauss(gauss), gamma_e).value;
  }, py::arg("gauss"), py::arg("gamma_e") = sp::kGammaElectronSiP);
  m.def("hz_to_gauss", [](double hz, double gamma_e) {
    return hf::hz_to_gauss(hf::HfsValue::hz(hz), gamma_e).value;
  }, py::arg("hz"), py::arg("gamma_e") = sp::kGammaElectronSiP);
  m.def("slater_cumulative", [](double radius, double decay_length) {
    return hf::slater_cumulative(radius, {decay_length});
  }, py::arg("radius"), py::arg("decay_length"));
  m.def("fit_slater", [](const std::vector<std::pair<double, double>>& samples) {
    return hf::fit_slater(samples).model.decay_length;
  }, py::arg("samples"));
}
