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

#pragma once

// Config-driven pipeline: field stage, hyperfine stage, device, calibration,
// experiment or ensemble, outputs. See README.md for the config schema.

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "donorq/workflow.hpp"
#include "json.hpp"

namespace donorq::workflow {

/// Error raised by a pipeline stage; what() reads "[stage] message".
class PipelineError : public std::runtime_error {
 public:
  PipelineError(std::string stage, const std::string& message)
      : std::runtime_error("[" + stage + "] " + message), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

enum class PipelineMode { kExperiment, kEnsemble };

struct PipelineOptions {
  PipelineMode mode = PipelineMode::kExperiment;
  std::filesystem::path base_dir = ".";               // relative input paths resolve here
  std::optional<std::filesystem::path> output_dir;    // overrides output.directory
  bool write_outputs = true;
};

struct PipelineResult {
  nlohmann::json report;
  std::optional<FidelityTrace> trace;
  std::optional<EnsembleResult> ensemble;
};

/// Runs the stages named in the report: config, field, hfs, device,
/// calibration, experiment or ensemble, output. Errors surface as
/// PipelineError tagged with the failing stage.
PipelineResult run_pipeline(const nlohmann::json& config, const PipelineOptions& options = {});

/// Loads and parses a JSON file; failures are tagged with `stage`.
nlohmann::json load_json(const std::filesystem::path& path, const std::string& stage);

/// Device parameters from a `device` section: optional preset ("si_p" or
/// "si_p_1T") overridden by gamma_e_hz_per_T, gamma_n_hz_per_T, b0_T, b_ac_T,
/// a_iso_hz.
DeviceParams device_from_json(const nlohmann::json& section);

/// Step policy from a sequence section's optional "step" object.
StepPolicy step_policy_from_json(const nlohmann::json& section);

/// Report fragment for a calibration.
nlohmann::json calibration_to_json(const RabiCalibration& cal);

/// Report fragment for a level structure.
nlohmann::json levels_to_json(const spin::LevelStructure& levels);

}  // namespace donorq::workflow
