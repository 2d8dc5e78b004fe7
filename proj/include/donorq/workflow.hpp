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

// Gate-level control: pulse sequences, Rabi calibration, the Bell-state
// preparation experiment and Monte Carlo averaging over donor depth.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "donorq/evolution.hpp"
#include "donorq/hfs.hpp"
#include "donorq/spin_system.hpp"

namespace donorq::workflow {

using evolution::QuantumState;
using evolution::StepPolicy;
using spin::DeviceParams;
using spin::Transition;

inline constexpr double kPlanck = 6.62607015e-34;          // J s
inline constexpr double kElementaryCharge = 1.602176634e-19;  // C
inline constexpr double kAdiabaticSafetyFactor = 100.0;
inline constexpr double kDonorOrbitalGapEv = 0.010;

struct AdiabaticVerdict {
  double t_min = 0.0;   // h / E, s
  double margin = 0.0;  // ramp_time / t_min
  bool adiabatic = false;
};

/// Ramps are adiabatic when ramp_time >= kAdiabaticSafetyFactor * h / gap.
AdiabaticVerdict check_adiabatic(double ramp_time, double orbital_gap_ev);

enum class Channel { kNmr, kEsr, kIdle };
std::string channel_name(Channel c);
Channel parse_channel(const std::string& name);

struct PulseSegment {
  double duration = 0.0;            // s
  std::optional<double> a_target;   // Hz; unset keeps the device coupling
  double ramp_time = 0.0;           // s
  double b_ac = 0.0;                // T
  double omega = 0.0;               // rad/s
  double phase = 0.0;               // rad
  Channel channel = Channel::kIdle;

  void validate() const;
};

struct PulseSequence {
  std::vector<PulseSegment> segments;
  QuantumState initial;
  QuantumState target;

  void validate() const;
};

/// Device parameters in effect during a segment. `hfs_scale` multiplies an
/// explicit a_target (per-sample hyperfine offsets in ensembles).
DeviceParams segment_params(const DeviceParams& device, const PulseSegment& segment, double hfs_scale = 1.0);

struct ScanPoint {
  double t;
  double population;
};

class CalibrationError : public std::runtime_error {
 public:
  CalibrationError(const std::string& what, std::vector<ScanPoint> scan)
      : std::runtime_error(what), scan_(std::move(scan)) {}
  const std::vector<ScanPoint>& scan() const { return scan_; }

 private:
  std::vector<ScanPoint> scan_;
};

struct RabiCalibration {
  Transition transition = Transition::kEsrNuclearUp;
  double drive_omega = 0.0;     // rad/s, exact transition
  double nominal_omega = 0.0;   // rad/s, first-order formula
  double t_pi = 0.0;            // first maximum of the flipped population
  double t_pi_half = 0.0;       // first rising crossing of population 1/2
  double rabi_frequency = 0.0;  // Hz, 1 / (2 t_pi)
  double peak_population = 0.0;
  double leakage = 0.0;         // max population outside the driven pair up to t_pi
  std::vector<ScanPoint> scan;  // subsampled coarse scan
};

/// Drives the named transition at its exact frequency from its start state
/// and locates t_pi (golden section around the coarse peak) and t_pi_half
/// (bisection on the rising flank). Throws CalibrationError when the flipped
/// population never exceeds 0.9 before t_max.
RabiCalibration calibrate_rabi(const DeviceParams& p, Transition transition, double t_max,
                               const StepPolicy& policy = {});

/// Scan horizon used when none is given: 500 us for NMR lines, 2 us for ESR.
double default_calibration_horizon(Transition transition);

struct BellPreparation {
  PulseSequence sequence;
  RabiCalibration nmr;
  RabiCalibration esr;
};

/// Conditional nuclear pi/2 on NMR_eDown followed by a conditional electron pi
/// on ESR_nUp, from |down,Down> towards (|down,Down> + |up,Up>)/sqrt(2). Drive
/// frequencies are the exact lines; the electron drive phase is chosen so the
/// rotating-frame relative phase of the two branches is zero.
BellPreparation bell_preparation(const DeviceParams& p, const StepPolicy& policy = {});
PulseSequence bell_prep_sequence(const DeviceParams& p, const StepPolicy& policy = {});

QuantumState bell_target();

struct TraceSample {
  double t;
  double fidelity;
  std::size_t segment;
};

struct FidelityTrace {
  std::vector<TraceSample> samples;
  double final_fidelity = 0.0;
  std::vector<double> segment_boundaries;  // end time of each segment
  std::vector<AdiabaticVerdict> ramps;     // one per change of hyperfine coupling
  QuantumState final_state;                // lab frame
  QuantumState final_state_rotating;       // phase-tracked frame
  double max_norm_drift = 0.0;
  std::size_t steps = 0;
};

struct ExperimentOptions {
  std::size_t samples_per_segment = 200;
  double orbital_gap_ev = kDonorOrbitalGapEv;
  double hfs_scale = 1.0;
};

/// Propagates the initial state through every segment and records the
/// phase-tracked fidelity against the target. With dephasing configured in the
/// policy the density matrix is propagated instead.
FidelityTrace run_experiment(const PulseSequence& sequence, const DeviceParams& p, const StepPolicy& policy,
                             const ExperimentOptions& options = {});

/// Header t_s,fidelity,segment.
void write_fidelity_csv(std::ostream& out, const FidelityTrace& trace);

/// std::mt19937_64 with uniform and normal variates computed here rather than
/// by <random> distributions, whose output differs between standard libraries.
class Rng {
 public:
  static constexpr const char* kAlgorithm = "mt19937_64";
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform();  // [0, 1), 53-bit
  double normal();   // Box-Muller

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

struct DepthDistribution {
  enum class Kind { kDelta, kNormal, kUniform };
  Kind kind = Kind::kDelta;
  double first = 0.0;   // delta value, normal mean or uniform lower bound (m)
  double second = 0.0;  // normal sigma or uniform upper bound (m)

  static DepthDistribution delta(double depth) { return {Kind::kDelta, depth, 0.0}; }
  static DepthDistribution normal(double mean, double sigma) { return {Kind::kNormal, mean, sigma}; }
  static DepthDistribution uniform(double lo, double hi) { return {Kind::kUniform, lo, hi}; }
  void validate() const;
  double draw(Rng& rng) const;
};

struct EnsembleSpec {
  std::size_t sample_count = 1;
  std::uint64_t seed = 0;
  DepthDistribution depth;
  hfs::DonorPositionModel position_model;
  bool recalibrate = false;
  std::size_t threads = 1;

  void validate() const;
};

/// Depths for every sample, drawn in index order from one generator.
std::vector<double> draw_depths(const EnsembleSpec& spec);

struct SampleRecord {
  std::size_t index = 0;
  double depth = 0.0;
  double a_iso_hz = 0.0;
  double final_fidelity = 0.0;
};

struct EnsembleResult {
  double mean_fidelity = 0.0;
  double std_error = 0.0;
  std::vector<SampleRecord> samples;  // sorted by index
};

class EnsembleError : public std::runtime_error {
 public:
  EnsembleError(const std::string& what, SampleRecord sample) : std::runtime_error(what), sample_(sample) {}
  const SampleRecord& sample() const { return sample_; }

 private:
  SampleRecord sample_;
};

/// Builds the sequence for a device. Called once at the nominal parameters, or
/// per sample when EnsembleSpec::recalibrate is set.
using SequenceFactory = std::function<PulseSequence(const DeviceParams&)>;

/// Monte Carlo average of the final fidelity over donor depth. Each sample
/// takes its hyperfine coupling from the position model. Results are
/// independent of the thread count.
EnsembleResult run_ensemble(const SequenceFactory& factory, const EnsembleSpec& spec, const DeviceParams& p,
                            const StepPolicy& policy, const ExperimentOptions& options = {});

/// Mean and standard error with the first value as shift, so identical inputs
/// give exactly that value and zero error.
std::pair<double, double> mean_and_std_error(const std::vector<double>& values);

}  // namespace donorq::workflow
