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

// Time propagation of the four-level donor spin system.
//
// Each step exponentiates the Hamiltonian sampled at the step midpoint
// (first-order Magnus, second-order accurate in dt). Density matrices evolve as
// U rho U^H; optional pure dephasing acts in the energy eigenbasis of the static
// Hamiltonian.

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <vector>

#include "donorq/qmath.hpp"
#include "donorq/spin_system.hpp"

namespace donorq::evolution {

using qmath::Complex;
using qmath::ComplexMatrix;
using spin::DeviceParams;

inline constexpr std::size_t kDim = 4;

class StateError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a step policy would need an unreasonable number of steps.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct QuantumState {
  std::array<Complex, kDim> amplitudes{};

  static QuantumState basis(std::size_t index);
  /// Normalised superposition of the given amplitudes.
  static QuantumState normalised(std::array<Complex, kDim> amplitudes);

  double norm() const;
  double population(std::size_t index) const { return std::norm(amplitudes[index]); }
  bool is_normalised(double tol = 1e-9) const;
};

Complex inner(const QuantumState& bra, const QuantumState& ket);

QuantumState operator*(const ComplexMatrix& u, const QuantumState& psi);

struct DensityMatrix {
  ComplexMatrix rho = ComplexMatrix::zeros(kDim, kDim);

  static DensityMatrix pure(const QuantumState& psi);
  static DensityMatrix maximally_mixed();

  Complex trace() const { return rho.trace(); }
  /// Hermitian within 1e-12, unit trace within 1e-9, eigenvalues >= -1e-10.
  bool is_valid() const;
  double min_eigenvalue() const;
};

struct DephasingRates {
  double electron = 0.0;  // 1/T2e, Hz
  double nucleus = 0.0;   // 1/T2n, Hz
};

/// 1/T2 presets: 0.5 s electron, 30 s nucleus.
inline constexpr DephasingRates kSiPDephasing{1.0 / 0.5, 1.0 / 30.0};

struct StepPolicy {
  double dt_max = 1e-9;  // s
  std::size_t points_per_drive_period = 20;
  std::optional<DephasingRates> dephasing;

  void validate() const;
};

/// min(dt_max, drive period / points_per_drive_period); the drive period is
/// ignored when there is no drive.
double step_size(const DeviceParams& p, const StepPolicy& policy);

inline constexpr std::size_t kMaxSteps = 1'000'000'000;

/// Number of steps covering `duration` at step `dt`, the last one possibly
/// shortened. Throws ResourceError above kMaxSteps.
std::size_t step_count(double duration, double dt);

/// Midpoint propagator exp(-i 2pi H(t + dt/2) dt).
ComplexMatrix step_propagator(double t, double dt, const DeviceParams& p);

QuantumState step(const QuantumState& state, double t, double dt, const DeviceParams& p);

struct TrajectoryPoint {
  double t;
  QuantumState state;
};
using Trajectory = std::vector<TrajectoryPoint>;

struct OutputOptions {
  /// Record every `stride` steps; 0 records the endpoints only.
  std::size_t stride = 0;
};

/// Propagates from t0 over `duration`. The trajectory always begins with the
/// initial state at t0 and ends at exactly t0 + duration.
Trajectory propagate(const QuantumState& state, double t0, double duration, const DeviceParams& p,
                     const StepPolicy& policy, OutputOptions output = {});

struct DensityPoint {
  double t;
  DensityMatrix rho;
};

std::vector<DensityPoint> propagate_density(const DensityMatrix& rho, double t0, double duration,
                                            const DeviceParams& p, const StepPolicy& policy,
                                            OutputOptions output = {});

/// |<target|state>|^2. Throws StateError unless both are normalised within 1e-9.
double fidelity(const QuantumState& state, const QuantumState& target);

/// Free evolution under the static Hamiltonian, accumulated across segments.
/// Mapping a lab-frame state through it removes the deterministic phases
/// exp(-i 2pi E_k t) of every energy eigencomponent.
class PhaseFrame {
 public:
  PhaseFrame() : u0_(ComplexMatrix::identity(kDim)) {}

  /// Appends `duration` of free evolution under static_hamiltonian(p).
  void advance(const DeviceParams& p, double duration);
  /// The frame `elapsed` seconds into a segment with parameters p, leaving this frame untouched.
  PhaseFrame advanced(const DeviceParams& p, double elapsed) const;

  QuantumState to_frame(const QuantumState& lab) const;
  const ComplexMatrix& free_propagator() const { return u0_; }

 private:
  ComplexMatrix u0_;
};

/// Fidelity with the free-evolution phases removed. With a null frame this is
/// the plain lab-frame overlap.
double fidelity(const QuantumState& state, const QuantumState& target, const PhaseFrame* frame);

/// CSV with header t_seconds, re/im of each amplitude, populations and an
/// optional fidelity column.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory,
                          const std::vector<double>* fidelities = nullptr);

}  // namespace donorq::evolution
