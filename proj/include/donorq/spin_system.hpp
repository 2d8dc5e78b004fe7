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

// Electron-nuclear spin Hamiltonian of a single group-V donor (spin-1/2 nucleus).
//
// Basis order is fixed as |up,Up>, |up,Down>, |down,Up>, |down,Down> where the
// first label is the electron and the second the nucleus. Every Hamiltonian in
// this module is expressed in ordinary frequency (Hz); the propagator applies
// the factor 2*pi exactly once.

#include <array>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

#include "donorq/qmath.hpp"

namespace donorq::spin {

using qmath::ComplexMatrix;

enum BasisState : std::size_t { kUpUp = 0, kUpDown = 1, kDownUp = 2, kDownDown = 3 };

/// Short tag for a basis state, e.g. "dD" for |down,Down>.
std::string_view basis_label(std::size_t index);

struct SpinOperators {
  ComplexMatrix sx, sy, sz;  // electron
  ComplexMatrix ix, iy, iz;  // nucleus
};

SpinOperators make_spin_operators();

/// Device and drive parameters entering the spin Hamiltonian.
struct DeviceParams {
  double gamma_e = 0.0;  // Hz/T
  double gamma_n = 0.0;  // Hz/T
  double b0 = 0.0;       // T
  double a_iso = 0.0;    // Hz
  double b_ac = 0.0;     // T
  double omega = 0.0;    // rad/s
  double phase = 0.0;    // rad

  bool high_field() const { return (gamma_e + gamma_n) * b0 > 10.0 * a_iso; }
};

class RegimeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Throws RegimeError when the sign constraints on the parameters are violated.
void validate(const DeviceParams& p);

/// Si:P constants with A tuned to 117.6 MHz and B0 = 0.9977 T, which places the
/// first-order NMR line of the electron-down manifold at 477.5 Mrad/s.
DeviceParams default_si_p_params();

/// Same as default_si_p_params() with B0 = 1 T.
DeviceParams si_p_params_one_tesla();

inline constexpr double kGammaElectronSiP = 28.025e9;  // Hz/T
inline constexpr double kGammaNucleus31P = 17.235e6;   // Hz/T
inline constexpr double kTunedHyperfine = 117.6e6;     // Hz
inline constexpr double kPresetB0 = 0.9977;            // T
inline constexpr double kDriveAmplitude = 1e-4;        // T

/// A S.I + gamma_e B0 Sz - gamma_n B0 Iz, in Hz.
ComplexMatrix static_hamiltonian(const DeviceParams& p);

/// The drive operator gamma_e B_ac Sx - gamma_n B_ac Ix (Hz), without the cos factor.
ComplexMatrix drive_operator(const DeviceParams& p);

/// static_hamiltonian(p) + cos(omega t + phase) * drive_operator(p), in Hz.
ComplexMatrix hamiltonian_at(double t, const DeviceParams& p);

enum class Transition { kEsrNuclearUp, kEsrNuclearDown, kNmrElectronDown, kNmrElectronUp };

inline constexpr std::array<Transition, 4> kAllTransitions = {
    Transition::kEsrNuclearUp, Transition::kEsrNuclearDown, Transition::kNmrElectronDown,
    Transition::kNmrElectronUp};

/// Canonical names: "ESR_nUp", "ESR_nDown", "NMR_eDown", "NMR_eUp".
std::string_view transition_name(Transition t);

/// Accepts the canonical names case-insensitively, with '-' or '_' separators.
Transition parse_transition(std::string_view name);

/// Basis states connected by a transition: the state a calibration starts in
/// and the state it flips to.
struct TransitionEndpoints {
  std::size_t from;
  std::size_t to;
};
TransitionEndpoints endpoints(Transition t);

struct TransitionLine {
  double exact_hz = 0.0;        // from eigenvalue differences
  double first_order_hz = 0.0;  // A/2 +- gamma_n B0, gamma_e B0 +- A/2
  double relative_deviation() const { return (exact_hz - first_order_hz) / first_order_hz; }
};

struct LevelStructure {
  std::array<double, 4> energies{};      // Hz, ascending
  std::array<std::size_t, 4> labels{};   // dominant basis state of each level
  std::array<double, 4> basis_energy{};  // energy of the level dominated by each basis state
  std::array<TransitionLine, 4> lines{}; // indexed by Transition

  const TransitionLine& line(Transition t) const { return lines[static_cast<std::size_t>(t)]; }
  double angular(Transition t) const { return 2.0 * std::numbers::pi * line(t).exact_hz; }
};

/// Exact four-level spectrum of the static Hamiltonian together with the
/// first-order transition formulas. Requires the high-field regime and
/// gamma_n B0 < A/2; throws RegimeError naming the violated assumption.
LevelStructure level_structure(const DeviceParams& p);

/// Same computation without the regime checks (used by the workflow when a
/// sample's hyperfine value drifts out of the labelled regime).
LevelStructure level_structure_unchecked(const DeviceParams& p);

}  // namespace donorq::spin
