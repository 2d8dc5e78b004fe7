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

#include "donorq/spin_system.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace donorq::spin {

using qmath::Complex;
using qmath::kron;

std::string_view basis_label(std::size_t index) {
  static constexpr std::array<std::string_view, 4> kLabels = {"uU", "uD", "dU", "dD"};
  if (index >= kLabels.size()) throw std::out_of_range("basis_label: index out of range");
  return kLabels[index];
}

SpinOperators make_spin_operators() {
  const Complex i{0.0, 1.0};
  const ComplexMatrix sx{{0.0, 0.5}, {0.5, 0.0}};
  const ComplexMatrix sy{{0.0, -0.5 * i}, {0.5 * i, 0.0}};
  const ComplexMatrix sz{{0.5, 0.0}, {0.0, -0.5}};
  const ComplexMatrix id = ComplexMatrix::identity(2);
  return {kron(sx, id), kron(sy, id), kron(sz, id), kron(id, sx), kron(id, sy), kron(id, sz)};
}

namespace {

const SpinOperators& ops() {
  static const SpinOperators kOps = make_spin_operators();
  return kOps;
}

const ComplexMatrix& s_dot_i() {
  static const ComplexMatrix kSI = ops().sx * ops().ix + ops().sy * ops().iy + ops().sz * ops().iz;
  return kSI;
}

}  // namespace

void validate(const DeviceParams& p) {
  if (p.gamma_e < 0.0) throw RegimeError("gamma_e must be non-negative");
  if (p.b0 < 0.0) throw RegimeError("B0 must be non-negative");
  if (p.b_ac < 0.0) throw RegimeError("B_ac must be non-negative");
  if (p.a_iso < 0.0) throw RegimeError("A_iso must be non-negative");
}

DeviceParams default_si_p_params() {
  DeviceParams p;
  p.gamma_e = kGammaElectronSiP;
  p.gamma_n = kGammaNucleus31P;
  p.b0 = kPresetB0;
  p.a_iso = kTunedHyperfine;
  p.b_ac = kDriveAmplitude;
  return p;
}

DeviceParams si_p_params_one_tesla() {
  DeviceParams p = default_si_p_params();
  p.b0 = 1.0;
  return p;
}

ComplexMatrix static_hamiltonian(const DeviceParams& p) {
  return s_dot_i() * p.a_iso + ops().sz * (p.gamma_e * p.b0) - ops().iz * (p.gamma_n * p.b0);
}

ComplexMatrix drive_operator(const DeviceParams& p) {
  return ops().sx * (p.gamma_e * p.b_ac) - ops().ix * (p.gamma_n * p.b_ac);
}

ComplexMatrix hamiltonian_at(double t, const DeviceParams& p) {
  ComplexMatrix h = static_hamiltonian(p);
  if (p.b_ac != 0.0) h += drive_operator(p) * std::cos(p.omega * t + p.phase);
  return h;
}

std::string_view transition_name(Transition t) {
  switch (t) {
    case Transition::kEsrNuclearUp: return "ESR_nUp";
    case Transition::kEsrNuclearDown: return "ESR_nDown";
    case Transition::kNmrElectronDown: return "NMR_eDown";
    case Transition::kNmrElectronUp: return "NMR_eUp";
  }
  return "?";
}

Transition parse_transition(std::string_view name) {
  auto normalise = [](std::string_view s) {
    std::string out;
    for (char c : s) {
      if (c == '-' || c == '_') continue;
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
  };
  const std::string key = normalise(name);
  for (Transition t : kAllTransitions)
    if (normalise(transition_name(t)) == key) return t;
  throw std::invalid_argument("unknown transition '" + std::string(name) +
                              "' (expected ESR_nUp, ESR_nDown, NMR_eDown or NMR_eUp)");
}

TransitionEndpoints endpoints(Transition t) {
  switch (t) {
    case Transition::kEsrNuclearUp: return {kDownUp, kUpUp};
    case Transition::kEsrNuclearDown: return {kDownDown, kUpDown};
    case Transition::kNmrElectronDown: return {kDownDown, kDownUp};
    case Transition::kNmrElectronUp: return {kUpDown, kUpUp};
  }
  return {0, 0};
}

LevelStructure level_structure_unchecked(const DeviceParams& p) {
  const auto eig = qmath::hermitian_eig(static_hamiltonian(p));
  LevelStructure ls;
  std::array<bool, 4> taken{};
  for (std::size_t k = 0; k < 4; ++k) {
    ls.energies[k] = eig.eigenvalues[k];
    // Assign each level to its dominant unclaimed basis state.
    std::size_t best = 0;
    double best_weight = -1.0;
    for (std::size_t b = 0; b < 4; ++b) {
      const double w = std::norm(eig.eigenvectors(b, k));
      if (!taken[b] && w > best_weight) {
        best = b;
        best_weight = w;
      }
    }
    taken[best] = true;
    ls.labels[k] = best;
    ls.basis_energy[best] = eig.eigenvalues[k];
  }

  const auto& e = ls.basis_energy;
  const double half_a = 0.5 * p.a_iso;
  const double zn = p.gamma_n * p.b0;
  const double ze = p.gamma_e * p.b0;
  auto set = [&](Transition t, double exact, double first) {
    ls.lines[static_cast<std::size_t>(t)] = {std::abs(exact), first};
  };
  set(Transition::kEsrNuclearUp, e[kUpUp] - e[kDownUp], ze + half_a);
  set(Transition::kEsrNuclearDown, e[kUpDown] - e[kDownDown], ze - half_a);
  set(Transition::kNmrElectronDown, e[kDownDown] - e[kDownUp], half_a + zn);
  set(Transition::kNmrElectronUp, e[kUpUp] - e[kUpDown], half_a - zn);
  return ls;
}

LevelStructure level_structure(const DeviceParams& p) {
  validate(p);
  if (!p.high_field()) {
    throw RegimeError("level_structure: high-field assumption (gamma_e + gamma_n) B0 >> A_iso violated: " +
                      std::to_string((p.gamma_e + p.gamma_n) * p.b0) + " Hz <= 10 * " +
                      std::to_string(p.a_iso) + " Hz");
  }
  if (!(p.gamma_n * p.b0 < 0.5 * p.a_iso)) {
    throw RegimeError("level_structure: level-ordering assumption gamma_n B0 < A_iso/2 violated: " +
                      std::to_string(p.gamma_n * p.b0) + " Hz >= " + std::to_string(0.5 * p.a_iso) +
                      " Hz");
  }
  return level_structure_unchecked(p);
}

}  // namespace donorq::spin
