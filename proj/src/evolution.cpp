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

#include "donorq/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

namespace donorq::evolution {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double time_at(double t0, double duration, double dt, std::size_t k, std::size_t n) {
  return k == n ? t0 + duration : t0 + static_cast<double>(k) * dt;
}

bool should_record(std::size_t k, std::size_t n, const OutputOptions& output) {
  if (k == n) return true;
  return output.stride != 0 && k % output.stride == 0;
}

}  // namespace

QuantumState QuantumState::basis(std::size_t index) {
  if (index >= kDim) throw StateError("QuantumState::basis: index out of range");
  QuantumState s;
  s.amplitudes[index] = 1.0;
  return s;
}

QuantumState QuantumState::normalised(std::array<Complex, kDim> amplitudes) {
  QuantumState s{amplitudes};
  const double n = s.norm();
  if (n == 0.0) throw StateError("QuantumState::normalised: zero vector");
  for (auto& a : s.amplitudes) a /= n;
  return s;
}

double QuantumState::norm() const {
  double s = 0.0;
  for (const auto& a : amplitudes) s += std::norm(a);
  return std::sqrt(s);
}

bool QuantumState::is_normalised(double tol) const {
  double s = 0.0;
  for (const auto& a : amplitudes) s += std::norm(a);
  return std::abs(s - 1.0) <= tol;
}

Complex inner(const QuantumState& bra, const QuantumState& ket) {
  Complex s = 0.0;
  for (std::size_t i = 0; i < kDim; ++i) s += std::conj(bra.amplitudes[i]) * ket.amplitudes[i];
  return s;
}

QuantumState operator*(const ComplexMatrix& u, const QuantumState& psi) {
  QuantumState out;
  for (std::size_t i = 0; i < kDim; ++i) {
    Complex s = 0.0;
    for (std::size_t j = 0; j < kDim; ++j) s += u(i, j) * psi.amplitudes[j];
    out.amplitudes[i] = s;
  }
  return out;
}

DensityMatrix DensityMatrix::pure(const QuantumState& psi) {
  DensityMatrix d;
  for (std::size_t i = 0; i < kDim; ++i)
    for (std::size_t j = 0; j < kDim; ++j)
      d.rho(i, j) = psi.amplitudes[i] * std::conj(psi.amplitudes[j]);
  return d;
}

DensityMatrix DensityMatrix::maximally_mixed() {
  DensityMatrix d;
  d.rho = ComplexMatrix::identity(kDim) * Complex(1.0 / kDim);
  return d;
}

double DensityMatrix::min_eigenvalue() const {
  return qmath::hermitian_eig(rho).eigenvalues.front();
}

bool DensityMatrix::is_valid() const {
  if (!rho.is_hermitian(1e-12)) return false;
  if (std::abs(trace() - Complex(1.0)) > 1e-9) return false;
  return min_eigenvalue() >= -1e-10;
}

void StepPolicy::validate() const {
  if (!(dt_max > 0.0)) throw std::invalid_argument("StepPolicy: dt_max must be positive");
  if (points_per_drive_period < 8)
    throw std::invalid_argument("StepPolicy: points_per_drive_period must be at least 8");
  if (dephasing && (dephasing->electron < 0.0 || dephasing->nucleus < 0.0))
    throw std::invalid_argument("StepPolicy: dephasing rates must be non-negative");
}

double step_size(const DeviceParams& p, const StepPolicy& policy) {
  policy.validate();
  double dt = policy.dt_max;
  if (p.b_ac != 0.0 && p.omega != 0.0) {
    const double period = kTwoPi / std::abs(p.omega);
    dt = std::min(dt, period / static_cast<double>(policy.points_per_drive_period));
  }
  return dt;
}

std::size_t step_count(double duration, double dt) {
  if (duration < 0.0) throw std::invalid_argument("propagate: negative duration");
  if (!(dt > 0.0)) throw std::invalid_argument("propagate: dt must be positive");
  if (duration == 0.0) return 0;
  const double steps = std::ceil(duration / dt * (1.0 - 1e-12));
  if (!(steps <= static_cast<double>(kMaxSteps))) {
    throw ResourceError("propagate: " + std::to_string(steps) + " steps requested, limit is " +
                        std::to_string(kMaxSteps));
  }
  return std::max<std::size_t>(1, static_cast<std::size_t>(steps));
}

ComplexMatrix step_propagator(double t, double dt, const DeviceParams& p) {
  return qmath::expm_unitary(spin::hamiltonian_at(t + 0.5 * dt, p), kTwoPi * dt);
}

QuantumState step(const QuantumState& state, double t, double dt, const DeviceParams& p) {
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
  return step_propagator(t, dt, p) * state;
}

Trajectory propagate(const QuantumState& state, double t0, double duration, const DeviceParams& p,
                     const StepPolicy& policy, OutputOptions output) {
  const double dt = step_size(p, policy);
  const std::size_t n = step_count(duration, dt);
  Trajectory traj;
  traj.push_back({t0, state});
  QuantumState psi = state;
  for (std::size_t k = 0; k < n; ++k) {
    const double ta = time_at(t0, duration, dt, k, n);
    const double tb = time_at(t0, duration, dt, k + 1, n);
    psi = step(psi, ta, tb - ta, p);
    if (should_record(k + 1, n, output)) traj.push_back({tb, psi});
  }
  return traj;
}

namespace {

// Energy eigenbasis of the static Hamiltonian with the electron / nuclear
// label of each eigenvector (from its dominant basis component).
struct DephasingBasis {
  ComplexMatrix w;
  std::array<int, kDim> electron{};
  std::array<int, kDim> nucleus{};
};

DephasingBasis dephasing_basis(const DeviceParams& p) {
  const auto eig = qmath::hermitian_eig(spin::static_hamiltonian(p));
  DephasingBasis b{eig.eigenvectors, {}, {}};
  std::array<bool, kDim> taken{};
  for (std::size_t k = 0; k < kDim; ++k) {
    std::size_t best = 0;
    double weight = -1.0;
    for (std::size_t i = 0; i < kDim; ++i) {
      const double wgt = std::norm(eig.eigenvectors(i, k));
      if (!taken[i] && wgt > weight) {
        weight = wgt;
        best = i;
      }
    }
    taken[best] = true;
    b.electron[k] = static_cast<int>(best / 2);
    b.nucleus[k] = static_cast<int>(best % 2);
  }
  return b;
}

void apply_dephasing(ComplexMatrix& rho, const DephasingBasis& basis, const DephasingRates& rates,
                     double dt) {
  ComplexMatrix r = basis.w.adjoint() * rho * basis.w;
  for (std::size_t k = 0; k < kDim; ++k)
    for (std::size_t l = 0; l < kDim; ++l) {
      double gamma = 0.0;
      if (basis.electron[k] != basis.electron[l]) gamma += rates.electron;
      if (basis.nucleus[k] != basis.nucleus[l]) gamma += rates.nucleus;
      if (gamma != 0.0) r(k, l) *= std::exp(-gamma * dt);
    }
  rho = basis.w * r * basis.w.adjoint();
}

}  // namespace

std::vector<DensityPoint> propagate_density(const DensityMatrix& rho, double t0, double duration,
                                            const DeviceParams& p, const StepPolicy& policy,
                                            OutputOptions output) {
  const double dt = step_size(p, policy);
  const std::size_t n = step_count(duration, dt);
  std::optional<DephasingBasis> basis;
  if (policy.dephasing) basis = dephasing_basis(p);

  std::vector<DensityPoint> out;
  out.push_back({t0, rho});
  ComplexMatrix r = rho.rho;
  for (std::size_t k = 0; k < n; ++k) {
    const double ta = time_at(t0, duration, dt, k, n);
    const double tb = time_at(t0, duration, dt, k + 1, n);
    const ComplexMatrix u = step_propagator(ta, tb - ta, p);
    r = u * r * u.adjoint();
    if (basis) apply_dephasing(r, *basis, *policy.dephasing, tb - ta);
    if (should_record(k + 1, n, output)) out.push_back({tb, DensityMatrix{r}});
  }
  return out;
}

double fidelity(const QuantumState& state, const QuantumState& target) {
  if (!state.is_normalised()) throw StateError("fidelity: state is not normalised");
  if (!target.is_normalised()) throw StateError("fidelity: target is not normalised");
  return std::clamp(std::norm(inner(target, state)), 0.0, 1.0);
}

void PhaseFrame::advance(const DeviceParams& p, double duration) {
  if (duration == 0.0) return;
  u0_ = qmath::expm_unitary(spin::static_hamiltonian(p), kTwoPi * duration) * u0_;
}

PhaseFrame PhaseFrame::advanced(const DeviceParams& p, double elapsed) const {
  PhaseFrame f = *this;
  f.advance(p, elapsed);
  return f;
}

QuantumState PhaseFrame::to_frame(const QuantumState& lab) const { return u0_.adjoint() * lab; }

double fidelity(const QuantumState& state, const QuantumState& target, const PhaseFrame* frame) {
  if (frame == nullptr) return fidelity(state, target);
  if (!state.is_normalised()) throw StateError("fidelity: state is not normalised");
  return fidelity(frame->to_frame(state), target);
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory,
                          const std::vector<double>* fidelities) {
  if (fidelities && fidelities->size() != trajectory.size())
    throw std::invalid_argument("write_trajectory_csv: fidelity column length mismatch");
  out << "t_seconds";
  for (std::size_t i = 0; i < kDim; ++i) {
    const auto label = spin::basis_label(i);
    out << ",re_" << label << ",im_" << label;
  }
  for (std::size_t i = 0; i < kDim; ++i) out << ",pop_" << spin::basis_label(i);
  if (fidelities) out << ",fidelity";
  out << '\n';
  const auto old_precision = out.precision(17);
  for (std::size_t r = 0; r < trajectory.size(); ++r) {
    const auto& pt = trajectory[r];
    out << pt.t;
    for (const auto& a : pt.state.amplitudes) out << ',' << a.real() << ',' << a.imag();
    for (std::size_t i = 0; i < kDim; ++i) out << ',' << pt.state.population(i);
    if (fidelities) out << ',' << (*fidelities)[r];
    out << '\n';
  }
  out.precision(old_precision);
}

}  // namespace donorq::evolution
