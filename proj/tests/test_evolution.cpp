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

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "donorq/evolution.hpp"

using namespace donorq::evolution;
using donorq::qmath::Complex;
using donorq::qmath::ComplexMatrix;
using donorq::qmath::hermitian_eig;
using donorq::qmath::max_abs_diff;
using donorq::spin::DeviceParams;
using donorq::spin::Transition;
namespace spin = donorq::spin;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

DeviceParams driven(Transition t) {
  DeviceParams p = spin::default_si_p_params();
  p.omega = spin::level_structure(p).angular(t);
  return p;
}

double distance(const QuantumState& a, const QuantumState& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < kDim; ++i) s += std::norm(a.amplitudes[i] - b.amplitudes[i]);
  return std::sqrt(s);
}

QuantumState final_state(const QuantumState& psi, double duration, const DeviceParams& p, std::size_t points) {
  StepPolicy policy;
  policy.points_per_drive_period = points;
  return propagate(psi, 0.0, duration, p, policy).back().state;
}

}  // namespace

TEST_CASE("state validation and helpers") {
  CHECK(QuantumState::basis(2).population(2) == 1.0);
  CHECK_THROWS_AS(QuantumState::basis(4), StateError);
  const auto s = QuantumState::normalised({Complex(1.0), Complex(0.0, 1.0), 0.0, 0.0});
  CHECK(s.norm() == doctest::Approx(1.0));
  CHECK(s.population(1) == doctest::Approx(0.5));
  CHECK_THROWS_AS(QuantumState::normalised({}), StateError);
}

TEST_CASE("stationary state only acquires a phase") {
  DeviceParams p = spin::default_si_p_params();
  p.b_ac = 0.0;
  const auto eig = hermitian_eig(spin::static_hamiltonian(p));
  for (std::size_t k = 0; k < kDim; ++k) {
    QuantumState v;
    for (std::size_t i = 0; i < kDim; ++i) v.amplitudes[i] = eig.eigenvectors(i, k);
    const double dt = 1e-9;
    const QuantumState w = step(v, 0.0, dt, p);
    const Complex phase = std::polar(1.0, -kTwoPi * eig.eigenvalues[k] * dt);
    for (std::size_t i = 0; i < kDim; ++i) CHECK(std::abs(w.amplitudes[i] - phase * v.amplitudes[i]) < 1e-9);
  }
}

TEST_CASE("zero Hamiltonian leaves the state unchanged") {
  const DeviceParams zero{};
  const auto psi = QuantumState::normalised({1.0, Complex(0.0, 2.0), 3.0, -1.0});
  const auto out = step(psi, 0.3, 1e-6, zero);
  CHECK(distance(out, psi) == 0.0);
}

TEST_CASE("step size and count") {
  DeviceParams p = driven(Transition::kEsrNuclearUp);
  StepPolicy policy;
  CHECK(step_size(p, policy) == doctest::Approx(kTwoPi / p.omega / 20));
  p.omega = 0.0;
  CHECK(step_size(p, policy) == policy.dt_max);
  CHECK(step_count(0.0, 1e-9) == 0);
  CHECK(step_count(1e-9, 1e-9) == 1);
  CHECK(step_count(1.5e-9, 1e-9) == 2);
  CHECK_THROWS_AS(step_count(10.0, 1e-9), ResourceError);
  StepPolicy bad;
  bad.points_per_drive_period = 4;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("propagate bookkeeping") {
  const DeviceParams p = driven(Transition::kEsrNuclearUp);
  const auto psi = QuantumState::basis(spin::kDownUp);
  SUBCASE("zero duration returns the initial state") {
    const auto traj = propagate(psi, 1e-6, 0.0, p, {});
    REQUIRE(traj.size() == 1);
    CHECK(traj[0].t == 1e-6);
    CHECK(distance(traj[0].state, psi) == 0.0);
  }
  SUBCASE("final time is exact and the stride is honoured") {
    const double duration = 1.00037e-9;
    const auto traj = propagate(psi, 2e-9, duration, p, {}, OutputOptions{5});
    CHECK(traj.back().t == 2e-9 + duration);
    for (std::size_t i = 1; i < traj.size(); ++i) CHECK(traj[i].t > traj[i - 1].t);
    const auto ends = propagate(psi, 2e-9, duration, p, {});
    CHECK(ends.size() == 2);
    CHECK(distance(ends.back().state, traj.back().state) == 0.0);
  }
}

TEST_CASE("midpoint propagator is second order") {
  const DeviceParams p = driven(Transition::kEsrNuclearUp);
  const auto psi = QuantumState::basis(spin::kDownUp);
  const double duration = 20e-9;
  const auto reference = final_state(psi, duration, p, 8 * 16);
  const double coarse = distance(final_state(psi, duration, p, 8), reference);
  const double fine = distance(final_state(psi, duration, p, 16), reference);
  // Richardson: the dt/16 reference carries 1/256 of the coarse error, which
  // shifts the ideal ratio from 4 towards (1 - 1/256) / (1/4 - 1/256).
  CHECK(coarse / fine > 3.5);
  CHECK(coarse / fine < 4.5);
}

TEST_CASE("resonant NMR drive flops within the electron-down manifold") {
  const DeviceParams p = driven(Transition::kNmrElectronDown);
  const auto traj = propagate(QuantumState::basis(spin::kDownDown), 0.0, 150e-6, p, {}, OutputOptions{500});
  double peak = 0.0, off = 0.0, low_after_peak = 1.0;
  for (const auto& pt : traj) {
    peak = std::max(peak, pt.state.population(spin::kDownUp));
    if (peak > 0.99) low_after_peak = std::min(low_after_peak, pt.state.population(spin::kDownUp));
    off = std::max(off, pt.state.population(spin::kUpUp) + pt.state.population(spin::kUpDown));
  }
  CHECK(peak > 0.999);
  CHECK(off < 1e-3);
  CHECK(std::abs(traj.back().state.norm() - 1.0) < 1e-8);
}

TEST_CASE("NMR dynamics are converged at the production step") {
  const DeviceParams p = driven(Transition::kNmrElectronDown);
  const auto psi = QuantumState::basis(spin::kDownDown);
  const double duration = 20e-6;
  const double coarse = final_state(psi, duration, p, 20).population(spin::kDownUp);
  const double mid = final_state(psi, duration, p, 40).population(spin::kDownUp);
  const double fine = final_state(psi, duration, p, 80).population(spin::kDownUp);
  // Second order in dt, so the production error is about (coarse - mid) * 4/3.
  const double ratio = (coarse - mid) / (mid - fine);
  CHECK(ratio > 3.5);
  CHECK(ratio < 4.5);
  const double extrapolated = fine + (fine - mid) / 3.0;
  CHECK(std::abs(coarse - extrapolated) < 1e-3);
}

TEST_CASE("electron pi pulse agrees with the rotating-wave solution") {
  const DeviceParams p = driven(Transition::kEsrNuclearUp);
  const double t_pi = 1.0 / (p.gamma_e * p.b_ac);
  const auto traj = propagate(QuantumState::basis(spin::kDownUp), 0.0, t_pi, p, {}, OutputOptions{2000});
  for (const auto& pt : traj) {
    const double rwa = std::pow(std::sin(std::numbers::pi * p.gamma_e * p.b_ac * pt.t / 2.0), 2);
    CHECK(std::abs(pt.state.population(spin::kUpUp) - rwa) < 5e-3);
  }
  const auto at_pi = propagate(QuantumState::basis(spin::kDownUp), 0.0, t_pi, p, {}).back().state;
  CHECK(at_pi.population(spin::kUpUp) > 0.99);
}

TEST_CASE("density matrix propagation") {
  const DeviceParams p = driven(Transition::kEsrNuclearUp);
  const auto psi = QuantumState::normalised({0.3, Complex(0.1, 0.5), 0.7, -0.2});
  SUBCASE("pure state matches the state vector") {
    const auto rho = propagate_density(DensityMatrix::pure(psi), 0.0, 50e-9, p, {}).back().rho;
    const auto state = propagate(psi, 0.0, 50e-9, p, {}).back().state;
    CHECK(max_abs_diff(rho.rho, DensityMatrix::pure(state).rho) < 1e-9);
  }
  SUBCASE("maximally mixed state is stationary") {
    const auto rho = propagate_density(DensityMatrix::maximally_mixed(), 0.0, 20e-9, p, {}).back().rho;
    CHECK(max_abs_diff(rho.rho, DensityMatrix::maximally_mixed().rho) < 1e-10);
  }
  SUBCASE("dephasing keeps trace and positivity") {
    StepPolicy policy;
    policy.dephasing = DephasingRates{5e6, 1e6};
    const auto out = propagate_density(DensityMatrix::pure(psi), 0.0, 100e-9, p, policy, OutputOptions{1000});
    for (const auto& pt : out) {
      CHECK(std::abs(pt.rho.trace() - 1.0) < 1e-9);
      CHECK(pt.rho.min_eigenvalue() > -1e-10);
      CHECK(pt.rho.rho.is_hermitian(1e-12));
    }
  }
}

TEST_CASE("pure dephasing decays coherences exponentially") {
  DeviceParams p = spin::default_si_p_params();
  p.b_ac = 0.0;
  StepPolicy policy;
  policy.dephasing = DephasingRates{4e5, 1e5};
  const double s = 1.0 / std::sqrt(2.0);
  QuantumState psi;
  psi.amplitudes[spin::kUpUp] = s;
  psi.amplitudes[spin::kDownDown] = s;
  const auto rho0 = DensityMatrix::pure(psi);
  const auto out = propagate_density(rho0, 0.0, 5e-6, p, policy, OutputOptions{500});
  const double gamma = policy.dephasing->electron + policy.dephasing->nucleus;  // both labels differ
  for (const auto& pt : out) {
    const double expected = std::abs(rho0.rho(0, 3)) * std::exp(-gamma * pt.t);
    CHECK(std::abs(pt.rho.rho(0, 3)) == doctest::Approx(expected).epsilon(1e-9));
  }
  // Only the nuclear label differs between uU and uD.
  QuantumState q;
  q.amplitudes[spin::kUpUp] = s;
  q.amplitudes[spin::kUpDown] = s;
  const auto end = propagate_density(DensityMatrix::pure(q), 0.0, 5e-6, p, policy).back();
  CHECK(std::abs(end.rho.rho(0, 1)) ==
        doctest::Approx(0.5 * std::exp(-policy.dephasing->nucleus * 5e-6)).epsilon(1e-3));
}

TEST_CASE("fidelity") {
  const auto a = QuantumState::basis(0);
  CHECK(fidelity(a, a) == 1.0);
  CHECK(fidelity(a, QuantumState::basis(3)) == 0.0);
  const auto psi = QuantumState::normalised({0.3, Complex(0.1, 0.5), 0.7, -0.2});
  for (double theta : {0.1, 1.0, 2.5, -3.0}) {
    QuantumState rotated = psi;
    for (auto& z : rotated.amplitudes) z *= std::polar(1.0, theta);
    CHECK(fidelity(rotated, psi) == doctest::Approx(1.0).epsilon(1e-14));
  }
  QuantumState bad;
  bad.amplitudes[0] = 2.0;
  CHECK_THROWS_AS(fidelity(bad, a), StateError);
  CHECK_THROWS_AS(fidelity(a, bad), StateError);
}

TEST_CASE("phase-tracked fidelity is one under free evolution") {
  DeviceParams p = spin::default_si_p_params();
  p.b_ac = 0.0;
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int rep = 0; rep < 5; ++rep) {
    const auto psi = QuantumState::normalised({Complex(u(rng), u(rng)), Complex(u(rng), u(rng)),
                                               Complex(u(rng), u(rng)), Complex(u(rng), u(rng))});
    const auto traj = propagate(psi, 0.0, 3e-6, p, {}, OutputOptions{300});
    PhaseFrame frame;
    for (const auto& pt : traj) {
      const auto f = frame.advanced(p, pt.t);
      CHECK(fidelity(pt.state, psi, &f) == doctest::Approx(1.0).epsilon(1e-9));
    }
    CHECK(fidelity(traj.back().state, psi) < 1.0 - 1e-6);
  }
}

TEST_CASE("trajectory CSV layout") {
  const DeviceParams p = driven(Transition::kEsrNuclearUp);
  const auto traj = propagate(QuantumState::basis(spin::kDownUp), 0.0, 1e-10, p, {});
  std::ostringstream out;
  const std::vector<double> f(traj.size(), 0.5);
  write_trajectory_csv(out, traj, &f);
  std::istringstream in(out.str());
  std::string header;
  std::getline(in, header);
  CHECK(header ==
        "t_seconds,re_uU,im_uU,re_uD,im_uD,re_dU,im_dU,re_dD,im_dD,pop_uU,pop_uD,pop_dU,pop_dD,fidelity");
  const std::vector<double> wrong(1, 0.0);
  CHECK_THROWS(write_trajectory_csv(out, traj, &wrong));
}
