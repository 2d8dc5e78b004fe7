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

#include "donorq/workflow.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <exception>
#include <iomanip>
#include <limits>
#include <mutex>
#include <numbers>
#include <ostream>
#include <thread>

namespace donorq::workflow {

using evolution::kDim;
using qmath::Complex;
using qmath::ComplexMatrix;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

AdiabaticVerdict check_adiabatic(double ramp_time, double orbital_gap_ev) {
  require(orbital_gap_ev > 0.0 && std::isfinite(orbital_gap_ev), "check_adiabatic: orbital gap must be positive");
  require(ramp_time >= 0.0 && std::isfinite(ramp_time), "check_adiabatic: ramp time must be non-negative");
  AdiabaticVerdict v;
  v.t_min = kPlanck / (orbital_gap_ev * kElementaryCharge);
  v.margin = ramp_time / v.t_min;
  v.adiabatic = ramp_time >= kAdiabaticSafetyFactor * v.t_min;
  return v;
}

std::string channel_name(Channel c) {
  switch (c) {
    case Channel::kNmr: return "nmr";
    case Channel::kEsr: return "esr";
    case Channel::kIdle: return "idle";
  }
  return "idle";
}

Channel parse_channel(const std::string& name) {
  std::string s;
  for (char ch : name) s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  if (s == "nmr") return Channel::kNmr;
  if (s == "esr") return Channel::kEsr;
  if (s == "idle" || s == "none") return Channel::kIdle;
  throw std::invalid_argument("unknown channel '" + name + "' (expected nmr, esr or idle)");
}

void PulseSegment::validate() const {
  require(duration > 0.0 && std::isfinite(duration), "segment duration must be positive");
  require(ramp_time >= 0.0 && ramp_time <= duration, "segment ramp time must lie in [0, duration]");
  require(b_ac >= 0.0 && std::isfinite(b_ac), "segment drive amplitude must be non-negative");
  require(omega >= 0.0 && std::isfinite(omega), "segment drive frequency must be non-negative");
  require(std::isfinite(phase), "segment phase must be finite");
  if (a_target) require(*a_target > 0.0 && std::isfinite(*a_target), "segment a_target must be positive");
  if (channel == Channel::kIdle) require(b_ac == 0.0, "idle segment cannot carry a drive amplitude");
}

void PulseSequence::validate() const {
  require(!segments.empty(), "pulse sequence has no segments");
  for (std::size_t i = 0; i < segments.size(); ++i) {
    try {
      segments[i].validate();
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("segment " + std::to_string(i) + ": " + e.what());
    }
  }
  if (!initial.is_normalised()) throw evolution::StateError("pulse sequence initial state is not normalised");
  if (!target.is_normalised()) throw evolution::StateError("pulse sequence target state is not normalised");
}

DeviceParams segment_params(const DeviceParams& device, const PulseSegment& segment, double hfs_scale) {
  DeviceParams p = device;
  if (segment.a_target) p.a_iso = *segment.a_target * hfs_scale;
  p.b_ac = segment.b_ac;
  p.omega = segment.channel == Channel::kIdle ? 0.0 : segment.omega;
  p.phase = segment.phase;
  return p;
}

double default_calibration_horizon(Transition transition) {
  switch (transition) {
    case Transition::kNmrElectronDown:
    case Transition::kNmrElectronUp: return 500e-6;
    default: return 2e-6;
  }
}

namespace {

// Population of the flipped state along a resonant drive, evaluated on the same
// step grid propagate() uses so a sequence replaying t_pi lands on the peak.
class RabiScanner {
 public:
  RabiScanner(const DeviceParams& p, double dt, spin::TransitionEndpoints ends)
      : p_(p), dt_(dt), ends_(ends) {}

  // Coarse scan from t = 0; stops one lobe after the first strong maximum.
  void scan(double t_max) {
    QuantumState psi = QuantumState::basis(ends_.from);
    const std::size_t n = evolution::step_count(t_max, dt_);
    pops_.assign(1, psi.population(ends_.to));
    leak_.assign(1, leak(psi));
    checkpoints_.assign(1, psi);
    double peak = pops_[0];
    for (std::size_t k = 0; k < n; ++k) {
      psi = evolution::step(psi, k * dt_, dt_, p_);
      pops_.push_back(psi.population(ends_.to));
      leak_.push_back(leak(psi));
      if ((k + 1) % kCheckpoint == 0) checkpoints_.push_back(psi);
      peak = std::max(peak, pops_.back());
      if (peak > 0.9 && pops_.back() < peak - 0.2) break;
    }
  }

  // Population at arbitrary t inside the scanned range.
  double population_at(double t) const {
    std::size_t m = static_cast<std::size_t>(std::floor(t / dt_));
    if (m * dt_ > t && m > 0) --m;
    QuantumState psi = checkpoints_[m / kCheckpoint];
    for (std::size_t k = (m / kCheckpoint) * kCheckpoint; k < m; ++k) psi = evolution::step(psi, k * dt_, dt_, p_);
    const double rest = t - m * dt_;
    if (rest > 0.0) psi = evolution::step(psi, m * dt_, rest, p_);
    return psi.population(ends_.to);
  }

  const std::vector<double>& pops() const { return pops_; }
  const std::vector<double>& leakage() const { return leak_; }
  double dt() const { return dt_; }

  std::vector<ScanPoint> subsampled(std::size_t max_points) const {
    const std::size_t stride = std::max<std::size_t>(1, pops_.size() / max_points);
    std::vector<ScanPoint> out;
    for (std::size_t k = 0; k < pops_.size(); k += stride) out.push_back({k * dt_, pops_[k]});
    return out;
  }

 private:
  static constexpr std::size_t kCheckpoint = 256;

  double leak(const QuantumState& psi) const {
    return std::max(0.0, 1.0 - psi.population(ends_.from) - psi.population(ends_.to));
  }

  DeviceParams p_;
  double dt_;
  spin::TransitionEndpoints ends_;
  std::vector<double> pops_;
  std::vector<double> leak_;
  std::vector<QuantumState> checkpoints_;
};

}  // namespace

RabiCalibration calibrate_rabi(const DeviceParams& p, Transition transition, double t_max,
                               const StepPolicy& policy) {
  require(t_max > 0.0 && std::isfinite(t_max), "calibrate_rabi: t_max must be positive");
  require(p.b_ac > 0.0, "calibrate_rabi: drive amplitude must be positive");
  policy.validate();
  const auto levels = spin::level_structure(p);

  RabiCalibration cal;
  cal.transition = transition;
  cal.drive_omega = levels.angular(transition);
  cal.nominal_omega = kTwoPi * levels.line(transition).first_order_hz;

  DeviceParams q = p;
  q.omega = cal.drive_omega;
  q.phase = 0.0;
  RabiScanner scanner(q, evolution::step_size(q, policy), spin::endpoints(transition));
  scanner.scan(t_max);
  const auto& pops = scanner.pops();
  cal.scan = scanner.subsampled(2000);

  const auto first_peak = [&]() -> std::size_t {
    double best = -1.0;
    std::size_t at = 0;
    for (std::size_t k = 0; k < pops.size(); ++k) {
      if (pops[k] > best) {
        best = pops[k];
        at = k;
      }
      if (best > 0.9 && pops[k] < best - 0.2) break;
    }
    return at;
  }();
  if (pops[first_peak] <= 0.9) {
    throw CalibrationError("calibrate_rabi: " + std::string(spin::transition_name(transition)) +
                               " population peaked at " + std::to_string(pops[first_peak]) +
                               " within t_max = " + std::to_string(t_max) + " s",
                           cal.scan);
  }

  const double dt = scanner.dt();
  // Golden-section refinement of the maximum between neighbouring grid points.
  double lo = first_peak > 0 ? (first_peak - 1) * dt : 0.0;
  double hi = std::min((first_peak + 1) * dt, (pops.size() - 1) * dt);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = scanner.population_at(x1);
  double f2 = scanner.population_at(x2);
  while (hi - lo > 1e-6 * dt) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = scanner.population_at(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = scanner.population_at(x1);
    }
  }
  cal.t_pi = 0.5 * (lo + hi);
  cal.peak_population = std::max(scanner.population_at(cal.t_pi), pops[first_peak]);
  cal.rabi_frequency = 1.0 / (2.0 * cal.t_pi);

  // First rising crossing of 1/2, then bisection inside that grid interval.
  std::size_t k = 1;
  while (k <= first_peak && pops[k] < 0.5) ++k;
  double a = (k - 1) * dt;
  double b = k * dt;
  for (int it = 0; it < 60 && b - a > 1e-9 * dt; ++it) {
    const double mid = 0.5 * (a + b);
    (scanner.population_at(mid) < 0.5 ? a : b) = mid;
  }
  cal.t_pi_half = 0.5 * (a + b);

  const auto& leak = scanner.leakage();
  cal.leakage = *std::max_element(leak.begin(), leak.begin() + static_cast<std::ptrdiff_t>(first_peak) + 1);
  return cal;
}

QuantumState bell_target() {
  const double s = 1.0 / std::sqrt(2.0);
  QuantumState t;
  t.amplitudes[spin::kDownDown] = s;
  t.amplitudes[spin::kUpUp] = s;
  return t;
}

namespace {

// Rotating-frame coupling direction g/|g| of a resonant drive on `transition`
// with phase `phase`: from |from>, the flipped amplitude grows as -i g/|g|.
Complex coupling_direction(const DeviceParams& p, Transition transition, double phase) {
  const auto eig = qmath::hermitian_eig(spin::static_hamiltonian(p));
  const auto ends = spin::endpoints(transition);
  auto eigenvector = [&](std::size_t basis) {
    std::size_t col = 0;
    double best = -1.0;
    for (std::size_t c = 0; c < kDim; ++c) {
      const double w = std::norm(eig.eigenvectors(basis, c));
      if (w > best) {
        best = w;
        col = c;
      }
    }
    const Complex dominant = eig.eigenvectors(basis, col);
    const Complex fix = std::conj(dominant) / std::abs(dominant);
    std::array<Complex, kDim> v{};
    for (std::size_t i = 0; i < kDim; ++i) v[i] = eig.eigenvectors(i, col) * fix;
    return std::pair{v, eig.eigenvalues[col]};
  };
  const auto [from, e_from] = eigenvector(ends.from);
  const auto [to, e_to] = eigenvector(ends.to);
  const ComplexMatrix d = spin::drive_operator(p);
  Complex element{};
  for (std::size_t i = 0; i < kDim; ++i)
    for (std::size_t j = 0; j < kDim; ++j) element += std::conj(to[i]) * d(i, j) * from[j];
  const Complex rot = std::polar(1.0, e_to > e_from ? -phase : phase);
  const Complex g = element * rot;
  return g / std::abs(g);
}

}  // namespace

BellPreparation bell_preparation(const DeviceParams& p, const StepPolicy& policy) {
  BellPreparation out;
  out.nmr = calibrate_rabi(p, Transition::kNmrElectronDown, default_calibration_horizon(Transition::kNmrElectronDown),
                           policy);
  out.esr = calibrate_rabi(p, Transition::kEsrNuclearUp, default_calibration_horizon(Transition::kEsrNuclearUp),
                           policy);

  // After the nuclear pi/2 the |down,Up> branch carries -i g1; the electron pi
  // multiplies it by -i g2. Zero relative phase needs g2 = -conj(g1).
  const Complex g1 = coupling_direction(p, Transition::kNmrElectronDown, 0.0);
  const Complex g2_zero = coupling_direction(p, Transition::kEsrNuclearUp, 0.0);
  const Complex wanted = -std::conj(g1);
  const double rotation = std::arg(wanted / g2_zero);  // g2(phi) = g2(0) exp(-+i phi)
  const auto levels = spin::level_structure(p);
  const bool esr_up = levels.basis_energy[spin::kUpUp] > levels.basis_energy[spin::kDownUp];
  double phi2 = esr_up ? -rotation : rotation;
  phi2 = std::remainder(phi2, kTwoPi);

  PulseSegment nmr;
  nmr.channel = Channel::kNmr;
  nmr.duration = out.nmr.t_pi_half;
  nmr.b_ac = p.b_ac;
  nmr.omega = out.nmr.drive_omega;
  nmr.phase = 0.0;

  PulseSegment esr;
  esr.channel = Channel::kEsr;
  esr.duration = out.esr.t_pi;
  esr.b_ac = p.b_ac;
  esr.omega = out.esr.drive_omega;
  esr.phase = phi2;

  out.sequence.segments = {nmr, esr};
  out.sequence.initial = QuantumState::basis(spin::kDownDown);
  out.sequence.target = bell_target();
  return out;
}

PulseSequence bell_prep_sequence(const DeviceParams& p, const StepPolicy& policy) {
  return bell_preparation(p, policy).sequence;
}

namespace {

double frame_fidelity(const ComplexMatrix& rho, const evolution::PhaseFrame& frame, const QuantumState& target) {
  const ComplexMatrix& u0 = frame.free_propagator();
  const QuantumState v = u0 * target;  // <target|U0^dag rho U0|target>
  Complex f{};
  for (std::size_t i = 0; i < kDim; ++i)
    for (std::size_t j = 0; j < kDim; ++j) f += std::conj(v.amplitudes[i]) * rho(i, j) * v.amplitudes[j];
  return std::clamp(f.real(), 0.0, 1.0);
}

}  // namespace

FidelityTrace run_experiment(const PulseSequence& sequence, const DeviceParams& p, const StepPolicy& policy,
                             const ExperimentOptions& options) {
  sequence.validate();
  policy.validate();
  spin::validate(p);
  require(options.samples_per_segment > 0, "run_experiment: samples_per_segment must be positive");
  require(options.hfs_scale > 0.0 && std::isfinite(options.hfs_scale), "run_experiment: hfs_scale must be positive");

  FidelityTrace trace;
  evolution::PhaseFrame frame;
  const bool mixed = policy.dephasing.has_value();
  QuantumState psi = sequence.initial;
  evolution::DensityMatrix rho = evolution::DensityMatrix::pure(psi);
  trace.samples.push_back({0.0, evolution::fidelity(psi, sequence.target, &frame), 0});

  double t = 0.0;
  double a_current = p.a_iso;
  for (std::size_t s = 0; s < sequence.segments.size(); ++s) {
    const PulseSegment& seg = sequence.segments[s];
    const DeviceParams ps = segment_params(p, seg, options.hfs_scale);
    if (ps.a_iso != a_current) {
      const auto verdict = check_adiabatic(seg.ramp_time, options.orbital_gap_ev);
      trace.ramps.push_back(verdict);
      if (!verdict.adiabatic) {
        throw std::invalid_argument("segment " + std::to_string(s) + ": hyperfine ramp of " +
                                    std::to_string(seg.ramp_time) + " s is not adiabatic (needs >= " +
                                    std::to_string(kAdiabaticSafetyFactor * verdict.t_min) + " s)");
      }
      a_current = ps.a_iso;
    }

    const double dt = evolution::step_size(ps, policy);
    const std::size_t n = evolution::step_count(seg.duration, dt);
    trace.steps += n;
    const evolution::OutputOptions out{std::max<std::size_t>(1, n / options.samples_per_segment)};
    if (mixed) {
      const auto points = evolution::propagate_density(rho, t, seg.duration, ps, policy, out);
      for (std::size_t i = 1; i < points.size(); ++i) {
        const auto f = frame.advanced(ps, points[i].t - t);
        trace.samples.push_back({points[i].t, frame_fidelity(points[i].rho.rho, f, sequence.target), s});
        trace.max_norm_drift = std::max(trace.max_norm_drift, std::abs(points[i].rho.trace() - 1.0));
      }
      rho = points.back().rho;
    } else {
      const auto points = evolution::propagate(psi, t, seg.duration, ps, policy, out);
      for (std::size_t i = 1; i < points.size(); ++i) {
        const auto f = frame.advanced(ps, points[i].t - t);
        trace.max_norm_drift = std::max(trace.max_norm_drift, std::abs(points[i].state.norm() - 1.0));
        trace.samples.push_back({points[i].t, evolution::fidelity(points[i].state, sequence.target, &f), s});
      }
      psi = points.back().state;
    }
    frame.advance(ps, seg.duration);
    t += seg.duration;
    trace.segment_boundaries.push_back(t);
  }

  trace.final_fidelity = trace.samples.back().fidelity;
  if (mixed) {
    // Dominant eigenvector is not meaningful here; report the diagonal as a
    // real state so populations survive in the output.
    for (std::size_t i = 0; i < kDim; ++i) psi.amplitudes[i] = std::sqrt(std::max(0.0, rho.rho(i, i).real()));
  }
  trace.final_state = psi;
  trace.final_state_rotating = mixed ? psi : frame.to_frame(psi);
  return trace;
}

void write_fidelity_csv(std::ostream& out, const FidelityTrace& trace) {
  out << "t_s,fidelity,segment\n" << std::setprecision(17);
  for (const auto& s : trace.samples) out << s.t << ',' << s.fidelity << ',' << s.segment << '\n';
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (spare_) {
    const double v = *spare_;
    spare_.reset();
    return v;
  }
  double u1 = 0.0;
  while (u1 == 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(kTwoPi * u2);
  return r * std::cos(kTwoPi * u2);
}

void DepthDistribution::validate() const {
  require(std::isfinite(first) && std::isfinite(second), "depth distribution parameters must be finite");
  switch (kind) {
    case Kind::kDelta: require(first >= 0.0, "delta depth must be non-negative"); break;
    case Kind::kNormal: require(second >= 0.0, "normal depth sigma must be non-negative"); break;
    case Kind::kUniform: require(first >= 0.0 && second >= first, "uniform depth needs 0 <= lo <= hi"); break;
  }
}

double DepthDistribution::draw(Rng& rng) const {
  switch (kind) {
    case Kind::kDelta: return first;
    case Kind::kNormal: return first + second * rng.normal();
    case Kind::kUniform: return first + (second - first) * rng.uniform();
  }
  return first;
}

void EnsembleSpec::validate() const {
  require(sample_count > 0, "ensemble sample count must be positive");
  require(threads > 0, "ensemble thread count must be positive");
  depth.validate();
  position_model.validate();
}

std::vector<double> draw_depths(const EnsembleSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  std::vector<double> depths(spec.sample_count);
  for (auto& d : depths) d = spec.depth.draw(rng);
  return depths;
}

std::pair<double, double> mean_and_std_error(const std::vector<double>& values) {
  require(!values.empty(), "mean_and_std_error: no values");
  const double shift = values.front();
  double sum = 0.0;
  for (double v : values) sum += v - shift;
  const double n = static_cast<double>(values.size());
  const double mean = shift + sum / n;
  if (values.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n * (n - 1.0)))};
}

EnsembleResult run_ensemble(const SequenceFactory& factory, const EnsembleSpec& spec, const DeviceParams& p,
                            const StepPolicy& policy, const ExperimentOptions& options) {
  require(static_cast<bool>(factory), "run_ensemble: no sequence factory");
  const auto depths = draw_depths(spec);
  const std::size_t n = depths.size();

  std::vector<SampleRecord> records(n);
  for (std::size_t i = 0; i < n; ++i) {
    records[i].index = i;
    records[i].depth = depths[i];
  }
  std::vector<std::exception_ptr> errors(n);

  std::optional<PulseSequence> shared;
  if (!spec.recalibrate) shared = factory(p);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        SampleRecord& r = records[i];
        if (r.depth < 0.0) throw hfs::HfsError("drawn depth is negative");
        r.a_iso_hz = hfs::hfs_at_position(r.depth, {0.0, 0.0}, spec.position_model).value;
        DeviceParams ps = p;
        ps.a_iso = r.a_iso_hz;
        ExperimentOptions o = options;
        o.hfs_scale = options.hfs_scale * (r.a_iso_hz / p.a_iso);
        const PulseSequence seq = spec.recalibrate ? factory(ps) : *shared;
        r.final_fidelity = run_experiment(seq, ps, policy, o).final_fidelity;
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::min(spec.threads, n);
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i]) continue;
    std::string what = "unknown error";
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    throw EnsembleError("ensemble sample " + std::to_string(i) + " (depth " + std::to_string(records[i].depth) +
                            " m, A = " + std::to_string(records[i].a_iso_hz) + " Hz): " + what,
                        records[i]);
  }

  EnsembleResult result;
  std::vector<double> f(n);
  for (std::size_t i = 0; i < n; ++i) f[i] = records[i].final_fidelity;
  std::tie(result.mean_fidelity, result.std_error) = mean_and_std_error(f);
  result.samples = std::move(records);
  return result;
}

}  // namespace donorq::workflow
