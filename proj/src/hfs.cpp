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

#include "donorq/hfs.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

namespace donorq::hfs {

namespace {

constexpr double kTeslaPerGauss = 1e-4;

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw HfsError(std::string(what) + " must be positive and finite, got " + std::to_string(v));
  }
}

HfsValue scaled(HfsValue a, double factor) { return {a.value * factor, a.unit}; }

}  // namespace

HfsValue gauss_to_hz(HfsValue a, double gamma_e) {
  if (a.unit != Unit::kGauss) throw HfsError("gauss_to_hz: value is not in gauss");
  return HfsValue::hz(a.value * kTeslaPerGauss * gamma_e);
}

HfsValue hz_to_gauss(HfsValue a, double gamma_e) {
  if (a.unit != Unit::kHz) throw HfsError("hz_to_gauss: value is not in Hz");
  require_positive(gamma_e, "gamma_e");
  return HfsValue::gauss(a.value / (kTeslaPerGauss * gamma_e));
}

double as_hz(HfsValue a, double gamma_e) {
  return a.unit == Unit::kHz ? a.value : gauss_to_hz(a, gamma_e).value;
}

HfsValue fermi_contact_relative(double spin_density_at_donor, double reference_density,
                                HfsValue a_reference, double correction) {
  require_positive(spin_density_at_donor, "spin density at donor");
  require_positive(reference_density, "reference density");
  require_positive(correction, "spin-density correction");
  return scaled(a_reference, correction * (spin_density_at_donor / reference_density));
}

HfsValue scale_by_size(double phi_sq_d, double phi_sq_bulk, HfsValue a_bulk) {
  require_positive(phi_sq_d, "|phi(d, r0)|^2");
  require_positive(phi_sq_bulk, "|phi(bulk, r0)|^2");
  return scaled(a_bulk, phi_sq_d / phi_sq_bulk);
}

HfsValue stark_scale(double phi_sq_e, double phi_sq_0, HfsValue a_zero_field) {
  require_positive(phi_sq_e, "|phi(E, r0)|^2");
  require_positive(phi_sq_0, "|phi(0, r0)|^2");
  return scaled(a_zero_field, phi_sq_e / phi_sq_0);
}

ConstantStarkModel::ConstantStarkModel(double ratio) : ratio_(ratio) {
  require_positive(ratio, "Stark density ratio");
}

double QuadraticStarkModel::ratio(double field_v_per_m) const {
  return 1.0 - eta_ * field_v_per_m * field_v_per_m;
}

TabulatedStarkModel::TabulatedStarkModel(std::vector<std::pair<double, double>> rows)
    : rows_(std::move(rows)) {
  if (rows_.empty()) throw HfsError("Stark ratio table is empty");
  std::sort(rows_.begin(), rows_.end());
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (i > 0 && rows_[i].first == rows_[i - 1].first)
      throw HfsError("Stark ratio table has duplicate field value " + std::to_string(rows_[i].first));
    require_positive(rows_[i].second, "Stark density ratio");
  }
}

double TabulatedStarkModel::ratio(double field_v_per_m) const {
  if (field_v_per_m <= rows_.front().first) return rows_.front().second;
  if (field_v_per_m >= rows_.back().first) return rows_.back().second;
  const auto hi = std::upper_bound(rows_.begin(), rows_.end(), field_v_per_m,
                                   [](double x, const auto& row) { return x < row.first; });
  const auto lo = hi - 1;
  const double w = (field_v_per_m - lo->first) / (hi->first - lo->first);
  return lo->second + w * (hi->second - lo->second);
}

std::vector<std::pair<double, double>> read_two_column_csv(std::istream& in) {
  std::vector<std::pair<double, double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw HfsError("line " + std::to_string(line_no) + ": expected two columns");
    try {
      std::size_t used = 0;
      const double a = std::stod(line.substr(0, comma), &used);
      const double b = std::stod(line.substr(comma + 1), &used);
      rows.emplace_back(a, b);
    } catch (const std::logic_error&) {
      if (rows.empty() && line_no == 1) continue;  // header
      throw HfsError("line " + std::to_string(line_no) + ": non-numeric value in '" + line + "'");
    }
  }
  return rows;
}

double SlaterOrbitalModel::normalization() const {
  require_positive(decay_length, "Slater decay length");
  return 1.0 / (std::numbers::pi * decay_length * decay_length * decay_length);
}

double SlaterOrbitalModel::density(double r) const {
  return normalization() * std::exp(-2.0 * r / decay_length);
}

double slater_cumulative(double radius, const SlaterOrbitalModel& model) {
  require_positive(model.decay_length, "Slater decay length");
  if (radius < 0.0) throw HfsError("slater_cumulative: negative radius " + std::to_string(radius));
  if (std::isinf(radius)) return 1.0;
  const double x = 2.0 * radius / model.decay_length;
  // 1 - e^{-x}(1 + x + x^2/2) = e^{-x} sum_{k>=3} x^k / k!; the series avoids
  // cancellation at small x.
  if (x < 1.0) {
    double tail = 0.0;
    double t = x * x * x / 6.0;
    for (int k = 3; k < 40 && t > 1e-18 * tail; ++k) {
      tail += t;
      t *= x / (k + 1);
    }
    return std::exp(-x) * tail;
  }
  return 1.0 - std::exp(-x) * (1.0 + x + 0.5 * x * x);
}

namespace {

double fit_objective(const std::vector<std::pair<double, double>>& s, double a) {
  double sum = 0.0;
  for (const auto& [r, y] : s) {
    const double d = slater_cumulative(r, {a}) - y;
    sum += d * d;
  }
  return sum;
}

}  // namespace

SlaterFit fit_slater(const std::vector<std::pair<double, double>>& samples) {
  if (samples.size() < 3)
    throw HfsError("fit_slater: need at least 3 samples, got " + std::to_string(samples.size()));
  std::vector<double> radii;
  for (const auto& [r, y] : samples) {
    if (!(r > 0.0) || !std::isfinite(r)) throw HfsError("fit_slater: radii must be positive");
    if (!std::isfinite(y)) throw HfsError("fit_slater: non-finite cumulative value");
    radii.push_back(r);
  }
  std::sort(radii.begin(), radii.end());
  if (std::adjacent_find(radii.begin(), radii.end()) != radii.end())
    throw HfsError("fit_slater: radii must be distinct");

  // Coarse log-spaced scan, then Gauss-Newton on the decay length.
  const double lo = radii.front() / 50.0;
  const double hi = radii.back() * 50.0;
  constexpr int kScan = 400;
  double best_a = lo;
  double best_f = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= kScan; ++i) {
    const double a = lo * std::pow(hi / lo, static_cast<double>(i) / kScan);
    const double f = fit_objective(samples, a);
    if (f < best_f) {
      best_f = f;
      best_a = a;
    }
  }

  double a = best_a;
  int it = 0;
  for (; it < 100; ++it) {
    double jtj = 0.0;
    double jtr = 0.0;
    for (const auto& [r, y] : samples) {
      const double x = 2.0 * r / a;
      const double resid = slater_cumulative(r, {a}) - y;
      const double jac = -std::exp(-x) * x * x * x / (2.0 * a);  // dC/da
      jtj += jac * jac;
      jtr += jac * resid;
    }
    if (jtj == 0.0) break;
    double delta = -jtr / jtj;
    const double f0 = fit_objective(samples, a);
    double next = a + delta;
    while (!(next > 0.0) || fit_objective(samples, next) > f0) {
      delta *= 0.5;
      next = a + delta;
      if (std::abs(delta) < 1e-16 * a) {
        next = a;
        break;
      }
    }
    const bool done = std::abs(next - a) <= 1e-14 * a;
    a = next;
    if (done) break;
  }
  if (a <= lo * 1.0000001 || a >= hi * 0.9999999)
    throw HfsError("fit_slater: decay length not bracketed by the samples");
  return {{a}, fit_objective(samples, a), it};
}

void DonorPositionModel::validate() const {
  if (!(a_reference_hz >= 0.0)) throw HfsError("DonorPositionModel: reference coupling must be non-negative");
  if (depth_scale == 0.0 || !std::isfinite(depth_scale))
    throw HfsError("DonorPositionModel: depth scale z0 must be finite and non-zero");
  if (bulk_cap_hz && !(*bulk_cap_hz > 0.0)) throw HfsError("DonorPositionModel: bulk cap must be positive");
}

HfsValue hfs_at_position(double depth, std::array<double, 2> /*lateral*/, const DonorPositionModel& model) {
  model.validate();
  if (depth < 0.0) throw HfsError("hfs_at_position: negative depth " + std::to_string(depth));
  double a = model.a_reference_hz * std::exp((depth - model.reference_depth) / model.depth_scale);
  if (model.bulk_cap_hz) a = std::min(a, *model.bulk_cap_hz);
  return HfsValue::hz(a);
}

}  // namespace donorq::hfs
