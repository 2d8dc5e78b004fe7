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

// Hyperfine-splitting models. All absolute values are anchored to a measured
// reference coupling; orbital densities only ever enter through ratios.

#include <array>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace donorq::hfs {

class HfsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Unit { kGauss, kHz };

struct HfsValue {
  double value = 0.0;
  Unit unit = Unit::kHz;

  static HfsValue gauss(double g) { return {g, Unit::kGauss}; }
  static HfsValue hz(double f) { return {f, Unit::kHz}; }
};

/// Bulk Si:P hyperfine coupling, 42 G.
inline constexpr double kBulkSiPGauss = 42.0;

/// A[Hz] = A[G] * 1e-4 T/G * gamma_e. Rejects values not tagged as Gauss.
HfsValue gauss_to_hz(HfsValue a, double gamma_e);
HfsValue hz_to_gauss(HfsValue a, double gamma_e);

/// Value in Hz whatever the tag (Gauss is converted with gamma_e).
double as_hz(HfsValue a, double gamma_e);

/// Contact coupling relative to a calibration point:
/// A = A_ref * correction * density / reference_density.
/// `correction` covers a known spin-density / orbital-density mismatch.
HfsValue fermi_contact_relative(double spin_density_at_donor, double reference_density,
                                HfsValue a_reference, double correction = 1.0);

/// Size scaling from bulk: A(d) = A_bulk * |phi(d, r0)|^2 / |phi(bulk, r0)|^2.
HfsValue scale_by_size(double phi_sq_d, double phi_sq_bulk, HfsValue a_bulk);

/// Field scaling: A(E) = A(0) * |phi(E, r0)|^2 / |phi(0, r0)|^2.
HfsValue stark_scale(double phi_sq_e, double phi_sq_0, HfsValue a_zero_field);

/// Density ratio |phi(E)|^2 / |phi(0)|^2 as a function of field magnitude.
class StarkRatioModel {
 public:
  virtual ~StarkRatioModel() = default;
  virtual double ratio(double field_v_per_m) const = 0;
};

class IdentityStarkModel final : public StarkRatioModel {
 public:
  double ratio(double) const override { return 1.0; }
};

class ConstantStarkModel final : public StarkRatioModel {
 public:
  explicit ConstantStarkModel(double ratio);
  double ratio(double) const override { return ratio_; }

 private:
  double ratio_;
};

/// 1 - eta E^2, eta in m^2/V^2.
class QuadraticStarkModel final : public StarkRatioModel {
 public:
  explicit QuadraticStarkModel(double eta) : eta_(eta) {}
  double ratio(double field_v_per_m) const override;

 private:
  double eta_;
};

/// Piecewise-linear interpolation of tabulated (|E| V/m, ratio) rows; clamps
/// outside the table.
class TabulatedStarkModel final : public StarkRatioModel {
 public:
  explicit TabulatedStarkModel(std::vector<std::pair<double, double>> rows);
  double ratio(double field_v_per_m) const override;

 private:
  std::vector<std::pair<double, double>> rows_;
};

/// Reads a two-column numeric CSV; a non-numeric first line is a header.
std::vector<std::pair<double, double>> read_two_column_csv(std::istream& in);

/// Hydrogenic 1s-like density exp(-2r/a) / (pi a^3).
struct SlaterOrbitalModel {
  double decay_length = 0.0;  // m

  double normalization() const;
  double density(double r) const;
};

/// Probability of finding the electron within radius R.
double slater_cumulative(double radius, const SlaterOrbitalModel& model);

struct SlaterFit {
  SlaterOrbitalModel model;
  double residual = 0.0;  // sum of squared deviations
  int iterations = 0;
};

/// Least-squares decay length for (r, cumulative) samples. Requires at least
/// three samples with distinct positive radii.
SlaterFit fit_slater(const std::vector<std::pair<double, double>>& samples);

/// Exponential depth dependence with lateral invariance.
struct DonorPositionModel {
  double a_reference_hz = 0.0;
  double depth_scale = 0.0;      // z0, m; sign sets the direction of growth
  double reference_depth = 0.0;  // m
  std::optional<double> bulk_cap_hz;

  void validate() const;
};

/// A_ref * exp((depth - reference_depth) / z0), capped at the bulk value when
/// one is set. The lateral offset never enters.
HfsValue hfs_at_position(double depth, std::array<double, 2> lateral, const DonorPositionModel& model);

}  // namespace donorq::hfs
