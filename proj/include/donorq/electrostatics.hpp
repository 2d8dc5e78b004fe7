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

// Charge-free electrostatics on a uniform voxel grid.
//
// Voxel (i, j, k) is centred at origin + spacing * (i, j, k) and owns the cube
// of side `spacing` around that point. Potentials live on voxel centres; faces
// between neighbours use the harmonic mean of the two permittivities. Domain
// faces without electrodes are zero-flux.

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace donorq::electrostatics {

using Vec3 = std::array<double, 3>;

class LayoutError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class FieldTableError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual, std::size_t iterations)
      : std::runtime_error(what), residual_(residual), iterations_(iterations) {}
  double residual() const { return residual_; }
  std::size_t iterations() const { return iterations_; }

 private:
  double residual_;
  std::size_t iterations_;
};

inline constexpr double kVoltsPerMeterPerVoltPerMicron = 1e6;
inline double to_v_per_um(double v_per_m) { return v_per_m / kVoltsPerMeterPerVoltPerMicron; }
inline double from_v_per_um(double v_per_um) { return v_per_um * kVoltsPerMeterPerVoltPerMicron; }

struct Box {
  Vec3 min{};
  Vec3 max{};
  bool contains(const Vec3& p, double tol = 0.0) const;
};

struct MaterialRegion {
  Box box;
  double permittivity = 1.0;
};

struct Electrode {
  std::string name;
  Box box;
  std::optional<double> voltage;
};

/// Device description in physical coordinates: grid extent, dielectric boxes
/// (later boxes take precedence) and electrode boxes.
struct Layout {
  std::size_t nx = 0, ny = 0, nz = 0;
  double spacing = 0.0;  // m
  Vec3 origin{};
  double background_permittivity = 1.0;
  std::vector<MaterialRegion> materials;
  std::vector<Electrode> electrodes;
};

/// Parses the layout JSON document:
/// {"grid": {"nx", "ny", "nz", "spacing_m", "origin_m"?},
///  "background_permittivity"?, "materials": [{"box": {"min_m", "max_m"}, "permittivity"}],
///  "electrodes": [{"name", "box": {...}, "voltage_V"}]}
Layout layout_from_json(const nlohmann::json& doc);

struct VoxelGrid {
  std::size_t nx = 0, ny = 0, nz = 0;
  double spacing = 0.0;
  Vec3 origin{};
  std::vector<double> permittivity;
  std::vector<std::optional<double>> dirichlet;

  std::size_t size() const { return nx * ny * nz; }
  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const { return (i * ny + j) * nz + k; }
  Vec3 position(std::size_t i, std::size_t j, std::size_t k) const;
  void validate() const;
};

/// Rasterises a layout. Voxel permittivity is the mean over a 4x4x4 sub-sample
/// of its cell; a voxel is Dirichlet when its centre lies in an electrode box.
/// Throws LayoutError for an electrode without a voltage.
VoxelGrid rasterize(const Layout& layout);

struct FieldGrid {
  std::size_t nx = 0, ny = 0, nz = 0;
  double spacing = 0.0;
  Vec3 origin{};
  std::vector<double> potential;
  std::vector<Vec3> field;  // V/m

  std::size_t size() const { return nx * ny * nz; }
  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const { return (i * ny + j) * nz + k; }
  Vec3 position(std::size_t i, std::size_t j, std::size_t k) const;
};

/// Negative gradient of the potential: central differences inside, one-sided
/// on the boundary.
std::vector<Vec3> gradient_field(std::size_t nx, std::size_t ny, std::size_t nz, double spacing,
                                 const std::vector<double>& potential);

struct SolveOptions {
  double tolerance = 1e-10;  // relative residual ||b - A V|| / ||b||
  std::size_t max_iterations = 200000;
  double relaxation = 1.9;
  std::size_t checkpoint_interval = 25;
};

struct SolveReport {
  std::size_t iterations = 0;
  double relative_residual = 0.0;
  std::vector<double> checkpoint_residuals;
  bool maximum_principle_holds = true;
};

struct Solution {
  FieldGrid field;
  SolveReport report;
};

/// Red-black SOR for div(eps grad V) = 0. Throws ConvergenceError carrying the
/// final residual when max_iterations is exhausted.
Solution solve_poisson(const VoxelGrid& grid, const SolveOptions& options = {});

struct FieldSample {
  double potential = 0.0;
  Vec3 field{};
};

/// Trilinear interpolation of potential and field. Throws std::out_of_range
/// naming the coordinate when the point lies outside the grid.
FieldSample sample_field(const FieldGrid& field, const Vec3& point);

/// Header x_m,y_m,z_m,V,Ex_Vpm,Ey_Vpm,Ez_Vpm; x slowest, z fastest.
void export_field_table(std::ostream& out, const FieldGrid& field);

/// Rebuilds a FieldGrid from a table; rejects incomplete or irregular lattices
/// citing the first offending row.
FieldGrid import_field_table(std::istream& in);

/// Fine grid covering `box` (snapped outward to whole coarse voxels) at
/// spacing / factor. The outer layer of fine voxels is Dirichlet with values
/// interpolated from the coarse solution; permittivity and interior electrodes
/// come from the layout when given, otherwise from the coarse voxel containing
/// each fine voxel.
VoxelGrid refine_region(const VoxelGrid& coarse, const FieldGrid& coarse_solution, const Box& box,
                        std::size_t factor, const Layout* layout = nullptr);

}  // namespace donorq::electrostatics
