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

#include "donorq/electrostatics.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace donorq::electrostatics {

namespace {

constexpr std::size_t kSubsamples = 4;

std::string fmt_point(const Vec3& p) {
  std::ostringstream os;
  os.precision(9);
  os << "(" << p[0] << ", " << p[1] << ", " << p[2] << ") m";
  return os.str();
}

Vec3 read_vec3(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw LayoutError(std::string(what) + " must be a 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Box read_box(const nlohmann::json& j, const std::string& context) {
  if (!j.contains("min_m") || !j.contains("max_m"))
    throw LayoutError(context + ": box requires min_m and max_m");
  Box b{read_vec3(j.at("min_m"), "min_m"), read_vec3(j.at("max_m"), "max_m")};
  for (int a = 0; a < 3; ++a)
    if (b.min[a] > b.max[a]) throw LayoutError(context + ": box min exceeds max on axis " + std::to_string(a));
  return b;
}

double harmonic(double a, double b) { return 2.0 * a * b / (a + b); }

}  // namespace

bool Box::contains(const Vec3& p, double tol) const {
  for (int a = 0; a < 3; ++a)
    if (p[a] < min[a] - tol || p[a] > max[a] + tol) return false;
  return true;
}

Layout layout_from_json(const nlohmann::json& doc) {
  Layout l;
  try {
    const auto& g = doc.at("grid");
    l.nx = g.at("nx").get<std::size_t>();
    l.ny = g.at("ny").get<std::size_t>();
    l.nz = g.at("nz").get<std::size_t>();
    l.spacing = g.at("spacing_m").get<double>();
    if (g.contains("origin_m")) l.origin = read_vec3(g.at("origin_m"), "origin_m");
    l.background_permittivity = doc.value("background_permittivity", 1.0);
    if (doc.contains("materials")) {
      for (const auto& m : doc.at("materials")) {
        l.materials.push_back({read_box(m.at("box"), "material"), m.at("permittivity").get<double>()});
      }
    }
    for (const auto& e : doc.at("electrodes")) {
      Electrode el;
      el.name = e.value("name", "electrode" + std::to_string(l.electrodes.size()));
      el.box = read_box(e.at("box"), "electrode '" + el.name + "'");
      if (e.contains("voltage_V") && !e.at("voltage_V").is_null()) el.voltage = e.at("voltage_V").get<double>();
      l.electrodes.push_back(std::move(el));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw LayoutError(std::string("layout: ") + ex.what());
  }
  if (l.nx == 0 || l.ny == 0 || l.nz == 0) throw LayoutError("layout: grid dimensions must be positive");
  if (!(l.spacing > 0.0)) throw LayoutError("layout: grid spacing must be positive");
  if (!(l.background_permittivity > 0.0)) throw LayoutError("layout: background permittivity must be positive");
  for (const auto& m : l.materials)
    if (!(m.permittivity > 0.0)) throw LayoutError("layout: material permittivity must be positive");
  return l;
}

Vec3 VoxelGrid::position(std::size_t i, std::size_t j, std::size_t k) const {
  return {origin[0] + spacing * static_cast<double>(i), origin[1] + spacing * static_cast<double>(j),
          origin[2] + spacing * static_cast<double>(k)};
}

void VoxelGrid::validate() const {
  if (nx == 0 || ny == 0 || nz == 0) throw LayoutError("grid dimensions must be positive");
  if (!(spacing > 0.0)) throw LayoutError("grid spacing must be positive");
  if (permittivity.size() != size() || dirichlet.size() != size())
    throw LayoutError("grid arrays do not match the dimensions");
  for (double e : permittivity)
    if (!(e > 0.0)) throw LayoutError("permittivity must be positive everywhere");
  if (std::none_of(dirichlet.begin(), dirichlet.end(), [](const auto& d) { return d.has_value(); }))
    throw LayoutError("grid has no Dirichlet (electrode) voxel");
}

namespace {

// Voxel permittivity is the mean over a sub-sampled cell, clamped to the node hull.
void fill_permittivity(const Layout& layout, VoxelGrid& g) {
  g.permittivity.assign(g.size(), layout.background_permittivity);
  if (layout.materials.empty()) return;
  const std::array<std::size_t, 3> dims{g.nx, g.ny, g.nz};
  Vec3 lo{}, hi{};
  for (int a = 0; a < 3; ++a) {
    lo[a] = g.origin[a];
    hi[a] = g.origin[a] + g.spacing * static_cast<double>(dims[a] - 1);
  }
  auto material_at = [&](const Vec3& p) {
    double eps = layout.background_permittivity;
    for (const auto& m : layout.materials)
      if (m.box.contains(p)) eps = m.permittivity;
    return eps;
  };
  for (std::size_t i = 0; i < g.nx; ++i)
    for (std::size_t j = 0; j < g.ny; ++j)
      for (std::size_t k = 0; k < g.nz; ++k) {
        const Vec3 c = g.position(i, j, k);
        double sum = 0.0;
        for (std::size_t a = 0; a < kSubsamples; ++a)
          for (std::size_t b = 0; b < kSubsamples; ++b)
            for (std::size_t d = 0; d < kSubsamples; ++d) {
              const std::array<std::size_t, 3> s{a, b, d};
              Vec3 p;
              for (int ax = 0; ax < 3; ++ax) {
                const double off = (static_cast<double>(s[ax]) + 0.5) / kSubsamples - 0.5;
                p[ax] = std::clamp(c[ax] + off * g.spacing, lo[ax], hi[ax]);
              }
              sum += material_at(p);
            }
        g.permittivity[g.index(i, j, k)] = sum / static_cast<double>(kSubsamples * kSubsamples * kSubsamples);
      }
}

void fill_electrodes(const Layout& layout, VoxelGrid& g) {
  const double tol = 1e-9 * g.spacing;
  for (std::size_t i = 0; i < g.nx; ++i)
    for (std::size_t j = 0; j < g.ny; ++j)
      for (std::size_t k = 0; k < g.nz; ++k) {
        const Vec3 c = g.position(i, j, k);
        for (const auto& e : layout.electrodes)
          if (e.voltage && e.box.contains(c, tol)) g.dirichlet[g.index(i, j, k)] = *e.voltage;
      }
}

}  // namespace

VoxelGrid rasterize(const Layout& layout) {
  if (layout.electrodes.empty()) throw LayoutError("layout has no electrodes");
  for (const auto& e : layout.electrodes)
    if (!e.voltage) throw LayoutError("electrode '" + e.name + "' has no voltage");

  VoxelGrid g;
  g.nx = layout.nx;
  g.ny = layout.ny;
  g.nz = layout.nz;
  g.spacing = layout.spacing;
  g.origin = layout.origin;
  if (g.nx == 0 || g.ny == 0 || g.nz == 0) throw LayoutError("grid dimensions must be positive");
  if (!(g.spacing > 0.0)) throw LayoutError("grid spacing must be positive");
  fill_permittivity(layout, g);
  g.dirichlet.assign(g.size(), std::nullopt);
  fill_electrodes(layout, g);
  g.validate();
  return g;
}

Vec3 FieldGrid::position(std::size_t i, std::size_t j, std::size_t k) const {
  return {origin[0] + spacing * static_cast<double>(i), origin[1] + spacing * static_cast<double>(j),
          origin[2] + spacing * static_cast<double>(k)};
}

std::vector<Vec3> gradient_field(std::size_t nx, std::size_t ny, std::size_t nz, double spacing,
                                 const std::vector<double>& v) {
  const std::array<std::size_t, 3> dims{nx, ny, nz};
  const std::array<std::size_t, 3> stride{ny * nz, nz, 1};
  std::vector<Vec3> e(v.size());
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < ny; ++j)
      for (std::size_t k = 0; k < nz; ++k) {
        const std::array<std::size_t, 3> pos{i, j, k};
        const std::size_t idx = (i * ny + j) * nz + k;
        for (int a = 0; a < 3; ++a) {
          const std::size_t n = dims[a];
          if (n < 2) {
            e[idx][a] = 0.0;
          } else if (pos[a] == 0) {
            e[idx][a] = -(v[idx + stride[a]] - v[idx]) / spacing;
          } else if (pos[a] == n - 1) {
            e[idx][a] = -(v[idx] - v[idx - stride[a]]) / spacing;
          } else {
            e[idx][a] = -(v[idx + stride[a]] - v[idx - stride[a]]) / (2.0 * spacing);
          }
        }
      }
  return e;
}

Solution solve_poisson(const VoxelGrid& grid, const SolveOptions& options) {
  grid.validate();
  if (!(options.tolerance > 0.0)) throw std::invalid_argument("solve_poisson: tolerance must be positive");
  if (!(options.relaxation > 0.0 && options.relaxation < 2.0))
    throw std::invalid_argument("solve_poisson: relaxation factor must lie in (0, 2)");
  const std::size_t checkpoint = std::max<std::size_t>(1, options.checkpoint_interval);

  const std::size_t n = grid.size();
  const std::array<std::size_t, 3> dims{grid.nx, grid.ny, grid.nz};
  const std::array<std::size_t, 3> stride{grid.ny * grid.nz, grid.nz, 1};

  // Face coefficients, 6 per voxel: -x, +x, -y, +y, -z, +z. Zero on domain faces.
  std::vector<double> coef(6 * n, 0.0);
  std::vector<std::size_t> free_red, free_black;
  double vmin = std::numeric_limits<double>::infinity();
  double vmax = -vmin;
  std::vector<double> v(n, 0.0);
  double dsum = 0.0;
  std::size_t dcount = 0;
  for (std::size_t i = 0; i < grid.nx; ++i)
    for (std::size_t j = 0; j < grid.ny; ++j)
      for (std::size_t k = 0; k < grid.nz; ++k) {
        const std::size_t idx = grid.index(i, j, k);
        const std::array<std::size_t, 3> pos{i, j, k};
        for (int a = 0; a < 3; ++a) {
          if (pos[a] > 0)
            coef[6 * idx + 2 * a] = harmonic(grid.permittivity[idx], grid.permittivity[idx - stride[a]]);
          if (pos[a] + 1 < dims[a])
            coef[6 * idx + 2 * a + 1] = harmonic(grid.permittivity[idx], grid.permittivity[idx + stride[a]]);
        }
        if (grid.dirichlet[idx]) {
          v[idx] = *grid.dirichlet[idx];
          vmin = std::min(vmin, v[idx]);
          vmax = std::max(vmax, v[idx]);
          dsum += v[idx];
          ++dcount;
        } else {
          ((i + j + k) % 2 == 0 ? free_red : free_black).push_back(idx);
        }
      }
  const double initial = dsum / static_cast<double>(dcount);
  for (std::size_t idx : free_red) v[idx] = initial;
  for (std::size_t idx : free_black) v[idx] = initial;

  const std::array<std::ptrdiff_t, 6> offset{
      -static_cast<std::ptrdiff_t>(stride[0]), static_cast<std::ptrdiff_t>(stride[0]),
      -static_cast<std::ptrdiff_t>(stride[1]), static_cast<std::ptrdiff_t>(stride[1]),
      -static_cast<std::ptrdiff_t>(stride[2]), static_cast<std::ptrdiff_t>(stride[2])};

  // ||b||: Dirichlet contributions to the free-voxel equations.
  double bnorm2 = 0.0;
  for (const auto* colour : {&free_red, &free_black})
    for (std::size_t idx : *colour) {
      double b = 0.0;
      for (int f = 0; f < 6; ++f) {
        const double c = coef[6 * idx + f];
        if (c == 0.0) continue;
        const std::size_t nb = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(idx) + offset[f]);
        if (grid.dirichlet[nb]) b += c * v[nb];
      }
      bnorm2 += b * b;
    }
  const double bnorm = bnorm2 > 0.0 ? std::sqrt(bnorm2) : 1.0;

  auto residual = [&]() {
    double r2 = 0.0;
    for (const auto* colour : {&free_red, &free_black})
      for (std::size_t idx : *colour) {
        double r = 0.0;
        for (int f = 0; f < 6; ++f) {
          const double c = coef[6 * idx + f];
          if (c == 0.0) continue;
          r += c * (v[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(idx) + offset[f])] - v[idx]);
        }
        r2 += r * r;
      }
    return std::sqrt(r2) / bnorm;
  };

  auto sweep = [&](const std::vector<std::size_t>& colour) {
    const double w = options.relaxation;
    for (std::size_t idx : colour) {
      double num = 0.0;
      double den = 0.0;
      const double* c = &coef[6 * idx];
      for (int f = 0; f < 6; ++f) {
        if (c[f] == 0.0) continue;
        num += c[f] * v[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(idx) + offset[f])];
        den += c[f];
      }
      if (den > 0.0) v[idx] += w * (num / den - v[idx]);
    }
  };

  SolveReport report;
  double res = residual();
  report.checkpoint_residuals.push_back(res);
  std::size_t it = 0;
  while (res > options.tolerance) {
    if (it >= options.max_iterations) {
      throw ConvergenceError("solve_poisson: no convergence after " + std::to_string(it) +
                                 " iterations, relative residual " + std::to_string(res),
                             res, it);
    }
    const std::size_t batch = std::min(checkpoint, options.max_iterations - it);
    for (std::size_t b = 0; b < batch; ++b) {
      sweep(free_red);
      sweep(free_black);
    }
    it += batch;
    res = residual();
    report.checkpoint_residuals.push_back(res);
  }
  report.iterations = it;
  report.relative_residual = res;

  const double slack = 1e-9 * std::max(1.0, vmax - vmin);
  for (const auto* colour : {&free_red, &free_black})
    for (std::size_t idx : *colour)
      if (v[idx] < vmin - slack || v[idx] > vmax + slack) report.maximum_principle_holds = false;

  Solution sol;
  sol.field.nx = grid.nx;
  sol.field.ny = grid.ny;
  sol.field.nz = grid.nz;
  sol.field.spacing = grid.spacing;
  sol.field.origin = grid.origin;
  sol.field.field = gradient_field(grid.nx, grid.ny, grid.nz, grid.spacing, v);
  sol.field.potential = std::move(v);
  sol.report = std::move(report);
  return sol;
}

FieldSample sample_field(const FieldGrid& f, const Vec3& point) {
  const std::array<std::size_t, 3> dims{f.nx, f.ny, f.nz};
  std::array<std::size_t, 3> base{};
  std::array<double, 3> frac{};
  const double tol = 1e-9;
  for (int a = 0; a < 3; ++a) {
    const double u = (point[a] - f.origin[a]) / f.spacing;
    const double umax = static_cast<double>(dims[a] - 1);
    if (u < -tol || u > umax + tol) {
      throw std::out_of_range("sample_field: point " + fmt_point(point) + " lies outside the grid on axis " +
                              std::string(1, "xyz"[a]));
    }
    const double uc = std::clamp(u, 0.0, umax);
    if (dims[a] == 1) {
      base[a] = 0;
      frac[a] = 0.0;
      continue;
    }
    base[a] = std::min(static_cast<std::size_t>(std::floor(uc)), dims[a] - 2);
    frac[a] = uc - static_cast<double>(base[a]);
  }
  FieldSample s;
  for (int c = 0; c < 8; ++c) {
    std::array<std::size_t, 3> node{};
    double w = 1.0;
    for (int a = 0; a < 3; ++a) {
      const int bit = (c >> a) & 1;
      if (bit == 1 && dims[a] == 1) {
        w = 0.0;
        break;
      }
      node[a] = base[a] + static_cast<std::size_t>(bit);
      w *= bit ? frac[a] : 1.0 - frac[a];
    }
    if (w == 0.0) continue;
    const std::size_t idx = f.index(node[0], node[1], node[2]);
    s.potential += w * f.potential[idx];
    for (int a = 0; a < 3; ++a) s.field[a] += w * f.field[idx][a];
  }
  return s;
}

void export_field_table(std::ostream& out, const FieldGrid& f) {
  out << "x_m,y_m,z_m,V,Ex_Vpm,Ey_Vpm,Ez_Vpm\n";
  const auto old = out.precision(17);
  for (std::size_t i = 0; i < f.nx; ++i)
    for (std::size_t j = 0; j < f.ny; ++j)
      for (std::size_t k = 0; k < f.nz; ++k) {
        const Vec3 p = f.position(i, j, k);
        const std::size_t idx = f.index(i, j, k);
        out << p[0] << ',' << p[1] << ',' << p[2] << ',' << f.potential[idx] << ',' << f.field[idx][0] << ','
            << f.field[idx][1] << ',' << f.field[idx][2] << '\n';
      }
  out.precision(old);
}

namespace {

struct TableRow {
  std::size_t line;
  std::array<double, 7> values;
};

// Distinct coordinates along one axis, merging values closer than `tol`.
std::vector<double> distinct(std::vector<double> xs, double tol) {
  std::sort(xs.begin(), xs.end());
  std::vector<double> out;
  for (double x : xs)
    if (out.empty() || x - out.back() > tol) out.push_back(x);
  return out;
}

}  // namespace

FieldGrid import_field_table(std::istream& in) {
  std::vector<TableRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (line_no == 1 && line.rfind("x_m", 0) == 0) continue;
    TableRow row{line_no, {}};
    std::istringstream ls(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(ls, cell, ',')) {
      if (col >= 7) throw FieldTableError("row " + std::to_string(line_no) + ": more than 7 columns");
      try {
        row.values[col] = std::stod(cell);
      } catch (const std::logic_error&) {
        throw FieldTableError("row " + std::to_string(line_no) + ": non-numeric value '" + cell + "'");
      }
      ++col;
    }
    if (col != 7) throw FieldTableError("row " + std::to_string(line_no) + ": expected 7 columns");
    rows.push_back(row);
  }
  if (rows.empty()) throw FieldTableError("field table has no rows");

  std::array<std::vector<double>, 3> axes;
  double extent = 0.0;
  for (int a = 0; a < 3; ++a) {
    std::vector<double> xs;
    for (const auto& r : rows) xs.push_back(r.values[a]);
    const auto [mn, mx] = std::minmax_element(xs.begin(), xs.end());
    extent = std::max(extent, *mx - *mn);
    axes[a] = std::move(xs);
  }
  const double merge_tol = 1e-9 * std::max(extent, std::numeric_limits<double>::min());
  double spacing = 0.0;
  for (int a = 0; a < 3; ++a) {
    axes[a] = distinct(std::move(axes[a]), merge_tol);
    if (axes[a].size() > 1) {
      const double h = (axes[a].back() - axes[a].front()) / static_cast<double>(axes[a].size() - 1);
      for (std::size_t m = 1; m < axes[a].size(); ++m) {
        if (std::abs(axes[a][m] - axes[a][m - 1] - h) > 1e-6 * h)
          throw FieldTableError(std::string("inconsistent spacing along ") + "xyz"[a] + " near coordinate " +
                                std::to_string(axes[a][m]));
      }
      if (spacing == 0.0) {
        spacing = h;
      } else if (std::abs(h - spacing) > 1e-6 * spacing) {
        throw FieldTableError("axis spacings differ; the lattice must be uniform");
      }
    }
  }
  if (spacing == 0.0) throw FieldTableError("field table needs at least two distinct nodes on one axis");

  FieldGrid f;
  f.nx = axes[0].size();
  f.ny = axes[1].size();
  f.nz = axes[2].size();
  f.spacing = spacing;
  f.origin = {axes[0].front(), axes[1].front(), axes[2].front()};
  f.potential.assign(f.size(), 0.0);
  f.field.assign(f.size(), Vec3{});

  const double tol = 1e-6 * spacing;
  std::size_t r = 0;
  for (std::size_t i = 0; i < f.nx; ++i)
    for (std::size_t j = 0; j < f.ny; ++j)
      for (std::size_t k = 0; k < f.nz; ++k, ++r) {
        const Vec3 expect = f.position(i, j, k);
        if (r >= rows.size()) {
          throw FieldTableError("table ends after row " + std::to_string(rows.back().line) + "; lattice node " +
                                fmt_point(expect) + " is missing");
        }
        const auto& row = rows[r];
        for (int a = 0; a < 3; ++a) {
          if (std::abs(row.values[a] - expect[a]) > tol) {
            throw FieldTableError("row " + std::to_string(row.line) + ": found " +
                                  fmt_point({row.values[0], row.values[1], row.values[2]}) + ", expected node " +
                                  fmt_point(expect) + " (missing or out-of-order lattice point)");
          }
        }
        const std::size_t idx = f.index(i, j, k);
        f.potential[idx] = row.values[3];
        f.field[idx] = {row.values[4], row.values[5], row.values[6]};
      }
  if (r != rows.size())
    throw FieldTableError("row " + std::to_string(rows[r].line) + ": extra row beyond the lattice");
  return f;
}

VoxelGrid refine_region(const VoxelGrid& coarse, const FieldGrid& coarse_solution, const Box& box,
                        std::size_t factor, const Layout* layout) {
  if (factor < 2) throw std::invalid_argument("refine_region: factor must be at least 2");
  const std::array<std::size_t, 3> dims{coarse.nx, coarse.ny, coarse.nz};
  const double h = coarse.spacing;
  std::array<std::size_t, 3> lo_cell{}, hi_cell{};
  for (int a = 0; a < 3; ++a) {
    // Cell boundaries sit at origin + (m - 1/2) h for m = 0..n.
    const double umin = (box.min[a] - coarse.origin[a]) / h + 0.5;
    const double umax = (box.max[a] - coarse.origin[a]) / h + 0.5;
    if (umin < -1e-9 || umax > static_cast<double>(dims[a]) + 1e-9 || umax <= umin) {
      throw std::out_of_range("refine_region: box " + fmt_point(box.min) + " - " + fmt_point(box.max) +
                              " lies outside the grid on axis " + std::string(1, "xyz"[a]));
    }
    lo_cell[a] = static_cast<std::size_t>(std::max(0.0, std::floor(umin + 1e-9)));
    hi_cell[a] = std::min(dims[a], static_cast<std::size_t>(std::ceil(umax - 1e-9)));
  }

  const double hf = h / static_cast<double>(factor);
  VoxelGrid fine;
  fine.nx = (hi_cell[0] - lo_cell[0]) * factor;
  fine.ny = (hi_cell[1] - lo_cell[1]) * factor;
  fine.nz = (hi_cell[2] - lo_cell[2]) * factor;
  fine.spacing = hf;
  for (int a = 0; a < 3; ++a)
    fine.origin[a] = coarse.origin[a] + (static_cast<double>(lo_cell[a]) - 0.5) * h + 0.5 * hf;

  if (layout != nullptr) {
    fill_permittivity(*layout, fine);
    fine.dirichlet.assign(fine.size(), std::nullopt);
    fill_electrodes(*layout, fine);
  } else {
    fine.permittivity.assign(fine.size(), 1.0);
    fine.dirichlet.assign(fine.size(), std::nullopt);
    for (std::size_t i = 0; i < fine.nx; ++i)
      for (std::size_t j = 0; j < fine.ny; ++j)
        for (std::size_t k = 0; k < fine.nz; ++k) {
          const std::size_t ci = lo_cell[0] + i / factor;
          const std::size_t cj = lo_cell[1] + j / factor;
          const std::size_t ck = lo_cell[2] + k / factor;
          const std::size_t cidx = coarse.index(ci, cj, ck);
          const std::size_t fidx = fine.index(i, j, k);
          fine.permittivity[fidx] = coarse.permittivity[cidx];
          if (coarse.dirichlet[cidx]) fine.dirichlet[fidx] = coarse.dirichlet[cidx];
        }
  }

  // Outer layer: potentials interpolated from the coarse solution.
  Vec3 hull_lo = coarse_solution.origin;
  Vec3 hull_hi{};
  const std::array<std::size_t, 3> cdims{coarse_solution.nx, coarse_solution.ny, coarse_solution.nz};
  for (int a = 0; a < 3; ++a)
    hull_hi[a] = coarse_solution.origin[a] + coarse_solution.spacing * static_cast<double>(cdims[a] - 1);
  for (std::size_t i = 0; i < fine.nx; ++i)
    for (std::size_t j = 0; j < fine.ny; ++j)
      for (std::size_t k = 0; k < fine.nz; ++k) {
        const bool boundary = i == 0 || j == 0 || k == 0 || i + 1 == fine.nx || j + 1 == fine.ny || k + 1 == fine.nz;
        if (!boundary) continue;
        Vec3 c = fine.position(i, j, k);
        for (int a = 0; a < 3; ++a) c[a] = std::clamp(c[a], hull_lo[a], hull_hi[a]);
        const std::size_t fidx = fine.index(i, j, k);
        if (!fine.dirichlet[fidx]) fine.dirichlet[fidx] = sample_field(coarse_solution, c).potential;
      }
  fine.validate();
  return fine;
}

}  // namespace donorq::electrostatics
