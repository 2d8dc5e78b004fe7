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
#include "donorq/hfs.hpp"

using namespace donorq::hfs;

namespace {

constexpr double kGammaE = 28.025e9;

// Composite Simpson integral of 4 pi r^2 rho(r) over [0, R].
double quadrature_cumulative(double radius, double a, int intervals = 4000) {
  const double h = radius / intervals;
  auto f = [&](double r) { return 4.0 * std::numbers::pi * r * r * std::exp(-2.0 * r / a) / (std::numbers::pi * a * a * a); };
  double sum = f(0.0) + f(radius);
  for (int i = 1; i < intervals; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(i * h);
  return sum * h / 3.0;
}

}  // namespace

TEST_CASE("gauss to hertz") {
  CHECK(gauss_to_hz(HfsValue::gauss(42.0), kGammaE).value == doctest::Approx(117.705e6).epsilon(1e-14));
  CHECK(gauss_to_hz(HfsValue::gauss(0.0), kGammaE).value == 0.0);
  CHECK_THROWS_AS(gauss_to_hz(HfsValue::hz(42.0), kGammaE), HfsError);
  CHECK_THROWS_AS(hz_to_gauss(HfsValue::gauss(42.0), kGammaE), HfsError);
  const double back = gauss_to_hz(hz_to_gauss(HfsValue::hz(117.6e6), kGammaE), kGammaE).value;
  CHECK(std::abs(back - 117.6e6) / 117.6e6 < 1e-12);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(1.0, 1e9);
  for (int i = 0; i < 100; ++i) {
    const double a = u(rng);
    CHECK(std::abs(gauss_to_hz(hz_to_gauss(HfsValue::hz(a), kGammaE), kGammaE).value - a) / a < 1e-12);
  }
  CHECK(as_hz(HfsValue::gauss(42.0), kGammaE) == gauss_to_hz(HfsValue::gauss(42.0), kGammaE).value);
  CHECK(as_hz(HfsValue::hz(5.0), kGammaE) == 5.0);
}

TEST_CASE("contact coupling relative to a reference") {
  const auto ref = HfsValue::gauss(kBulkSiPGauss);
  CHECK(fermi_contact_relative(3.0, 3.0, ref).value == 42.0);
  CHECK(fermi_contact_relative(6.0, 3.0, ref).value == 84.0);
  CHECK(fermi_contact_relative(6.0, 3.0, ref).unit == Unit::kGauss);
  CHECK(fermi_contact_relative(3.0, 3.0, ref, 0.9).value == doctest::Approx(37.8));
  CHECK_THROWS_AS(fermi_contact_relative(0.0, 3.0, ref), HfsError);
  CHECK_THROWS_AS(fermi_contact_relative(1.0, -3.0, ref), HfsError);
}

TEST_CASE("size and field scaling") {
  const auto bulk = HfsValue::gauss(42.0);
  CHECK(scale_by_size(1.0, 1.0, bulk).value == 42.0);
  CHECK(scale_by_size(2.0, 1.0, bulk).value == 84.0);
  CHECK(scale_by_size(1.5, 1.0, bulk).value == 63.0);
  CHECK(stark_scale(1.0, 1.0, HfsValue::hz(117.6e6)).value == 117.6e6);
  const auto a0 = gauss_to_hz(bulk, kGammaE);
  CHECK(stark_scale(0.97, 1.0, a0).value == doctest::Approx(114.17e6).epsilon(1e-4));
  CHECK_THROWS_AS(scale_by_size(-1.0, 1.0, bulk), HfsError);
  CHECK_THROWS_AS(stark_scale(1.0, 0.0, bulk), HfsError);
}

TEST_CASE("scaling is homogeneous in the reference") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.1, 10.0);
  for (int i = 0; i < 50; ++i) {
    const double k = u(rng), r = u(rng), a = u(rng) * 1e8;
    CHECK(scale_by_size(r, 1.0, HfsValue::hz(k * a)).value ==
          doctest::Approx(k * scale_by_size(r, 1.0, HfsValue::hz(a)).value).epsilon(1e-15));
    CHECK(stark_scale(r, 1.0, HfsValue::hz(k * a)).value ==
          doctest::Approx(k * stark_scale(r, 1.0, HfsValue::hz(a)).value).epsilon(1e-15));
    CHECK(fermi_contact_relative(r, 1.0, HfsValue::hz(k * a)).value ==
          doctest::Approx(k * fermi_contact_relative(r, 1.0, HfsValue::hz(a)).value).epsilon(1e-15));
  }
}

TEST_CASE("Stark ratio models") {
  const QuadraticStarkModel q(2e-15);
  for (double e : {0.0, 1e6, 3e6, 1e7}) CHECK(q.ratio(e) == q.ratio(-e));
  CHECK(q.ratio(1e6) == doctest::Approx(1.0 - 2e-3));
  CHECK(IdentityStarkModel().ratio(5e6) == 1.0);
  CHECK(ConstantStarkModel(0.97).ratio(5e6) == 0.97);
  CHECK_THROWS_AS(ConstantStarkModel(0.0), HfsError);

  const TabulatedStarkModel t({{2e6, 0.9}, {0.0, 1.0}, {1e6, 0.98}});
  CHECK(t.ratio(0.0) == 1.0);
  CHECK(t.ratio(0.5e6) == doctest::Approx(0.99));
  CHECK(t.ratio(1.5e6) == doctest::Approx(0.94));
  CHECK(t.ratio(5e6) == 0.9);
  CHECK(t.ratio(-1.0) == 1.0);
  CHECK_THROWS_AS(TabulatedStarkModel({}), HfsError);
  CHECK_THROWS_AS(TabulatedStarkModel({{1.0, 1.0}, {1.0, 0.9}}), HfsError);

  std::istringstream csv("field_Vpm,ratio\n0,1.0\n1e6,0.98\n");
  const auto rows = read_two_column_csv(csv);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].first == 1e6);
  std::istringstream bad("0,1\nx,y\n");
  CHECK_THROWS_AS(read_two_column_csv(bad), HfsError);
}

TEST_CASE("Slater density and cumulative closed forms") {
  const SlaterOrbitalModel m{2e-9};
  CHECK(slater_cumulative(0.0, m) == 0.0);
  CHECK(slater_cumulative(INFINITY, m) == 1.0);
  CHECK(slater_cumulative(1e-6, m) == doctest::Approx(1.0));
  CHECK(slater_cumulative(2e-9, m) == doctest::Approx(1.0 - 5.0 * std::exp(-2.0)).epsilon(1e-14));
  CHECK(slater_cumulative(2e-9, m) == doctest::Approx(0.3233).epsilon(1e-4));
  CHECK_THROWS_AS(slater_cumulative(-1e-10, m), HfsError);
  CHECK_THROWS_AS(slater_cumulative(1e-10, SlaterOrbitalModel{0.0}), HfsError);
  // Density integrates to one over all space.
  CHECK(quadrature_cumulative(60e-9, 2e-9, 20000) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("Slater cumulative matches quadrature for random radii") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> ua(0.5e-9, 5e-9), ux(0.01, 6.0);
  for (int i = 0; i < 100; ++i) {
    const double a = ua(rng);
    const double r = ux(rng) * a;
    CHECK(std::abs(slater_cumulative(r, {a}) - quadrature_cumulative(r, a)) < 1e-8);
  }
  // Small-radius branch stays accurate where cancellation would bite.
  const double a = 1e-9;
  const double r = 1e-13;
  const double x = 2 * r / a;
  CHECK(slater_cumulative(r, {a}) == doctest::Approx(x * x * x / 6.0 * (1 - 3 * x / 4)).epsilon(1e-6));
}

TEST_CASE("Slater fit") {
  std::vector<std::pair<double, double>> samples;
  for (int i = 1; i <= 12; ++i) {
    const double r = 0.5e-9 * i;
    samples.emplace_back(r, slater_cumulative(r, {2e-9}));
  }
  const auto fit = fit_slater(samples);
  CHECK(std::abs(fit.model.decay_length - 2e-9) / 2e-9 < 1e-6);
  CHECK(fit.residual < 1e-20);

  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> noise(-0.01, 0.01);
  int within = 0;
  for (int rep = 0; rep < 20; ++rep) {
    auto noisy = samples;
    for (auto& [r, y] : noisy) y *= 1.0 + noise(rng);
    within += std::abs(fit_slater(noisy).model.decay_length - 2e-9) / 2e-9 < 0.05;
  }
  CHECK(within == 20);

  CHECK_THROWS_AS(fit_slater({{1e-9, 0.5}}), HfsError);
  CHECK_THROWS_AS(fit_slater({{1e-9, 0.1}, {1e-9, 0.1}, {2e-9, 0.3}}), HfsError);
  CHECK_THROWS_AS(fit_slater({{-1e-9, 0.1}, {1e-9, 0.1}, {2e-9, 0.3}}), HfsError);
}

TEST_CASE("donor position model") {
  DonorPositionModel m{117.6e6, 2e-9, 10e-9, std::nullopt};
  CHECK(hfs_at_position(10e-9, {0.0, 0.0}, m).value == 117.6e6);
  CHECK(hfs_at_position(10e-9 + 2e-9 * std::log(2.0), {0.0, 0.0}, m).value ==
        doctest::Approx(2 * 117.6e6).epsilon(1e-14));
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-1e-7, 1e-7);
  for (int i = 0; i < 20; ++i)
    CHECK(hfs_at_position(12e-9, {u(rng), u(rng)}, m).value == hfs_at_position(12e-9, {0.0, 0.0}, m).value);
  double prev = 0.0;
  for (double d = 0.0; d < 30e-9; d += 1e-9) {
    const double a = hfs_at_position(d, {0.0, 0.0}, m).value;
    CHECK(a > prev);
    prev = a;
  }
  m.bulk_cap_hz = 1.5 * 117.6e6;
  CHECK(hfs_at_position(10e-9 + 2e-9 * std::log(2.0), {0.0, 0.0}, m).value == 1.5 * 117.6e6);
  CHECK_THROWS_AS(hfs_at_position(-1e-9, {0.0, 0.0}, m), HfsError);
  m.depth_scale = 0.0;
  CHECK_THROWS_AS(hfs_at_position(1e-9, {0.0, 0.0}, m), HfsError);
}
