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
#include <vector>

#include "doctest.h"
#include "donorq/qmath.hpp"
#include "support.hpp"

using namespace donorq::qmath;
using testing_support::random_hermitian;
using testing_support::random_matrix;
using testing_support::taylor_expm;

TEST_CASE("matrix construction checks entry count") {
  CHECK_THROWS_AS(ComplexMatrix(2, 2, std::vector<Complex>(3)), MatrixError);
  const ComplexMatrix m{{1.0, 2.0}, {3.0, 4.0}};
  CHECK(m(1, 0) == Complex(3.0));
  CHECK(m.trace() == Complex(5.0));
}

TEST_CASE("hermitian_eig of a diagonal matrix sorts eigenvalues") {
  const std::vector<double> d{3.0, 1.0};
  const auto eig = hermitian_eig(ComplexMatrix::diagonal(d));
  CHECK(eig.eigenvalues[0] == doctest::Approx(1.0));
  CHECK(eig.eigenvalues[1] == doctest::Approx(3.0));
  CHECK(std::abs(eig.eigenvectors(1, 0)) == doctest::Approx(1.0));
  CHECK(std::abs(eig.eigenvectors(0, 1)) == doctest::Approx(1.0));
  CHECK(std::abs(eig.eigenvectors(0, 0)) < 1e-15);
}

TEST_CASE("hermitian_eig of the Pauli-x analog") {
  const auto eig = hermitian_eig(ComplexMatrix{{0.0, 1.0}, {1.0, 0.0}});
  CHECK(eig.eigenvalues[0] == doctest::Approx(-1.0));
  CHECK(eig.eigenvalues[1] == doctest::Approx(1.0));
}

TEST_CASE("hermitian_eig of S.I gives singlet and triplet") {
  const ComplexMatrix sx{{0.0, 0.5}, {0.5, 0.0}};
  const ComplexMatrix sy{{0.0, Complex(0, -0.5)}, {Complex(0, 0.5), 0.0}};
  const ComplexMatrix sz{{0.5, 0.0}, {0.0, -0.5}};
  const ComplexMatrix si = kron(sx, sx) + kron(sy, sy) + kron(sz, sz);
  const auto eig = hermitian_eig(si);
  CHECK(eig.eigenvalues[0] == doctest::Approx(-0.75).epsilon(1e-14));
  for (int k = 1; k < 4; ++k) CHECK(eig.eigenvalues[k] == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("hermitian_eig rejects bad input") {
  CHECK_THROWS_AS(hermitian_eig(ComplexMatrix(2, 3)), MatrixError);
  CHECK_THROWS_AS(hermitian_eig(ComplexMatrix{{0.0, 1.0}, {2.0, 0.0}}), MatrixError);
  CHECK_THROWS_AS(hermitian_eig(ComplexMatrix{{1.0, Complex(0, 1)}, {Complex(0, 1), 1.0}}), MatrixError);
}

TEST_CASE("hermitian_eig decomposition contracts on random input") {
  std::mt19937_64 rng(7);
  for (std::size_t n = 1; n <= kMaxDim; ++n) {
    for (int rep = 0; rep < 10; ++rep) {
      const ComplexMatrix m = random_hermitian(n, rng, 5.0);
      const auto eig = hermitian_eig(m);
      const ComplexMatrix& v = eig.eigenvectors;
      CHECK(max_abs_diff(v.adjoint() * v, ComplexMatrix::identity(n)) < 1e-12);
      const ComplexMatrix mv = m * v;
      const ComplexMatrix vl = v * ComplexMatrix::diagonal(eig.eigenvalues);
      CHECK(max_abs_diff(mv, vl) < 1e-10 * m.frobenius_norm());
      double sum = 0.0;
      for (double l : eig.eigenvalues) sum += l;
      CHECK(std::abs(sum - m.trace().real()) <= 1e-12 * std::max(1.0, m.frobenius_norm()));
      for (std::size_t k = 1; k < n; ++k) CHECK(eig.eigenvalues[k - 1] <= eig.eigenvalues[k]);
    }
  }
}

TEST_CASE("hermitian_eig handles degenerate spectra through projectors") {
  std::mt19937_64 rng(11);
  // U diag(1,1,2,2) U^dag with a random unitary U.
  const auto u = hermitian_eig(random_hermitian(4, rng)).eigenvectors;
  const std::vector<double> d{1.0, 1.0, 2.0, 2.0};
  const ComplexMatrix m = u * ComplexMatrix::diagonal(d) * u.adjoint();
  const auto eig = hermitian_eig(m);
  ComplexMatrix p_solver(4, 4), p_truth(4, 4);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      for (std::size_t k = 0; k < 2; ++k) {
        p_solver(i, j) += eig.eigenvectors(i, k) * std::conj(eig.eigenvectors(j, k));
        p_truth(i, j) += u(i, k) * std::conj(u(j, k));
      }
  CHECK(max_abs_diff(p_solver, p_truth) < 1e-12);
}

TEST_CASE("expm_unitary trivial cases") {
  for (std::size_t n : {1u, 2u, 4u, 8u})
    CHECK(max_abs_diff(expm_unitary(ComplexMatrix(n, n), 3.7), ComplexMatrix::identity(n)) == 0.0);
  const std::vector<double> d{1.0, -1.0};
  const auto u = expm_unitary(ComplexMatrix::diagonal(d), std::numbers::pi / 2);
  CHECK(std::abs(u(0, 0) - Complex(0, -1)) < 1e-15);
  CHECK(std::abs(u(1, 1) - Complex(0, 1)) < 1e-15);
}

TEST_CASE("expm_unitary matches the 50-term Taylor series") {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const ComplexMatrix m = random_hermitian(4, rng);
    const double s = 0.25 + 0.1 * rep;
    CHECK(max_abs_diff(expm_unitary(m, s), taylor_expm(m, s)) < 1e-13);
  }
}

TEST_CASE("expm_unitary group properties") {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    const ComplexMatrix m = random_hermitian(4, rng, 3.0);
    const double s1 = 0.3 * rep - 2.0;
    const double s2 = 1.1 - 0.07 * rep;
    const ComplexMatrix id = ComplexMatrix::identity(4);
    CHECK(max_abs_diff(expm_unitary(m, s1) * expm_unitary(m, -s1), id) < 1e-12);
    CHECK(max_abs_diff(expm_unitary(m, s1 + s2), expm_unitary(m, s1) * expm_unitary(m, s2)) < 1e-11);
    const auto u = expm_unitary(m, s1);
    CHECK(max_abs_diff(u.adjoint() * u, id) < 1e-12);
  }
}

TEST_CASE("kron identities") {
  const ComplexMatrix i2 = ComplexMatrix::identity(2);
  CHECK(kron(i2, i2) == ComplexMatrix::identity(4));
  const std::vector<double> z{1.0, -1.0};
  const std::vector<double> expected{1.0, 1.0, -1.0, -1.0};
  CHECK(kron(ComplexMatrix::diagonal(z), i2) == ComplexMatrix::diagonal(expected));

  std::mt19937_64 rng(9);
  for (int rep = 0; rep < 10; ++rep) {
    const auto a = random_matrix(2, rng), b = random_matrix(2, rng);
    const auto c = random_matrix(2, rng), d = random_matrix(2, rng);
    CHECK(max_abs_diff(kron(a, b) * kron(c, d), kron(a * c, b * d)) < 1e-14);
  }
}

TEST_CASE("commutator and adjoint") {
  std::mt19937_64 rng(13);
  const auto a = random_matrix(3, rng), b = random_matrix(3, rng);
  CHECK(max_abs_diff(commutator(a, b), a * b - b * a) == 0.0);
  CHECK(max_abs_diff((a * b).adjoint(), b.adjoint() * a.adjoint()) < 1e-15);
  CHECK_THROWS_AS(a * ComplexMatrix(2, 2), MatrixError);
}
