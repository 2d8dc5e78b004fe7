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

// Shared helpers and independent oracles for the unit tests.

#include <cmath>
#include <random>

#include "donorq/qmath.hpp"

namespace testing_support {

using donorq::qmath::Complex;
using donorq::qmath::ComplexMatrix;

inline ComplexMatrix random_hermitian(std::size_t n, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    m(i, i) = u(rng);
    for (std::size_t j = i + 1; j < n; ++j) {
      m(i, j) = Complex(u(rng), u(rng));
      m(j, i) = std::conj(m(i, j));
    }
  }
  return m;
}

inline ComplexMatrix random_matrix(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ComplexMatrix m(n, n);
  for (auto& z : m.entries()) z = Complex(u(rng), u(rng));
  return m;
}

// exp(-i s M) by its power series, 50 terms; plain loops only.
inline ComplexMatrix taylor_expm(const ComplexMatrix& m, double s, int terms = 50) {
  const std::size_t n = m.rows();
  ComplexMatrix sum = ComplexMatrix::identity(n);
  ComplexMatrix term = ComplexMatrix::identity(n);
  const Complex factor(0.0, -s);
  for (int k = 1; k < terms; ++k) {
    ComplexMatrix next(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        Complex acc{};
        for (std::size_t l = 0; l < n; ++l) acc += term(i, l) * m(l, j);
        next(i, j) = acc * factor / static_cast<double>(k);
      }
    term = next;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) sum(i, j) += term(i, j);
  }
  return sum;
}

}  // namespace testing_support
