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

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace donorq::qmath {

using Complex = std::complex<double>;

/// Largest dimension accepted by the eigensolver and exponential.
inline constexpr std::size_t kMaxDim = 8;

/// Raised for shape mismatches and non-Hermitian input.
class MatrixError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dense row-major complex matrix for the small operators used throughout.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols) {}
  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries);
  ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows);

  static ComplexMatrix identity(std::size_t n);
  static ComplexMatrix zeros(std::size_t rows, std::size_t cols) { return {rows, cols}; }
  static ComplexMatrix diagonal(std::span<const double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool is_square() const { return rows_ == cols_; }

  Complex& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Complex& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const Complex> entries() const { return data_; }
  std::span<Complex> entries() { return data_; }

  ComplexMatrix adjoint() const;
  Complex trace() const;

  /// Largest absolute entry.
  double max_abs() const;
  double frobenius_norm() const;

  /// True when |M_ij - conj(M_ji)| <= tol for all i, j.
  bool is_hermitian(double tol = 1e-12) const;

  ComplexMatrix& operator+=(const ComplexMatrix& rhs);
  ComplexMatrix& operator-=(const ComplexMatrix& rhs);
  ComplexMatrix& operator*=(Complex s);

  friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
  friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
  friend ComplexMatrix operator*(ComplexMatrix a, Complex s) { return a *= s; }
  friend ComplexMatrix operator*(Complex s, ComplexMatrix a) { return a *= s; }
  friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);

  bool operator==(const ComplexMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> data_;
};

/// Matrix-vector product.
std::vector<Complex> apply(const ComplexMatrix& m, std::span<const Complex> v);

/// Max-abs distance between two equally sized matrices.
double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);

/// Commutator AB - BA.
ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b);

struct EigenDecomposition {
  std::vector<double> eigenvalues;  // ascending
  ComplexMatrix eigenvectors;       // columns
};

/// Cyclic Jacobi diagonalisation of a Hermitian matrix of dimension <= kMaxDim.
/// Iterates until the off-diagonal Frobenius norm drops below 1e-14 * ||M||_F.
/// Throws MatrixError for non-square, oversized or non-Hermitian input.
EigenDecomposition hermitian_eig(const ComplexMatrix& m);

/// exp(-i * scale * M) for Hermitian M, assembled from its eigendecomposition.
ComplexMatrix expm_unitary(const ComplexMatrix& m, double scale);

/// exp(-i * scale * M) from a precomputed decomposition of M.
ComplexMatrix expm_unitary(const EigenDecomposition& eig, double scale);

/// Kronecker product A (x) B.
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

}  // namespace donorq::qmath
