// Copyright 2026 The sgzsl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SGZSL_MATRIX_H_
#define SGZSL_MATRIX_H_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace sgzsl {

// Where a matrix's contents came from. Only the data owner's feature rows
// carry kOwnerData; copies and row slices keep the tag, arithmetic results
// start untagged. The provider asserts it never holds a kOwnerData matrix.
enum class Origin { kUntagged, kOwnerData };

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  // Literal construction for tests and small fixtures.
  static Matrix FromRows(
      std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  const std::vector<double>& values() const { return data_; }

  Origin origin() const { return origin_; }
  void set_origin(Origin origin) { origin_ = origin; }

  // Compares shape and values; origin is metadata and is ignored.
  bool operator==(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_ &&
           data_ == other.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
  Origin origin_ = Origin::kUntagged;
};

// a * b
Matrix MatMul(const Matrix& a, const Matrix& b);
// a^T * b. Accumulates over rows of a in order, one product per step.
Matrix MatMulTransA(const Matrix& a, const Matrix& b);
// a * b^T
Matrix MatMulTransB(const Matrix& a, const Matrix& b);

Matrix Transpose(const Matrix& m);

// Elementwise helpers. Shapes must agree exactly.
void AddInPlace(Matrix& target, const Matrix& other);
void ScaleInPlace(Matrix& target, double factor);
Matrix Add(const Matrix& a, const Matrix& b);
Matrix Subtract(const Matrix& a, const Matrix& b);

// [a | b] column concatenation; row counts must agree.
Matrix HStack(const Matrix& a, const Matrix& b);
// Row concatenation; column counts must agree unless one side is empty.
Matrix VStack(const Matrix& a, const Matrix& b);
// Keeps the listed rows in the given order. Preserves origin.
Matrix SelectRows(const Matrix& m, std::span<const std::size_t> indices);
// Columns [first, first + count).
Matrix SliceCols(const Matrix& m, std::size_t first, std::size_t count);

// Index of the largest entry of each row; ties go to the smallest index.
std::vector<std::size_t> RowArgmax(const Matrix& m);

double MaxAbs(const Matrix& m);
double FrobeniusNorm(const Matrix& m);
bool AllFinite(const Matrix& m);

}  // namespace sgzsl

#endif  // SGZSL_MATRIX_H_
