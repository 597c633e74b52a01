// Copyright 2026 The latn Authors. All Rights Reserved.
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

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <string_view>
#include <vector>

namespace latn {

class AttentionMask;

/// Dense row-major array of doubles, rank 1 to 3.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  /// Row-major 2-D literal, used mostly by tests.
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor vector(std::initializer_list<double> values);
  static Tensor identity(std::size_t n);
  static Tensor zeros_like(const Tensor& other) { return Tensor(other.shape_); }

  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t rows() const { return dim(0); }
  std::size_t cols() const { return dim(1); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<double> row(std::size_t r);
  std::span<const double> row(std::size_t r) const;

  Tensor& operator+=(const Tensor& other);
  Tensor& operator-=(const Tensor& other);
  Tensor& operator*=(double factor);
  void fill(double value);

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

std::string shape_string(const std::vector<std::size_t>& shape);

/// Throws Error(kNonFinite) naming `what` if any element is NaN or infinite.
void check_finite(const Tensor& t, std::string_view what);

/// a[R x S] * b[S x C]. Each output element is summed over S in ascending order.
Tensor matmul(const Tensor& a, const Tensor& b);
/// a^T * b for a[S x R], b[S x C].
Tensor matmul_at_b(const Tensor& a, const Tensor& b);
/// a * b^T for a[R x S], b[C x S].
Tensor matmul_a_bt(const Tensor& a, const Tensor& b);

Tensor transpose(const Tensor& a);
Tensor operator+(Tensor a, const Tensor& b);
Tensor operator-(Tensor a, const Tensor& b);
Tensor operator*(Tensor a, double factor);
Tensor hadamard(const Tensor& a, const Tensor& b);

double sum(const Tensor& a);
double dot(const Tensor& a, const Tensor& b);
double frobenius_norm(const Tensor& a);
double max_abs_diff(const Tensor& a, const Tensor& b);
/// ||a - b|| / max(||a||, ||b||), or 0 when both are zero.
double relative_error(const Tensor& a, const Tensor& b);

/// Column block [begin, begin + count) of a matrix.
Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t count);
/// Writes `block` into columns [begin, begin + block.cols()) of `dst`.
void assign_cols(Tensor& dst, const Tensor& block, std::size_t begin);
Tensor concat_cols(std::span<const Tensor> blocks);
/// First `count` rows of a matrix.
Tensor head_rows(const Tensor& a, std::size_t count);

/// Row-wise softmax. Forbidden entries of `mask` are replaced by -inf before
/// the softmax, so they come out as exact zeros. A null mask keeps everything.
Tensor masked_row_softmax(const Tensor& logits, const AttentionMask* mask = nullptr);

/// Vector-Jacobian product of a row softmax: given its output `probs` and the
/// upstream gradient, returns the gradient w.r.t. the logits.
Tensor row_softmax_backward(const Tensor& probs, const Tensor& upstream);

/// Numerically stable logistic function.
double sigmoid(double z);

using ScalarFunction = std::function<double(const Tensor&)>;

inline constexpr double kDefaultFiniteDiffEps = 1e-5;

/// Central-difference gradient of `f` at `x`.
Tensor finite_diff_grad(const ScalarFunction& f, const Tensor& x,
                        double eps = kDefaultFiniteDiffEps);

}  // namespace latn
