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

#include "latn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "latn/error.hpp"
#include "latn/mask.hpp"

namespace latn {
namespace {

std::size_t element_count(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

void require_matrix(const Tensor& t, std::string_view what) {
  if (t.rank() != 2) {
    throw Error(ErrorCode::kShape,
                std::string(what) + ": expected a matrix, got " + shape_string(t.shape()));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, std::string_view what) {
  if (a.shape() != b.shape()) {
    throw Error(ErrorCode::kShape, std::string(what) + ": shape mismatch " +
                                       shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  }
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, double fill) : shape_(std::move(shape)) {
  if (shape_.empty() || shape_.size() > 3) {
    throw Error(ErrorCode::kShape, "tensor rank must be 1..3, got " + shape_string(shape_));
  }
  data_.assign(element_count(shape_), fill);
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_.empty() || shape_.size() > 3) {
    throw Error(ErrorCode::kShape, "tensor rank must be 1..3, got " + shape_string(shape_));
  }
  if (element_count(shape_) != data_.size()) {
    throw Error(ErrorCode::kShape, "tensor data length " + std::to_string(data_.size()) +
                                       " does not match shape " + shape_string(shape_));
  }
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw Error(ErrorCode::kShape, "ragged matrix literal");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor({r, c}, std::move(data));
}

Tensor Tensor::vector(std::initializer_list<double> values) {
  return Tensor({values.size()}, std::vector<double>(values));
}

Tensor Tensor::identity(std::size_t n) {
  Tensor t({n, n});
  for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0;
  return t;
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= shape_.size()) {
    throw Error(ErrorCode::kShape, "axis " + std::to_string(axis) + " out of range for " +
                                       shape_string(shape_));
  }
  return shape_[axis];
}

std::span<double> Tensor::row(std::size_t r) {
  const std::size_t c = data_.size() / shape_[0];
  return std::span<double>(data_).subspan(r * c, c);
}

std::span<const double> Tensor::row(std::size_t r) const {
  const std::size_t c = data_.size() / shape_[0];
  return std::span<const double>(data_).subspan(r * c, c);
}

Tensor& Tensor::operator+=(const Tensor& other) {
  require_same_shape(*this, other, "add");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Tensor& Tensor::operator-=(const Tensor& other) {
  require_same_shape(*this, other, "subtract");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Tensor& Tensor::operator*=(double factor) {
  for (double& v : data_) v *= factor;
  return *this;
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

std::string shape_string(const std::vector<std::size_t>& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  os << ']';
  return os.str();
}

void check_finite(const Tensor& t, std::string_view what) {
  for (double v : t.data()) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kNonFinite, std::string(what) + ": non-finite value");
    }
  }
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  const std::size_t rows = a.rows(), inner = a.cols(), cols = b.cols();
  if (b.rows() != inner) {
    throw Error(ErrorCode::kShape, "matmul: inner dimensions disagree " + shape_string(a.shape()) +
                                       " * " + shape_string(b.shape()));
  }
  Tensor out({rows, cols});
  for (std::size_t i = 0; i < rows; ++i) {
    double* o = &out(i, 0);
    for (std::size_t k = 0; k < inner; ++k) {
      const double aik = a(i, k);
      const double* brow = b.data().data() + k * cols;
      for (std::size_t j = 0; j < cols; ++j) o[j] += aik * brow[j];
    }
  }
  check_finite(out, "matmul");
  return out;
}

Tensor matmul_at_b(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul_at_b");
  require_matrix(b, "matmul_at_b");
  const std::size_t inner = a.rows(), rows = a.cols(), cols = b.cols();
  if (b.rows() != inner) {
    throw Error(ErrorCode::kShape, "matmul_at_b: leading dimensions disagree " +
                                       shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  }
  Tensor out({rows, cols});
  for (std::size_t k = 0; k < inner; ++k) {
    const double* brow = b.data().data() + k * cols;
    for (std::size_t i = 0; i < rows; ++i) {
      const double aki = a(k, i);
      double* o = &out(i, 0);
      for (std::size_t j = 0; j < cols; ++j) o[j] += aki * brow[j];
    }
  }
  check_finite(out, "matmul_at_b");
  return out;
}

Tensor matmul_a_bt(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul_a_bt");
  require_matrix(b, "matmul_a_bt");
  const std::size_t rows = a.rows(), inner = a.cols(), cols = b.rows();
  if (b.cols() != inner) {
    throw Error(ErrorCode::kShape, "matmul_a_bt: trailing dimensions disagree " +
                                       shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  }
  Tensor out({rows, cols});
  for (std::size_t i = 0; i < rows; ++i) {
    const double* arow = a.data().data() + i * inner;
    for (std::size_t j = 0; j < cols; ++j) {
      const double* brow = b.data().data() + j * inner;
      double acc = 0.0;
      for (std::size_t k = 0; k < inner; ++k) acc += arow[k] * brow[k];
      out(i, j) = acc;
    }
  }
  check_finite(out, "matmul_a_bt");
  return out;
}

Tensor transpose(const Tensor& a) {
  require_matrix(a, "transpose");
  Tensor out({a.cols(), a.rows()});
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

Tensor operator+(Tensor a, const Tensor& b) { return a += b; }
Tensor operator-(Tensor a, const Tensor& b) { return a -= b; }
Tensor operator*(Tensor a, double factor) { return a *= factor; }

Tensor hadamard(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "hadamard");
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b[i];
  return out;
}

double sum(const Tensor& a) {
  double acc = 0.0;
  for (double v : a.data()) acc += v;
  return acc;
}

double dot(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "dot");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double frobenius_norm(const Tensor& a) { return std::sqrt(dot(a, a)); }

double max_abs_diff(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "max_abs_diff");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

double relative_error(const Tensor& a, const Tensor& b) {
  const double scale = std::max(frobenius_norm(a), frobenius_norm(b));
  if (scale == 0.0) return 0.0;
  return frobenius_norm(a - b) / scale;
}

Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t count) {
  require_matrix(a, "slice_cols");
  if (begin + count > a.cols()) throw Error(ErrorCode::kShape, "slice_cols: range out of bounds");
  Tensor out({a.rows(), count});
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < count; ++j) out(i, j) = a(i, begin + j);
  return out;
}

void assign_cols(Tensor& dst, const Tensor& block, std::size_t begin) {
  require_matrix(dst, "assign_cols");
  require_matrix(block, "assign_cols");
  if (block.rows() != dst.rows() || begin + block.cols() > dst.cols()) {
    throw Error(ErrorCode::kShape, "assign_cols: block does not fit");
  }
  for (std::size_t i = 0; i < block.rows(); ++i)
    for (std::size_t j = 0; j < block.cols(); ++j) dst(i, begin + j) = block(i, j);
}

Tensor concat_cols(std::span<const Tensor> blocks) {
  if (blocks.empty()) throw Error(ErrorCode::kShape, "concat_cols: no blocks");
  std::size_t total = 0;
  for (const Tensor& b : blocks) {
    require_matrix(b, "concat_cols");
    if (b.rows() != blocks.front().rows()) throw Error(ErrorCode::kShape, "concat_cols: row mismatch");
    total += b.cols();
  }
  Tensor out({blocks.front().rows(), total});
  std::size_t offset = 0;
  for (const Tensor& b : blocks) {
    assign_cols(out, b, offset);
    offset += b.cols();
  }
  return out;
}

Tensor head_rows(const Tensor& a, std::size_t count) {
  require_matrix(a, "head_rows");
  if (count > a.rows()) throw Error(ErrorCode::kShape, "head_rows: count exceeds rows");
  std::vector<double> data(a.data().begin(), a.data().begin() + count * a.cols());
  return Tensor({count, a.cols()}, std::move(data));
}

Tensor masked_row_softmax(const Tensor& logits, const AttentionMask* mask) {
  require_matrix(logits, "masked_row_softmax");
  const std::size_t rows = logits.rows(), cols = logits.cols();
  if (mask != nullptr && (mask->size() != rows || rows != cols)) {
    throw Error(ErrorCode::kShape, "masked_row_softmax: mask size " + std::to_string(mask->size()) +
                                       " does not match logits " + shape_string(logits.shape()));
  }
  constexpr double kForbidden = -std::numeric_limits<double>::infinity();
  Tensor out({rows, cols});
  for (std::size_t i = 0; i < rows; ++i) {
    double row_max = kForbidden;
    for (std::size_t j = 0; j < cols; ++j) {
      const double z = (mask == nullptr || mask->keep(i, j)) ? logits(i, j) : kForbidden;
      out(i, j) = z;
      row_max = std::max(row_max, z);
    }
    if (row_max == kForbidden) {
      throw Error(ErrorCode::kInvalidArgument,
                  "masked_row_softmax: row " + std::to_string(i) + " is fully forbidden");
    }
    double total = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      const double e = std::exp(out(i, j) - row_max);  // exp(-inf) == 0 exactly
      out(i, j) = e;
      total += e;
    }
    for (std::size_t j = 0; j < cols; ++j) out(i, j) /= total;
  }
  check_finite(out, "masked_row_softmax");
  return out;
}

Tensor row_softmax_backward(const Tensor& probs, const Tensor& upstream) {
  require_same_shape(probs, upstream, "row_softmax_backward");
  Tensor out({probs.rows(), probs.cols()});
  for (std::size_t i = 0; i < probs.rows(); ++i) {
    double inner = 0.0;
    for (std::size_t j = 0; j < probs.cols(); ++j) inner += probs(i, j) * upstream(i, j);
    for (std::size_t j = 0; j < probs.cols(); ++j)
      out(i, j) = probs(i, j) * (upstream(i, j) - inner);
  }
  return out;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Tensor finite_diff_grad(const ScalarFunction& f, const Tensor& x, double eps) {
  if (!(eps > 0.0)) throw Error(ErrorCode::kInvalidArgument, "finite_diff_grad: eps must be > 0");
  Tensor probe = x;
  Tensor grad = Tensor::zeros_like(x);
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + eps;
    const double plus = f(probe);
    probe[i] = x[i] - eps;
    const double minus = f(probe);
    probe[i] = x[i];
    if (!std::isfinite(plus) || !std::isfinite(minus)) {
      throw Error(ErrorCode::kNonFinite,
                  "finite_diff_grad: non-finite evaluation at coordinate " + std::to_string(i));
    }
    grad[i] = (plus - minus) / (2.0 * eps);
  }
  return grad;
}

}  // namespace latn
