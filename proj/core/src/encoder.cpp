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

#include "latn/encoder.hpp"

#include <cmath>

#include "latn/error.hpp"

namespace latn {

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias) {
  const std::size_t d = x.cols();
  if (gain.size() != d || bias.size() != d) throw Error(ErrorCode::kShape, "layer_norm: gain/bias size");
  Tensor out = Tensor::zeros_like(x);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto row = x.row(i);
    double mean = 0.0;
    for (double v : row) mean += v;
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (double v : row) var += (v - mean) * (v - mean);
    var /= static_cast<double>(d);
    const double inv_std = 1.0 / std::sqrt(var + kLayerNormEps);
    for (std::size_t j = 0; j < d; ++j) out(i, j) = gain[j] * (row[j] - mean) * inv_std + bias[j];
  }
  return out;
}

Tensor layer_norm_backward(const Tensor& x, const Tensor& gain, const Tensor& upstream, Tensor& d_gain,
                           Tensor& d_bias) {
  const std::size_t d = x.cols();
  const double n = static_cast<double>(d);
  Tensor dx = Tensor::zeros_like(x);
  std::vector<double> xhat(d), dxhat(d);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto row = x.row(i);
    double mean = 0.0;
    for (double v : row) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : row) var += (v - mean) * (v - mean);
    var /= n;
    const double inv_std = 1.0 / std::sqrt(var + kLayerNormEps);
    double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      xhat[j] = (row[j] - mean) * inv_std;
      dxhat[j] = upstream(i, j) * gain[j];
      d_gain[j] += upstream(i, j) * xhat[j];
      d_bias[j] += upstream(i, j);
      mean_dxhat += dxhat[j];
      mean_dxhat_xhat += dxhat[j] * xhat[j];
    }
    mean_dxhat /= n;
    mean_dxhat_xhat /= n;
    for (std::size_t j = 0; j < d; ++j)
      dx(i, j) = inv_std * (dxhat[j] - mean_dxhat - xhat[j] * mean_dxhat_xhat);
  }
  return dx;
}

Tensor affine(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  Tensor out = matmul(x, weight);
  if (bias.size() != out.cols()) throw Error(ErrorCode::kShape, "affine: bias size");
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += bias[j];
  return out;
}

Tensor relu(const Tensor& x) {
  Tensor out = x;
  for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
  return out;
}

namespace {

// Sums the rows of `m` into the vector `acc`.
void add_column_sums(const Tensor& m, Tensor& acc) {
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) acc[j] += m(i, j);
}

}  // namespace

EncoderBlockParams EncoderBlockParams::zeros_like() const {
  EncoderBlockParams out = *this;
  out.for_each([](const std::string&, Tensor& t) { t.fill(0.0); });
  return out;
}

EncoderBlock::EncoderBlock(std::size_t frames, std::size_t dim, std::size_t heads, std::size_t ff_dim,
                           VariantConfig variant)
    : dim_(dim), ff_dim_(ff_dim), attention_(frames, heads, std::move(variant)) {
  if (dim == 0 || dim % heads != 0) {
    throw Error(ErrorCode::kConfig, "feature dim " + std::to_string(dim) +
                                        " must be a positive multiple of the head count " +
                                        std::to_string(heads));
  }
  if (ff_dim == 0) throw Error(ErrorCode::kConfig, "ff_dim must be positive");
}

EncoderBlockParams EncoderBlock::init_params(Rng& rng) const {
  EncoderBlockParams p;
  p.attention = attention_.init_params(dim_, rng);
  p.norm1_gain = Tensor({dim_}, 1.0);
  p.norm1_bias = Tensor({dim_});
  p.ff_w1 = glorot_uniform(dim_, ff_dim_, rng);
  p.ff_b1 = Tensor({ff_dim_});
  p.ff_w2 = glorot_uniform(ff_dim_, dim_, rng);
  p.ff_b2 = Tensor({dim_});
  p.norm2_gain = Tensor({dim_}, 1.0);
  p.norm2_bias = Tensor({dim_});
  return p;
}

Tensor EncoderBlock::forward(const EncoderBlockParams& params, const Tensor& x, std::size_t valid_len,
                             EncoderBlockCache* cache, AttentionMaps* maps) const {
  EncoderBlockCache scratch;
  EncoderBlockCache& c = cache != nullptr ? *cache : scratch;
  c.residual1 = x + attention_.forward(params.attention, x, valid_len,
                                       cache != nullptr ? &c.attention : nullptr, maps);
  c.normed1 = layer_norm(c.residual1, params.norm1_gain, params.norm1_bias);
  c.hidden_pre = affine(c.normed1, params.ff_w1, params.ff_b1);
  c.hidden = relu(c.hidden_pre);
  c.residual2 = c.normed1 + affine(c.hidden, params.ff_w2, params.ff_b2);
  c.filled = cache != nullptr;
  return layer_norm(c.residual2, params.norm2_gain, params.norm2_bias);
}

Tensor EncoderBlock::backward(const EncoderBlockParams& params, const EncoderBlockCache& cache,
                              const Tensor& upstream, EncoderBlockParams& grads) const {
  if (!cache.filled) throw Error(ErrorCode::kMissingCache, "encoder block backward: forward cache is empty");
  const Tensor d_res2 =
      layer_norm_backward(cache.residual2, params.norm2_gain, upstream, grads.norm2_gain, grads.norm2_bias);
  // residual2 = normed1 + hidden W2 + b2
  grads.ff_w2 += matmul_at_b(cache.hidden, d_res2);
  add_column_sums(d_res2, grads.ff_b2);
  Tensor d_hidden = matmul_a_bt(d_res2, params.ff_w2);
  for (std::size_t i = 0; i < d_hidden.size(); ++i)
    if (!(cache.hidden_pre[i] > 0.0)) d_hidden[i] = 0.0;
  grads.ff_w1 += matmul_at_b(cache.normed1, d_hidden);
  add_column_sums(d_hidden, grads.ff_b1);
  const Tensor d_norm1 = d_res2 + matmul_a_bt(d_hidden, params.ff_w1);
  const Tensor d_res1 =
      layer_norm_backward(cache.residual1, params.norm1_gain, d_norm1, grads.norm1_gain, grads.norm1_bias);
  return d_res1 + attention_.backward(params.attention, cache.attention, d_res1, grads.attention);
}

ModalityEncoder::ModalityEncoder(std::size_t frames, std::size_t dim, std::size_t heads,
                                 std::size_t ff_dim, std::size_t depth, const VariantConfig& variant) {
  if (depth == 0) throw Error(ErrorCode::kConfig, "encoder depth must be >= 1");
  for (std::size_t i = 0; i < depth; ++i) blocks_.emplace_back(frames, dim, heads, ff_dim, variant);
}

std::vector<EncoderBlockParams> ModalityEncoder::init_params(Rng& rng) const {
  std::vector<EncoderBlockParams> params;
  for (const EncoderBlock& b : blocks_) params.push_back(b.init_params(rng));
  return params;
}

Tensor ModalityEncoder::forward(const std::vector<EncoderBlockParams>& params, const Tensor& x,
                                std::size_t valid_len, Cache* cache, AttentionMaps* maps) const {
  if (params.size() != blocks_.size()) throw Error(ErrorCode::kShape, "encoder: block parameter count");
  if (cache != nullptr) cache->blocks.assign(blocks_.size(), {});
  Tensor h = x;
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const bool last = i + 1 == blocks_.size();
    h = blocks_[i].forward(params[i], h, valid_len, cache != nullptr ? &cache->blocks[i] : nullptr,
                           last ? maps : nullptr);
  }
  return h;
}

Tensor ModalityEncoder::backward(const std::vector<EncoderBlockParams>& params, const Cache& cache,
                                 const Tensor& upstream, std::vector<EncoderBlockParams>& grads) const {
  if (cache.blocks.size() != blocks_.size()) {
    throw Error(ErrorCode::kMissingCache, "encoder backward: forward cache is empty");
  }
  Tensor d = upstream;
  for (std::size_t i = blocks_.size(); i-- > 0;) d = blocks_[i].backward(params[i], cache.blocks[i], d, grads[i]);
  return d;
}

}  // namespace latn
