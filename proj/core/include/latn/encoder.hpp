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
#include <string>
#include <vector>

#include "latn/attention.hpp"
#include "latn/random.hpp"
#include "latn/tensor.hpp"

namespace latn {

inline constexpr double kLayerNormEps = 1e-5;

/// One Transformer encoder block:
///   H = LayerNorm(X + Attention(X)),  Y = LayerNorm(H + FF(H)),
///   FF(H) = ReLU(H W1 + b1) W2 + b2.
struct EncoderBlockParams {
  AttentionParams attention;
  Tensor norm1_gain, norm1_bias;  // [D]
  Tensor ff_w1, ff_b1;            // [D x F], [F]
  Tensor ff_w2, ff_b2;            // [F x D], [D]
  Tensor norm2_gain, norm2_bias;  // [D]

  template <class F>
  void for_each(F&& f) { visit(*this, f); }
  template <class F>
  void for_each(F&& f) const { visit(*this, f); }

  EncoderBlockParams zeros_like() const;

 private:
  template <class Self, class F>
  static void visit(Self& self, F& f) {
    self.attention.for_each([&f](const std::string& name, auto& t) { f("attention." + name, t); });
    f(std::string("norm1.gain"), self.norm1_gain);
    f(std::string("norm1.bias"), self.norm1_bias);
    f(std::string("ff.w1"), self.ff_w1);
    f(std::string("ff.b1"), self.ff_b1);
    f(std::string("ff.w2"), self.ff_w2);
    f(std::string("ff.b2"), self.ff_b2);
    f(std::string("norm2.gain"), self.norm2_gain);
    f(std::string("norm2.bias"), self.norm2_bias);
  }
};

struct EncoderBlockCache {
  bool filled = false;
  AttentionCache attention;
  Tensor residual1;  // X + Attention(X)
  Tensor normed1;    // H
  Tensor hidden_pre; // H W1 + b1
  Tensor hidden;     // ReLU(...)
  Tensor residual2;  // H + FF(H)
};

class EncoderBlock {
 public:
  EncoderBlock() = default;
  EncoderBlock(std::size_t frames, std::size_t dim, std::size_t heads, std::size_t ff_dim,
               VariantConfig variant);

  std::size_t dim() const { return dim_; }
  std::size_t ff_dim() const { return ff_dim_; }
  const AttentionLayer& attention() const { return attention_; }

  EncoderBlockParams init_params(Rng& rng) const;

  Tensor forward(const EncoderBlockParams& params, const Tensor& x, std::size_t valid_len,
                 EncoderBlockCache* cache = nullptr, AttentionMaps* maps = nullptr) const;
  Tensor backward(const EncoderBlockParams& params, const EncoderBlockCache& cache,
                  const Tensor& upstream, EncoderBlockParams& grads) const;

 private:
  std::size_t dim_ = 0;
  std::size_t ff_dim_ = 0;
  AttentionLayer attention_;
};

/// Row-wise layer norm with learned gain and bias.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias);
/// Gradient of layer_norm w.r.t. its input; accumulates gain/bias gradients.
Tensor layer_norm_backward(const Tensor& x, const Tensor& gain, const Tensor& upstream,
                           Tensor& d_gain, Tensor& d_bias);

/// x W + b with b broadcast over rows.
Tensor affine(const Tensor& x, const Tensor& weight, const Tensor& bias);
Tensor relu(const Tensor& x);

/// A stack of encoder blocks for one modality.
class ModalityEncoder {
 public:
  struct Cache {
    std::vector<EncoderBlockCache> blocks;
  };

  ModalityEncoder() = default;
  ModalityEncoder(std::size_t frames, std::size_t dim, std::size_t heads, std::size_t ff_dim,
                  std::size_t depth, const VariantConfig& variant);

  std::size_t depth() const { return blocks_.size(); }
  std::size_t dim() const { return blocks_.front().dim(); }
  const EncoderBlock& block(std::size_t i) const { return blocks_.at(i); }

  std::vector<EncoderBlockParams> init_params(Rng& rng) const;

  /// `maps`, when given, receives the maps of the last block.
  Tensor forward(const std::vector<EncoderBlockParams>& params, const Tensor& x, std::size_t valid_len,
                 Cache* cache = nullptr, AttentionMaps* maps = nullptr) const;
  Tensor backward(const std::vector<EncoderBlockParams>& params, const Cache& cache, const Tensor& upstream,
                  std::vector<EncoderBlockParams>& grads) const;

 private:
  std::vector<EncoderBlock> blocks_;
};

}  // namespace latn
