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
#include "latn/encoder.hpp"
#include "latn/random.hpp"
#include "latn/tensor.hpp"

namespace latn {

using LabelSet = std::vector<std::size_t>;

struct EncoderConfig {
  std::size_t frames = 32;      // T: sequences are padded or truncated to this
  std::size_t dim_visual = 32;  // D_v
  std::size_t dim_audio = 16;   // D_a
  std::size_t heads = 4;
  std::size_t depth = 1;
  std::size_t ff_dim = 0;       // 0: 4 * D of each modality
  std::size_t hidden_dim = 0;   // 0: D_v + D_a
  std::size_t num_classes = 20;
  VariantConfig visual_variant;
  VariantConfig audio_variant;

  void validate() const;
  std::size_t ff_dim_for(std::size_t dim) const { return ff_dim == 0 ? 4 * dim : ff_dim; }
  std::size_t resolved_hidden_dim() const { return hidden_dim == 0 ? dim_visual + dim_audio : hidden_dim; }

  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

/// Hidden layer (ReLU) and output layer over the pooled representation.
struct ClassifierParams {
  Tensor w_hidden, b_hidden;  // [(D_v + D_a) x H], [H]
  Tensor w_logits, b_logits;  // [H x C], [C]
};

struct ModelParams {
  std::vector<EncoderBlockParams> visual;
  std::vector<EncoderBlockParams> audio;
  ClassifierParams head;

  /// f(name, tensor) over every parameter in a fixed order; names are stable
  /// and used as checkpoint keys.
  template <class F>
  void for_each(F&& f) { visit(*this, f); }
  template <class F>
  void for_each(F&& f) const { visit(*this, f); }

  ModelParams zeros_like() const;
  std::size_t scalar_count() const;

 private:
  template <class Self, class F>
  static void visit(Self& self, F& f) {
    for (std::size_t i = 0; i < self.visual.size(); ++i) {
      const std::string prefix = "visual." + std::to_string(i) + ".";
      self.visual[i].for_each([&](const std::string& name, auto& t) { f(prefix + name, t); });
    }
    for (std::size_t i = 0; i < self.audio.size(); ++i) {
      const std::string prefix = "audio." + std::to_string(i) + ".";
      self.audio[i].for_each([&](const std::string& name, auto& t) { f(prefix + name, t); });
    }
    f(std::string("head.w_hidden"), self.head.w_hidden);
    f(std::string("head.b_hidden"), self.head.b_hidden);
    f(std::string("head.w_logits"), self.head.w_logits);
    f(std::string("head.b_logits"), self.head.b_logits);
  }
};

struct ModelCache {
  bool filled = false;
  std::size_t valid_len = 0;
  ModalityEncoder::Cache visual;
  ModalityEncoder::Cache audio;
  Tensor pooled;      // [1 x (D_v + D_a)]
  Tensor hidden_pre;  // [1 x H]
  Tensor hidden;      // [1 x H]
};

struct ModelMaps {
  AttentionMaps visual;
  AttentionMaps audio;
};

/// Mean over the first `valid_len` rows of concat(Y_v, Y_a), then
/// ReLU(z W_h + b_h) W_o + b_o. Returns logits of length C.
Tensor fuse_and_classify(const Tensor& visual, const Tensor& audio, std::size_t valid_len,
                         const ClassifierParams& head);

/// Two Transformer encoders (visual, audio), temporal mean pooling of their
/// concatenated outputs, one hidden layer, and linear logits.
class VideoClassifier {
 public:
  explicit VideoClassifier(EncoderConfig config);

  const EncoderConfig& config() const { return config_; }
  const ModalityEncoder& visual_encoder() const { return visual_; }
  const ModalityEncoder& audio_encoder() const { return audio_; }

  ModelParams init_params(Rng& rng) const;
  /// Throws Error(kShape) naming the first parameter that does not fit.
  void check_params(const ModelParams& params) const;

  /// Inputs are T x D_v and T x D_a with rows >= valid_len treated as padding.
  Tensor forward(const ModelParams& params, const Tensor& visual, const Tensor& audio, std::size_t valid_len,
                 ModelCache* cache = nullptr, ModelMaps* maps = nullptr) const;
  /// Accumulates dL/dparams into `grads` given dL/dlogits.
  void backward(const ModelParams& params, const ModelCache& cache, const Tensor& d_logits,
                ModelParams& grads) const;

 private:
  EncoderConfig config_;
  ModalityEncoder visual_;
  ModalityEncoder audio_;
};

/// Mean over classes of binary cross-entropy on sigmoid(logits), in the
/// log-sum-exp form.
double bce_loss(const Tensor& logits, const LabelSet& labels);
Tensor bce_loss_grad(const Tensor& logits, const LabelSet& labels);

}  // namespace latn
