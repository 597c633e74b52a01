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

#include "latn/model.hpp"

#include <cmath>

#include "latn/error.hpp"

namespace latn {
namespace {

void require_config(bool ok, const std::string& message) {
  if (!ok) throw Error(ErrorCode::kConfig, message);
}

}  // namespace

void EncoderConfig::validate() const {
  require_config(frames >= 1, "model.frames must be >= 1");
  require_config(heads >= 1, "model.heads must be >= 1");
  require_config(depth >= 1, "model.depth must be >= 1");
  require_config(num_classes >= 1, "model.num_classes must be >= 1");
  require_config(dim_visual >= 1 && dim_visual % heads == 0,
                 "dim_visual must be a positive multiple of model.heads");
  require_config(dim_audio >= 1 && dim_audio % heads == 0,
                 "dim_audio must be a positive multiple of model.heads");
  visual_variant.validate(heads);
  audio_variant.validate(heads);
}

ModelParams ModelParams::zeros_like() const {
  ModelParams out = *this;
  out.for_each([](const std::string&, Tensor& t) { t.fill(0.0); });
  return out;
}

std::size_t ModelParams::scalar_count() const {
  std::size_t n = 0;
  for_each([&n](const std::string&, const Tensor& t) { n += t.size(); });
  return n;
}

Tensor fuse_and_classify(const Tensor& visual, const Tensor& audio, std::size_t valid_len,
                         const ClassifierParams& head) {
  if (visual.rank() != 2 || audio.rank() != 2 || visual.rows() != audio.rows()) {
    throw Error(ErrorCode::kShape, "fuse_and_classify: modalities must share the frame count");
  }
  if (valid_len == 0 || valid_len > visual.rows()) {
    throw Error(ErrorCode::kInvalidArgument, "fuse_and_classify: valid_len must be in [1, T]");
  }
  const std::size_t dv = visual.cols(), da = audio.cols();
  Tensor pooled({1, dv + da});
  for (std::size_t i = 0; i < valid_len; ++i) {
    for (std::size_t j = 0; j < dv; ++j) pooled(0, j) += visual(i, j);
    for (std::size_t j = 0; j < da; ++j) pooled(0, dv + j) += audio(i, j);
  }
  pooled *= 1.0 / static_cast<double>(valid_len);
  const Tensor hidden = relu(affine(pooled, head.w_hidden, head.b_hidden));
  const Tensor logits = affine(hidden, head.w_logits, head.b_logits);
  return Tensor({logits.cols()}, std::vector<double>(logits.data().begin(), logits.data().end()));
}

VideoClassifier::VideoClassifier(EncoderConfig config) : config_(std::move(config)) {
  config_.validate();
  visual_ = ModalityEncoder(config_.frames, config_.dim_visual, config_.heads,
                            config_.ff_dim_for(config_.dim_visual), config_.depth, config_.visual_variant);
  audio_ = ModalityEncoder(config_.frames, config_.dim_audio, config_.heads,
                           config_.ff_dim_for(config_.dim_audio), config_.depth, config_.audio_variant);
}

ModelParams VideoClassifier::init_params(Rng& rng) const {
  ModelParams p;
  p.visual = visual_.init_params(rng);
  p.audio = audio_.init_params(rng);
  const std::size_t pooled = config_.dim_visual + config_.dim_audio;
  const std::size_t hidden = config_.resolved_hidden_dim();
  p.head.w_hidden = glorot_uniform(pooled, hidden, rng);
  p.head.b_hidden = Tensor({hidden});
  p.head.w_logits = glorot_uniform(hidden, config_.num_classes, rng);
  p.head.b_logits = Tensor({config_.num_classes});
  return p;
}

void VideoClassifier::check_params(const ModelParams& params) const {
  Rng rng(0);
  const ModelParams layout = init_params(rng);
  std::vector<std::pair<std::string, std::vector<std::size_t>>> expected, actual;
  layout.for_each([&](const std::string& n, const Tensor& t) { expected.emplace_back(n, t.shape()); });
  params.for_each([&](const std::string& n, const Tensor& t) { actual.emplace_back(n, t.shape()); });
  if (expected.size() != actual.size()) {
    throw Error(ErrorCode::kShape, "model params: expected " + std::to_string(expected.size()) +
                                       " tensors, got " + std::to_string(actual.size()));
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (expected[i] != actual[i]) {
      throw Error(ErrorCode::kShape, "model params: '" + expected[i].first + "' expected " +
                                         shape_string(expected[i].second) + ", got '" + actual[i].first +
                                         "' " + shape_string(actual[i].second));
    }
  }
}

Tensor VideoClassifier::forward(const ModelParams& params, const Tensor& visual, const Tensor& audio,
                                std::size_t valid_len, ModelCache* cache, ModelMaps* maps) const {
  if (valid_len == 0) throw Error(ErrorCode::kInvalidArgument, "forward: valid_len must be >= 1");
  const Tensor yv = visual_.forward(params.visual, visual, valid_len, cache ? &cache->visual : nullptr,
                                    maps ? &maps->visual : nullptr);
  const Tensor ya = audio_.forward(params.audio, audio, valid_len, cache ? &cache->audio : nullptr,
                                   maps ? &maps->audio : nullptr);
  if (cache == nullptr) return fuse_and_classify(yv, ya, valid_len, params.head);

  // Same arithmetic as fuse_and_classify, keeping intermediates.
  const std::size_t dv = yv.cols(), da = ya.cols();
  Tensor pooled({1, dv + da});
  for (std::size_t i = 0; i < valid_len; ++i) {
    for (std::size_t j = 0; j < dv; ++j) pooled(0, j) += yv(i, j);
    for (std::size_t j = 0; j < da; ++j) pooled(0, dv + j) += ya(i, j);
  }
  pooled *= 1.0 / static_cast<double>(valid_len);
  cache->hidden_pre = affine(pooled, params.head.w_hidden, params.head.b_hidden);
  cache->hidden = relu(cache->hidden_pre);
  const Tensor logits = affine(cache->hidden, params.head.w_logits, params.head.b_logits);
  cache->pooled = std::move(pooled);
  cache->valid_len = valid_len;
  cache->filled = true;
  return Tensor({logits.cols()}, std::vector<double>(logits.data().begin(), logits.data().end()));
}

void VideoClassifier::backward(const ModelParams& params, const ModelCache& cache, const Tensor& d_logits,
                               ModelParams& grads) const {
  if (!cache.filled) throw Error(ErrorCode::kMissingCache, "model backward: forward cache is empty");
  if (d_logits.size() != config_.num_classes) throw Error(ErrorCode::kShape, "model backward: d_logits size");
  const Tensor d_out({1, d_logits.size()}, std::vector<double>(d_logits.data().begin(), d_logits.data().end()));

  grads.head.w_logits += matmul_at_b(cache.hidden, d_out);
  grads.head.b_logits += Tensor({d_logits.size()}, std::vector<double>(d_out.data().begin(), d_out.data().end()));
  Tensor d_hidden = matmul_a_bt(d_out, params.head.w_logits);
  for (std::size_t j = 0; j < d_hidden.size(); ++j)
    if (!(cache.hidden_pre[j] > 0.0)) d_hidden[j] = 0.0;
  grads.head.w_hidden += matmul_at_b(cache.pooled, d_hidden);
  grads.head.b_hidden +=
      Tensor({d_hidden.size()}, std::vector<double>(d_hidden.data().begin(), d_hidden.data().end()));
  const Tensor d_pooled = matmul_a_bt(d_hidden, params.head.w_hidden);

  const std::size_t frames = config_.frames, dv = config_.dim_visual, da = config_.dim_audio;
  const double inv = 1.0 / static_cast<double>(cache.valid_len);
  Tensor d_yv({frames, dv}), d_ya({frames, da});
  for (std::size_t i = 0; i < cache.valid_len; ++i) {
    for (std::size_t j = 0; j < dv; ++j) d_yv(i, j) = d_pooled(0, j) * inv;
    for (std::size_t j = 0; j < da; ++j) d_ya(i, j) = d_pooled(0, dv + j) * inv;
  }
  visual_.backward(params.visual, cache.visual, d_yv, grads.visual);
  audio_.backward(params.audio, cache.audio, d_ya, grads.audio);
}

double bce_loss(const Tensor& logits, const LabelSet& labels) {
  const std::size_t classes = logits.size();
  std::vector<double> target(classes, 0.0);
  for (std::size_t c : labels) {
    if (c >= classes) throw Error(ErrorCode::kInvalidArgument, "bce_loss: label out of range");
    target[c] = 1.0;
  }
  double total = 0.0;
  for (std::size_t c = 0; c < classes; ++c) {
    const double z = logits[c];
    total += std::max(z, 0.0) - z * target[c] + std::log1p(std::exp(-std::abs(z)));
  }
  return total / static_cast<double>(classes);
}

Tensor bce_loss_grad(const Tensor& logits, const LabelSet& labels) {
  const std::size_t classes = logits.size();
  Tensor grad({classes});
  for (std::size_t c = 0; c < classes; ++c) grad[c] = sigmoid(logits[c]);
  for (std::size_t c : labels) {
    if (c >= classes) throw Error(ErrorCode::kInvalidArgument, "bce_loss_grad: label out of range");
    grad[c] -= 1.0;
  }
  grad *= 1.0 / static_cast<double>(classes);
  return grad;
}

}  // namespace latn
