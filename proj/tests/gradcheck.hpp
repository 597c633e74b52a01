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

// Finite-difference checks of the model's analytic gradients on random
// micro-instances (T <= 6, D <= 8, M <= 2, C <= 4).

#include <string>

#include "latn/model.hpp"
#include "latn/random.hpp"
#include "latn/tensor.hpp"

namespace latn::testing {

struct MicroInstance {
  EncoderConfig config;
  ModelParams params;
  Tensor visual, audio;
  std::size_t valid_len = 0;
  LabelSet labels;
};

inline MaskSpec random_mask_spec(Rng& rng, std::size_t frames) {
  MaskSpec s;
  switch (rng.integer(0, 2)) {
    case 0:
      s.family = MaskFamily::kBlockDiagonal;
      s.window = static_cast<std::size_t>(rng.integer(1, static_cast<std::int64_t>(frames)));
      break;
    case 1:
      s.family = MaskFamily::kToeplitz;
      s.window = static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(frames)));
      break;
    default:
      s.family = MaskFamily::kToeplitzDilated;
      s.window = static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(frames)));
      s.dilation = static_cast<std::size_t>(rng.integer(1, 3));
      break;
  }
  return s;
}

inline VariantConfig random_variant(AttentionMode mode, std::size_t heads, std::size_t frames, Rng& rng) {
  VariantConfig v;
  v.mode = mode;
  if (mode == AttentionMode::kShareAtt) {
    for (std::size_t m = 0; m < heads / 2; ++m) v.masks.push_back(random_mask_spec(rng, frames));
  } else if (mode != AttentionMode::kBaseline) {
    v.masks.push_back(random_mask_spec(rng, frames));
  }
  return v;
}

inline MicroInstance random_micro_instance(AttentionMode mode, Rng& rng, bool renormalize = false) {
  MicroInstance inst;
  EncoderConfig& c = inst.config;
  c.frames = static_cast<std::size_t>(rng.integer(2, 6));
  c.heads = mode == AttentionMode::kShareAtt ? 2 : static_cast<std::size_t>(rng.integer(1, 2));
  // D >= 3: layer norm over one or two features is (nearly) constant, which
  // would leave the attention gradients at round-off level.
  const auto pick_dim = [&] {
    const auto per_head = static_cast<std::size_t>(rng.integer(static_cast<std::int64_t>(c.heads == 1 ? 3 : 2),
                                                               static_cast<std::int64_t>(8 / c.heads)));
    return c.heads * per_head;
  };
  c.dim_visual = pick_dim();
  c.dim_audio = pick_dim();
  c.num_classes = static_cast<std::size_t>(rng.integer(2, 4));
  c.ff_dim = static_cast<std::size_t>(rng.integer(3, 8));
  c.hidden_dim = static_cast<std::size_t>(rng.integer(3, 8));
  c.visual_variant = random_variant(mode, c.heads, c.frames, rng);
  c.audio_variant = random_variant(mode, c.heads, c.frames, rng);
  if (mode == AttentionMode::kGateAtt) {
    c.visual_variant.renormalize_fused = c.audio_variant.renormalize_fused = renormalize;
  }

  const VideoClassifier model(c);
  inst.params = model.init_params(rng);
  // Move gains and biases off their initial 1/0 so every path is exercised.
  inst.params.for_each([&rng](const std::string& name, Tensor& t) {
    if (name.find("gain") != std::string::npos || name.find(".b") != std::string::npos) {
      for (double& v : t.data()) v += rng.uniform(-0.5, 0.5);
    }
  });
  // A positive hidden bias keeps the ReLU layer alive; a dead one zeroes every
  // upstream gradient and the instance checks nothing.
  for (double& v : inst.params.head.b_hidden.data()) v += 1.0;
  inst.visual = random_normal({c.frames, c.dim_visual}, rng);
  inst.audio = random_normal({c.frames, c.dim_audio}, rng);
  // At least two valid rows, else query/key gradients vanish identically.
  inst.valid_len = static_cast<std::size_t>(rng.integer(2, static_cast<std::int64_t>(c.frames)));
  for (std::size_t k = 0; k < c.num_classes; ++k)
    if (rng.integer(0, 1) == 1) inst.labels.push_back(k);
  return inst;
}

inline constexpr double kZeroGradientTolerance = 1e-9;

struct GradCheckResult {
  double worst_relative_error = 0.0;
  std::string worst_tensor;
  std::size_t zero_tensors = 0;  // exactly-zero analytic gradients, checked absolutely
};

/// Compares backward() against central differences of the BCE loss for every
/// parameter tensor; reports the largest per-tensor relative error
/// ||analytic - numeric|| / max(||analytic||, ||numeric||).
inline GradCheckResult check_model_gradients(const MicroInstance& inst) {
  const VideoClassifier model(inst.config);
  ModelCache cache;
  const Tensor logits = model.forward(inst.params, inst.visual, inst.audio, inst.valid_len, &cache);
  ModelParams analytic = inst.params.zeros_like();
  model.backward(inst.params, cache, bce_loss_grad(logits, inst.labels), analytic);

  std::vector<const Tensor*> grads;
  analytic.for_each([&grads](const std::string&, const Tensor& t) { grads.push_back(&t); });

  GradCheckResult result;
  std::size_t k = 0;
  ModelParams probe = inst.params;
  probe.for_each([&](const std::string& name, Tensor& slot) {
    const Tensor original = slot;
    auto loss_at = [&](const Tensor& value) {
      slot = value;
      const double loss = bce_loss(model.forward(probe, inst.visual, inst.audio, inst.valid_len), inst.labels);
      return loss;
    };
    const Tensor numeric = finite_diff_grad(loss_at, original);
    slot = original;
    const Tensor& a = *grads[k++];
    if (a.empty()) return;  // parameter unused by this mode
    // An analytic gradient that is exactly zero (e.g. a gate whose two maps
    // coincide on a short sequence) has no relative scale; it is accepted when
    // the central difference is zero up to its round-off.
    if (frobenius_norm(a) == 0.0 && max_abs_diff(a, numeric) < kZeroGradientTolerance) {
      ++result.zero_tensors;
      return;
    }
    const double err = relative_error(a, numeric);
    if (err > result.worst_relative_error) {
      result.worst_relative_error = err;
      result.worst_tensor = name;
    }
  });
  return result;
}

}  // namespace latn::testing
