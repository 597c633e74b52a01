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
#include <optional>
#include <string>
#include <vector>

#include "latn/mask.hpp"
#include "latn/random.hpp"
#include "latn/tensor.hpp"

namespace latn {

/// How global and local attention maps are combined inside one layer.
enum class AttentionMode {
  kBaseline,  // every head global
  kShareAtt,  // first M/2 heads global, remaining M/2 local
  kGateAtt,   // every head computes both maps, fused by a learned gate on the maps
  kGateOp,    // every head computes both maps, fused after the value product
  kLocal,     // every head local with one shared mask
};

std::string to_string(AttentionMode mode);
AttentionMode parse_attention_mode(const std::string& text);

struct VariantConfig {
  AttentionMode mode = AttentionMode::kBaseline;
  /// kShareAtt: one spec per local head (M/2 of them).
  /// kGateAtt, kGateOp, kLocal: exactly one spec, used by every head.
  std::vector<MaskSpec> masks;
  /// kGateAtt only: divide each fused row by its sum. Off by default, which
  /// leaves the fused rows summing to something other than 1 in general.
  bool renormalize_fused = false;

  /// Throws Error(kConfig) if the mask list does not fit the mode.
  void validate(std::size_t heads) const;

  friend bool operator==(const VariantConfig&, const VariantConfig&) = default;
};

struct MhsaParams {
  std::size_t heads = 1;
  std::vector<Tensor> w_query;  // per head, D x D_M
  std::vector<Tensor> w_key;
  std::vector<Tensor> w_value;
  Tensor w_out;  // D x D; unused (empty) under kGateOp

  static MhsaParams init(std::size_t dim, std::size_t heads, bool with_output, Rng& rng);
  std::size_t model_dim() const { return w_query.front().rows(); }
  std::size_t head_dim() const { return w_query.front().cols(); }
};

/// Gate weights applied to the attention maps; tied to a fixed frame count.
struct GateAttParams {
  Tensor w_global;  // T x T
  Tensor w_local;   // T x T

  static GateAttParams init(std::size_t frames, Rng& rng);
};

struct GateOpParams {
  Tensor w_out_global;  // D x D
  Tensor w_out_local;   // D x D
  Tensor w_global;      // D x D, gate logits from the global representation
  Tensor w_local;       // D x D, gate logits from the local representation

  static GateOpParams init(std::size_t dim, Rng& rng);
};

/// Everything one attention layer may learn. Unused parts stay empty.
struct AttentionParams {
  MhsaParams mhsa;
  GateAttParams gate_att;
  GateOpParams gate_op;

  /// Calls f(name, tensor) for every non-empty parameter in a fixed order.
  template <class F>
  void for_each(F&& f) { visit(*this, f); }
  template <class F>
  void for_each(F&& f) const { visit(*this, f); }

  AttentionParams zeros_like() const;

 private:
  template <class Self, class F>
  static void visit(Self& self, F& f) {
    for (std::size_t m = 0; m < self.mhsa.heads; ++m) {
      const std::string h = std::to_string(m);
      f("w_query." + h, self.mhsa.w_query[m]);
      f("w_key." + h, self.mhsa.w_key[m]);
      f("w_value." + h, self.mhsa.w_value[m]);
    }
    auto maybe = [&f](const char* name, auto& t) {
      if (!t.empty()) f(std::string(name), t);
    };
    maybe("w_out", self.mhsa.w_out);
    maybe("gate_att.w_global", self.gate_att.w_global);
    maybe("gate_att.w_local", self.gate_att.w_local);
    maybe("gate_op.w_out_global", self.gate_op.w_out_global);
    maybe("gate_op.w_out_local", self.gate_op.w_out_local);
    maybe("gate_op.w_global", self.gate_op.w_global);
    maybe("gate_op.w_local", self.gate_op.w_local);
  }
};

struct QkvProjection {
  Tensor query;
  Tensor key;
  Tensor value;
};

/// Q_m = X W_q[m], K_m = X W_k[m], V_m = X W_v[m].
QkvProjection project_qkv(const Tensor& x, const MhsaParams& params, std::size_t head);

/// softmax(Q K^T / sqrt(D_M)) with forbidden entries of `mask` removed.
/// A null mask yields the global map.
Tensor attention_map(const Tensor& query, const Tensor& key, const AttentionMask* mask = nullptr);

/// O_m = A_m V_m.
Tensor head_output(const Tensor& map, const Tensor& value);

/// Gate over a pair of maps: R_g, R_l = softmax over the pair
/// (A_g W_global, A_l W_local); A = R_g * A_g + R_l * A_l elementwise.
struct GatedMap {
  Tensor fused;
  Tensor gate_global;  // R_g; R_l = 1 - R_g
};
GatedMap gate_attention_maps(const Tensor& global_map, const Tensor& local_map,
                             const GateAttParams& params, bool renormalize = false);

/// Gate over contextual representations. Each head's global and local maps
/// multiply that head's values; the concatenations are projected, and a
/// gate computed from them mixes the two projections.
struct GatedOutput {
  Tensor output;       // T x D
  Tensor gate_global;  // T x D
};
GatedOutput gate_outputs(const std::vector<Tensor>& global_maps, const std::vector<Tensor>& local_maps,
                         const std::vector<Tensor>& values, const GateOpParams& params);

/// Per-head maps kept for analysis. Which lists are populated depends on the mode.
struct AttentionMaps {
  std::vector<Tensor> global;  // heads using an unmasked map
  std::vector<Tensor> local;   // heads using a masked map
  std::vector<Tensor> fused;   // kGateAtt only
};

struct MhsaResult {
  Tensor output;
  AttentionMaps maps;
};

/// Plain multi-head self-attention for kBaseline, kShareAtt and kLocal.
MhsaResult mhsa_forward(const Tensor& x, const MhsaParams& params, const VariantConfig& config);

/// Intermediates saved by AttentionLayer::forward for the backward pass.
struct AttentionCache {
  struct Head {
    QkvProjection qkv;
    Tensor global_map;
    Tensor local_map;
    Tensor unnormalized;  // kGateAtt: fused map before optional renormalization
    Tensor fused_map;     // kGateAtt
    Tensor gate_global;   // kGateAtt
    Tensor output;        // O_m under every mode except kGateOp
  };
  bool filled = false;
  Tensor input;
  std::vector<Head> heads;
  Tensor concat;          // concat(O_1..O_M), not under kGateOp
  Tensor concat_global;   // kGateOp
  Tensor concat_local;    // kGateOp
  Tensor out_global;      // kGateOp
  Tensor out_local;       // kGateOp
  Tensor gate_global;     // kGateOp, T x D
};

/// Mode and masks of one attention layer. Parameters are passed in so that
/// gradients can live in a second AttentionParams of the same layout.
class AttentionLayer {
 public:
  AttentionLayer() = default;
  AttentionLayer(std::size_t frames, std::size_t heads, VariantConfig config);

  std::size_t frames() const { return frames_; }
  std::size_t heads() const { return heads_; }
  const VariantConfig& config() const { return config_; }

  /// Fresh parameters for this mode: Glorot-uniform, no biases.
  AttentionParams init_params(std::size_t dim, Rng& rng) const;
  /// Throws Error(kShape) if `params` does not fit this layer.
  void check_params(const AttentionParams& params) const;

  /// Rows at or beyond `valid_len` are padding: no real row attends to them.
  Tensor forward(const AttentionParams& params, const Tensor& x, std::size_t valid_len,
                 AttentionCache* cache = nullptr, AttentionMaps* maps = nullptr) const;

  /// Accumulates parameter gradients into `grads` and returns dL/dX.
  Tensor backward(const AttentionParams& params, const AttentionCache& cache, const Tensor& upstream,
                  AttentionParams& grads) const;

  /// Local mask for head m, or nullopt when that head is global.
  const std::optional<AttentionMask>& local_mask(std::size_t head) const { return local_masks_.at(head); }

 private:
  std::size_t frames_ = 0;
  std::size_t heads_ = 0;
  VariantConfig config_;
  std::vector<std::optional<AttentionMask>> local_masks_;
};

}  // namespace latn
