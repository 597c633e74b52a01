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

#include "latn/attention.hpp"

#include <cmath>

#include "latn/error.hpp"

namespace latn {
namespace {

bool uses_both_maps(AttentionMode mode) {
  return mode == AttentionMode::kGateAtt || mode == AttentionMode::kGateOp;
}

void require_shape(const Tensor& t, std::size_t rows, std::size_t cols, const char* what) {
  if (t.rank() != 2 || t.rows() != rows || t.cols() != cols) {
    throw Error(ErrorCode::kShape, std::string(what) + ": expected [" + std::to_string(rows) + "x" +
                                       std::to_string(cols) + "], got " + shape_string(t.shape()));
  }
}

struct GateDetail {
  Tensor unnormalized;
  Tensor fused;
  Tensor gate_global;
};

// Two-way softmax over (z_g, z_l) is sigmoid(z_g - z_l) for the global share.
Tensor pair_softmax_global(const Tensor& z_global, const Tensor& z_local) {
  Tensor gate = Tensor::zeros_like(z_global);
  for (std::size_t i = 0; i < gate.size(); ++i) gate[i] = sigmoid(z_global[i] - z_local[i]);
  return gate;
}

Tensor blend(const Tensor& gate_global, const Tensor& a_global, const Tensor& a_local) {
  Tensor out = Tensor::zeros_like(a_global);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = gate_global[i] * a_global[i] + (1.0 - gate_global[i]) * a_local[i];
  return out;
}

GateDetail gate_maps_detail(const Tensor& global_map, const Tensor& local_map,
                            const GateAttParams& params, bool renormalize) {
  if (global_map.shape() != local_map.shape()) {
    throw Error(ErrorCode::kShape, "gate_attention_maps: global/local map shapes differ");
  }
  const std::size_t t = global_map.rows();
  require_shape(global_map, t, t, "gate_attention_maps: map");
  require_shape(params.w_global, t, t, "gate_attention_maps: w_global");
  require_shape(params.w_local, t, t, "gate_attention_maps: w_local");

  GateDetail d;
  d.gate_global = pair_softmax_global(matmul(global_map, params.w_global),
                                      matmul(local_map, params.w_local));
  d.unnormalized = blend(d.gate_global, global_map, local_map);
  d.fused = d.unnormalized;
  if (renormalize) {
    for (std::size_t i = 0; i < t; ++i) {
      double total = 0.0;
      for (double v : d.fused.row(i)) total += v;
      for (double& v : d.fused.row(i)) v /= total;
    }
  }
  return d;
}

struct OutputGateDetail {
  Tensor concat_global;
  Tensor concat_local;
  Tensor out_global;
  Tensor out_local;
  Tensor gate_global;
  Tensor output;
};

OutputGateDetail gate_outputs_detail(const std::vector<Tensor>& global_maps,
                                     const std::vector<Tensor>& local_maps,
                                     const std::vector<Tensor>& values, const GateOpParams& params) {
  if (global_maps.size() != values.size() || local_maps.size() != values.size() || values.empty()) {
    throw Error(ErrorCode::kShape, "gate_outputs: need one global map, local map and value per head");
  }
  std::vector<Tensor> heads_global, heads_local;
  for (std::size_t m = 0; m < values.size(); ++m) {
    heads_global.push_back(head_output(global_maps[m], values[m]));
    heads_local.push_back(head_output(local_maps[m], values[m]));
  }
  OutputGateDetail d;
  d.concat_global = concat_cols(heads_global);
  d.concat_local = concat_cols(heads_local);
  const std::size_t dim = d.concat_global.cols();
  require_shape(params.w_out_global, dim, dim, "gate_outputs: w_out_global");
  require_shape(params.w_out_local, dim, dim, "gate_outputs: w_out_local");
  require_shape(params.w_global, dim, dim, "gate_outputs: w_global");
  require_shape(params.w_local, dim, dim, "gate_outputs: w_local");

  d.out_global = matmul(d.concat_global, params.w_out_global);
  d.out_local = matmul(d.concat_local, params.w_out_local);
  d.gate_global = pair_softmax_global(matmul(d.concat_global, params.w_global),
                                      matmul(d.concat_local, params.w_local));
  d.output = blend(d.gate_global, d.out_global, d.out_local);
  return d;
}

// Gradient of a row renormalization fused = raw / rowsum(raw).
Tensor renormalize_backward(const Tensor& fused, const Tensor& raw, const Tensor& upstream) {
  Tensor out = Tensor::zeros_like(raw);
  for (std::size_t i = 0; i < raw.rows(); ++i) {
    double total = 0.0, inner = 0.0;
    for (std::size_t j = 0; j < raw.cols(); ++j) {
      total += raw(i, j);
      inner += upstream(i, j) * fused(i, j);
    }
    for (std::size_t j = 0; j < raw.cols(); ++j) out(i, j) = (upstream(i, j) - inner) / total;
  }
  return out;
}

}  // namespace

std::string to_string(AttentionMode mode) {
  switch (mode) {
    case AttentionMode::kBaseline: return "baseline";
    case AttentionMode::kShareAtt: return "shareatt";
    case AttentionMode::kGateAtt: return "gateatt";
    case AttentionMode::kGateOp: return "gateop";
    case AttentionMode::kLocal: return "local";
  }
  return "?";
}

AttentionMode parse_attention_mode(const std::string& text) {
  for (AttentionMode m : {AttentionMode::kBaseline, AttentionMode::kShareAtt, AttentionMode::kGateAtt,
                          AttentionMode::kGateOp, AttentionMode::kLocal}) {
    if (to_string(m) == text) return m;
  }
  throw Error(ErrorCode::kConfig, "unknown attention variant '" + text +
                                      "' (expected baseline|shareatt|gateatt|gateop|local)");
}

void VariantConfig::validate(std::size_t heads) const {
  const std::string name = to_string(mode);
  switch (mode) {
    case AttentionMode::kBaseline:
      if (!masks.empty()) throw Error(ErrorCode::kConfig, "variant baseline takes no masks");
      break;
    case AttentionMode::kShareAtt:
      if (heads % 2 != 0) throw Error(ErrorCode::kConfig, "variant shareatt needs an even head count");
      if (masks.size() != heads / 2) {
        throw Error(ErrorCode::kConfig, "variant shareatt needs " + std::to_string(heads / 2) +
                                            " masks (one per local head), got " +
                                            std::to_string(masks.size()));
      }
      break;
    case AttentionMode::kGateAtt:
    case AttentionMode::kGateOp:
    case AttentionMode::kLocal:
      if (masks.size() != 1) {
        throw Error(ErrorCode::kConfig, "variant " + name + " needs exactly one mask, got " +
                                            std::to_string(masks.size()));
      }
      break;
  }
  if (renormalize_fused && mode != AttentionMode::kGateAtt) {
    throw Error(ErrorCode::kConfig, "renormalize_fused only applies to gateatt");
  }
}

MhsaParams MhsaParams::init(std::size_t dim, std::size_t heads, bool with_output, Rng& rng) {
  if (heads == 0 || dim % heads != 0) {
    throw Error(ErrorCode::kConfig, "model dim " + std::to_string(dim) +
                                        " is not divisible by head count " + std::to_string(heads));
  }
  MhsaParams p;
  p.heads = heads;
  const std::size_t head_dim = dim / heads;
  for (std::size_t m = 0; m < heads; ++m) {
    p.w_query.push_back(glorot_uniform(dim, head_dim, rng));
    p.w_key.push_back(glorot_uniform(dim, head_dim, rng));
    p.w_value.push_back(glorot_uniform(dim, head_dim, rng));
  }
  if (with_output) p.w_out = glorot_uniform(dim, dim, rng);
  return p;
}

GateAttParams GateAttParams::init(std::size_t frames, Rng& rng) {
  GateAttParams p;
  p.w_global = glorot_uniform(frames, frames, rng);
  p.w_local = glorot_uniform(frames, frames, rng);
  return p;
}

GateOpParams GateOpParams::init(std::size_t dim, Rng& rng) {
  GateOpParams p;
  p.w_out_global = glorot_uniform(dim, dim, rng);
  p.w_out_local = glorot_uniform(dim, dim, rng);
  p.w_global = glorot_uniform(dim, dim, rng);
  p.w_local = glorot_uniform(dim, dim, rng);
  return p;
}

AttentionParams AttentionParams::zeros_like() const {
  AttentionParams out = *this;
  out.for_each([](const std::string&, Tensor& t) { t.fill(0.0); });
  return out;
}

QkvProjection project_qkv(const Tensor& x, const MhsaParams& params, std::size_t head) {
  if (head >= params.heads) throw Error(ErrorCode::kInvalidArgument, "project_qkv: head out of range");
  return {matmul(x, params.w_query[head]), matmul(x, params.w_key[head]),
          matmul(x, params.w_value[head])};
}

Tensor attention_map(const Tensor& query, const Tensor& key, const AttentionMask* mask) {
  if (query.shape() != key.shape()) throw Error(ErrorCode::kShape, "attention_map: Q and K differ in shape");
  Tensor logits = matmul_a_bt(query, key);
  logits *= 1.0 / std::sqrt(static_cast<double>(query.cols()));
  return masked_row_softmax(logits, mask);
}

Tensor head_output(const Tensor& map, const Tensor& value) { return matmul(map, value); }

GatedMap gate_attention_maps(const Tensor& global_map, const Tensor& local_map,
                             const GateAttParams& params, bool renormalize) {
  GateDetail d = gate_maps_detail(global_map, local_map, params, renormalize);
  return {std::move(d.fused), std::move(d.gate_global)};
}

GatedOutput gate_outputs(const std::vector<Tensor>& global_maps, const std::vector<Tensor>& local_maps,
                         const std::vector<Tensor>& values, const GateOpParams& params) {
  OutputGateDetail d = gate_outputs_detail(global_maps, local_maps, values, params);
  return {std::move(d.output), std::move(d.gate_global)};
}

MhsaResult mhsa_forward(const Tensor& x, const MhsaParams& params, const VariantConfig& config) {
  if (uses_both_maps(config.mode)) {
    throw Error(ErrorCode::kConfig, "mhsa_forward handles baseline, shareatt and local only");
  }
  if (x.rank() != 2) throw Error(ErrorCode::kShape, "mhsa_forward: X must be a matrix");
  AttentionLayer layer(x.rows(), params.heads, config);
  MhsaResult result;
  result.output = layer.forward(AttentionParams{params, {}, {}}, x, x.rows(), nullptr, &result.maps);
  return result;
}

AttentionLayer::AttentionLayer(std::size_t frames, std::size_t heads, VariantConfig config)
    : frames_(frames), heads_(heads), config_(std::move(config)) {
  if (frames_ == 0) throw Error(ErrorCode::kConfig, "attention layer needs at least one frame");
  if (heads_ == 0) throw Error(ErrorCode::kConfig, "attention layer needs at least one head");
  config_.validate(heads_);
  local_masks_.assign(heads_, std::nullopt);
  switch (config_.mode) {
    case AttentionMode::kBaseline: break;
    case AttentionMode::kShareAtt:
      for (std::size_t m = heads_ / 2; m < heads_; ++m)
        local_masks_[m] = make_mask(config_.masks[m - heads_ / 2], frames_);
      break;
    case AttentionMode::kGateAtt:
    case AttentionMode::kGateOp:
    case AttentionMode::kLocal:
      for (std::size_t m = 0; m < heads_; ++m) local_masks_[m] = make_mask(config_.masks[0], frames_);
      break;
  }
}

AttentionParams AttentionLayer::init_params(std::size_t dim, Rng& rng) const {
  AttentionParams params;
  params.mhsa = MhsaParams::init(dim, heads_, config_.mode != AttentionMode::kGateOp, rng);
  if (config_.mode == AttentionMode::kGateAtt) params.gate_att = GateAttParams::init(frames_, rng);
  if (config_.mode == AttentionMode::kGateOp) params.gate_op = GateOpParams::init(dim, rng);
  return params;
}

void AttentionLayer::check_params(const AttentionParams& params) const {
  const MhsaParams& mhsa = params.mhsa;
  if (mhsa.heads != heads_ || mhsa.w_query.size() != heads_ || mhsa.w_key.size() != heads_ ||
      mhsa.w_value.size() != heads_) {
    throw Error(ErrorCode::kShape, "attention params: per-head weight count mismatch");
  }
  const std::size_t dim = mhsa.model_dim();
  const std::size_t head_dim = mhsa.head_dim();
  if (head_dim * heads_ != dim) throw Error(ErrorCode::kShape, "attention params: D != M * D_M");
  for (std::size_t m = 0; m < heads_; ++m) {
    require_shape(mhsa.w_query[m], dim, head_dim, "w_query");
    require_shape(mhsa.w_key[m], dim, head_dim, "w_key");
    require_shape(mhsa.w_value[m], dim, head_dim, "w_value");
  }
  if (config_.mode == AttentionMode::kGateOp) {
    require_shape(params.gate_op.w_out_global, dim, dim, "gate_op.w_out_global");
    require_shape(params.gate_op.w_out_local, dim, dim, "gate_op.w_out_local");
    require_shape(params.gate_op.w_global, dim, dim, "gate_op.w_global");
    require_shape(params.gate_op.w_local, dim, dim, "gate_op.w_local");
  } else {
    require_shape(mhsa.w_out, dim, dim, "w_out");
  }
  if (config_.mode == AttentionMode::kGateAtt) {
    require_shape(params.gate_att.w_global, frames_, frames_, "gate_att.w_global");
    require_shape(params.gate_att.w_local, frames_, frames_, "gate_att.w_local");
  }
}

Tensor AttentionLayer::forward(const AttentionParams& params, const Tensor& x, std::size_t valid_len,
                               AttentionCache* cache, AttentionMaps* maps) const {
  check_params(params);
  const std::size_t dim = params.mhsa.model_dim();
  require_shape(x, frames_, dim, "attention forward: X");
  if (valid_len == 0 || valid_len > frames_) {
    throw Error(ErrorCode::kInvalidArgument, "attention forward: valid_len must be in [1, T]");
  }
  const bool padded = valid_len < frames_;
  const std::optional<AttentionMask> global_mask =
      padded ? std::optional<AttentionMask>(padding_mask(frames_, valid_len)) : std::nullopt;
  const AttentionMask* global_ptr = global_mask ? &*global_mask : nullptr;
  const bool both = uses_both_maps(config_.mode);

  std::vector<AttentionCache::Head> heads(params.mhsa.heads);
  for (std::size_t m = 0; m < heads.size(); ++m) {
    AttentionCache::Head& h = heads[m];
    h.qkv = project_qkv(x, params.mhsa, m);
    const std::optional<AttentionMask>& base = local_masks_[m];
    if (!base || both) h.global_map = attention_map(h.qkv.query, h.qkv.key, global_ptr);
    if (base) {
      const AttentionMask local = padded ? base->with_padding(valid_len) : *base;
      h.local_map = attention_map(h.qkv.query, h.qkv.key, &local);
    }
    if (config_.mode == AttentionMode::kGateAtt) {
      GateDetail g = gate_maps_detail(h.global_map, h.local_map, params.gate_att, config_.renormalize_fused);
      h.unnormalized = std::move(g.unnormalized);
      h.fused_map = std::move(g.fused);
      h.gate_global = std::move(g.gate_global);
      h.output = head_output(h.fused_map, h.qkv.value);
    } else if (config_.mode != AttentionMode::kGateOp) {
      h.output = head_output(base ? h.local_map : h.global_map, h.qkv.value);
    }
    if (maps != nullptr) {
      if (!h.global_map.empty()) maps->global.push_back(h.global_map);
      if (!h.local_map.empty()) maps->local.push_back(h.local_map);
      if (!h.fused_map.empty()) maps->fused.push_back(h.fused_map);
    }
  }

  Tensor y;
  AttentionCache local_cache;
  AttentionCache& c = cache != nullptr ? *cache : local_cache;
  c = AttentionCache{};
  if (config_.mode == AttentionMode::kGateOp) {
    std::vector<Tensor> globals, locals, values;
    for (const auto& h : heads) {
      globals.push_back(h.global_map);
      locals.push_back(h.local_map);
      values.push_back(h.qkv.value);
    }
    OutputGateDetail d = gate_outputs_detail(globals, locals, values, params.gate_op);
    y = d.output;
    if (cache != nullptr) {
      c.concat_global = std::move(d.concat_global);
      c.concat_local = std::move(d.concat_local);
      c.out_global = std::move(d.out_global);
      c.out_local = std::move(d.out_local);
      c.gate_global = std::move(d.gate_global);
    }
  } else {
    std::vector<Tensor> outputs;
    outputs.reserve(heads.size());
    for (const auto& h : heads) outputs.push_back(h.output);
    Tensor concat = concat_cols(outputs);
    y = matmul(concat, params.mhsa.w_out);
    if (cache != nullptr) c.concat = std::move(concat);
  }
  if (cache != nullptr) {
    c.filled = true;
    c.input = x;
    c.heads = std::move(heads);
  }
  return y;
}

Tensor AttentionLayer::backward(const AttentionParams& params, const AttentionCache& cache,
                                const Tensor& upstream, AttentionParams& grads) const {
  if (!cache.filled) throw Error(ErrorCode::kMissingCache, "attention backward: forward cache is empty");
  check_params(params);
  check_params(grads);
  const std::size_t dim = params.mhsa.model_dim();
  const std::size_t head_dim = params.mhsa.head_dim();
  require_shape(upstream, frames_, dim, "attention backward: upstream");
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
  const Tensor& x = cache.input;
  Tensor dx({frames_, dim});

  // Per-head gradient w.r.t. that head's output block(s).
  std::vector<Tensor> d_out_global(params.mhsa.heads), d_out_local(params.mhsa.heads);
  if (config_.mode == AttentionMode::kGateOp) {
    const GateOpParams& p = params.gate_op;
    const Tensor& r = cache.gate_global;
    Tensor d_yg = Tensor::zeros_like(upstream), d_yl = Tensor::zeros_like(upstream),
           d_z = Tensor::zeros_like(upstream);
    for (std::size_t i = 0; i < upstream.size(); ++i) {
      d_yg[i] = upstream[i] * r[i];
      d_yl[i] = upstream[i] * (1.0 - r[i]);
      const double d_r = upstream[i] * (cache.out_global[i] - cache.out_local[i]);
      d_z[i] = d_r * r[i] * (1.0 - r[i]);
    }
    grads.gate_op.w_out_global += matmul_at_b(cache.concat_global, d_yg);
    grads.gate_op.w_out_local += matmul_at_b(cache.concat_local, d_yl);
    grads.gate_op.w_global += matmul_at_b(cache.concat_global, d_z);
    grads.gate_op.w_local -= matmul_at_b(cache.concat_local, d_z);
    const Tensor d_og = matmul_a_bt(d_yg, p.w_out_global) + matmul_a_bt(d_z, p.w_global);
    const Tensor d_ol = matmul_a_bt(d_yl, p.w_out_local) - matmul_a_bt(d_z, p.w_local);
    for (std::size_t m = 0; m < params.mhsa.heads; ++m) {
      d_out_global[m] = slice_cols(d_og, m * head_dim, head_dim);
      d_out_local[m] = slice_cols(d_ol, m * head_dim, head_dim);
    }
  } else {
    grads.mhsa.w_out += matmul_at_b(cache.concat, upstream);
    const Tensor d_concat = matmul_a_bt(upstream, params.mhsa.w_out);
    for (std::size_t m = 0; m < params.mhsa.heads; ++m)
      d_out_global[m] = slice_cols(d_concat, m * head_dim, head_dim);
  }

  for (std::size_t m = 0; m < params.mhsa.heads; ++m) {
    const AttentionCache::Head& h = cache.heads[m];
    Tensor d_value({frames_, head_dim});
    Tensor d_logits({frames_, frames_});
    switch (config_.mode) {
      case AttentionMode::kGateOp: {
        d_value += matmul_at_b(h.global_map, d_out_global[m]);
        d_value += matmul_at_b(h.local_map, d_out_local[m]);
        d_logits += row_softmax_backward(h.global_map, matmul_a_bt(d_out_global[m], h.qkv.value));
        d_logits += row_softmax_backward(h.local_map, matmul_a_bt(d_out_local[m], h.qkv.value));
        break;
      }
      case AttentionMode::kGateAtt: {
        d_value += matmul_at_b(h.fused_map, d_out_global[m]);
        Tensor d_fused = matmul_a_bt(d_out_global[m], h.qkv.value);
        if (config_.renormalize_fused) d_fused = renormalize_backward(h.fused_map, h.unnormalized, d_fused);
        const Tensor& r = h.gate_global;
        Tensor d_ag = Tensor::zeros_like(d_fused), d_al = Tensor::zeros_like(d_fused),
               d_z = Tensor::zeros_like(d_fused);
        for (std::size_t i = 0; i < d_fused.size(); ++i) {
          d_ag[i] = d_fused[i] * r[i];
          d_al[i] = d_fused[i] * (1.0 - r[i]);
          const double d_r = d_fused[i] * (h.global_map[i] - h.local_map[i]);
          d_z[i] = d_r * r[i] * (1.0 - r[i]);
        }
        grads.gate_att.w_global += matmul_at_b(h.global_map, d_z);
        grads.gate_att.w_local -= matmul_at_b(h.local_map, d_z);
        d_ag += matmul_a_bt(d_z, params.gate_att.w_global);
        d_al -= matmul_a_bt(d_z, params.gate_att.w_local);
        d_logits += row_softmax_backward(h.global_map, d_ag);
        d_logits += row_softmax_backward(h.local_map, d_al);
        break;
      }
      default: {
        const Tensor& map = local_masks_[m] ? h.local_map : h.global_map;
        d_value += matmul_at_b(map, d_out_global[m]);
        d_logits += row_softmax_backward(map, matmul_a_bt(d_out_global[m], h.qkv.value));
        break;
      }
    }
    const Tensor d_query = matmul(d_logits, h.qkv.key) * scale;
    const Tensor d_key = matmul_at_b(d_logits, h.qkv.query) * scale;
    grads.mhsa.w_query[m] += matmul_at_b(x, d_query);
    grads.mhsa.w_key[m] += matmul_at_b(x, d_key);
    grads.mhsa.w_value[m] += matmul_at_b(x, d_value);
    dx += matmul_a_bt(d_query, params.mhsa.w_query[m]);
    dx += matmul_a_bt(d_key, params.mhsa.w_key[m]);
    dx += matmul_a_bt(d_value, params.mhsa.w_value[m]);
  }
  return dx;
}

}  // namespace latn
