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

#include "config_json.hpp"

#include <algorithm>

#include "latn/error.hpp"

namespace latn::detail {

void reject_unknown_keys(const json& object, std::initializer_list<const char*> allowed,
                         const std::string& section) {
  if (!object.is_object()) throw Error(ErrorCode::kConfig, "config section '" + section + "' must be an object");
  for (const auto& [key, value] : object.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
    if (!known) throw Error(ErrorCode::kConfig, "unknown config key '" + section + "." + key + "'");
  }
}

ordered_json variant_to_json(const VariantConfig& v) {
  ordered_json j;
  j["mode"] = to_string(v.mode);
  j["masks"] = ordered_json::array();
  for (const MaskSpec& m : v.masks) j["masks"].push_back(m.to_string());
  j["renormalize_fused"] = v.renormalize_fused;
  return j;
}

VariantConfig variant_from_json(const json& j, const std::string& section) {
  reject_unknown_keys(j, {"mode", "masks", "renormalize_fused"}, section);
  VariantConfig v;
  std::string mode = "baseline";
  read_field(j, "mode", section, mode);
  v.mode = parse_attention_mode(mode);
  std::vector<std::string> masks;
  read_field(j, "masks", section, masks);
  for (const std::string& m : masks) v.masks.push_back(MaskSpec::parse(m));
  read_field(j, "renormalize_fused", section, v.renormalize_fused);
  return v;
}

ordered_json encoder_config_to_json(const EncoderConfig& c) {
  ordered_json j;
  j["frames"] = c.frames;
  j["dim_visual"] = c.dim_visual;
  j["dim_audio"] = c.dim_audio;
  j["heads"] = c.heads;
  j["depth"] = c.depth;
  j["ff_dim"] = c.ff_dim;
  j["hidden_dim"] = c.hidden_dim;
  j["num_classes"] = c.num_classes;
  j["visual_variant"] = variant_to_json(c.visual_variant);
  j["audio_variant"] = variant_to_json(c.audio_variant);
  return j;
}

EncoderConfig encoder_config_from_json(const json& j, const std::string& section, bool dims_required) {
  if (dims_required) {
    reject_unknown_keys(j, {"frames", "dim_visual", "dim_audio", "heads", "depth", "ff_dim", "hidden_dim",
                            "num_classes", "visual_variant", "audio_variant"},
                        section);
    for (const char* key : {"dim_visual", "dim_audio", "num_classes"}) {
      if (!j.contains(key)) throw Error(ErrorCode::kConfig, "missing config field '" + section + "." + key + "'");
    }
  } else {
    reject_unknown_keys(j, {"frames", "heads", "depth", "ff_dim", "hidden_dim", "visual_variant", "audio_variant"},
                        section);
  }
  EncoderConfig c;
  read_field(j, "frames", section, c.frames);
  read_field(j, "dim_visual", section, c.dim_visual);
  read_field(j, "dim_audio", section, c.dim_audio);
  read_field(j, "heads", section, c.heads);
  read_field(j, "depth", section, c.depth);
  read_field(j, "ff_dim", section, c.ff_dim);
  read_field(j, "hidden_dim", section, c.hidden_dim);
  read_field(j, "num_classes", section, c.num_classes);
  if (j.contains("visual_variant")) c.visual_variant = variant_from_json(j["visual_variant"], section + ".visual_variant");
  if (j.contains("audio_variant")) c.audio_variant = variant_from_json(j["audio_variant"], section + ".audio_variant");
  return c;
}

ordered_json train_config_to_json(const TrainConfig& c) {
  ordered_json j;
  j["lr"] = c.lr;
  j["batch_size"] = c.batch_size;
  j["eval_every"] = c.eval_every;
  j["early_stop_patience"] = c.early_stop_patience;
  j["lr_factor"] = c.lr_factor;
  j["lr_patience"] = c.lr_patience;
  j["max_iters"] = c.max_iters;
  j["seed"] = c.seed;
  return j;
}

TrainConfig train_config_from_json(const json& j, const std::string& section) {
  reject_unknown_keys(j, {"lr", "batch_size", "eval_every", "early_stop_patience", "lr_factor", "lr_patience",
                          "max_iters", "seed"},
                      section);
  TrainConfig c;
  read_field(j, "lr", section, c.lr);
  read_field(j, "batch_size", section, c.batch_size);
  read_field(j, "eval_every", section, c.eval_every);
  read_field(j, "early_stop_patience", section, c.early_stop_patience);
  read_field(j, "lr_factor", section, c.lr_factor);
  read_field(j, "lr_patience", section, c.lr_patience);
  read_field(j, "max_iters", section, c.max_iters);
  read_field(j, "seed", section, c.seed);
  return c;
}

ordered_json synth_config_to_json(const SynthConfig& c) {
  ordered_json j;
  j["num_videos"] = c.num_videos;
  j["num_classes"] = c.num_classes;
  j["min_frames"] = c.min_frames;
  j["max_frames"] = c.max_frames;
  j["motif_length"] = c.motif_length;
  j["min_motifs"] = c.min_motifs;
  j["max_motifs"] = c.max_motifs;
  j["noise_scale"] = c.noise_scale;
  j["template_scale"] = c.template_scale;
  j["dim_visual"] = c.dim_visual;
  j["dim_audio"] = c.dim_audio;
  j["seed"] = c.seed;
  return j;
}

SynthConfig synth_config_from_json(const json& j, const std::string& section) {
  reject_unknown_keys(j, {"num_videos", "num_classes", "min_frames", "max_frames", "motif_length", "min_motifs",
                          "max_motifs", "noise_scale", "template_scale", "dim_visual", "dim_audio", "seed"},
                      section);
  SynthConfig c;
  read_field(j, "num_videos", section, c.num_videos);
  read_field(j, "num_classes", section, c.num_classes);
  read_field(j, "min_frames", section, c.min_frames);
  read_field(j, "max_frames", section, c.max_frames);
  read_field(j, "motif_length", section, c.motif_length);
  read_field(j, "min_motifs", section, c.min_motifs);
  read_field(j, "max_motifs", section, c.max_motifs);
  read_field(j, "noise_scale", section, c.noise_scale);
  read_field(j, "template_scale", section, c.template_scale);
  read_field(j, "dim_visual", section, c.dim_visual);
  read_field(j, "dim_audio", section, c.dim_audio);
  read_field(j, "seed", section, c.seed);
  return c;
}

}  // namespace latn::detail
