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

#include "latn/experiment.hpp"

#include <fstream>
#include <sstream>

#include "config_json.hpp"
#include "latn/analysis.hpp"
#include "latn/checkpoint.hpp"
#include "latn/error.hpp"

namespace latn {
namespace fs = std::filesystem;
using detail::json;
using detail::ordered_json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
}

void make_dirs(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
}

void require_file(const fs::path& path, const char* what) {
  if (!fs::is_regular_file(path)) throw Error(ErrorCode::kConfig, std::string(what) + " not found: " + path.string());
}

std::vector<MaskSpec> parse_mask_list(const std::string& text) {
  std::vector<MaskSpec> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(MaskSpec::parse(item));
  if (out.empty()) throw Error(ErrorCode::kConfig, "empty --mask");
  return out;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Echo of what a checkpoint-driven command ran with. Output paths are left
// out so reruns into different directories produce identical files.
void write_resolved(const fs::path& out_dir, const char* command, const fs::path& checkpoint,
                    const fs::path& data_dir, const EncoderConfig& model, const AnalysisOptions* analysis) {
  ordered_json j;
  j["command"] = command;
  j["checkpoint"] = checkpoint.string();
  j["data"] = data_dir.string();
  j["model"] = detail::encoder_config_to_json(model);
  if (analysis != nullptr) {
    j["analysis"] = {{"num_videos", analysis->num_videos}, {"window", analysis->window},
                     {"modality", analysis->modality}};
  }
  write_text(out_dir / "resolved_config.json", j.dump(2) + "\n");
}

}  // namespace

int exit_code_for(const Error& error) {
  switch (error.code()) {
    case ErrorCode::kConfig:
    case ErrorCode::kInvalidArgument:
      return kExitUsage;
    default:
      return kExitRuntime;
  }
}

ExperimentConfig ExperimentConfig::parse(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("config is not valid JSON: ") + e.what());
  }
  detail::reject_unknown_keys(root, {"data", "model", "train", "analysis", "out_dir"}, "config");
  ExperimentConfig c;

  if (root.contains("data")) {
    json data = root["data"];
    detail::reject_unknown_keys(data, {"dir", "train_videos", "val_videos", "test_videos", "num_classes", "min_frames",
                                       "max_frames", "motif_length", "min_motifs", "max_motifs", "noise_scale",
                                       "template_scale", "dim_visual", "dim_audio", "seed"},
                                "data");
    std::string dir = c.data_dir.string();
    detail::read_field(data, "dir", "data", dir);
    c.data_dir = dir;
    detail::read_field(data, "train_videos", "data", c.train_videos);
    detail::read_field(data, "val_videos", "data", c.val_videos);
    detail::read_field(data, "test_videos", "data", c.test_videos);
    for (const char* key : {"dir", "train_videos", "val_videos", "test_videos"}) data.erase(key);
    c.synth = detail::synth_config_from_json(data, "data");
  }
  if (root.contains("model")) c.model = detail::encoder_config_from_json(root["model"], "model", false);
  if (root.contains("train")) c.train = detail::train_config_from_json(root["train"], "train");
  if (root.contains("analysis")) {
    const json& a = root["analysis"];
    detail::reject_unknown_keys(a, {"num_videos", "window", "modality"}, "analysis");
    detail::read_field(a, "num_videos", "analysis", c.analysis.num_videos);
    detail::read_field(a, "window", "analysis", c.analysis.window);
    detail::read_field(a, "modality", "analysis", c.analysis.modality);
  }
  std::string out = c.out_dir.string();
  detail::read_field(root, "out_dir", "config", out);
  c.out_dir = out;

  c.synth.num_videos = c.train_videos + c.val_videos + c.test_videos;
  c.model.dim_visual = c.synth.dim_visual;
  c.model.dim_audio = c.synth.dim_audio;
  c.model.num_classes = c.synth.num_classes;
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfig, "cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void ExperimentConfig::validate() const {
  if (train_videos == 0) throw Error(ErrorCode::kConfig, "data.train_videos must be >= 1");
  if (val_videos == 0) throw Error(ErrorCode::kConfig, "data.val_videos must be >= 1");
  synth.validate();
  model.validate();
  train.validate();
  if (analysis.modality != "visual" && analysis.modality != "audio") {
    throw Error(ErrorCode::kConfig, "analysis.modality must be 'visual' or 'audio'");
  }
  if (analysis.num_videos == 0) throw Error(ErrorCode::kConfig, "analysis.num_videos must be >= 1");
}

std::string ExperimentConfig::to_json() const {
  ordered_json root;
  ordered_json data;
  data["dir"] = data_dir.string();
  data["train_videos"] = train_videos;
  data["val_videos"] = val_videos;
  data["test_videos"] = test_videos;
  const ordered_json synth_json = detail::synth_config_to_json(synth);
  for (const auto& [k, v] : synth_json.items())
    if (k != "num_videos") data[k] = v;
  root["data"] = data;
  ordered_json model = detail::encoder_config_to_json(this->model);
  for (const char* key : {"dim_visual", "dim_audio", "num_classes"}) model.erase(key);
  root["model"] = model;
  root["train"] = detail::train_config_to_json(train);
  root["analysis"] = {{"num_videos", analysis.num_videos}, {"window", analysis.window}, {"modality", analysis.modality}};
  root["out_dir"] = out_dir.string();
  return root.dump(2) + "\n";
}

void apply_overrides(ExperimentConfig& config, const Overrides& overrides, bool for_gendata) {
  if (overrides.seed) (for_gendata ? config.synth.seed : config.train.seed) = *overrides.seed;
  if (overrides.out_dir) (for_gendata ? config.data_dir : config.out_dir) = *overrides.out_dir;
  for (VariantConfig* v : {&config.model.visual_variant, &config.model.audio_variant}) {
    if (overrides.variant) {
      v->mode = parse_attention_mode(*overrides.variant);
      if (v->mode == AttentionMode::kBaseline) v->masks.clear();
      if (v->mode != AttentionMode::kGateAtt) v->renormalize_fused = false;
    }
    if (overrides.mask) v->masks = parse_mask_list(*overrides.mask);
  }
  config.validate();
}

void run_gendata(const ExperimentConfig& config) {
  config.validate();
  const std::vector<VideoRecord> all = generate_synthetic(config.synth);
  const std::span<const VideoRecord> records(all);
  make_dirs(config.data_dir);
  write_records(records.subspan(0, config.train_videos), config.data_dir / "train");
  write_records(records.subspan(config.train_videos, config.val_videos), config.data_dir / "val");
  write_records(records.subspan(config.train_videos + config.val_videos, config.test_videos), config.data_dir / "test");
  write_text(config.data_dir / "resolved_config.json", config.to_json());
}

TrainResult run_train(const ExperimentConfig& config, std::ostream* progress) {
  config.validate();
  const VideoClassifier model(config.model);
  const std::vector<Example> train_set = pad_records(read_records(config.data_dir / "train"), config.model.frames);
  const std::vector<Example> val_set = pad_records(read_records(config.data_dir / "val"), config.model.frames);
  for (const auto* split : {&train_set, &val_set}) {
    for (const Example& ex : *split) {
      if (ex.visual.cols() != config.model.dim_visual || ex.audio.cols() != config.model.dim_audio) {
        throw Error(ErrorCode::kFormat, "record '" + ex.id + "' feature dims do not match the config");
      }
    }
  }
  make_dirs(config.out_dir);
  write_text(config.out_dir / "resolved_config.json", config.to_json());

  std::ofstream log(config.out_dir / "train_log.jsonl", std::ios::binary | std::ios::trunc);
  if (!log) throw Error(ErrorCode::kIo, "cannot write training log");
  const TrainResult result = train(model, train_set, val_set, config.train, [&](const TrainLogEntry& e) {
    ordered_json line;
    line["iter"] = e.iteration;
    line["loss"] = e.train_loss;
    line["val_gap"] = e.val_gap;
    line["lr"] = e.lr;
    log << line.dump() << '\n';
    log.flush();
    if (progress != nullptr) {
      *progress << "iter " << e.iteration << "  loss " << format_double(e.train_loss) << "  val_gap "
                << format_double(e.val_gap) << "  lr " << e.lr << '\n';
    }
  });
  write_checkpoint(config.out_dir / "checkpoint.latn", config.model, result.best_params);
  return result;
}

EvalReport run_eval(const fs::path& checkpoint, const fs::path& data_dir, const fs::path& out_dir) {
  require_file(checkpoint, "checkpoint");
  require_file(data_dir / "manifest.jsonl", "dataset manifest");
  const Checkpoint ckpt = read_checkpoint(checkpoint);
  const VideoClassifier model(ckpt.config);
  const std::vector<Example> examples = pad_records(read_records(data_dir), ckpt.config.frames);
  const EvalReport report = evaluate(predict(model, ckpt.params, examples));
  make_dirs(out_dir);
  write_text(out_dir / "eval_report.json", to_json(report) + "\n");
  write_resolved(out_dir, "eval", checkpoint, data_dir, ckpt.config, nullptr);
  return report;
}

AnalysisSummary run_analyze(const fs::path& checkpoint, const fs::path& data_dir, const fs::path& out_dir,
                            const AnalysisOptions& options) {
  require_file(checkpoint, "checkpoint");
  require_file(data_dir / "manifest.jsonl", "dataset manifest");
  if (options.modality != "visual" && options.modality != "audio") {
    throw Error(ErrorCode::kConfig, "--modality must be 'visual' or 'audio'");
  }
  const Checkpoint ckpt = read_checkpoint(checkpoint);
  const VideoClassifier model(ckpt.config);
  const bool visual = options.modality == "visual";
  const ModalityEncoder& encoder = visual ? model.visual_encoder() : model.audio_encoder();
  const std::vector<EncoderBlockParams>& enc_params = visual ? ckpt.params.visual : ckpt.params.audio;
  const VariantConfig& variant = visual ? ckpt.config.visual_variant : ckpt.config.audio_variant;
  const std::size_t frames = ckpt.config.frames;

  AnalysisSummary summary;
  summary.window = options.window != 0 ? options.window : default_locality_window(variant, frames);
  if (summary.window + 1 >= frames) {
    throw Error(ErrorCode::kConfig, "locality window " + std::to_string(summary.window) +
                                        " leaves no frames outside N_i for T=" + std::to_string(frames));
  }

  std::vector<VideoRecord> records = read_records(data_dir);
  if (records.size() > options.num_videos) records.resize(options.num_videos);
  make_dirs(out_dir / "masks");
  write_resolved(out_dir, "analyze", checkpoint, data_dir, ckpt.config, &options);
  for (std::size_t b = 0; b < encoder.depth(); ++b) {
    for (std::size_t m = 0; m < encoder.block(b).attention().heads(); ++m) {
      const auto& mask = encoder.block(b).attention().local_mask(m);
      if (mask) {
        write_mask_pgm(out_dir / "masks" / ("block" + std::to_string(b) + "_head" + std::to_string(m) + ".pgm"), *mask);
      }
    }
  }

  std::ofstream locality(out_dir / "locality.csv", std::ios::binary | std::ios::trunc);
  if (!locality) throw Error(ErrorCode::kIo, "cannot write locality.csv");
  locality << "video,frame,s\n";
  double s_total = 0.0;
  std::size_t s_count = 0;
  for (const VideoRecord& record : records) {
    const Example ex = pad_record(record, frames);
    const Tensor& x = visual ? ex.visual : ex.audio;
    const fs::path dir = out_dir / record.id;
    make_dirs(dir);

    ModelMaps maps;
    model.forward(ckpt.params, ex.visual, ex.audio, ex.valid_len, nullptr, &maps);
    const AttentionMaps& m = visual ? maps.visual : maps.audio;
    std::ofstream profile(dir / "profile.csv", std::ios::binary | std::ios::trunc);
    if (!profile) throw Error(ErrorCode::kIo, "cannot write profile.csv");
    std::vector<std::pair<std::string, Tensor>> profiles;
    for (const auto& [name, list] : {std::pair{"global", &m.global}, {"local", &m.local}, {"fused", &m.fused}}) {
      if (list->empty()) continue;
      profiles.emplace_back(name, attention_profile(*list));
      Tensor mean_map = Tensor::zeros_like(list->front());
      for (const Tensor& a : *list) mean_map += a;
      mean_map *= 1.0 / static_cast<double>(list->size());
      write_pgm_heatmap(dir / (std::string(name) + "_map.pgm"), mean_map);
    }
    profile << "frame";
    for (const auto& p : profiles) profile << ',' << p.first;
    profile << '\n';
    for (std::size_t t = 0; t < frames; ++t) {
      profile << t;
      for (const auto& p : profiles) profile << ',' << format_double(p.second[t]);
      profile << '\n';
    }

    write_pgm_heatmap(dir / "similarity.pgm", cosine_similarity_matrix(head_rows(x, ex.valid_len)));
    // Real frames never depend on padding, so G is reported over the valid prefix.
    const Tensor g_full = gradient_matrix(encoder_frame_map(encoder, enc_params, ex.valid_len), x);
    Tensor g({ex.valid_len, ex.valid_len});
    for (std::size_t i = 0; i < ex.valid_len; ++i)
      for (std::size_t j = 0; j < ex.valid_len; ++j) g(i, j) = g_full(i, j);
    write_pgm_heatmap(dir / "gradient.pgm", g);
    write_csv_matrix(dir / "gradient.csv", g);
    if (summary.window + 1 >= ex.valid_len) {
      throw Error(ErrorCode::kConfig, "record '" + record.id + "' is too short for locality window " +
                                          std::to_string(summary.window));
    }
    const Tensor s = locality_statistic(g, window_neighborhoods(ex.valid_len, summary.window));
    write_csv_vector(dir / "locality.csv", "s", s);
    for (std::size_t t = 0; t < s.size(); ++t) {
      locality << record.id << ',' << t << ',' << format_double(s[t]) << '\n';
      s_total += s[t];
      ++s_count;
    }
  }
  summary.videos = records.size();
  summary.mean_locality = s_count ? s_total / static_cast<double>(s_count) : 0.0;

  ordered_json j;
  j["videos"] = summary.videos;
  j["modality"] = options.modality;
  j["window"] = summary.window;
  j["mean_locality"] = summary.mean_locality;
  write_text(out_dir / "summary.json", j.dump(2) + "\n");
  return summary;
}

}  // namespace latn
