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

#include "latn/data_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "latn/error.hpp"
#include "latn/random.hpp"

namespace latn {
namespace fs = std::filesystem;
using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "feature files assume a little-endian host");

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

std::uint32_t get_u32(const char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return v;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double round_to_f32(double v) { return static_cast<double>(static_cast<float>(v)); }

}  // namespace

void SynthConfig::validate() const {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw Error(ErrorCode::kConfig, msg);
  };
  require(num_classes >= 2, "data.num_classes must be >= 2");
  require(min_frames >= 1 && min_frames <= max_frames, "data.min_frames must be in [1, max_frames]");
  require(motif_length >= 1, "data.motif_length must be >= 1");
  require(motif_length <= min_frames, "data.motif_length must not exceed data.min_frames");
  require(min_motifs <= max_motifs, "data.min_motifs must not exceed data.max_motifs");
  require(max_motifs <= num_classes, "data.max_motifs must not exceed data.num_classes");
  require(noise_scale >= 0.0 && template_scale >= 0.0, "data noise/template scales must be >= 0");
  require(dim_visual >= 1 && dim_audio >= 1, "data feature dims must be >= 1");
}

std::vector<VideoRecord> generate_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  std::vector<Tensor> visual_templates, audio_templates;
  for (std::size_t c = 0; c < cfg.num_classes; ++c) {
    visual_templates.push_back(random_normal({cfg.dim_visual}, rng, cfg.template_scale));
    audio_templates.push_back(random_normal({cfg.dim_audio}, rng, cfg.template_scale));
  }

  std::vector<std::size_t> classes(cfg.num_classes);
  std::vector<VideoRecord> records;
  records.reserve(cfg.num_videos);
  for (std::size_t v = 0; v < cfg.num_videos; ++v) {
    VideoRecord r;
    std::ostringstream id;
    id << "vid" << std::setw(6) << std::setfill('0') << v;
    r.id = id.str();
    r.num_frames = static_cast<std::size_t>(rng.integer(static_cast<std::int64_t>(cfg.min_frames),
                                                        static_cast<std::int64_t>(cfg.max_frames)));
    r.visual = random_normal({r.num_frames, cfg.dim_visual}, rng, cfg.noise_scale);
    r.audio = random_normal({r.num_frames, cfg.dim_audio}, rng, cfg.noise_scale);

    const auto motifs = static_cast<std::size_t>(
        rng.integer(static_cast<std::int64_t>(cfg.min_motifs), static_cast<std::int64_t>(cfg.max_motifs)));
    std::iota(classes.begin(), classes.end(), std::size_t{0});
    rng.shuffle(classes);
    for (std::size_t k = 0; k < motifs; ++k) {
      const std::size_t c = classes[k];
      const auto start = static_cast<std::size_t>(
          rng.integer(0, static_cast<std::int64_t>(r.num_frames - cfg.motif_length)));
      for (std::size_t t = start; t < start + cfg.motif_length; ++t) {
        for (std::size_t j = 0; j < cfg.dim_visual; ++j) r.visual(t, j) += visual_templates[c][j];
        for (std::size_t j = 0; j < cfg.dim_audio; ++j) r.audio(t, j) += audio_templates[c][j];
      }
      r.labels.push_back(c);
    }
    std::sort(r.labels.begin(), r.labels.end());
    for (double& x : r.visual.data()) x = round_to_f32(x);
    for (double& x : r.audio.data()) x = round_to_f32(x);
    records.push_back(std::move(r));
  }
  return records;
}

void write_feature_file(const fs::path& path, const Tensor& features) {
  if (features.rank() != 2) throw Error(ErrorCode::kShape, "feature file: expected a matrix");
  std::string bytes;
  bytes.reserve(16 + 4 * features.size());
  bytes.append(kFeatureMagic, 4);
  put_u32(bytes, kFeatureVersion);
  put_u32(bytes, static_cast<std::uint32_t>(features.rows()));
  put_u32(bytes, static_cast<std::uint32_t>(features.cols()));
  for (double v : features.data()) {
    const float f = static_cast<float>(v);
    char raw[4];
    std::memcpy(raw, &f, 4);
    bytes.append(raw, 4);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "short write to " + path.string());
}

Tensor read_feature_file(const fs::path& path) {
  const std::string bytes = slurp(path);
  if (bytes.size() < 16) throw Error(ErrorCode::kFormat, path.string() + ": truncated header");
  if (std::memcmp(bytes.data(), kFeatureMagic, 4) != 0) {
    throw Error(ErrorCode::kFormat, path.string() + ": bad magic bytes");
  }
  const std::uint32_t version = get_u32(bytes.data() + 4);
  if (version != kFeatureVersion) {
    throw Error(ErrorCode::kFormat, path.string() + ": unsupported version " + std::to_string(version));
  }
  const std::size_t rows = get_u32(bytes.data() + 8), cols = get_u32(bytes.data() + 12);
  if (rows == 0 || cols == 0) throw Error(ErrorCode::kFormat, path.string() + ": empty feature matrix");
  const std::size_t expected = 16 + 4 * rows * cols;
  if (bytes.size() != expected) {
    throw Error(ErrorCode::kFormat, path.string() + ": size " + std::to_string(bytes.size()) +
                                        " bytes, header implies " + std::to_string(expected));
  }
  Tensor t({rows, cols});
  for (std::size_t i = 0; i < rows * cols; ++i) {
    float f;
    std::memcpy(&f, bytes.data() + 16 + 4 * i, 4);
    t[i] = f;
  }
  return t;
}

void write_records(std::span<const VideoRecord> records, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir / "features", ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + (dir / "features").string() + ": " + ec.message());
  std::ofstream manifest(dir / "manifest.jsonl", std::ios::binary | std::ios::trunc);
  if (!manifest) throw Error(ErrorCode::kIo, "cannot write " + (dir / "manifest.jsonl").string());
  for (const VideoRecord& r : records) {
    const std::string visual_file = "features/" + r.id + ".visual.f32";
    const std::string audio_file = "features/" + r.id + ".audio.f32";
    write_feature_file(dir / visual_file, r.visual);
    write_feature_file(dir / audio_file, r.audio);
    json line = {{"id", r.id},
                 {"num_frames", r.num_frames},
                 {"labels", r.labels},
                 {"visual_file", visual_file},
                 {"audio_file", audio_file}};
    manifest << line.dump() << '\n';
  }
  if (!manifest) throw Error(ErrorCode::kIo, "short write to manifest");
}

std::vector<VideoRecord> read_records(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.jsonl";
  std::ifstream manifest(manifest_path);
  if (!manifest) throw Error(ErrorCode::kIo, "cannot open " + manifest_path.string());
  std::vector<VideoRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(manifest, line)) {
    ++line_no;
    if (line.empty()) continue;
    VideoRecord r;
    std::string visual_file, audio_file;
    try {
      const json j = json::parse(line);
      r.id = j.at("id").get<std::string>();
      r.num_frames = j.at("num_frames").get<std::size_t>();
      r.labels = j.at("labels").get<LabelSet>();
      visual_file = j.at("visual_file").get<std::string>();
      audio_file = j.at("audio_file").get<std::string>();
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kFormat, manifest_path.string() + ":" + std::to_string(line_no) +
                                          ": malformed manifest entry: " + e.what());
    }
    auto load = [&](const std::string& rel, const char* what) {
      try {
        return read_feature_file(dir / rel);
      } catch (const Error& e) {
        throw Error(e.code(), "record '" + r.id + "' " + what + ": " + e.what());
      }
    };
    r.visual = load(visual_file, "visual");
    r.audio = load(audio_file, "audio");
    if (r.visual.rows() != r.num_frames || r.audio.rows() != r.num_frames) {
      throw Error(ErrorCode::kFormat, "record '" + r.id + "': manifest says " + std::to_string(r.num_frames) +
                                          " frames, feature files hold " + std::to_string(r.visual.rows()) +
                                          " (visual) and " + std::to_string(r.audio.rows()) + " (audio)");
    }
    if (!std::is_sorted(r.labels.begin(), r.labels.end()) ||
        std::adjacent_find(r.labels.begin(), r.labels.end()) != r.labels.end()) {
      throw Error(ErrorCode::kFormat, "record '" + r.id + "': labels must be sorted and unique");
    }
    records.push_back(std::move(r));
  }
  return records;
}

Example pad_record(const VideoRecord& record, std::size_t frames) {
  if (frames == 0) throw Error(ErrorCode::kInvalidArgument, "pad_record: T must be >= 1");
  if (record.num_frames == 0) throw Error(ErrorCode::kInvalidArgument, "record '" + record.id + "' has no frames");
  Example ex;
  ex.id = record.id;
  ex.labels = record.labels;
  ex.valid_len = std::min(frames, record.num_frames);
  ex.visual = Tensor({frames, record.visual.cols()});
  ex.audio = Tensor({frames, record.audio.cols()});
  for (std::size_t i = 0; i < ex.valid_len; ++i) {
    std::copy(record.visual.row(i).begin(), record.visual.row(i).end(), ex.visual.row(i).begin());
    std::copy(record.audio.row(i).begin(), record.audio.row(i).end(), ex.audio.row(i).begin());
  }
  return ex;
}

std::vector<Example> pad_records(std::span<const VideoRecord> records, std::size_t frames) {
  std::vector<Example> out;
  out.reserve(records.size());
  for (const VideoRecord& r : records) out.push_back(pad_record(r, frames));
  return out;
}

std::vector<Batch> batch_and_pad(std::span<const VideoRecord> records, std::size_t frames,
                                 std::size_t batch_size, std::uint64_t seed) {
  if (batch_size == 0) throw Error(ErrorCode::kInvalidArgument, "batch_and_pad: batch_size must be >= 1");
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);
  std::vector<Batch> batches;
  for (std::size_t i = 0; i < order.size(); i += batch_size) {
    Batch b;
    for (std::size_t k = i; k < std::min(order.size(), i + batch_size); ++k)
      b.push_back(pad_record(records[order[k]], frames));
    batches.push_back(std::move(b));
  }
  return batches;
}

}  // namespace latn
