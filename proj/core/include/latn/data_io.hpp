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

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "latn/model.hpp"
#include "latn/tensor.hpp"

namespace latn {

struct VideoRecord {
  std::string id;
  std::size_t num_frames = 0;
  Tensor visual;  // num_frames x D_v
  Tensor audio;   // num_frames x D_a
  LabelSet labels;  // sorted, unique

  friend bool operator==(const VideoRecord&, const VideoRecord&) = default;
};

/// Synthetic stand-in corpus. Every class owns a fixed template vector per
/// modality; a video is unit-scale Gaussian noise with the templates of its
/// classes added over one random contiguous window each.
struct SynthConfig {
  std::size_t num_videos = 100;
  std::size_t num_classes = 20;
  std::size_t min_frames = 32;
  std::size_t max_frames = 32;
  std::size_t motif_length = 4;  // w
  std::size_t min_motifs = 1;
  std::size_t max_motifs = 3;
  double noise_scale = 1.0;
  double template_scale = 1.0;
  std::size_t dim_visual = 32;
  std::size_t dim_audio = 16;
  std::uint64_t seed = 7;

  void validate() const;
  friend bool operator==(const SynthConfig&, const SynthConfig&) = default;
};

/// Deterministic in `cfg.seed`. Feature values are rounded to f32 so the
/// in-memory dataset equals what read_records returns after a round-trip.
std::vector<VideoRecord> generate_synthetic(const SynthConfig& cfg);

inline constexpr char kFeatureMagic[4] = {'Y', '8', 'M', 'F'};
inline constexpr std::uint32_t kFeatureVersion = 1;

/// Writes `dir/manifest.jsonl` and `dir/features/<id>.{visual,audio}.f32`.
void write_records(std::span<const VideoRecord> records, const std::filesystem::path& dir);
/// Reads the layout produced by write_records. Throws Error(kFormat) naming
/// the record on any inconsistency, Error(kIo) when files are missing.
std::vector<VideoRecord> read_records(const std::filesystem::path& dir);

/// Single feature file: 16-byte header {"Y8MF", version, rows, cols}, then
/// rows * cols little-endian f32 values in row-major order.
void write_feature_file(const std::filesystem::path& path, const Tensor& features);
Tensor read_feature_file(const std::filesystem::path& path);

/// A record padded or truncated to a fixed frame count.
struct Example {
  std::string id;
  Tensor visual;  // T x D_v
  Tensor audio;   // T x D_a
  std::size_t valid_len = 0;
  LabelSet labels;
};

/// Keeps the first T frames of long records; zero-pads short ones.
Example pad_record(const VideoRecord& record, std::size_t frames);
std::vector<Example> pad_records(std::span<const VideoRecord> records, std::size_t frames);

using Batch = std::vector<Example>;

/// Pads every record to T and groups them into batches of `batch_size` (the
/// last one may be smaller). The order is a seeded shuffle of the input.
std::vector<Batch> batch_and_pad(std::span<const VideoRecord> records, std::size_t frames,
                                 std::size_t batch_size, std::uint64_t seed);

}  // namespace latn
