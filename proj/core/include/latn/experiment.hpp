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
#include <optional>
#include <ostream>
#include <string>

#include "latn/data_io.hpp"
#include "latn/error.hpp"
#include "latn/metrics.hpp"
#include "latn/model.hpp"
#include "latn/train.hpp"

namespace latn {

struct AnalysisOptions {
  std::size_t num_videos = 50;
  std::size_t window = 0;  // 0: default_locality_window
  std::string modality = "visual";  // "visual" or "audio"

  friend bool operator==(const AnalysisOptions&, const AnalysisOptions&) = default;
};

/// Everything one experiment needs, read from a single JSON file:
///   { "data": {...}, "model": {...}, "train": {...}, "analysis": {...}, "out_dir": "..." }
/// Feature dims and class count live in "data" and are shared with the model.
struct ExperimentConfig {
  std::filesystem::path data_dir = "data";
  std::size_t train_videos = 2000;
  std::size_t val_videos = 250;
  std::size_t test_videos = 500;
  SynthConfig synth;  // num_videos is the sum of the three splits
  EncoderConfig model;
  TrainConfig train;
  AnalysisOptions analysis;
  std::filesystem::path out_dir = "out";

  /// Parses and validates. Unknown keys and type mismatches throw
  /// Error(kConfig) naming the offending field.
  static ExperimentConfig parse(const std::string& json_text);
  static ExperimentConfig load(const std::filesystem::path& path);
  std::string to_json() const;
  void validate() const;
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> variant;  // applied to both modalities
  std::optional<std::string> mask;     // "bd:10", "tp:30", "td:60:4"; comma list for shareatt
  std::optional<std::filesystem::path> out_dir;
};

/// Applies command-line overrides; `seed` targets data.seed for gendata and
/// train.seed otherwise.
void apply_overrides(ExperimentConfig& config, const Overrides& overrides, bool for_gendata);

/// Writes data_dir/{train,val,test} and data_dir/resolved_config.json.
void run_gendata(const ExperimentConfig& config);

/// Trains on data_dir/train with data_dir/val for validation. Writes
/// out_dir/{checkpoint.latn, train_log.jsonl, resolved_config.json}.
TrainResult run_train(const ExperimentConfig& config, std::ostream* progress = nullptr);

/// Scores `data_dir` (one split) with a checkpoint; writes out_dir/eval_report.json.
EvalReport run_eval(const std::filesystem::path& checkpoint, const std::filesystem::path& data_dir,
                    const std::filesystem::path& out_dir);

struct AnalysisSummary {
  std::size_t videos = 0;
  std::size_t window = 0;
  double mean_locality = 0.0;  // mean S_i over frames and videos
};

/// Attention profiles, similarity, gradient matrix and S_i for the first
/// `options.num_videos` records of `data_dir`, as CSV/PGM under out_dir.
AnalysisSummary run_analyze(const std::filesystem::path& checkpoint, const std::filesystem::path& data_dir,
                            const std::filesystem::path& out_dir, const AnalysisOptions& options);

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitRuntime = 3;

/// Maps a library error onto an exit code.
int exit_code_for(const Error& error);

}  // namespace latn
