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
#include <span>
#include <string>
#include <vector>

#include "latn/model.hpp"

namespace latn {

/// Scores for one video (one per class, in [0, 1]) and its true labels.
struct VideoPrediction {
  std::vector<double> scores;
  LabelSet labels;
};

inline constexpr std::size_t kGapTopK = 20;

// Tie-breaking, fixed for reproducibility:
//   * within a video, equal scores rank the lower class index first;
//   * across videos (MAP, GAP), equal scores rank the lower video index
//     first, then the lower class index.

/// Fraction of videos whose highest-scoring class is a true label.
double hit_at_1(std::span<const VideoPrediction> preds);

/// Mean over videos of the precision among the |G| top-scored classes,
/// where |G| is that video's label count.
double perr(std::span<const VideoPrediction> preds);

/// Per-class AP over the ranking of all videos by that class's score;
/// nullopt for classes with no positive video.
std::vector<std::optional<double>> per_class_average_precision(std::span<const VideoPrediction> preds);

/// Mean of per-class APs over classes with at least one positive.
double mean_average_precision(std::span<const VideoPrediction> preds);

/// Pools each video's top-k (score, correct) pairs, sorts them globally and
/// returns their AP, normalized by the sum over videos of min(|G|, k).
double gap(std::span<const VideoPrediction> preds, std::size_t top_k = kGapTopK);

struct EvalReport {
  double gap = 0.0;
  double map = 0.0;
  double perr = 0.0;
  double hit1 = 0.0;
  std::vector<std::optional<double>> per_class_ap;
};

EvalReport evaluate(std::span<const VideoPrediction> preds);

/// {"gap", "map", "perr", "hit1", "per_class_ap"}; classes without
/// positives serialize as null.
std::string to_json(const EvalReport& report);

}  // namespace latn
