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

#include "latn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"

#include "latn/error.hpp"

namespace latn {
namespace {

std::size_t validate(std::span<const VideoPrediction> preds, bool need_labels) {
  if (preds.empty()) throw Error(ErrorCode::kInvalidArgument, "metrics: no videos");
  const std::size_t classes = preds.front().scores.size();
  if (classes == 0) throw Error(ErrorCode::kInvalidArgument, "metrics: empty score vector");
  for (std::size_t v = 0; v < preds.size(); ++v) {
    const VideoPrediction& p = preds[v];
    if (p.scores.size() != classes) {
      throw Error(ErrorCode::kInvalidArgument, "metrics: video " + std::to_string(v) + " has " +
                                                   std::to_string(p.scores.size()) + " scores, expected " +
                                                   std::to_string(classes));
    }
    for (double s : p.scores) {
      if (!std::isfinite(s) || s < 0.0 || s > 1.0) {
        throw Error(ErrorCode::kInvalidArgument, "metrics: score outside [0, 1] in video " + std::to_string(v));
      }
    }
    for (std::size_t c : p.labels) {
      if (c >= classes) throw Error(ErrorCode::kInvalidArgument, "metrics: label out of range in video " + std::to_string(v));
    }
    if (need_labels && p.labels.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "metrics: video " + std::to_string(v) + " has no labels");
    }
  }
  return classes;
}

bool has_label(const VideoPrediction& p, std::size_t c) {
  return std::find(p.labels.begin(), p.labels.end(), c) != p.labels.end();
}

// Class indices of one video, best score first, ties to the lower index.
std::vector<std::size_t> ranked_classes(const VideoPrediction& p) {
  std::vector<std::size_t> order(p.scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return p.scores[a] > p.scores[b]; });
  return order;
}

// AP of a ranked 0/1 list given the number of positives to normalize by.
double average_precision(const std::vector<bool>& ranked_correct, double positives) {
  double hits = 0.0, total = 0.0;
  for (std::size_t k = 0; k < ranked_correct.size(); ++k) {
    if (ranked_correct[k]) {
      hits += 1.0;
      total += hits / static_cast<double>(k + 1);
    }
  }
  return positives > 0.0 ? total / positives : 0.0;
}

}  // namespace

double hit_at_1(std::span<const VideoPrediction> preds) {
  validate(preds, true);
  double hits = 0.0;
  for (const VideoPrediction& p : preds) {
    const auto best = static_cast<std::size_t>(
        std::max_element(p.scores.begin(), p.scores.end()) - p.scores.begin());  // first max wins
    if (has_label(p, best)) hits += 1.0;
  }
  return hits / static_cast<double>(preds.size());
}

double perr(std::span<const VideoPrediction> preds) {
  validate(preds, true);
  double total = 0.0;
  for (const VideoPrediction& p : preds) {
    const std::vector<std::size_t> order = ranked_classes(p);
    const std::size_t cutoff = std::min(p.labels.size(), order.size());
    double correct = 0.0;
    for (std::size_t k = 0; k < cutoff; ++k)
      if (has_label(p, order[k])) correct += 1.0;
    total += correct / static_cast<double>(cutoff);
  }
  return total / static_cast<double>(preds.size());
}

std::vector<std::optional<double>> per_class_average_precision(std::span<const VideoPrediction> preds) {
  const std::size_t classes = validate(preds, false);
  std::vector<std::optional<double>> out(classes);
  std::vector<std::size_t> order(preds.size());
  for (std::size_t c = 0; c < classes; ++c) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return preds[a].scores[c] > preds[b].scores[c];
    });
    std::vector<bool> correct;
    double positives = 0.0;
    for (std::size_t v : order) {
      correct.push_back(has_label(preds[v], c));
      if (correct.back()) positives += 1.0;
    }
    if (positives > 0.0) out[c] = average_precision(correct, positives);
  }
  return out;
}

double mean_average_precision(std::span<const VideoPrediction> preds) {
  const auto aps = per_class_average_precision(preds);
  double total = 0.0, count = 0.0;
  for (const auto& ap : aps) {
    if (ap) {
      total += *ap;
      count += 1.0;
    }
  }
  if (count == 0.0) throw Error(ErrorCode::kInvalidArgument, "mean_average_precision: no class has a positive");
  return total / count;
}

double gap(std::span<const VideoPrediction> preds, std::size_t top_k) {
  if (top_k == 0) throw Error(ErrorCode::kInvalidArgument, "gap: top_k must be >= 1");
  validate(preds, false);
  struct Entry {
    double score;
    std::size_t video, cls;
    bool correct;
  };
  std::vector<Entry> pooled;
  double positives = 0.0;
  for (std::size_t v = 0; v < preds.size(); ++v) {
    const VideoPrediction& p = preds[v];
    const std::vector<std::size_t> order = ranked_classes(p);
    for (std::size_t k = 0; k < std::min(top_k, order.size()); ++k)
      pooled.push_back({p.scores[order[k]], v, order[k], has_label(p, order[k])});
    positives += static_cast<double>(std::min(p.labels.size(), top_k));
  }
  if (positives == 0.0) throw Error(ErrorCode::kInvalidArgument, "gap: no positive labels");
  std::sort(pooled.begin(), pooled.end(), [](const Entry& a, const Entry& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.video != b.video) return a.video < b.video;
    return a.cls < b.cls;
  });
  std::vector<bool> correct;
  correct.reserve(pooled.size());
  for (const Entry& e : pooled) correct.push_back(e.correct);
  return average_precision(correct, positives);
}

EvalReport evaluate(std::span<const VideoPrediction> preds) {
  EvalReport r;
  r.gap = gap(preds);
  r.per_class_ap = per_class_average_precision(preds);
  r.map = mean_average_precision(preds);
  r.perr = perr(preds);
  r.hit1 = hit_at_1(preds);
  return r;
}

std::string to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["gap"] = report.gap;
  j["map"] = report.map;
  j["perr"] = report.perr;
  j["hit1"] = report.hit1;
  j["per_class_ap"] = nlohmann::ordered_json::array();
  for (const auto& ap : report.per_class_ap) {
    if (ap) {
      j["per_class_ap"].push_back(*ap);
    } else {
      j["per_class_ap"].push_back(nullptr);
    }
  }
  return j.dump(2);
}

}  // namespace latn
