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

// Reference implementations used only by tests. Each one is written
// independently of the library code path it checks.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <set>
#include <utility>
#include <vector>

#include "latn/metrics.hpp"
#include "latn/random.hpp"
#include "latn/tensor.hpp"

namespace latn::oracle {

inline Tensor random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0) {
  Tensor t({rows, cols});
  for (double& v : t.data()) v = rng.uniform(-scale, scale);
  return t;
}

inline Tensor naive_matmul(const Tensor& a, const Tensor& b) {
  Tensor out({a.rows(), b.cols()});
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
      out(i, j) = acc;
    }
  return out;
}

// Set definitions of the three mask families.
inline bool block_keeps(std::size_t i, std::size_t j, std::size_t w) { return i / w == j / w; }
inline bool band_keeps(std::size_t i, std::size_t j, std::size_t w) {
  const long d = std::labs(static_cast<long>(i) - static_cast<long>(j));
  return d <= static_cast<long>(w);
}
inline bool dilated_keeps(std::size_t i, std::size_t j, std::size_t w, std::size_t l) {
  const long diff = static_cast<long>(j) - static_cast<long>(i);
  return std::labs(diff) <= static_cast<long>(w) && diff % static_cast<long>(l) == 0;
}

/// Softmax of one row restricted to `keep`, computed directly from exp().
inline std::vector<double> restricted_softmax(const std::vector<double>& z, const std::vector<bool>& keep) {
  double total = 0.0;
  std::vector<double> out(z.size(), 0.0);
  for (std::size_t j = 0; j < z.size(); ++j)
    if (keep[j]) total += std::exp(z[j]);
  for (std::size_t j = 0; j < z.size(); ++j)
    if (keep[j]) out[j] = std::exp(z[j]) / total;
  return out;
}

// ---- metrics ---------------------------------------------------------------

/// Class indices sorted best-first with a full comparison sort on
/// (-score, class index).
inline std::vector<std::size_t> sorted_classes(const VideoPrediction& p) {
  std::vector<std::pair<double, std::size_t>> items;
  for (std::size_t c = 0; c < p.scores.size(); ++c) items.emplace_back(-p.scores[c], c);
  std::sort(items.begin(), items.end());
  std::vector<std::size_t> out;
  for (const auto& it : items) out.push_back(it.second);
  return out;
}

inline bool labelled(const VideoPrediction& p, std::size_t c) {
  return std::find(p.labels.begin(), p.labels.end(), c) != p.labels.end();
}

inline double hit_at_1(const std::vector<VideoPrediction>& preds) {
  double hits = 0;
  for (const auto& p : preds) hits += labelled(p, sorted_classes(p).front()) ? 1.0 : 0.0;
  return hits / static_cast<double>(preds.size());
}

inline double perr(const std::vector<VideoPrediction>& preds) {
  double total = 0;
  for (const auto& p : preds) {
    const auto order = sorted_classes(p);
    double correct = 0;
    for (std::size_t k = 0; k < p.labels.size(); ++k) correct += labelled(p, order[k]) ? 1.0 : 0.0;
    total += correct / static_cast<double>(p.labels.size());
  }
  return total / static_cast<double>(preds.size());
}

/// AP by counting, for each positive item, how many items rank at or above it.
/// `before(a, b)` says item a ranks strictly above item b.
inline double counted_ap(const std::vector<bool>& positive, const std::function<bool(std::size_t, std::size_t)>& before,
                         double normalizer) {
  const std::size_t n = positive.size();
  double total = 0.0;
  for (std::size_t v = 0; v < n; ++v) {
    if (!positive[v]) continue;
    double rank = 1.0, hits = 1.0;
    for (std::size_t u = 0; u < n; ++u) {
      if (u == v || !before(u, v)) continue;
      rank += 1.0;
      if (positive[u]) hits += 1.0;
    }
    total += hits / rank;
  }
  return total / normalizer;
}

inline double mean_average_precision(const std::vector<VideoPrediction>& preds) {
  const std::size_t classes = preds.front().scores.size();
  double total = 0.0, count = 0.0;
  for (std::size_t c = 0; c < classes; ++c) {
    std::vector<bool> pos;
    for (const auto& p : preds) pos.push_back(labelled(p, c));
    const double npos = static_cast<double>(std::count(pos.begin(), pos.end(), true));
    if (npos == 0) continue;
    auto before = [&](std::size_t u, std::size_t v) {
      const double su = preds[u].scores[c], sv = preds[v].scores[c];
      return su > sv || (su == sv && u < v);
    };
    total += counted_ap(pos, before, npos);
    count += 1.0;
  }
  return total / count;
}

inline double gap(const std::vector<VideoPrediction>& preds, std::size_t k) {
  struct Item {
    double score;
    std::size_t video, cls;
  };
  std::vector<Item> items;
  std::vector<bool> pos;
  double normalizer = 0.0;
  for (std::size_t v = 0; v < preds.size(); ++v) {
    // Top-k by repeated selection of the best remaining class.
    std::set<std::size_t> taken;
    for (std::size_t r = 0; r < std::min(k, preds[v].scores.size()); ++r) {
      std::size_t best = preds[v].scores.size();
      for (std::size_t c = 0; c < preds[v].scores.size(); ++c) {
        if (taken.count(c)) continue;
        if (best == preds[v].scores.size() || preds[v].scores[c] > preds[v].scores[best]) best = c;
      }
      taken.insert(best);
      items.push_back({preds[v].scores[best], v, best});
      pos.push_back(labelled(preds[v], best));
    }
    normalizer += static_cast<double>(std::min(preds[v].labels.size(), k));
  }
  auto before = [&](std::size_t a, std::size_t b) {
    const Item& x = items[a];
    const Item& y = items[b];
    if (x.score != y.score) return x.score > y.score;
    if (x.video != y.video) return x.video < y.video;
    return x.cls < y.cls;
  };
  return counted_ap(pos, before, normalizer);
}

/// Random predictions with at least one label per video. Scores are drawn
/// from a coarse grid so ties occur.
inline std::vector<VideoPrediction> random_predictions(std::size_t videos, std::size_t classes, Rng& rng) {
  std::vector<VideoPrediction> out(videos);
  for (auto& p : out) {
    for (std::size_t c = 0; c < classes; ++c) p.scores.push_back(static_cast<double>(rng.integer(0, 10)) / 10.0);
    const auto count = static_cast<std::size_t>(rng.integer(1, static_cast<std::int64_t>(classes)));
    std::vector<std::size_t> all(classes);
    for (std::size_t c = 0; c < classes; ++c) all[c] = c;
    rng.shuffle(all);
    p.labels.assign(all.begin(), all.begin() + static_cast<long>(count));
    std::sort(p.labels.begin(), p.labels.end());
  }
  return out;
}

}  // namespace latn::oracle
