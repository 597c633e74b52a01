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

#include <gtest/gtest.h>

#include <cmath>

#include "json.hpp"
#include "latn/error.hpp"
#include "latn/metrics.hpp"
#include "oracles.hpp"

namespace latn {
namespace {

using Preds = std::vector<VideoPrediction>;

TEST(Metrics, HitAtOneExample) {
  const Preds p{{{0.9, 0.1}, {0}}, {{0.2, 0.8}, {0}}};
  EXPECT_DOUBLE_EQ(hit_at_1(p), 0.5);
  // Ties go to the lower class index.
  EXPECT_DOUBLE_EQ(hit_at_1(Preds{{{0.5, 0.5}, {1}}}), 0.0);
  EXPECT_DOUBLE_EQ(hit_at_1(Preds{{{0.5, 0.5}, {0}}}), 1.0);
}

TEST(Metrics, PerrExample) {
  // Labels {0, 2}; the two best classes are 0 and 1.
  EXPECT_DOUBLE_EQ(perr(Preds{{{0.9, 0.8, 0.7}, {0, 2}}}), 0.5);
  EXPECT_DOUBLE_EQ(perr(Preds{{{0.9, 0.8, 0.7}, {0, 2}}, {{0.1, 0.2, 0.3}, {2}}}), 0.75);
}

TEST(Metrics, AveragePrecisionExample) {
  // Class 0 over three videos: positive, negative, positive -> (1 + 2/3) / 2.
  const Preds p{{{0.9, 0.0}, {0}}, {{0.8, 0.0}, {1}}, {{0.7, 0.0}, {0}}};
  const auto ap = per_class_average_precision(p);
  ASSERT_TRUE(ap[0].has_value());
  EXPECT_NEAR(*ap[0], 5.0 / 6.0, 1e-15);
  // Class 1 has its only positive ranked first (tie broken by video index).
  EXPECT_NEAR(*ap[1], 0.5, 1e-15);
  EXPECT_NEAR(mean_average_precision(p), (5.0 / 6.0 + 0.5) / 2.0, 1e-15);
}

TEST(Metrics, ClassesWithoutPositivesAreSkipped) {
  const Preds p{{{0.9, 0.3, 0.2}, {0}}, {{0.1, 0.3, 0.4}, {0}}};
  const auto ap = per_class_average_precision(p);
  EXPECT_TRUE(ap[0].has_value());
  EXPECT_FALSE(ap[1].has_value());
  EXPECT_FALSE(ap[2].has_value());
  EXPECT_DOUBLE_EQ(mean_average_precision(p), 1.0);
  const auto j = nlohmann::json::parse(to_json(evaluate(p)));
  EXPECT_TRUE(j["per_class_ap"][1].is_null());
  EXPECT_DOUBLE_EQ(j["gap"].get<double>(), evaluate(p).gap);
}

TEST(Metrics, GapExample) {
  // Pooled: 0.9 hit, 0.6 miss, 0.4 hit, 0.3 miss; two positives in total.
  const Preds p{{{0.9, 0.3}, {0}}, {{0.6, 0.4}, {1}}};
  EXPECT_NEAR(gap(p), (1.0 + 2.0 / 3.0) / 2.0, 1e-15);
}

TEST(Metrics, GapNormalizesByCappedPositives) {
  // With k = 1 only the top class of each video enters the pool, and each
  // video contributes min(|G|, 1) to the normalizer.
  const Preds p{{{0.9, 0.8}, {0, 1}}};
  EXPECT_DOUBLE_EQ(gap(p, 1), 1.0);
  EXPECT_DOUBLE_EQ(gap(p, 2), 1.0);
  const Preds q{{{0.8, 0.9}, {0}}};
  EXPECT_DOUBLE_EQ(gap(q, 1), 0.0);
  EXPECT_DOUBLE_EQ(gap(q, 2), 0.5);
}

TEST(Metrics, PerfectPredictionsScoreOne) {
  Rng rng(5);
  Preds p = oracle::random_predictions(30, 7, rng);
  for (auto& v : p) {
    for (std::size_t c = 0; c < 7; ++c) v.scores[c] = oracle::labelled(v, c) ? 0.99 : 0.01;
  }
  const EvalReport r = evaluate(p);
  EXPECT_EQ(r.gap, 1.0);
  EXPECT_EQ(r.map, 1.0);
  EXPECT_EQ(r.perr, 1.0);
  EXPECT_EQ(r.hit1, 1.0);
}

TEST(Metrics, MatchBruteForceOracles) {
  Rng rng(2718);
  for (int batch = 0; batch < 200; ++batch) {
    const auto videos = static_cast<std::size_t>(rng.integer(1, 12));
    const auto classes = static_cast<std::size_t>(rng.integer(1, 8));
    const auto k = static_cast<std::size_t>(rng.integer(1, 9));
    const Preds p = oracle::random_predictions(videos, classes, rng);
    EXPECT_NEAR(hit_at_1(p), oracle::hit_at_1(p), 1e-12);
    EXPECT_NEAR(perr(p), oracle::perr(p), 1e-12);
    EXPECT_NEAR(mean_average_precision(p), oracle::mean_average_precision(p), 1e-12);
    EXPECT_NEAR(gap(p, k), oracle::gap(p, k), 1e-12);
    EXPECT_NEAR(gap(p), oracle::gap(p, kGapTopK), 1e-12);
  }
}

TEST(Metrics, InvariantUnderStrictlyIncreasingScoreMaps) {
  Rng rng(99);
  for (int batch = 0; batch < 20; ++batch) {
    const Preds p = oracle::random_predictions(10, 6, rng);
    Preds q = p;
    for (auto& v : q)
      for (double& s : v.scores) s = s * s * s;
    const EvalReport a = evaluate(p);
    const EvalReport b = evaluate(q);
    EXPECT_EQ(a.gap, b.gap);
    EXPECT_EQ(a.map, b.map);
    EXPECT_EQ(a.perr, b.perr);
    EXPECT_EQ(a.hit1, b.hit1);
  }
}

TEST(Metrics, RejectsMalformedInput) {
  EXPECT_THROW(gap(Preds{}), Error);
  EXPECT_THROW(hit_at_1(Preds{{{0.5, 0.5}, {0}}, {{0.5}, {0}}}), Error);
  EXPECT_THROW(hit_at_1(Preds{{{1.5, 0.5}, {0}}}), Error);
  EXPECT_THROW(perr(Preds{{{0.5, 0.5}, {3}}}), Error);
  EXPECT_THROW(gap(Preds{{{0.5, 0.5}, {0}}}, 0), Error);
}

}  // namespace
}  // namespace latn
