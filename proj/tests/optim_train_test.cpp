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
#include <limits>

#include "latn/data_io.hpp"
#include "latn/error.hpp"
#include "latn/optim.hpp"
#include "latn/train.hpp"

namespace latn {
namespace {

struct Single {
  Tensor w;
  template <class F>
  void for_each(F&& f) { f(std::string("w"), w); }
  template <class F>
  void for_each(F&& f) const { f(std::string("w"), w); }
};

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
  Adam adam(AdamConfig{0.1});
  Single p{Tensor::vector({1.0, -2.0})};
  const Single g{Tensor::vector({0.0, 0.0})};
  for (int i = 0; i < 5; ++i) adam.step(p, g);
  EXPECT_EQ(p.w, Tensor::vector({1.0, -2.0}));
  EXPECT_EQ(adam.steps(), 5u);
}

TEST(Adam, FirstStepMovesByLearningRateTimesSign) {
  // With bias correction m_hat = g and v_hat = g^2, so the step is lr * g / (|g| + eps).
  Adam adam(AdamConfig{0.01});
  Single p{Tensor::vector({0.0, 0.0})};
  adam.step(p, Single{Tensor::vector({1.0, -3.0})});
  EXPECT_NEAR(p.w[0], -0.01 / (1.0 + 1e-8), 1e-18);
  EXPECT_NEAR(p.w[1], 0.01 * 3.0 / (3.0 + 1e-8), 1e-18);
}

TEST(Adam, MatchesScalarRecurrence) {
  const double lr = 0.05, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  Adam adam(AdamConfig{lr, b1, b2, eps});
  Single p{Tensor::vector({0.7})};
  double x = 0.7, m = 0.0, v = 0.0;
  for (int t = 1; t <= 25; ++t) {
    const double g = 2.0 * x - 1.0 + 0.1 * t;  // arbitrary gradient sequence
    adam.step(p, Single{Tensor::vector({2.0 * p.w[0] - 1.0 + 0.1 * t})});
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    x -= lr * (m / (1 - std::pow(b1, t))) / (std::sqrt(v / (1 - std::pow(b2, t))) + eps);
    ASSERT_NEAR(p.w[0], x, 1e-12) << t;
  }
}

TEST(Scheduler, DropsAfterPatienceNonImprovingEvaluations) {
  PlateauScheduler s(1.0, 0.1, 3);
  EXPECT_EQ(s.observe(0.5), 1.0);
  EXPECT_EQ(s.observe(0.5), 1.0);  // equal is not an improvement
  EXPECT_EQ(s.observe(0.4), 1.0);
  EXPECT_DOUBLE_EQ(s.observe(0.45), 0.1);
  EXPECT_EQ(s.bad_evals(), 0u);
  EXPECT_DOUBLE_EQ(s.observe(0.6), 0.1);
  EXPECT_DOUBLE_EQ(s.observe(0.1), 0.1);
  EXPECT_DOUBLE_EQ(s.observe(0.1), 0.1);
  EXPECT_DOUBLE_EQ(s.observe(0.1), 0.01);
}

TEST(EarlyStop, StopsAfterPatienceNonImprovingEvaluations) {
  EarlyStopping e(2);
  EXPECT_TRUE(e.observe(0.3));
  EXPECT_FALSE(e.observe(0.2));
  EXPECT_FALSE(e.should_stop());
  EXPECT_TRUE(e.observe(0.31));
  EXPECT_FALSE(e.observe(0.31));
  EXPECT_FALSE(e.observe(0.0));
  EXPECT_TRUE(e.should_stop());
}

EncoderConfig tiny_model(AttentionMode mode) {
  EncoderConfig c;
  c.frames = 8;
  c.dim_visual = 8;
  c.dim_audio = 4;
  c.heads = 2;
  c.num_classes = 5;
  c.visual_variant.mode = c.audio_variant.mode = mode;
  if (mode != AttentionMode::kBaseline) c.visual_variant.masks = c.audio_variant.masks = {MaskSpec::parse("tp:1")};
  return c;
}

std::vector<Example> tiny_data(std::size_t videos, std::uint64_t seed) {
  SynthConfig s;
  s.num_videos = videos;
  s.num_classes = 5;
  s.min_frames = 6;
  s.max_frames = 10;
  s.motif_length = 2;
  s.max_motifs = 2;
  s.dim_visual = 8;
  s.dim_audio = 4;
  s.seed = seed;
  return pad_records(generate_synthetic(s), 8);
}

TEST(Train, BatchGradientIsTheMeanOfPerExampleGradients) {
  const VideoClassifier model(tiny_model(AttentionMode::kGateOp));
  Rng rng(3);
  const ModelParams p = model.init_params(rng);
  const auto data = tiny_data(3, 5);
  ModelParams batch_grads;
  const double loss = batch_loss_and_grad(model, p, data, batch_grads);

  double expected_loss = 0.0;
  ModelParams sum = p.zeros_like();
  for (const auto& ex : data) {
    ModelCache cache;
    const Tensor z = model.forward(p, ex.visual, ex.audio, ex.valid_len, &cache);
    expected_loss += bce_loss(z, ex.labels) / 3.0;
    model.backward(p, cache, bce_loss_grad(z, ex.labels), sum);
  }
  EXPECT_NEAR(loss, expected_loss, 1e-14);
  std::vector<Tensor> a, b;
  batch_grads.for_each([&a](const std::string&, const Tensor& t) { a.push_back(t); });
  sum.for_each([&b](const std::string&, const Tensor& t) { b.push_back(t * (1.0 / 3.0)); });
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_LT(max_abs_diff(a[i], b[i]), 1e-14);
}

TEST(Train, SmallSetIsMemorized) {
  // Eight videos, full-batch Adam: the training loss must fall below 0.01.
  const VideoClassifier model(tiny_model(AttentionMode::kGateOp));
  const auto data = tiny_data(8, 21);
  TrainConfig cfg;
  cfg.lr = 1e-2;
  cfg.batch_size = 8;
  cfg.eval_every = 50;
  cfg.max_iters = 2000;
  cfg.early_stop_patience = 1000;
  cfg.lr_patience = 1000;
  double last_loss = 1.0;
  std::size_t reached = 0;
  ModelParams params;
  {
    Rng rng(cfg.seed);
    params = model.init_params(rng);
  }
  const TrainResult r = train(model, params, data, data, cfg, [&](const TrainLogEntry& e) {
    last_loss = e.train_loss;
    if (reached == 0 && e.train_loss < 0.01) reached = e.iteration;
  });
  EXPECT_LT(last_loss, 0.01);
  EXPECT_GT(reached, 0u);
  EXPECT_DOUBLE_EQ(r.best_val_gap, 1.0);
  const EvalReport report = evaluate(predict(model, r.best_params, data));
  EXPECT_EQ(report.hit1, 1.0);
}

TEST(Train, IdenticalSeedsGiveIdenticalRuns) {
  const VideoClassifier model(tiny_model(AttentionMode::kGateAtt));
  const auto train_set = tiny_data(12, 1);
  const auto val_set = tiny_data(4, 2);
  TrainConfig cfg;
  cfg.lr = 5e-3;
  cfg.batch_size = 5;
  cfg.eval_every = 7;
  cfg.max_iters = 30;
  const TrainResult a = train(model, train_set, val_set, cfg);
  const TrainResult b = train(model, train_set, val_set, cfg);
  ASSERT_EQ(a.log.size(), b.log.size());
  EXPECT_EQ(a.log.size(), 5u);  // 7, 14, 21, 28 and the final iteration
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    EXPECT_EQ(a.log[i].train_loss, b.log[i].train_loss);
    EXPECT_EQ(a.log[i].val_gap, b.log[i].val_gap);
  }
  std::vector<Tensor> pa, pb;
  a.best_params.for_each([&pa](const std::string&, const Tensor& t) { pa.push_back(t); });
  b.best_params.for_each([&pb](const std::string&, const Tensor& t) { pb.push_back(t); });
  EXPECT_EQ(pa, pb);

  cfg.seed = 2;
  const TrainResult c = train(model, train_set, val_set, cfg);
  EXPECT_NE(c.log.front().train_loss, a.log.front().train_loss);
}

TEST(Train, EarlyStoppingEndsTheRun) {
  const VideoClassifier model(tiny_model(AttentionMode::kBaseline));
  const auto data = tiny_data(6, 8);
  TrainConfig cfg;
  cfg.lr = 1e-9;  // too small to move the validation GAP
  cfg.batch_size = 6;
  cfg.eval_every = 1;
  cfg.early_stop_patience = 3;
  cfg.max_iters = 100;
  const TrainResult r = train(model, data, data, cfg);
  EXPECT_TRUE(r.early_stopped);
  EXPECT_LT(r.iterations, 100u);
}

TEST(Train, NonFiniteInputIsRejected) {
  const VideoClassifier model(tiny_model(AttentionMode::kBaseline));
  auto data = tiny_data(4, 8);
  data[2].visual(0, 0) = std::numeric_limits<double>::infinity();
  TrainConfig cfg;
  cfg.batch_size = 4;
  cfg.max_iters = 3;
  try {
    train(model, data, data, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonFinite);
  }
}

TEST(Train, OverflowingParametersAreDivergence) {
  // Adam moves each weight by about lr per step; at this rate the products overflow.
  const VideoClassifier model(tiny_model(AttentionMode::kBaseline));
  const auto data = tiny_data(4, 8);
  TrainConfig cfg;
  cfg.lr = 1e200;
  cfg.batch_size = 4;
  cfg.max_iters = 20;
  try {
    train(model, data, data, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDivergence) << e.what();
  }
}

TEST(Train, InvalidConfigIsRejected) {
  TrainConfig cfg;
  cfg.lr = 0.0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = TrainConfig{};
  cfg.lr_factor = 1.5;
  EXPECT_THROW(cfg.validate(), Error);
}

}  // namespace
}  // namespace latn
