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

#include "latn/encoder.hpp"
#include "latn/error.hpp"
#include "latn/model.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"

namespace latn {
namespace {

VariantConfig variant(AttentionMode mode, std::vector<std::string> masks = {}) {
  VariantConfig v;
  v.mode = mode;
  for (const auto& m : masks) v.masks.push_back(MaskSpec::parse(m));
  return v;
}

TEST(LayerNorm, HandExample) {
  const Tensor x = Tensor::matrix({{1.0, 2.0, 3.0}});
  const Tensor y = layer_norm(x, Tensor::vector({1.0, 1.0, 1.0}), Tensor::vector({0.0, 0.0, 0.0}));
  const double s = std::sqrt(2.0 / 3.0 + kLayerNormEps);
  EXPECT_NEAR(y(0, 0), -1.0 / s, 1e-15);
  EXPECT_NEAR(y(0, 1), 0.0, 1e-15);
  EXPECT_NEAR(y(0, 2), 1.0 / s, 1e-15);
  const Tensor z = layer_norm(x, Tensor::vector({2.0, 2.0, 2.0}), Tensor::vector({1.0, 1.0, 1.0}));
  EXPECT_NEAR(z(0, 2), 2.0 / s + 1.0, 1e-14);
}

TEST(LayerNorm, BackwardMatchesFiniteDifferences) {
  Rng rng(3);
  const Tensor x = oracle::random_matrix(4, 5, rng);
  const Tensor gain = random_normal({5}, rng);
  const Tensor bias = random_normal({5}, rng);
  const Tensor up = oracle::random_matrix(4, 5, rng);
  Tensor dg({5}), db({5});
  const Tensor dx = layer_norm_backward(x, gain, up, dg, db);
  EXPECT_LT(relative_error(dx, finite_diff_grad([&](const Tensor& v) { return dot(layer_norm(v, gain, bias), up); }, x)),
            1e-7);
  EXPECT_LT(relative_error(dg, finite_diff_grad([&](const Tensor& v) { return dot(layer_norm(x, v, bias), up); }, gain)),
            1e-7);
  EXPECT_LT(relative_error(db, finite_diff_grad([&](const Tensor& v) { return dot(layer_norm(x, gain, v), up); }, bias)),
            1e-7);
}

TEST(EncoderBlock, ForwardIsResidualNormFeedForwardNorm) {
  Rng rng(8);
  const EncoderBlock block(6, 4, 2, 8, variant(AttentionMode::kGateOp, {"tp:1"}));
  const EncoderBlockParams p = block.init_params(rng);
  const Tensor x = oracle::random_matrix(6, 4, rng);

  const Tensor attn = block.attention().forward(p.attention, x, 6);
  const Tensor h = layer_norm(x + attn, p.norm1_gain, p.norm1_bias);
  Tensor hidden = oracle::naive_matmul(h, p.ff_w1);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 8; ++j) hidden(i, j) = std::max(0.0, hidden(i, j) + p.ff_b1[j]);
  Tensor ff = oracle::naive_matmul(hidden, p.ff_w2);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 4; ++j) ff(i, j) += p.ff_b2[j];
  const Tensor expected = layer_norm(h + ff, p.norm2_gain, p.norm2_bias);
  EXPECT_LT(max_abs_diff(block.forward(p, x, 6), expected), 1e-12);
}

TEST(EncoderBlock, InputGradientMatchesFiniteDifferences) {
  Rng rng(19);
  for (AttentionMode mode : {AttentionMode::kBaseline, AttentionMode::kGateAtt, AttentionMode::kGateOp}) {
    const VariantConfig v = mode == AttentionMode::kBaseline ? variant(mode) : variant(mode, {"bd:2"});
    const ModalityEncoder enc(5, 4, 2, 6, 2, v);
    const auto p = enc.init_params(rng);
    const Tensor x = oracle::random_matrix(5, 4, rng);
    const Tensor up = oracle::random_matrix(5, 4, rng);
    ModalityEncoder::Cache cache;
    enc.forward(p, x, 4, &cache);
    std::vector<EncoderBlockParams> grads;
    for (const auto& b : p) grads.push_back(b.zeros_like());
    const Tensor dx = enc.backward(p, cache, up, grads);
    const auto f = [&](const Tensor& xx) { return dot(enc.forward(p, xx, 4), up); };
    EXPECT_LT(relative_error(dx, finite_diff_grad(f, x)), 1e-6) << to_string(mode);
  }
}

TEST(Classifier, FuseAndClassifyHandExample) {
  // Pool over the first two of three rows: visual mean [2], audio mean [-1].
  const Tensor visual = Tensor::matrix({{1.0}, {3.0}, {100.0}});
  const Tensor audio = Tensor::matrix({{0.0}, {-2.0}, {100.0}});
  ClassifierParams head;
  head.w_hidden = Tensor::matrix({{1.0, 0.0}, {0.0, 1.0}});
  head.b_hidden = Tensor::vector({0.5, 0.5});
  head.w_logits = Tensor::matrix({{1.0}, {2.0}});
  head.b_logits = Tensor::vector({0.25});
  // hidden = ReLU([2.5, -0.5]) = [2.5, 0]; logit = 2.5 + 0.25.
  const Tensor logits = fuse_and_classify(visual, audio, 2, head);
  ASSERT_EQ(logits.size(), 1u);
  EXPECT_DOUBLE_EQ(logits[0], 2.75);
}

TEST(Loss, BceExamples) {
  EXPECT_NEAR(bce_loss(Tensor::vector({0.0, 0.0, 0.0}), {1}), std::log(2.0), 1e-15);
  EXPECT_LT(bce_loss(Tensor::vector({40.0, -40.0}), {0}), 1e-17);
  // Saturated wrong prediction: finite, equal to the margin.
  EXPECT_NEAR(bce_loss(Tensor::vector({1000.0, -1000.0}), {1}), 1000.0, 1e-9);
  EXPECT_NEAR(bce_loss(Tensor::vector({2.0}), {}), std::log1p(std::exp(2.0)), 1e-14);
}

TEST(Loss, BceGradientIsSigmoidMinusTargetOverClasses) {
  Rng rng(4);
  const Tensor z = random_normal({5}, rng, 3.0);
  const LabelSet labels{1, 4};
  const Tensor g = bce_loss_grad(z, labels);
  for (std::size_t k = 0; k < 5; ++k) {
    const double y = (k == 1 || k == 4) ? 1.0 : 0.0;
    EXPECT_NEAR(g[k], (sigmoid(z[k]) - y) / 5.0, 1e-16);
  }
  EXPECT_LT(relative_error(g, finite_diff_grad([&](const Tensor& v) { return bce_loss(v, labels); }, z)), 1e-8);
}

class ModelGradient : public ::testing::TestWithParam<AttentionMode> {};

TEST_P(ModelGradient, EndToEndMatchesFiniteDifferences) {
  Rng rng(500 + static_cast<int>(GetParam()));
  for (int trial = 0; trial < 5; ++trial) {
    const testing::MicroInstance inst = testing::random_micro_instance(GetParam(), rng, trial % 2 == 1);
    const testing::GradCheckResult r = testing::check_model_gradients(inst);
    EXPECT_LT(r.worst_relative_error, 1e-4) << r.worst_tensor;
  }
}

INSTANTIATE_TEST_SUITE_P(AllModes, ModelGradient,
                         ::testing::Values(AttentionMode::kBaseline, AttentionMode::kShareAtt,
                                           AttentionMode::kGateAtt, AttentionMode::kGateOp,
                                           AttentionMode::kLocal),
                         [](const auto& info) { return to_string(info.param); });

TEST(Model, DeeperEncodersMatchFiniteDifferences) {
  Rng rng(61);
  testing::MicroInstance inst = testing::random_micro_instance(AttentionMode::kGateOp, rng);
  inst.config.depth = 2;
  inst.params = VideoClassifier(inst.config).init_params(rng);
  EXPECT_LT(testing::check_model_gradients(inst).worst_relative_error, 1e-4);
}

EncoderConfig small_config(AttentionMode mode, std::size_t frames) {
  EncoderConfig c;
  c.frames = frames;
  c.dim_visual = 4;
  c.dim_audio = 2;
  c.heads = 2;
  c.num_classes = 3;
  const std::vector<std::string> masks =
      mode == AttentionMode::kBaseline ? std::vector<std::string>{}
                                       : std::vector<std::string>{"tp:1"};
  c.visual_variant = c.audio_variant = variant(mode, masks);
  return c;
}

TEST(Model, PaddedRowContentDoesNotChangeLogits) {
  Rng rng(33);
  for (AttentionMode mode : {AttentionMode::kBaseline, AttentionMode::kShareAtt, AttentionMode::kGateAtt,
                             AttentionMode::kGateOp, AttentionMode::kLocal}) {
    const VideoClassifier model(small_config(mode, 8));
    const ModelParams p = model.init_params(rng);
    Tensor v = oracle::random_matrix(8, 4, rng);
    Tensor a = oracle::random_matrix(8, 2, rng);
    for (std::size_t i = 5; i < 8; ++i) {
      for (std::size_t j = 0; j < 4; ++j) v(i, j) = 0.0;
      for (std::size_t j = 0; j < 2; ++j) a(i, j) = 0.0;
    }
    const Tensor reference = model.forward(p, v, a, 5);
    for (std::size_t i = 5; i < 8; ++i) {
      for (std::size_t j = 0; j < 4; ++j) v(i, j) = rng.uniform(-9.0, 9.0);
      for (std::size_t j = 0; j < 2; ++j) a(i, j) = rng.uniform(-9.0, 9.0);
    }
    EXPECT_LT(max_abs_diff(model.forward(p, v, a, 5), reference), 1e-9) << to_string(mode);
  }
}

TEST(Model, PaddingMatchesTheUnpaddedSequence) {
  // Modes whose parameters do not depend on T can run the same weights at T = 5 and T = 8.
  Rng rng(34);
  for (AttentionMode mode : {AttentionMode::kBaseline, AttentionMode::kShareAtt, AttentionMode::kGateOp,
                             AttentionMode::kLocal}) {
    const VideoClassifier exact(small_config(mode, 5));
    const VideoClassifier padded(small_config(mode, 8));
    const ModelParams p = exact.init_params(rng);
    const Tensor v = oracle::random_matrix(5, 4, rng);
    const Tensor a = oracle::random_matrix(5, 2, rng);
    Tensor vp({8, 4}), ap({8, 2});
    for (std::size_t i = 0; i < 5; ++i) {
      for (std::size_t j = 0; j < 4; ++j) vp(i, j) = v(i, j);
      for (std::size_t j = 0; j < 2; ++j) ap(i, j) = a(i, j);
    }
    EXPECT_LT(max_abs_diff(exact.forward(p, v, a, 5), padded.forward(p, vp, ap, 5)), 1e-9) << to_string(mode);
  }
}

TEST(Model, CheckParamsNamesTheMismatch) {
  Rng rng(2);
  const VideoClassifier model(small_config(AttentionMode::kGateOp, 6));
  ModelParams p = model.init_params(rng);
  EXPECT_NO_THROW(model.check_params(p));
  p.head.w_logits = Tensor({3, 3});
  try {
    model.check_params(p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShape);
    EXPECT_NE(std::string(e.what()).find("head.w_logits"), std::string::npos) << e.what();
  }
}

TEST(Model, ConfigValidation) {
  EncoderConfig c = small_config(AttentionMode::kBaseline, 4);
  c.dim_visual = 5;
  EXPECT_THROW(VideoClassifier{c}, Error);
  c = small_config(AttentionMode::kShareAtt, 4);
  c.heads = 1;
  c.dim_visual = c.dim_audio = 2;
  EXPECT_THROW(VideoClassifier{c}, Error);
  EXPECT_EQ(small_config(AttentionMode::kBaseline, 4).resolved_hidden_dim(), 6u);
  EXPECT_EQ(small_config(AttentionMode::kBaseline, 4).ff_dim_for(4), 16u);
}

TEST(Model, NamesAreUniqueAndStable) {
  Rng rng(1);
  const VideoClassifier model(small_config(AttentionMode::kGateAtt, 4));
  const ModelParams p = model.init_params(rng);
  std::vector<std::string> names;
  p.for_each([&names](const std::string& n, const Tensor&) { names.push_back(n); });
  std::vector<std::string> sorted = names;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(std::unique(sorted.begin(), sorted.end()), sorted.end());
  EXPECT_EQ(names.front(), "visual.0.attention.w_query.0");
  EXPECT_EQ(names.back(), "head.b_logits");
  EXPECT_NE(std::find(names.begin(), names.end(), "audio.0.attention.gate_att.w_local"), names.end());
}

}  // namespace
}  // namespace latn
