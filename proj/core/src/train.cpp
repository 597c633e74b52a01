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

#include "latn/train.hpp"

#include <cmath>
#include <numeric>

#include "latn/error.hpp"
#include "latn/optim.hpp"
#include "latn/random.hpp"

namespace latn {

void TrainConfig::validate() const {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw Error(ErrorCode::kConfig, msg);
  };
  require(lr > 0.0 && std::isfinite(lr), "train.lr must be positive");
  require(batch_size >= 1, "train.batch_size must be >= 1");
  require(eval_every >= 1, "train.eval_every must be >= 1");
  require(early_stop_patience >= 1, "train.early_stop_patience must be >= 1");
  require(lr_factor > 0.0 && lr_factor < 1.0, "train.lr_factor must be in (0, 1)");
  require(lr_patience >= 1, "train.lr_patience must be >= 1");
  require(max_iters >= 1, "train.max_iters must be >= 1");
}

double batch_loss_and_grad(const VideoClassifier& model, const ModelParams& params,
                           std::span<const Example> batch, ModelParams& grads) {
  if (batch.empty()) throw Error(ErrorCode::kInvalidArgument, "batch_loss_and_grad: empty batch");
  grads = params.zeros_like();
  const double weight = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  ModelCache cache;
  for (const Example& ex : batch) {
    const Tensor logits = model.forward(params, ex.visual, ex.audio, ex.valid_len, &cache);
    loss += bce_loss(logits, ex.labels);
    model.backward(params, cache, bce_loss_grad(logits, ex.labels) * weight, grads);
  }
  return loss * weight;
}

std::vector<VideoPrediction> predict(const VideoClassifier& model, const ModelParams& params,
                                     std::span<const Example> examples) {
  std::vector<VideoPrediction> out;
  out.reserve(examples.size());
  for (const Example& ex : examples) {
    const Tensor logits = model.forward(params, ex.visual, ex.audio, ex.valid_len);
    VideoPrediction p;
    p.scores.reserve(logits.size());
    for (double z : logits.data()) p.scores.push_back(sigmoid(z));
    p.labels = ex.labels;
    out.push_back(std::move(p));
  }
  return out;
}

namespace {

template <class F>
double diverge_on_non_finite(std::size_t iter, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNonFinite) throw;
    throw Error(ErrorCode::kDivergence, "training diverged at iteration " + std::to_string(iter) + ": " + e.what());
  }
}

}  // namespace

TrainResult train(const VideoClassifier& model, ModelParams params, std::span<const Example> train_set,
                  std::span<const Example> val_set, const TrainConfig& config,
                  const std::function<void(const TrainLogEntry&)>& on_eval) {
  config.validate();
  model.check_params(params);
  if (train_set.empty()) throw Error(ErrorCode::kInvalidArgument, "train: empty training set");
  if (val_set.empty()) throw Error(ErrorCode::kInvalidArgument, "train: empty validation set");
  // Bad inputs are reported as such; a non-finite value that appears later is divergence.
  for (const auto* set : {&train_set, &val_set}) {
    for (const Example& ex : *set) {
      check_finite(ex.visual, "visual features of '" + ex.id + "'");
      check_finite(ex.audio, "audio features of '" + ex.id + "'");
    }
  }

  Adam adam(AdamConfig{config.lr});
  PlateauScheduler scheduler(config.lr, config.lr_factor, config.lr_patience);
  EarlyStopping stopper(config.early_stop_patience);
  Rng order_rng(config.seed ^ 0x9E3779B97F4A7C15ULL);

  TrainResult result;
  result.best_params = params;
  result.best_val_gap = -1.0;
  std::vector<std::size_t> order(train_set.size());
  std::size_t cursor = order.size();  // forces a shuffle on the first batch
  std::vector<Example> batch;
  ModelParams grads;
  double loss_sum = 0.0;
  std::size_t loss_count = 0;

  for (std::size_t iter = 1; iter <= config.max_iters; ++iter) {
    batch.clear();
    while (batch.size() < config.batch_size) {
      if (cursor == order.size()) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        order_rng.shuffle(order);
        cursor = 0;
      }
      batch.push_back(train_set[order[cursor++]]);
      if (batch.size() == train_set.size()) break;
    }
    const double loss = diverge_on_non_finite(iter, [&] { return batch_loss_and_grad(model, params, batch, grads); });
    if (!std::isfinite(loss)) {
      throw Error(ErrorCode::kDivergence, "training diverged: non-finite loss at iteration " + std::to_string(iter));
    }
    adam.step(params, grads);
    loss_sum += loss;
    ++loss_count;
    result.iterations = iter;

    if (iter % config.eval_every != 0 && iter != config.max_iters) continue;
    const double val_gap = diverge_on_non_finite(iter, [&] { return gap(predict(model, params, val_set)); });
    if (stopper.observe(val_gap)) {
      result.best_params = params;
      result.best_val_gap = val_gap;
      result.best_iteration = iter;
    }
    adam.set_lr(scheduler.observe(val_gap));
    TrainLogEntry entry{iter, loss_sum / static_cast<double>(loss_count), val_gap, adam.lr()};
    result.log.push_back(entry);
    if (on_eval) on_eval(entry);
    loss_sum = 0.0;
    loss_count = 0;
    if (stopper.should_stop()) {
      result.early_stopped = true;
      break;
    }
  }
  return result;
}

TrainResult train(const VideoClassifier& model, std::span<const Example> train_set,
                  std::span<const Example> val_set, const TrainConfig& config,
                  const std::function<void(const TrainLogEntry&)>& on_eval) {
  Rng rng(config.seed);
  return train(model, model.init_params(rng), train_set, val_set, config, on_eval);
}

}  // namespace latn
