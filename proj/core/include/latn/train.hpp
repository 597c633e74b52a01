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
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "latn/data_io.hpp"
#include "latn/metrics.hpp"
#include "latn/model.hpp"

namespace latn {

struct TrainConfig {
  double lr = 2e-4;
  std::size_t batch_size = 64;
  std::size_t eval_every = 100;  // iterations between validation events
  std::size_t early_stop_patience = 5;  // in validation events
  double lr_factor = 0.1;
  std::size_t lr_patience = 3;  // in validation events
  std::size_t max_iters = 1000;
  std::uint64_t seed = 1;

  void validate() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct TrainLogEntry {
  std::size_t iteration = 0;
  double train_loss = 0.0;  // mean batch loss since the previous event
  double val_gap = 0.0;
  double lr = 0.0;          // rate in effect after this event
};

struct TrainResult {
  ModelParams best_params;
  double best_val_gap = 0.0;
  std::size_t best_iteration = 0;
  std::size_t iterations = 0;
  bool early_stopped = false;
  std::vector<TrainLogEntry> log;
};

/// Mean BCE over the batch; `grads` is overwritten with its gradient.
/// Items are processed in order, so the result is reproducible bit for bit.
double batch_loss_and_grad(const VideoClassifier& model, const ModelParams& params,
                           std::span<const Example> batch, ModelParams& grads);

/// Sigmoid scores for every example.
std::vector<VideoPrediction> predict(const VideoClassifier& model, const ModelParams& params,
                                     std::span<const Example> examples);

/// Adam on mean BCE. Validation GAP is computed every `eval_every`
/// iterations and after the last one; it drives the plateau scheduler and
/// early stopping, and the best-scoring parameters are returned.
/// Throws Error(kDivergence) on a non-finite loss.
TrainResult train(const VideoClassifier& model, ModelParams params, std::span<const Example> train_set,
                  std::span<const Example> val_set, const TrainConfig& config,
                  const std::function<void(const TrainLogEntry&)>& on_eval = {});

/// As above, starting from parameters initialized with `config.seed`.
TrainResult train(const VideoClassifier& model, std::span<const Example> train_set,
                  std::span<const Example> val_set, const TrainConfig& config,
                  const std::function<void(const TrainLogEntry&)>& on_eval = {});

}  // namespace latn
