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
#include <vector>

#include "latn/tensor.hpp"

namespace latn {

struct AdamConfig {
  double lr = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with bias-corrected moments. Moment buffers are keyed by position, so
/// every step must pass parameters in the same order.
class Adam {
 public:
  explicit Adam(AdamConfig config) : config_(config) {}

  template <class Params>
  void step(Params& params, const Params& grads) {
    std::vector<Tensor*> p;
    std::vector<const Tensor*> g;
    params.for_each([&p](const auto&, Tensor& t) { p.push_back(&t); });
    grads.for_each([&g](const auto&, const Tensor& t) { g.push_back(&t); });
    step(p, g);
  }
  void step(const std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads);

  double lr() const { return config_.lr; }
  void set_lr(double lr) { config_.lr = lr; }
  std::size_t steps() const { return steps_; }

 private:
  AdamConfig config_;
  std::size_t steps_ = 0;
  std::vector<Tensor> first_;
  std::vector<Tensor> second_;
};

/// Multiplies the learning rate by `factor` once `patience` consecutive
/// observations fail to improve on the best metric (higher is better).
class PlateauScheduler {
 public:
  PlateauScheduler(double initial_lr, double factor, std::size_t patience);

  /// Returns the (possibly reduced) learning rate after seeing `metric`.
  double observe(double metric);
  double lr() const { return lr_; }
  std::size_t bad_evals() const { return bad_evals_; }

 private:
  double lr_;
  double factor_;
  std::size_t patience_;
  std::optional<double> best_;
  std::size_t bad_evals_ = 0;
};

/// Signals a stop after `patience` consecutive non-improving observations.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience) : patience_(patience) {}

  /// Returns true when the metric improved on the best so far.
  bool observe(double metric);
  bool should_stop() const { return bad_evals_ >= patience_; }

 private:
  std::size_t patience_;
  std::optional<double> best_;
  std::size_t bad_evals_ = 0;
};

}  // namespace latn
