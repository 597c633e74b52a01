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

#include "latn/optim.hpp"

#include <cmath>

#include "latn/error.hpp"

namespace latn {

void Adam::step(const std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads) {
  if (params.size() != grads.size()) throw Error(ErrorCode::kShape, "adam: parameter/gradient count mismatch");
  if (first_.empty()) {
    for (const Tensor* p : params) {
      first_.push_back(Tensor::zeros_like(*p));
      second_.push_back(Tensor::zeros_like(*p));
    }
  }
  if (first_.size() != params.size()) throw Error(ErrorCode::kShape, "adam: parameter count changed");
  ++steps_;
  const double t = static_cast<double>(steps_);
  const double correction1 = 1.0 - std::pow(config_.beta1, t);
  const double correction2 = 1.0 - std::pow(config_.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& p = *params[k];
    const Tensor& g = *grads[k];
    if (g.shape() != p.shape()) throw Error(ErrorCode::kShape, "adam: gradient shape mismatch");
    Tensor& m = first_[k];
    Tensor& v = second_[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g[i];
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      p[i] -= config_.lr * m_hat / (std::sqrt(v_hat) + config_.eps);
    }
  }
}

PlateauScheduler::PlateauScheduler(double initial_lr, double factor, std::size_t patience)
    : lr_(initial_lr), factor_(factor), patience_(patience) {
  if (!(factor > 0.0 && factor < 1.0)) throw Error(ErrorCode::kConfig, "lr_factor must be in (0, 1)");
  if (patience == 0) throw Error(ErrorCode::kConfig, "lr_patience must be >= 1");
}

double PlateauScheduler::observe(double metric) {
  if (!best_ || metric > *best_) {
    best_ = metric;
    bad_evals_ = 0;
    return lr_;
  }
  if (++bad_evals_ >= patience_) {
    lr_ *= factor_;
    bad_evals_ = 0;
  }
  return lr_;
}

bool EarlyStopping::observe(double metric) {
  if (!best_ || metric > *best_) {
    best_ = metric;
    bad_evals_ = 0;
    return true;
  }
  ++bad_evals_;
  return false;
}

}  // namespace latn
