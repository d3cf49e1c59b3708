// Copyright 2026 The cfisac Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <vector>

#include "cfisac/config.hpp"
#include "cfisac/nn/net.hpp"

namespace cfisac {

// Adaptive-moment optimizer with bias correction, one state pair per
// parameter tensor.
class Adam {
 public:
  Adam(PerApNet& net, double beta1, double beta2, double eps)
      : beta1_(beta1), beta2_(beta2), eps_(eps) {
    for (auto& p : net.params()) {
      m_.emplace_back(p.value->shape());
      v_.emplace_back(p.value->shape());
    }
  }

  void step(PerApNet& net, double lr) {
    ++t_;
    double c1 = 1.0 - std::pow(beta1_, t_);
    double c2 = 1.0 - std::pow(beta2_, t_);
    auto params = net.params();
    for (std::size_t i = 0; i < params.size(); ++i) {
      Tensor& val = *params[i].value;
      const Tensor& g = *params[i].grad;
      Tensor& m = m_[i];
      Tensor& v = v_[i];
      for (std::size_t k = 0; k < val.size(); ++k) {
        m[k] = beta1_ * m[k] + (1.0 - beta1_) * g[k];
        v[k] = beta2_ * v[k] + (1.0 - beta2_) * g[k] * g[k];
        double mhat = m[k] / c1;
        double vhat = v[k] / c2;
        val[k] -= lr * mhat / (std::sqrt(vhat) + eps_);
      }
    }
  }

 private:
  double beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<Tensor> m_, v_;
};

// Plateau learning-rate schedule: once the best epoch-mean loss has gone
// `patience` consecutive epochs without improving, the rate is divided by
// the decay factor.
class PlateauLrSchedule {
 public:
  PlateauLrSchedule(double initial_lr, double decay_factor, int patience)
      : lr_(initial_lr), factor_(decay_factor), patience_(patience) {}

  double step(double epoch_loss) {
    if (epoch_loss < best_) {
      best_ = epoch_loss;
      stale_ = 0;
    } else if (++stale_ >= patience_) {
      lr_ /= factor_;
      stale_ = 0;
    }
    return lr_;
  }

  double lr() const { return lr_; }

 private:
  double lr_;
  double factor_;
  int patience_;
  double best_ = std::numeric_limits<double>::infinity();
  int stale_ = 0;
};

// Best-value tracker for early stopping; `higher_is_better` selects the
// comparison direction.
class EarlyStopper {
 public:
  EarlyStopper(int patience, bool higher_is_better)
      : patience_(patience), higher_(higher_is_better),
        best_(higher_is_better ? -std::numeric_limits<double>::infinity()
                               : std::numeric_limits<double>::infinity()) {}

  // Returns true when the metric improved.
  bool observe(double value) {
    bool improved = higher_ ? value > best_ : value < best_;
    if (improved) {
      best_ = value;
      stale_ = 0;
    } else {
      ++stale_;
    }
    return improved;
  }

  bool should_stop() const { return stale_ >= patience_; }
  double best() const { return best_; }

 private:
  int patience_;
  bool higher_;
  double best_;
  int stale_ = 0;
};

}  // namespace cfisac
