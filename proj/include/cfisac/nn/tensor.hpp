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

#include <numeric>
#include <vector>

#include "cfisac/common.hpp"

namespace cfisac {

// Dense row-major real tensor. Rank is dynamic but the codebase only uses
// rank 1/2/4 ((B,F) activations and (B,C,H,W) feature maps).
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
    std::size_t n = 1;
    for (int d : shape_) {
      if (d < 0) throw shape_error("Tensor: negative dimension");
      n *= static_cast<std::size_t>(d);
    }
    d_.assign(n, 0.0);
  }

  const std::vector<int>& shape() const { return shape_; }
  int dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }
  int rank() const { return static_cast<int>(shape_.size()); }
  std::size_t size() const { return d_.size(); }
  bool empty() const { return d_.empty(); }

  double* data() { return d_.data(); }
  const double* data() const { return d_.data(); }

  double& operator[](std::size_t i) { return d_[i]; }
  double operator[](std::size_t i) const { return d_[i]; }

  // (B, F)
  double& at(int b, int f) { return d_[static_cast<std::size_t>(b) * shape_[1] + f]; }
  double at(int b, int f) const { return d_[static_cast<std::size_t>(b) * shape_[1] + f]; }

  // (B, C, H, W)
  std::size_t index(int b, int c, int h, int w) const {
    return ((static_cast<std::size_t>(b) * shape_[1] + c) * shape_[2] + h) * shape_[3] + w;
  }
  double& at(int b, int c, int h, int w) { return d_[index(b, c, h, w)]; }
  double at(int b, int c, int h, int w) const { return d_[index(b, c, h, w)]; }

  void set_zero() { std::fill(d_.begin(), d_.end(), 0.0); }

  Tensor reshaped(std::vector<int> shape) const {
    Tensor t(std::move(shape));
    if (t.size() != size()) throw shape_error("Tensor::reshaped: element count mismatch");
    t.d_ = d_;
    return t;
  }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

 private:
  std::vector<int> shape_;
  std::vector<double> d_;
};

// Named view over one parameter (or state) tensor and its gradient slot.
struct ParamView {
  std::string name;
  Tensor* value = nullptr;
  Tensor* grad = nullptr;  // null for non-trainable state
};

}  // namespace cfisac
