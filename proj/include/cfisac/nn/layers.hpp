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
#include <string>
#include <vector>

#include "cfisac/nn/tensor.hpp"
#include "cfisac/parallel.hpp"

namespace cfisac {

// He-style uniform fan-in init, gain tuned for leaky rectification.
inline void he_uniform_fill(Tensor& t, int fan_in, Rng& rng, double leaky_slope) {
  double gain = std::sqrt(2.0 / (1.0 + leaky_slope * leaky_slope));
  double bound = gain * std::sqrt(3.0 / static_cast<double>(fan_in));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-bound, bound);
}

// Stride-1 2D convolution with zero padding. Weights are (out_c, in_c,
// kh, kw); output spatial size is H + 2*ph - kh + 1.
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(std::string name, int in_c, int out_c, int kh, int kw, int ph, int pw)
      : name_(std::move(name)), in_c_(in_c), out_c_(out_c), kh_(kh), kw_(kw), ph_(ph), pw_(pw),
        w_(Tensor({out_c, in_c, kh, kw})), b_(Tensor({out_c})),
        gw_(Tensor({out_c, in_c, kh, kw})), gb_(Tensor({out_c})) {}

  void init(Rng& rng, double leaky_slope) {
    he_uniform_fill(w_, in_c_ * kh_ * kw_, rng, leaky_slope);
    b_.set_zero();
  }

  int out_h(int h) const { return h + 2 * ph_ - kh_ + 1; }
  int out_w(int w) const { return w + 2 * pw_ - kw_ + 1; }

  Tensor forward(const Tensor& x) {
    check_input(x);
    x_ = x;
    int batch = x.dim(0), h = x.dim(2), w = x.dim(3);
    int oh = out_h(h), ow = out_w(w);
    if (oh < 1 || ow < 1) throw shape_error(name_ + ": kernel larger than padded input");
    Tensor y({batch, out_c_, oh, ow});
    // Tap-major accumulation: per (ic, u, v) tap the inner width loop is
    // contiguous in both maps.
    parallel_for(static_cast<std::size_t>(batch), [&](std::size_t bs) {
      int b = static_cast<int>(bs);
      for (int oc = 0; oc < out_c_; ++oc) {
        double* yplane = y.data() + y.index(b, oc, 0, 0);
        std::fill(yplane, yplane + static_cast<std::size_t>(oh) * ow, b_[oc]);
        for (int ic = 0; ic < in_c_; ++ic)
          for (int u = 0; u < kh_; ++u) {
            int i_lo = std::max(0, ph_ - u);
            int i_hi = std::min(oh, h + ph_ - u);
            for (int v = 0; v < kw_; ++v) {
              double wv = w_.at(oc, ic, u, v);
              int j_lo = std::max(0, pw_ - v);
              int j_hi = std::min(ow, w + pw_ - v);
              for (int i = i_lo; i < i_hi; ++i) {
                const double* xrow = x.data() + x.index(b, ic, i + u - ph_, 0) + (v - pw_);
                double* yrow = yplane + static_cast<std::size_t>(i) * ow;
                for (int j = j_lo; j < j_hi; ++j) yrow[j] += wv * xrow[j];
              }
            }
          }
      }
    });
    return y;
  }

  Tensor backward(const Tensor& gy) {
    int batch = x_.dim(0), h = x_.dim(2), w = x_.dim(3);
    int oh = gy.dim(2), ow = gy.dim(3);
    Tensor gx(x_.shape());
    parallel_for(static_cast<std::size_t>(batch), [&](std::size_t bs) {
      int b = static_cast<int>(bs);
      for (int oc = 0; oc < out_c_; ++oc)
        for (int ic = 0; ic < in_c_; ++ic)
          for (int u = 0; u < kh_; ++u) {
            int i_lo = std::max(0, ph_ - u);
            int i_hi = std::min(oh, h + ph_ - u);
            for (int v = 0; v < kw_; ++v) {
              double wv = w_.at(oc, ic, u, v);
              int j_lo = std::max(0, pw_ - v);
              int j_hi = std::min(ow, w + pw_ - v);
              for (int i = i_lo; i < i_hi; ++i) {
                const double* gyrow = gy.data() + gy.index(b, oc, i, 0);
                double* gxrow = gx.data() + gx.index(b, ic, i + u - ph_, 0) + (v - pw_);
                for (int j = j_lo; j < j_hi; ++j) gxrow[j] += wv * gyrow[j];
              }
            }
          }
    });
    // Weight gradients: one worker per output channel keeps the per-slice
    // accumulation order fixed.
    parallel_for(static_cast<std::size_t>(out_c_), [&](std::size_t ocs) {
      int oc = static_cast<int>(ocs);
      double gbias = 0.0;
      for (int b = 0; b < batch; ++b) {
        const double* gyplane = gy.data() + gy.index(b, oc, 0, 0);
        for (std::size_t i = 0; i < static_cast<std::size_t>(oh) * ow; ++i) gbias += gyplane[i];
      }
      gb_[oc] += gbias;
      for (int ic = 0; ic < in_c_; ++ic)
        for (int u = 0; u < kh_; ++u) {
          int i_lo = std::max(0, ph_ - u);
          int i_hi = std::min(oh, h + ph_ - u);
          for (int v = 0; v < kw_; ++v) {
            int j_lo = std::max(0, pw_ - v);
            int j_hi = std::min(ow, w + pw_ - v);
            double acc = 0.0;
            for (int b = 0; b < batch; ++b)
              for (int i = i_lo; i < i_hi; ++i) {
                const double* gyrow = gy.data() + gy.index(b, oc, i, 0);
                const double* xrow = x_.data() + x_.index(b, ic, i + u - ph_, 0) + (v - pw_);
                for (int j = j_lo; j < j_hi; ++j) acc += gyrow[j] * xrow[j];
              }
            gw_.at(oc, ic, u, v) += acc;
          }
        }
    });
    return gx;
  }

  std::vector<ParamView> params() {
    return {{name_ + ".w", &w_, &gw_}, {name_ + ".b", &b_, &gb_}};
  }

  Tensor& weight() { return w_; }
  Tensor& bias() { return b_; }

 private:
  void check_input(const Tensor& x) const {
    if (x.rank() != 4 || x.dim(1) != in_c_) throw shape_error(name_ + ": bad input shape");
  }

  std::string name_;
  int in_c_ = 0, out_c_ = 0, kh_ = 0, kw_ = 0, ph_ = 0, pw_ = 0;
  Tensor w_, b_, gw_, gb_;
  Tensor x_;
};

// Stride-1 transposed convolution (the adjoint scatter of Conv2d).
// Weights are (in_c, out_c, kh, kw); output spatial size is
// H - 1 + kh - 2*ph.
class ConvTranspose2d {
 public:
  ConvTranspose2d() = default;
  ConvTranspose2d(std::string name, int in_c, int out_c, int kh, int kw, int ph, int pw)
      : name_(std::move(name)), in_c_(in_c), out_c_(out_c), kh_(kh), kw_(kw), ph_(ph), pw_(pw),
        w_(Tensor({in_c, out_c, kh, kw})), b_(Tensor({out_c})),
        gw_(Tensor({in_c, out_c, kh, kw})), gb_(Tensor({out_c})) {}

  void init(Rng& rng, double leaky_slope) {
    he_uniform_fill(w_, in_c_ * kh_ * kw_, rng, leaky_slope);
    b_.set_zero();
  }

  int out_h(int h) const { return h - 1 + kh_ - 2 * ph_; }
  int out_w(int w) const { return w - 1 + kw_ - 2 * pw_; }

  Tensor forward(const Tensor& x) {
    if (x.rank() != 4 || x.dim(1) != in_c_) throw shape_error(name_ + ": bad input shape");
    x_ = x;
    int batch = x.dim(0), h = x.dim(2), w = x.dim(3);
    int oh = out_h(h), ow = out_w(w);
    if (oh < 1 || ow < 1) throw shape_error(name_ + ": degenerate output size");
    Tensor y({batch, out_c_, oh, ow});
    // Gather form of the scatter definition: y(i,j) sums
    // x(i+ph-u, j+pw-v) * w(u,v) over valid taps.
    parallel_for(static_cast<std::size_t>(batch), [&](std::size_t bs) {
      int b = static_cast<int>(bs);
      for (int oc = 0; oc < out_c_; ++oc) {
        double* yplane = y.data() + y.index(b, oc, 0, 0);
        std::fill(yplane, yplane + static_cast<std::size_t>(oh) * ow, b_[oc]);
        for (int ic = 0; ic < in_c_; ++ic)
          for (int u = 0; u < kh_; ++u) {
            int i_lo = std::max(0, u - ph_);
            int i_hi = std::min(oh, h + u - ph_);
            for (int v = 0; v < kw_; ++v) {
              double wv = w_.at(ic, oc, u, v);
              int j_lo = std::max(0, v - pw_);
              int j_hi = std::min(ow, w + v - pw_);
              for (int i = i_lo; i < i_hi; ++i) {
                const double* xrow = x.data() + x.index(b, ic, i + ph_ - u, 0) + (pw_ - v);
                double* yrow = yplane + static_cast<std::size_t>(i) * ow;
                for (int j = j_lo; j < j_hi; ++j) yrow[j] += wv * xrow[j];
              }
            }
          }
      }
    });
    return y;
  }

  Tensor backward(const Tensor& gy) {
    int batch = x_.dim(0), h = x_.dim(2), w = x_.dim(3);
    int oh = gy.dim(2), ow = gy.dim(3);
    Tensor gx(x_.shape());
    parallel_for(static_cast<std::size_t>(batch), [&](std::size_t bs) {
      int b = static_cast<int>(bs);
      for (int oc = 0; oc < out_c_; ++oc)
        for (int ic = 0; ic < in_c_; ++ic)
          for (int u = 0; u < kh_; ++u) {
            int ih_lo = std::max(0, ph_ - u);
            int ih_hi = std::min(h, oh + ph_ - u);
            for (int v = 0; v < kw_; ++v) {
              double wv = w_.at(ic, oc, u, v);
              int iw_lo = std::max(0, pw_ - v);
              int iw_hi = std::min(w, ow + pw_ - v);
              for (int ih = ih_lo; ih < ih_hi; ++ih) {
                const double* gyrow = gy.data() + gy.index(b, oc, ih - ph_ + u, 0) + (v - pw_);
                double* gxrow = gx.data() + gx.index(b, ic, ih, 0);
                for (int iw = iw_lo; iw < iw_hi; ++iw) gxrow[iw] += wv * gyrow[iw];
              }
            }
          }
    });
    parallel_for(static_cast<std::size_t>(out_c_), [&](std::size_t ocs) {
      int oc = static_cast<int>(ocs);
      double gbias = 0.0;
      for (int b = 0; b < batch; ++b) {
        const double* gyplane = gy.data() + gy.index(b, oc, 0, 0);
        for (std::size_t i = 0; i < static_cast<std::size_t>(oh) * ow; ++i) gbias += gyplane[i];
      }
      gb_[oc] += gbias;
      for (int ic = 0; ic < in_c_; ++ic)
        for (int u = 0; u < kh_; ++u) {
          int ih_lo = std::max(0, ph_ - u);
          int ih_hi = std::min(h, oh + ph_ - u);
          for (int v = 0; v < kw_; ++v) {
            int iw_lo = std::max(0, pw_ - v);
            int iw_hi = std::min(w, ow + pw_ - v);
            double acc = 0.0;
            for (int b = 0; b < batch; ++b)
              for (int ih = ih_lo; ih < ih_hi; ++ih) {
                const double* gyrow = gy.data() + gy.index(b, oc, ih - ph_ + u, 0) + (v - pw_);
                const double* xrow = x_.data() + x_.index(b, ic, ih, 0);
                for (int iw = iw_lo; iw < iw_hi; ++iw) acc += xrow[iw] * gyrow[iw];
              }
            gw_.at(ic, oc, u, v) += acc;
          }
        }
    });
    return gx;
  }

  std::vector<ParamView> params() {
    return {{name_ + ".w", &w_, &gw_}, {name_ + ".b", &b_, &gb_}};
  }

 private:
  std::string name_;
  int in_c_ = 0, out_c_ = 0, kh_ = 0, kw_ = 0, ph_ = 0, pw_ = 0;
  Tensor w_, b_, gw_, gb_;
  Tensor x_;
};

// Per-channel batch normalization over (B, H, W). Training mode uses
// mini-batch statistics and maintains running averages (momentum 0.1) for
// inference.
class BatchNorm2d {
 public:
  static constexpr double kEps = 1e-5;
  static constexpr double kMomentum = 0.1;

  BatchNorm2d() = default;
  BatchNorm2d(std::string name, int channels)
      : name_(std::move(name)), c_(channels), gamma_(Tensor({channels})), beta_(Tensor({channels})),
        ggamma_(Tensor({channels})), gbeta_(Tensor({channels})), run_mean_(Tensor({channels})),
        run_var_(Tensor({channels})) {
    for (int i = 0; i < channels; ++i) {
      gamma_[i] = 1.0;
      run_var_[i] = 1.0;
    }
  }

  Tensor forward(const Tensor& x, bool train) {
    if (x.rank() != 4 || x.dim(1) != c_) throw shape_error(name_ + ": bad input shape");
    train_mode_ = train;
    int batch = x.dim(0), h = x.dim(2), w = x.dim(3);
    std::size_t plane = static_cast<std::size_t>(h) * w;
    double n = static_cast<double>(batch) * static_cast<double>(plane);
    xhat_ = Tensor(x.shape());
    invstd_ = Tensor({c_});
    Tensor y(x.shape());
    parallel_for(static_cast<std::size_t>(c_), [&](std::size_t cs) {
      int c = static_cast<int>(cs);
      double mean, var;
      if (train) {
        double s = 0.0;
        for (int b = 0; b < batch; ++b) {
          const double* p = x.data() + x.index(b, c, 0, 0);
          for (std::size_t i = 0; i < plane; ++i) s += p[i];
        }
        mean = s / n;
        double v = 0.0;
        for (int b = 0; b < batch; ++b) {
          const double* p = x.data() + x.index(b, c, 0, 0);
          for (std::size_t i = 0; i < plane; ++i) {
            double d = p[i] - mean;
            v += d * d;
          }
        }
        var = v / n;
        run_mean_[c] = (1.0 - kMomentum) * run_mean_[c] + kMomentum * mean;
        run_var_[c] = (1.0 - kMomentum) * run_var_[c] + kMomentum * var;
      } else {
        mean = run_mean_[c];
        var = run_var_[c];
      }
      double istd = 1.0 / std::sqrt(var + kEps);
      invstd_[c] = istd;
      double g = gamma_[c], bt = beta_[c];
      for (int b = 0; b < batch; ++b) {
        const double* p = x.data() + x.index(b, c, 0, 0);
        double* xh = xhat_.data() + x.index(b, c, 0, 0);
        double* py = y.data() + x.index(b, c, 0, 0);
        for (std::size_t i = 0; i < plane; ++i) {
          xh[i] = (p[i] - mean) * istd;
          py[i] = g * xh[i] + bt;
        }
      }
    });
    return y;
  }

  Tensor backward(const Tensor& gy) {
    int batch = gy.dim(0), h = gy.dim(2), w = gy.dim(3);
    std::size_t plane = static_cast<std::size_t>(h) * w;
    double n = static_cast<double>(batch) * static_cast<double>(plane);
    Tensor gx(gy.shape());
    parallel_for(static_cast<std::size_t>(c_), [&](std::size_t cs) {
      int c = static_cast<int>(cs);
      double sum_gy = 0.0, sum_gy_xhat = 0.0;
      for (int b = 0; b < batch; ++b) {
        const double* g = gy.data() + gy.index(b, c, 0, 0);
        const double* xh = xhat_.data() + gy.index(b, c, 0, 0);
        for (std::size_t i = 0; i < plane; ++i) {
          sum_gy += g[i];
          sum_gy_xhat += g[i] * xh[i];
        }
      }
      ggamma_[c] += sum_gy_xhat;
      gbeta_[c] += sum_gy;
      double k = gamma_[c] * invstd_[c];
      for (int b = 0; b < batch; ++b) {
        const double* g = gy.data() + gy.index(b, c, 0, 0);
        const double* xh = xhat_.data() + gy.index(b, c, 0, 0);
        double* out = gx.data() + gy.index(b, c, 0, 0);
        if (train_mode_) {
          for (std::size_t i = 0; i < plane; ++i)
            out[i] = k * (g[i] - sum_gy / n - xh[i] * sum_gy_xhat / n);
        } else {
          for (std::size_t i = 0; i < plane; ++i) out[i] = k * g[i];
        }
      }
    });
    return gx;
  }

  std::vector<ParamView> params() {
    return {{name_ + ".gamma", &gamma_, &ggamma_}, {name_ + ".beta", &beta_, &gbeta_}};
  }
  std::vector<ParamView> state() {
    return {{name_ + ".run_mean", &run_mean_, nullptr}, {name_ + ".run_var", &run_var_, nullptr}};
  }

 private:
  std::string name_;
  int c_ = 0;
  Tensor gamma_, beta_, ggamma_, gbeta_, run_mean_, run_var_;
  Tensor xhat_, invstd_;
  bool train_mode_ = true;
};

class LeakyRelu {
 public:
  explicit LeakyRelu(double slope = 0.01) : slope_(slope) {}

  Tensor forward(const Tensor& x) {
    x_ = x;
    Tensor y(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) {
      double v = x[i];
      y[i] = v > 0.0 ? v : slope_ * v;
    }
    return y;
  }

  Tensor backward(const Tensor& gy) {
    Tensor gx(gy.shape());
    for (std::size_t i = 0; i < gy.size(); ++i) gx[i] = gy[i] * (x_[i] > 0.0 ? 1.0 : slope_);
    return gx;
  }

 private:
  double slope_;
  Tensor x_;
};

// Fully connected layer on (B, F) activations.
class Dense {
 public:
  Dense() = default;
  Dense(std::string name, int in_f, int out_f)
      : name_(std::move(name)), in_f_(in_f), out_f_(out_f), w_(Tensor({out_f, in_f})),
        b_(Tensor({out_f})), gw_(Tensor({out_f, in_f})), gb_(Tensor({out_f})) {}

  void init(Rng& rng, double leaky_slope) {
    he_uniform_fill(w_, in_f_, rng, leaky_slope);
    b_.set_zero();
  }

  Tensor forward(const Tensor& x) {
    if (x.rank() != 2 || x.dim(1) != in_f_) throw shape_error(name_ + ": bad input shape");
    x_ = x;
    int batch = x.dim(0);
    Tensor y({batch, out_f_});
    parallel_for(static_cast<std::size_t>(batch), [&](std::size_t b) {
      for (int o = 0; o < out_f_; ++o) {
        double acc = b_[o];
        const double* wrow = w_.data() + static_cast<std::size_t>(o) * in_f_;
        const double* xin = x.data() + b * static_cast<std::size_t>(in_f_);
        for (int i = 0; i < in_f_; ++i) acc += wrow[i] * xin[i];
        y.at(static_cast<int>(b), o) = acc;
      }
    });
    return y;
  }

  Tensor backward(const Tensor& gy) {
    int batch = x_.dim(0);
    Tensor gx({batch, in_f_});
    parallel_for(static_cast<std::size_t>(batch), [&](std::size_t b) {
      double* gxin = gx.data() + b * static_cast<std::size_t>(in_f_);
      for (int o = 0; o < out_f_; ++o) {
        double g = gy.at(static_cast<int>(b), o);
        const double* wrow = w_.data() + static_cast<std::size_t>(o) * in_f_;
        for (int i = 0; i < in_f_; ++i) gxin[i] += g * wrow[i];
      }
    });
    parallel_for(static_cast<std::size_t>(out_f_), [&](std::size_t os) {
      int o = static_cast<int>(os);
      double* gwrow = gw_.data() + static_cast<std::size_t>(o) * in_f_;
      double gbias = 0.0;
      for (int b = 0; b < batch; ++b) {
        double g = gy.at(b, o);
        gbias += g;
        const double* xin = x_.data() + static_cast<std::size_t>(b) * in_f_;
        for (int i = 0; i < in_f_; ++i) gwrow[i] += g * xin[i];
      }
      gb_[o] += gbias;
    });
    return gx;
  }

  std::vector<ParamView> params() {
    return {{name_ + ".w", &w_, &gw_}, {name_ + ".b", &b_, &gb_}};
  }

  Tensor& weight() { return w_; }
  Tensor& bias() { return b_; }

 private:
  std::string name_;
  int in_f_ = 0, out_f_ = 0;
  Tensor w_, b_, gw_, gb_;
  Tensor x_;
};

// Channel-axis concatenation of two feature maps with equal spatial size.
inline Tensor concat_channels(const Tensor& a, const Tensor& b) {
  if (a.dim(0) != b.dim(0) || a.dim(2) != b.dim(2) || a.dim(3) != b.dim(3))
    throw shape_error("concat_channels: incompatible shapes");
  Tensor y({a.dim(0), a.dim(1) + b.dim(1), a.dim(2), a.dim(3)});
  std::size_t plane = static_cast<std::size_t>(a.dim(2)) * a.dim(3);
  for (int bi = 0; bi < a.dim(0); ++bi) {
    std::copy(a.data() + a.index(bi, 0, 0, 0), a.data() + a.index(bi, 0, 0, 0) + plane * a.dim(1),
              y.data() + y.index(bi, 0, 0, 0));
    std::copy(b.data() + b.index(bi, 0, 0, 0), b.data() + b.index(bi, 0, 0, 0) + plane * b.dim(1),
              y.data() + y.index(bi, a.dim(1), 0, 0));
  }
  return y;
}

inline void split_channels(const Tensor& y, Tensor& a, Tensor& b) {
  std::size_t plane = static_cast<std::size_t>(y.dim(2)) * y.dim(3);
  for (int bi = 0; bi < y.dim(0); ++bi) {
    std::copy(y.data() + y.index(bi, 0, 0, 0), y.data() + y.index(bi, 0, 0, 0) + plane * a.dim(1),
              a.data() + a.index(bi, 0, 0, 0));
    std::copy(y.data() + y.index(bi, a.dim(1), 0, 0),
              y.data() + y.index(bi, a.dim(1), 0, 0) + plane * b.dim(1),
              b.data() + b.index(bi, 0, 0, 0));
  }
}

}  // namespace cfisac
