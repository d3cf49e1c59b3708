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

#include <memory>
#include <vector>

#include "cfisac/arch.hpp"
#include "cfisac/nn/layers.hpp"

namespace cfisac {

// One AP's network: real-valued in, raw real-valued beam prediction out.
class PerApNet {
 public:
  virtual ~PerApNet() = default;
  virtual Tensor forward(const Tensor& x, bool train) = 0;
  virtual Tensor backward(const Tensor& gy) = 0;
  virtual std::vector<ParamView> params() = 0;
  virtual std::vector<ParamView> state() = 0;

  void zero_grad() {
    for (auto& p : params())
      if (p.grad) p.grad->set_zero();
  }

  std::size_t num_parameters() {
    std::size_t n = 0;
    for (auto& p : params()) n += p.value->size();
    return n;
  }
};

// 1D conv stack on the flattened CSI vector, FC trunk, affine output
// head emitting the 2*M*(N+1) raw beam coefficients. Implemented on
// (B, C, len, 1) maps so the 2D machinery is reused.
class Cnn1dNet : public PerApNet {
 public:
  Cnn1dNet(const ArchitectureSpec& spec, int antennas, int beams) : slope_(spec.leaky_slope) {
    if (spec.conv_channels.size() != spec.conv_kernels.size())
      throw config_error("cnn1d: conv_channels/conv_kernels size mismatch");
    int len = 2 * antennas * beams;
    out_features_ = len;
    int c = 1;
    int cur = len;
    for (std::size_t i = 0; i < spec.conv_channels.size(); ++i) {
      int k = spec.conv_kernels[i];
      convs_.emplace_back("conv" + std::to_string(i + 1), c, spec.conv_channels[i], k, 1, 0, 0);
      bns_.emplace_back("bn" + std::to_string(i + 1), spec.conv_channels[i]);
      acts_.emplace_back(slope_);
      cur = cur - k + 1;
      if (cur < 1)
        throw config_error("cnn1d: conv chain collapses the signal; shrink kernels or filters");
      c = spec.conv_channels[i];
    }
    flat_ = c * cur;
    int in_f = flat_;
    for (std::size_t i = 0; i < spec.fc_widths.size(); ++i) {
      fcs_.emplace_back("fc" + std::to_string(i + 1), in_f, spec.fc_widths[i]);
      fc_acts_.emplace_back(slope_);
      in_f = spec.fc_widths[i];
    }
    head_ = Dense("head", in_f, out_features_);
  }

  void init(Rng& rng) {
    for (auto& c : convs_) c.init(rng, slope_);
    for (auto& f : fcs_) f.init(rng, slope_);
    head_.init(rng, slope_);
  }

  Tensor forward(const Tensor& x, bool train) override {
    Tensor t = x;
    for (std::size_t i = 0; i < convs_.size(); ++i) {
      t = convs_[i].forward(t);
      t = bns_[i].forward(t, train);
      t = acts_[i].forward(t);
    }
    conv_out_shape_ = t.shape();
    t = t.reshaped({t.dim(0), flat_});
    for (std::size_t i = 0; i < fcs_.size(); ++i) {
      t = fcs_[i].forward(t);
      t = fc_acts_[i].forward(t);
    }
    return head_.forward(t);
  }

  Tensor backward(const Tensor& gy) override {
    Tensor g = head_.backward(gy);
    for (std::size_t i = fcs_.size(); i-- > 0;) {
      g = fc_acts_[i].backward(g);
      g = fcs_[i].backward(g);
    }
    g = g.reshaped(conv_out_shape_);
    for (std::size_t i = convs_.size(); i-- > 0;) {
      g = acts_[i].backward(g);
      g = bns_[i].backward(g);
      g = convs_[i].backward(g);
    }
    return g;
  }

  std::vector<ParamView> params() override {
    std::vector<ParamView> out;
    for (std::size_t i = 0; i < convs_.size(); ++i) {
      for (auto& p : convs_[i].params()) out.push_back(p);
      for (auto& p : bns_[i].params()) out.push_back(p);
    }
    for (auto& f : fcs_)
      for (auto& p : f.params()) out.push_back(p);
    for (auto& p : head_.params()) out.push_back(p);
    return out;
  }

  std::vector<ParamView> state() override {
    std::vector<ParamView> out;
    for (auto& b : bns_)
      for (auto& p : b.state()) out.push_back(p);
    return out;
  }

  Dense& head() { return head_; }

 private:
  double slope_;
  int flat_ = 0;
  int out_features_ = 0;
  std::vector<int> conv_out_shape_;
  std::vector<Conv2d> convs_;
  std::vector<BatchNorm2d> bns_;
  std::vector<LeakyRelu> acts_;
  std::vector<Dense> fcs_;
  std::vector<LeakyRelu> fc_acts_;
  Dense head_;
};

// Encoder-decoder net covering both the CAE (unpadded convs down,
// transposed convs up) and the U-net style (padded convs throughout).
// Skip connections concatenate encoder maps onto decoder stage inputs; a
// 1x1 head maps the last decoder width to the two real/imaginary output
// planes.
class EncDecNet : public PerApNet {
 public:
  EncDecNet(const ArchitectureSpec& spec, int antennas, int beams)
      : slope_(spec.leaky_slope), transposed_decoder_(spec.kind == ArchKind::kCae),
        skips_(spec.skips) {
    if (spec.encoder.empty() || spec.decoder.empty())
      throw config_error("encoder/decoder chains must be non-empty");
    int h = antennas, w = beams;
    int c = 2;
    enc_shapes_.reserve(spec.encoder.size());
    for (std::size_t i = 0; i < spec.encoder.size(); ++i) {
      const auto& st = spec.encoder[i];
      enc_.emplace_back("enc" + std::to_string(i + 1), c, st.channels, st.k_antennas, st.k_agents,
                        st.pad_antennas, st.pad_agents);
      enc_bn_.emplace_back("enc_bn" + std::to_string(i + 1), st.channels);
      enc_act_.emplace_back(slope_);
      h = h + 2 * st.pad_antennas - st.k_antennas + 1;
      w = w + 2 * st.pad_agents - st.k_agents + 1;
      if (h < 1 || w < 1) throw config_error("encoder collapses the feature map");
      c = st.channels;
      enc_shapes_.push_back({c, h, w});
    }
    for (std::size_t i = 0; i < spec.decoder.size(); ++i) {
      const auto& st = spec.decoder[i];
      int in_c = c;
      for (const auto& sk : skips_) {
        if (sk[1] != static_cast<int>(i + 1)) continue;
        int e = sk[0];
        if (e < 1 || e > static_cast<int>(enc_shapes_.size()))
          throw config_error("skip references a missing encoder stage");
        const auto& es = enc_shapes_[e - 1];
        if (es[1] != h || es[2] != w)
          throw config_error("skip connects maps of different spatial sizes");
        in_c += es[0];
      }
      dec_in_channels_.push_back(in_c);
      if (transposed_decoder_) {
        dec_t_.emplace_back("dec" + std::to_string(i + 1), in_c, st.channels, st.k_antennas,
                            st.k_agents, st.pad_antennas, st.pad_agents);
        h = h - 1 + st.k_antennas - 2 * st.pad_antennas;
        w = w - 1 + st.k_agents - 2 * st.pad_agents;
      } else {
        dec_c_.emplace_back("dec" + std::to_string(i + 1), in_c, st.channels, st.k_antennas,
                            st.k_agents, st.pad_antennas, st.pad_agents);
        h = h + 2 * st.pad_antennas - st.k_antennas + 1;
        w = w + 2 * st.pad_agents - st.k_agents + 1;
      }
      if (h < 1 || w < 1) throw config_error("decoder collapses the feature map");
      dec_bn_.emplace_back("dec_bn" + std::to_string(i + 1), st.channels);
      dec_act_.emplace_back(slope_);
      c = st.channels;
    }
    if (h != antennas || w != beams)
      throw config_error("decoder does not restore the input map size; got " + std::to_string(h) +
                         "x" + std::to_string(w) + ", expected " + std::to_string(antennas) + "x" +
                         std::to_string(beams));
    head_ = Conv2d("head", c, 2, 1, 1, 0, 0);
  }

  void init(Rng& rng) {
    for (auto& e : enc_) e.init(rng, slope_);
    for (auto& d : dec_t_) d.init(rng, slope_);
    for (auto& d : dec_c_) d.init(rng, slope_);
    head_.init(rng, slope_);
  }

  Tensor forward(const Tensor& x, bool train) override {
    Tensor t = x;
    enc_outputs_.clear();
    enc_outputs_.reserve(enc_.size());
    for (std::size_t i = 0; i < enc_.size(); ++i) {
      t = enc_[i].forward(t);
      t = enc_bn_[i].forward(t, train);
      t = enc_act_[i].forward(t);
      enc_outputs_.push_back(t);
    }
    std::size_t n_dec = dec_bn_.size();
    for (std::size_t i = 0; i < n_dec; ++i) {
      for (const auto& sk : skips_)
        if (sk[1] == static_cast<int>(i + 1)) t = concat_channels(t, enc_outputs_[sk[0] - 1]);
      t = transposed_decoder_ ? dec_t_[i].forward(t) : dec_c_[i].forward(t);
      t = dec_bn_[i].forward(t, train);
      t = dec_act_[i].forward(t);
    }
    return head_.forward(t);
  }

  Tensor backward(const Tensor& gy) override {
    Tensor g = head_.backward(gy);
    std::size_t n_dec = dec_bn_.size();
    // Skip-branch gradients accumulate per encoder stage.
    std::vector<Tensor> skip_grads(enc_.size());
    for (std::size_t i = n_dec; i-- > 0;) {
      g = dec_act_[i].backward(g);
      g = dec_bn_[i].backward(g);
      g = transposed_decoder_ ? dec_t_[i].backward(g) : dec_c_[i].backward(g);
      for (auto it = skips_.rbegin(); it != skips_.rend(); ++it) {
        const auto& sk = *it;
        if (sk[1] != static_cast<int>(i + 1)) continue;
        const Tensor& enc_out = enc_outputs_[sk[0] - 1];
        Tensor trunk({g.dim(0), g.dim(1) - enc_out.dim(1), g.dim(2), g.dim(3)});
        Tensor branch(enc_out.shape());
        split_channels(g, trunk, branch);
        if (skip_grads[sk[0] - 1].empty())
          skip_grads[sk[0] - 1] = branch;
        else
          for (std::size_t k = 0; k < branch.size(); ++k) skip_grads[sk[0] - 1][k] += branch[k];
        g = std::move(trunk);
      }
    }
    for (std::size_t i = enc_.size(); i-- > 0;) {
      if (!skip_grads[i].empty())
        for (std::size_t k = 0; k < g.size(); ++k) g[k] += skip_grads[i][k];
      g = enc_act_[i].backward(g);
      g = enc_bn_[i].backward(g);
      g = enc_[i].backward(g);
    }
    return g;
  }

  std::vector<ParamView> params() override {
    std::vector<ParamView> out;
    for (std::size_t i = 0; i < enc_.size(); ++i) {
      for (auto& p : enc_[i].params()) out.push_back(p);
      for (auto& p : enc_bn_[i].params()) out.push_back(p);
    }
    for (std::size_t i = 0; i < dec_bn_.size(); ++i) {
      if (transposed_decoder_)
        for (auto& p : dec_t_[i].params()) out.push_back(p);
      else
        for (auto& p : dec_c_[i].params()) out.push_back(p);
      for (auto& p : dec_bn_[i].params()) out.push_back(p);
    }
    for (auto& p : head_.params()) out.push_back(p);
    return out;
  }

  std::vector<ParamView> state() override {
    std::vector<ParamView> out;
    for (auto& b : enc_bn_)
      for (auto& p : b.state()) out.push_back(p);
    for (auto& b : dec_bn_)
      for (auto& p : b.state()) out.push_back(p);
    return out;
  }

  Conv2d& head() { return head_; }

 private:
  double slope_;
  bool transposed_decoder_;
  std::vector<std::array<int, 2>> skips_;
  std::vector<Conv2d> enc_;
  std::vector<BatchNorm2d> enc_bn_;
  std::vector<LeakyRelu> enc_act_;
  std::vector<ConvTranspose2d> dec_t_;
  std::vector<Conv2d> dec_c_;
  std::vector<BatchNorm2d> dec_bn_;
  std::vector<LeakyRelu> dec_act_;
  Conv2d head_;
  std::vector<std::array<int, 3>> enc_shapes_;
  std::vector<int> dec_in_channels_;
  std::vector<Tensor> enc_outputs_;
};

inline std::unique_ptr<PerApNet> make_per_ap_net(const ArchitectureSpec& spec, int antennas,
                                                 int beams, Rng& rng) {
  std::unique_ptr<PerApNet> net;
  if (spec.kind == ArchKind::kCnn1d) {
    auto n = std::make_unique<Cnn1dNet>(spec, antennas, beams);
    n->init(rng);
    net = std::move(n);
  } else {
    auto n = std::make_unique<EncDecNet>(spec, antennas, beams);
    n->init(rng);
    net = std::move(n);
  }
  return net;
}

}  // namespace cfisac
