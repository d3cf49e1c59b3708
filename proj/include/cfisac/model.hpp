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

#include "cfisac/metrics.hpp"
#include "cfisac/nn/net.hpp"

namespace cfisac {

// Flattened CSI of AP l: all real parts (users then sensing steering,
// antenna-major within each agent), then all imaginary parts.
inline std::vector<double> build_input_1d(const ChannelScene& scene, int l) {
  const CMatrix& h = scene.comm[l];
  const CVector& a = scene.steering[l];
  int m = h.rows(), n = h.cols();
  int k = m * (n + 1);
  std::vector<double> out(2 * k);
  int pos = 0;
  for (int agent = 0; agent < n; ++agent)
    for (int i = 0; i < m; ++i) out[pos++] = h(i, agent).real();
  for (int i = 0; i < m; ++i) out[pos++] = a[i].real();
  for (int agent = 0; agent < n; ++agent)
    for (int i = 0; i < m; ++i) out[pos++] = h(i, agent).imag();
  for (int i = 0; i < m; ++i) out[pos++] = a[i].imag();
  return out;
}

// 2 x M x (N+1) CSI image: channel 0 the real plane of [h_1..h_N a],
// channel 1 the imaginary plane.
inline Tensor build_input_2d(const ChannelScene& scene, int l) {
  const CMatrix& h = scene.comm[l];
  const CVector& a = scene.steering[l];
  int m = h.rows(), n = h.cols();
  Tensor t({1, 2, m, n + 1});
  for (int i = 0; i < m; ++i) {
    for (int agent = 0; agent < n; ++agent) {
      t.at(0, 0, i, agent) = h(i, agent).real();
      t.at(0, 1, i, agent) = h(i, agent).imag();
    }
    t.at(0, 0, i, n) = a[i].real();
    t.at(0, 1, i, n) = a[i].imag();
  }
  return t;
}

// Batched builders over a list of scene indices.
inline Tensor build_input_batch(ArchKind kind, const std::vector<const ChannelScene*>& scenes,
                                int l) {
  int batch = static_cast<int>(scenes.size());
  if (batch == 0) throw shape_error("build_input_batch: empty batch");
  if (kind == ArchKind::kCnn1d) {
    auto first = build_input_1d(*scenes[0], l);
    int len = static_cast<int>(first.size());
    Tensor t({batch, 1, len, 1});
    std::copy(first.begin(), first.end(), t.data());
    for (int b = 1; b < batch; ++b) {
      auto v = build_input_1d(*scenes[b], l);
      std::copy(v.begin(), v.end(), t.data() + static_cast<std::size_t>(b) * len);
    }
    return t;
  }
  Tensor first = build_input_2d(*scenes[0], l);
  Tensor t({batch, 2, first.dim(2), first.dim(3)});
  std::copy(first.data(), first.data() + first.size(), t.data());
  for (int b = 1; b < batch; ++b) {
    Tensor v = build_input_2d(*scenes[b], l);
    std::copy(v.data(), v.data() + v.size(), t.data() + static_cast<std::size_t>(b) * v.size());
  }
  return t;
}

// L identical per-AP networks with independently seeded parameters.
struct DistributedModel {
  ArchitectureSpec spec;
  SystemConfig system;
  std::vector<std::unique_ptr<PerApNet>> nets;

  int num_aps() const { return static_cast<int>(nets.size()); }

  // Flat snapshot of all parameters and normalization state, used for
  // best-epoch checkpointing.
  std::vector<std::vector<double>> snapshot() {
    std::vector<std::vector<double>> out;
    for (auto& net : nets) {
      std::vector<double> flat;
      for (auto& p : net->params()) flat.insert(flat.end(), p.value->data(), p.value->data() + p.value->size());
      for (auto& p : net->state()) flat.insert(flat.end(), p.value->data(), p.value->data() + p.value->size());
      out.push_back(std::move(flat));
    }
    return out;
  }

  void restore(const std::vector<std::vector<double>>& snap) {
    if (snap.size() != nets.size()) throw shape_error("restore: AP count mismatch");
    for (std::size_t l = 0; l < nets.size(); ++l) {
      std::size_t pos = 0;
      auto put = [&](ParamView& p) {
        for (std::size_t i = 0; i < p.value->size(); ++i) (*p.value)[i] = snap[l][pos++];
      };
      for (auto& p : nets[l]->params()) put(p);
      for (auto& p : nets[l]->state()) put(p);
      if (pos != snap[l].size()) throw shape_error("restore: parameter count mismatch");
    }
  }
};

inline DistributedModel init_model(const ArchitectureSpec& spec, const SystemConfig& system,
                                   std::uint64_t seed) {
  system.validate();
  DistributedModel model;
  model.spec = spec;
  model.system = system;
  model.nets.reserve(system.num_aps);
  for (int l = 0; l < system.num_aps; ++l) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(l)));
    model.nets.push_back(
        make_per_ap_net(spec, system.antennas_per_ap, system.beams_per_ap(), rng));
  }
  return model;
}

// ---------------------------------------------------------------------------
// Raw output <-> complex beams. The raw real prediction splits into real
// and imaginary halves (vector nets) or planes (image nets); the complex
// stack is rescaled so the AP spends exactly its power budget.
// ---------------------------------------------------------------------------

struct NormalizeCache {
  std::vector<cdouble> u;  // complex raw prediction, agent-major
  double r = 0.0;          // ||u||
  double inv_den = 0.0;    // 1 / (||u|| + guard)
  double power = 0.0;      // P_l
};

inline constexpr double kNormGuard = 1e-12;

namespace detail {

// Complex raw vector for one batch item, entry q*M+m <-> beam (m, q).
inline void raw_to_complex(const Tensor& raw, int item, int m, int beams, ArchKind kind,
                           std::vector<cdouble>& u) {
  int k = m * beams;
  u.resize(k);
  if (kind == ArchKind::kCnn1d) {
    const double* p = raw.data() + static_cast<std::size_t>(item) * raw.dim(1);
    for (int i = 0; i < k; ++i) u[i] = {p[i], p[k + i]};
  } else {
    for (int q = 0; q < beams; ++q)
      for (int i = 0; i < m; ++i) u[q * m + i] = {raw.at(item, 0, i, q), raw.at(item, 1, i, q)};
  }
}

inline void complex_to_raw_grad(const std::vector<cdouble>& gu, int item, int m, int beams,
                                ArchKind kind, Tensor& raw_grad) {
  int k = m * beams;
  if (kind == ArchKind::kCnn1d) {
    double* p = raw_grad.data() + static_cast<std::size_t>(item) * raw_grad.dim(1);
    for (int i = 0; i < k; ++i) {
      p[i] = gu[i].real();
      p[k + i] = gu[i].imag();
    }
  } else {
    for (int q = 0; q < beams; ++q)
      for (int i = 0; i < m; ++i) {
        raw_grad.at(item, 0, i, q) = gu[q * m + i].real();
        raw_grad.at(item, 1, i, q) = gu[q * m + i].imag();
      }
  }
}

}  // namespace detail

// W = sqrt(P) * u / (||u|| + guard), reshaped to M x (N+1).
inline CMatrix normalize_output(const Tensor& raw, int item, int m, int beams, ArchKind kind,
                                double power, NormalizeCache* cache = nullptr) {
  NormalizeCache local;
  NormalizeCache& c = cache ? *cache : local;
  detail::raw_to_complex(raw, item, m, beams, kind, c.u);
  double ss = 0.0;
  for (const auto& v : c.u) ss += std::norm(v);
  c.r = std::sqrt(ss);
  c.inv_den = 1.0 / (c.r + kNormGuard);
  c.power = power;
  double scale = std::sqrt(power) * c.inv_den;
  CMatrix w(m, beams);
  for (int q = 0; q < beams; ++q)
    for (int i = 0; i < m; ++i) w(i, q) = c.u[q * m + i] * scale;
  return w;
}

// Convenience single-vector form.
inline CMatrix normalize_output(const std::vector<double>& raw, int m, int beams, double power) {
  Tensor t({1, static_cast<int>(raw.size())});
  std::copy(raw.begin(), raw.end(), t.data());
  return normalize_output(t, 0, m, beams, ArchKind::kCnn1d, power);
}

// Pulls the loss gradient w.r.t. the normalized beams back onto the raw
// output. `gw` uses the d/dRe + j*d/dIm pairing; the raw gradient is
// written into `raw_grad` at the given batch item.
inline void normalize_backward(const CMatrix& gw, const NormalizeCache& c, int item, ArchKind kind,
                               Tensor& raw_grad) {
  int m = gw.rows(), beams = gw.cols();
  int k = m * beams;
  std::vector<cdouble> g(k);
  for (int q = 0; q < beams; ++q)
    for (int i = 0; i < m; ++i) g[q * m + i] = gw(i, q);
  // Real inner product <u, g> over the paired real coordinates.
  double ug = 0.0;
  for (int i = 0; i < k; ++i)
    ug += c.u[i].real() * g[i].real() + c.u[i].imag() * g[i].imag();
  double sp = std::sqrt(c.power);
  double a = sp * c.inv_den;
  double b = c.r > 0.0 ? sp * ug * c.inv_den * c.inv_den / c.r : 0.0;
  std::vector<cdouble> gu(k);
  for (int i = 0; i < k; ++i) gu[i] = a * g[i] - b * c.u[i];
  detail::complex_to_raw_grad(gu, item, m, beams, kind, raw_grad);
}

// Full eval-mode inference for one scene: per-AP forward + normalization.
inline BeamformerSet infer_beams(DistributedModel& model, const ChannelScene& scene) {
  BeamformerSet w;
  int m = model.system.antennas_per_ap;
  int beams = model.system.beams_per_ap();
  w.per_ap.reserve(model.nets.size());
  std::vector<const ChannelScene*> one{&scene};
  for (int l = 0; l < model.num_aps(); ++l) {
    Tensor in = build_input_batch(model.spec.kind, one, l);
    Tensor raw = model.nets[l]->forward(in, false);
    w.per_ap.push_back(normalize_output(raw, 0, m, beams, model.spec.kind, model.system.power_budget));
  }
  return w;
}

}  // namespace cfisac
