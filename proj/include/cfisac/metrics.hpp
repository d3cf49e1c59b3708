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

#include <algorithm>
#include <cmath>
#include <vector>

#include "cfisac/scenario.hpp"

namespace cfisac {

// The full stacked beamforming solution: per AP an M x (N+1) matrix whose
// first N columns serve the users and whose last column is the sensing
// beam.
struct BeamformerSet {
  std::vector<CMatrix> per_ap;

  int num_aps() const { return static_cast<int>(per_ap.size()); }
  int antennas() const { return per_ap.empty() ? 0 : per_ap.front().rows(); }
  int beams() const { return per_ap.empty() ? 0 : per_ap.front().cols(); }

  static BeamformerSet zeros(int num_aps, int antennas, int beams) {
    BeamformerSet w;
    w.per_ap.assign(num_aps, CMatrix(antennas, beams));
    return w;
  }
};

struct MetricReport {
  std::vector<double> sinr;  // per user, linear
  double min_sinr = 0.0;     // g2
  double ssnr = 0.0;         // g1
};

namespace detail {

inline void check_shapes(const ChannelScene& scene, const BeamformerSet& w) {
  if (scene.num_aps() != w.num_aps()) throw shape_error("scene/beamformer AP count mismatch");
  for (int l = 0; l < w.num_aps(); ++l) {
    if (scene.comm[l].rows() != w.per_ap[l].rows())
      throw shape_error("scene/beamformer antenna count mismatch");
    if (w.per_ap[l].cols() != scene.comm[l].cols() + 1)
      throw shape_error("beamformer must carry one column per user plus a sensing beam");
  }
}

// h_n^H w_q accumulated over the AP stacking.
inline cdouble stacked_channel_beam(const ChannelScene& scene, const BeamformerSet& w, int n, int q) {
  cdouble s{0.0, 0.0};
  for (int l = 0; l < w.num_aps(); ++l)
    s += cdot(scene.comm[l].col(n), w.per_ap[l].col(q), w.per_ap[l].rows());
  return s;
}

}  // namespace detail

// Per-AP transmit power sum over all beams.
inline double ap_power(const BeamformerSet& w, int l) {
  if (l < 0 || l >= w.num_aps()) throw shape_error("ap_power: AP index out of range");
  return w.per_ap[l].squared_frobenius();
}

// SINR of user n (0-based): desired power over inter-user interference,
// sensing-beam leakage and receiver noise, with channels and beams stacked
// across APs.
inline double sinr_user(const ChannelScene& scene, const BeamformerSet& w, int n, double ue_noise_var) {
  detail::check_shapes(scene, w);
  int num_users = w.beams() - 1;
  if (n < 0 || n >= num_users) throw shape_error("sinr_user: user index out of range");
  double desired = 0.0;
  double interference = 0.0;
  for (int q = 0; q < w.beams(); ++q) {
    double p = std::norm(detail::stacked_channel_beam(scene, w, n, q));
    if (q == n)
      desired = p;
    else
      interference += p;
  }
  return desired / (interference + ue_noise_var);
}

// Minimum user SINR and the user attaining it (ties resolve to the lowest
// index).
inline double min_sinr(const ChannelScene& scene, const BeamformerSet& w, double ue_noise_var,
                       int* argmin_user = nullptr) {
  int num_users = w.beams() - 1;
  double best = 0.0;
  int best_n = 0;
  for (int n = 0; n < num_users; ++n) {
    double v = sinr_user(scene, w, n, ue_noise_var);
    if (n == 0 || v < best) {
      best = v;
      best_n = n;
    }
  }
  if (argmin_user) *argmin_user = best_n;
  return best;
}

// Sensing SNR with per-(l,r) gain variances and per-AP receiver noise
// variances.
inline double ssnr_general(const ChannelScene& scene, const BeamformerSet& w,
                           const std::vector<std::vector<double>>& sensing_gain_var,
                           const std::vector<double>& ap_noise_var) {
  detail::check_shapes(scene, w);
  int num_aps = w.num_aps();
  double den = 0.0;
  for (double v : ap_noise_var) den += v;
  if (den <= 0.0) throw config_error("ssnr: receiver noise variances sum to zero");
  double num = 0.0;
  for (int r = 0; r < num_aps; ++r) {
    for (int l = 0; l < num_aps; ++l) {
      const CMatrix& wl = w.per_ap[l];
      double row_norm2 = 0.0;
      for (int q = 0; q < wl.cols(); ++q)
        row_norm2 += std::norm(cdot(scene.steering[l].data(), wl.col(q), wl.rows()));
      num += sensing_gain_var[l][r] * row_norm2;
    }
  }
  return num / den;
}

// Uniform-variance form used throughout the pipeline.
inline double ssnr(const ChannelScene& scene, const BeamformerSet& w, double sensing_gain_var,
                   double ap_noise_var) {
  int num_aps = scene.num_aps();
  std::vector<std::vector<double>> s2(num_aps, std::vector<double>(num_aps, sensing_gain_var));
  std::vector<double> a2(num_aps, ap_noise_var);
  return ssnr_general(scene, w, s2, a2);
}

inline MetricReport metric_report(const ChannelScene& scene, const BeamformerSet& w,
                                  const SystemConfig& config) {
  MetricReport r;
  r.sinr.resize(config.num_ues);
  for (int n = 0; n < config.num_ues; ++n) r.sinr[n] = sinr_user(scene, w, n, config.ue_noise_var);
  r.min_sinr = *std::min_element(r.sinr.begin(), r.sinr.end());
  r.ssnr = ssnr(scene, w, config.sensing_gain_var, config.ap_noise_var);
  return r;
}

// ---------------------------------------------------------------------------
// Signal-level simulators for Monte-Carlo validation of the closed forms.
// ---------------------------------------------------------------------------

// x_l = sum_q w_{lq} x_q: the antenna-domain signal radiated by AP l.
inline CVector transmit_signal(const CMatrix& w_ap, const CVector& symbols) {
  if (static_cast<int>(symbols.size()) != w_ap.cols())
    throw shape_error("transmit_signal: need one symbol per beam");
  return matvec(w_ap, symbols);
}

// Scalar receive sample at user n.
inline cdouble simulate_ue_rx(const ChannelScene& scene, const BeamformerSet& w, int n,
                              const CVector& symbols, cdouble noise) {
  detail::check_shapes(scene, w);
  if (static_cast<int>(symbols.size()) != w.beams())
    throw shape_error("simulate_ue_rx: need one symbol per beam");
  cdouble y = noise;
  for (int q = 0; q < w.beams(); ++q) y += detail::stacked_channel_beam(scene, w, n, q) * symbols[q];
  return y;
}

// Antenna-domain echo at receiving AP r: every transmitting AP's signal
// arrives through the rank-one target reflection a(theta_r) a^H(theta_l).
inline CVector simulate_ap_rx(const ChannelScene& scene, const BeamformerSet& w, int r,
                              const CVector& symbols, const CVector& alpha, const CVector& noise) {
  detail::check_shapes(scene, w);
  int m = w.antennas();
  if (static_cast<int>(alpha.size()) != w.num_aps())
    throw shape_error("simulate_ap_rx: need one gain per transmitting AP");
  if (static_cast<int>(noise.size()) != m) throw shape_error("simulate_ap_rx: noise length mismatch");
  cdouble combined{0.0, 0.0};
  for (int l = 0; l < w.num_aps(); ++l) {
    CVector xl = transmit_signal(w.per_ap[l], symbols);
    combined += alpha[l] * cdot(scene.steering[l].data(), xl.data(), m);
  }
  CVector y = noise;
  for (int i = 0; i < m; ++i) y[i] += scene.steering[r][i] * combined;
  return y;
}

// ---------------------------------------------------------------------------
// Monte-Carlo estimators. Draw streams are chunked with per-chunk derived
// seeds and reduced in chunk order, so results are independent of the
// worker count.
// ---------------------------------------------------------------------------

namespace detail {
inline constexpr int kMcChunks = 64;
}

// Empirical SINR at user n from decomposed receive terms: desired,
// interference and noise powers are accumulated separately over draws of
// unit-power symbols and receiver noise.
inline double mc_empirical_sinr(const ChannelScene& scene, const BeamformerSet& w, int n,
                                double ue_noise_var, std::size_t draws, std::uint64_t seed) {
  detail::check_shapes(scene, w);
  int q_count = w.beams();
  std::vector<double> sig(detail::kMcChunks, 0.0), intf(detail::kMcChunks, 0.0),
      nois(detail::kMcChunks, 0.0);
  parallel_for(detail::kMcChunks, [&](std::size_t c) {
    std::size_t lo = draws * c / detail::kMcChunks;
    std::size_t hi = draws * (c + 1) / detail::kMcChunks;
    Rng rng(derive_seed(seed, c));
    CVector x(q_count), x_sig(q_count), x_int(q_count);
    for (std::size_t i = lo; i < hi; ++i) {
      for (int q = 0; q < q_count; ++q) x[q] = rng.unit_symbol();
      cdouble noise = rng.cnormal(ue_noise_var);
      std::fill(x_sig.begin(), x_sig.end(), cdouble{0.0, 0.0});
      x_int = x;
      x_sig[n] = x[n];
      x_int[n] = {0.0, 0.0};
      sig[c] += std::norm(simulate_ue_rx(scene, w, n, x_sig, {0.0, 0.0}));
      intf[c] += std::norm(simulate_ue_rx(scene, w, n, x_int, {0.0, 0.0}));
      nois[c] += std::norm(noise);
    }
  });
  double s = 0.0, it = 0.0, nz = 0.0;
  for (int c = 0; c < detail::kMcChunks; ++c) {
    s += sig[c];
    it += intf[c];
    nz += nois[c];
  }
  return s / (it + nz);
}

// Empirical SSNR: mean echo energy received across APs over the total
// receiver-noise energy M * sum_r sigma_{a_r}^2. The per-antenna array
// factor M cancels against the echo's receive steering gain, matching the
// closed form.
inline double mc_empirical_ssnr(const ChannelScene& scene, const BeamformerSet& w,
                                double sensing_gain_var, double ap_noise_var, std::size_t draws,
                                std::uint64_t seed) {
  detail::check_shapes(scene, w);
  int num_aps = w.num_aps();
  int m = w.antennas();
  int q_count = w.beams();
  std::vector<double> echo(detail::kMcChunks, 0.0);
  parallel_for(detail::kMcChunks, [&](std::size_t c) {
    std::size_t lo = draws * c / detail::kMcChunks;
    std::size_t hi = draws * (c + 1) / detail::kMcChunks;
    Rng rng(derive_seed(seed, c));
    CVector x(q_count), alpha(num_aps);
    CVector zero_noise(m, cdouble{0.0, 0.0});
    for (std::size_t i = lo; i < hi; ++i) {
      for (int q = 0; q < q_count; ++q) x[q] = rng.unit_symbol();
      for (int r = 0; r < num_aps; ++r) {
        for (int l = 0; l < num_aps; ++l) alpha[l] = rng.cnormal(sensing_gain_var);
        CVector y = simulate_ap_rx(scene, w, r, x, alpha, zero_noise);
        echo[c] += squared_norm(y);
      }
    }
  });
  double e = 0.0;
  for (int c = 0; c < detail::kMcChunks; ++c) e += echo[c];
  e /= static_cast<double>(draws);
  double noise_energy = static_cast<double>(m) * static_cast<double>(num_aps) * ap_noise_var;
  return e / noise_energy;
}

}  // namespace cfisac
