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
#include <span>
#include <vector>

#include "cfisac/metrics.hpp"

namespace cfisac {

// Training-set mean scores of the two biased teachers; they normalize the
// student loss and drive the balance-parameter updates.
struct CeilingEstimates {
  double g1_max = 0.0;
  double g2_max = 0.0;

  void validate() const {
    if (!(g1_max > 0.0) || !(g2_max > 0.0))
      throw config_error("ceiling estimates must be strictly positive");
  }
};

// Biased scalarization: -( (1-beta) g1 + beta g2 ).
inline double teacher_loss(double g1, double g2, double beta) {
  if (beta < 0.0 || beta > 1.0) throw config_error("teacher_loss: beta must lie in [0, 1]");
  return -((1.0 - beta) * g1 + beta * g2);
}

// Ceiling-normalized scalarization; bounded in [-1, 0] whenever the
// scores stay below the ceilings.
inline double student_loss(double g1, double g2, const CeilingEstimates& ceilings, double lambda) {
  if (lambda < 0.0 || lambda > 1.0) throw config_error("student_loss: lambda must lie in [0, 1]");
  ceilings.validate();
  return -((1.0 - lambda) * g1 / ceilings.g1_max + lambda * g2 / ceilings.g2_max);
}

// Core balance update from the averaged normalized reference gaps; the
// tie goes to the communication branch, and the result is clamped back
// into [0, 1].
inline double update_lambda_from_gaps(double lambda_prev, double gap1, double gap2, double epsilon) {
  double next = gap2 >= gap1 ? lambda_prev + epsilon * gap2 : lambda_prev - epsilon * gap1;
  return std::clamp(next, 0.0, 1.0);
}

inline double update_lambda(double lambda_prev, std::span<const double> batch_g1,
                            std::span<const double> batch_g2, const CeilingEstimates& ceilings,
                            double epsilon) {
  if (lambda_prev < 0.0 || lambda_prev > 1.0)
    throw config_error("update_lambda: lambda must lie in [0, 1]");
  ceilings.validate();
  if (batch_g1.empty() || batch_g2.empty()) throw config_error("update_lambda: empty batch");
  double gap1 = 0.0, gap2 = 0.0;
  for (double g : batch_g1) gap1 += (ceilings.g1_max - g) / ceilings.g1_max;
  for (double g : batch_g2) gap2 += (ceilings.g2_max - g) / ceilings.g2_max;
  gap1 /= static_cast<double>(batch_g1.size());
  gap2 /= static_cast<double>(batch_g2.size());
  return update_lambda_from_gaps(lambda_prev, gap1, gap2, epsilon);
}

// ---------------------------------------------------------------------------
// Metric gradients with respect to the per-AP beam matrices. Gradients
// use the d/dRe + j*d/dIm pairing, so for f = |v^H w|^2 the gradient in w
// is 2 (v^H w) v.
// ---------------------------------------------------------------------------

// g += scale * d(ssnr)/dW for every AP.
inline void add_ssnr_grad(const ChannelScene& scene, const BeamformerSet& w,
                          double sensing_gain_var, double ap_noise_var, double scale,
                          std::vector<CMatrix>& g) {
  int num_aps = w.num_aps();
  double den = static_cast<double>(num_aps) * ap_noise_var;
  for (int l = 0; l < num_aps; ++l) {
    const CMatrix& wl = w.per_ap[l];
    const CVector& a = scene.steering[l];
    // Row sum over receivers r of sigma_{s_lr}^2 is uniform here.
    double c = static_cast<double>(num_aps) * sensing_gain_var / den;
    for (int q = 0; q < wl.cols(); ++q) {
      cdouble proj = cdot(a.data(), wl.col(q), wl.rows());
      cdouble f = scale * c * 2.0 * proj;
      cdouble* gc = g[l].col(q);
      for (int i = 0; i < wl.rows(); ++i) gc[i] += f * a[i];
    }
  }
}

// g += scale * d(min-SINR)/dW, differentiating through the attaining user
// (lowest index on ties).
inline void add_min_sinr_grad(const ChannelScene& scene, const BeamformerSet& w,
                              double ue_noise_var, double scale, std::vector<CMatrix>& g,
                              int* argmin_user = nullptr) {
  int n_star = 0;
  double g2 = min_sinr(scene, w, ue_noise_var, &n_star);
  if (argmin_user) *argmin_user = n_star;
  int beams = w.beams();
  std::vector<cdouble> u(beams);
  for (int q = 0; q < beams; ++q) u[q] = detail::stacked_channel_beam(scene, w, n_star, q);
  double desired = std::norm(u[n_star]);
  double denom = ue_noise_var;
  for (int q = 0; q < beams; ++q)
    if (q != n_star) denom += std::norm(u[q]);
  (void)g2;
  double inv_d = 1.0 / denom;
  double ratio = desired * inv_d * inv_d;
  for (int l = 0; l < w.num_aps(); ++l) {
    const cdouble* h = scene.comm[l].col(n_star);
    int m = w.per_ap[l].rows();
    for (int q = 0; q < beams; ++q) {
      cdouble f = (q == n_star) ? scale * 2.0 * inv_d * u[q] : -scale * 2.0 * ratio * u[q];
      cdouble* gc = g[l].col(q);
      for (int i = 0; i < m; ++i) gc[i] += f * h[i];
    }
  }
}

}  // namespace cfisac
