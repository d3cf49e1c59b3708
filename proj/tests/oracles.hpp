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

// Independent brute-force oracles for the test suites. Everything here is
// written as plain scalar loops over definitions, deliberately sharing no
// code path with the library implementations it checks.

#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "cfisac/metrics.hpp"

namespace oracle {

using cfisac::BeamformerSet;
using cfisac::cdouble;
using cfisac::ChannelScene;

// Scalar steering element m for angle phi.
inline cdouble steering_element(double phi, int m, double spacing_ratio) {
  double phase = 2.0 * cfisac::kPi * spacing_ratio * static_cast<double>(m) * std::cos(phi);
  return std::exp(cdouble{0.0, phase});
}

// Naively looped SINR of user n: every inner product spelled out.
inline double sinr(const ChannelScene& scene, const BeamformerSet& w, int n, double noise_var) {
  int aps = static_cast<int>(w.per_ap.size());
  int beams = w.per_ap[0].cols();
  int m = w.per_ap[0].rows();
  double desired = 0.0;
  double interference = 0.0;
  for (int q = 0; q < beams; ++q) {
    cdouble acc{0.0, 0.0};
    for (int l = 0; l < aps; ++l)
      for (int i = 0; i < m; ++i) acc += std::conj(scene.comm[l](i, n)) * w.per_ap[l](i, q);
    if (q == n)
      desired = std::norm(acc);
    else
      interference += std::norm(acc);
  }
  return desired / (interference + noise_var);
}

// Naive double-sum SSNR with explicit per-pair variances.
inline double ssnr(const ChannelScene& scene, const BeamformerSet& w, double sensing_gain_var,
                   double ap_noise_var) {
  int aps = static_cast<int>(w.per_ap.size());
  int beams = w.per_ap[0].cols();
  int m = w.per_ap[0].rows();
  double num = 0.0;
  for (int r = 0; r < aps; ++r)
    for (int l = 0; l < aps; ++l) {
      double row = 0.0;
      for (int q = 0; q < beams; ++q) {
        cdouble acc{0.0, 0.0};
        for (int i = 0; i < m; ++i) acc += std::conj(scene.steering[l][i]) * w.per_ap[l](i, q);
        row += std::norm(acc);
      }
      num += sensing_gain_var * row;
    }
  double den = 0.0;
  for (int r = 0; r < aps; ++r) den += ap_noise_var;
  return num / den;
}

// Central finite difference of a scalar function at one coordinate.
inline double central_diff(const std::function<double()>& f, double& coord, double step) {
  double saved = coord;
  coord = saved + step;
  double up = f();
  coord = saved - step;
  double down = f();
  coord = saved;
  return (up - down) / (2.0 * step);
}

// Relative error with an absolute floor for near-zero gradients, where
// finite differences bottom out on cancellation noise.
inline bool grad_close(double analytic, double numeric, double rel_tol, double abs_tol = 1e-8) {
  double diff = std::abs(analytic - numeric);
  if (diff <= abs_tol) return true;
  return diff <= rel_tol * std::max(std::abs(analytic), std::abs(numeric));
}

// Power-feasible random beam set, each AP at exactly `power`.
inline BeamformerSet random_beams(cfisac::Rng& rng, int aps, int antennas, int beams,
                                  double power) {
  BeamformerSet w = BeamformerSet::zeros(aps, antennas, beams);
  for (auto& wl : w.per_ap) {
    double ss = 0.0;
    for (std::size_t i = 0; i < wl.size(); ++i) {
      wl.data()[i] = rng.cnormal(1.0);
      ss += std::norm(wl.data()[i]);
    }
    double s = std::sqrt(power / ss);
    for (std::size_t i = 0; i < wl.size(); ++i) wl.data()[i] *= s;
  }
  return w;
}

}  // namespace oracle
