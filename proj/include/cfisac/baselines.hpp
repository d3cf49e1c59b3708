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

#include <chrono>
#include <cmath>
#include <string>
#include <vector>

#include "cfisac/model.hpp"
#include "cfisac/training.hpp"

namespace cfisac {

// Closed-form SSNR ceiling under the per-AP power budgets: every beam
// column aligned with the AP's steering vector attains it
// (Cauchy-Schwarz per column, ||a||^2 = M).
inline double ssnr_upper_bound(const SystemConfig& system) {
  system.validate();
  double num = 0.0;
  for (int l = 0; l < system.num_aps; ++l)
    num += static_cast<double>(system.num_aps) * system.sensing_gain_var *
           static_cast<double>(system.antennas_per_ap) * system.power_budget;
  double den = static_cast<double>(system.num_aps) * system.ap_noise_var;
  return num / den;
}

// Removes v's components along span{channels}: returns (I - U U^H) v.
// With N >= M the span is generically full and the zero vector comes
// back; `full_rank` reports that case.
inline CVector null_space_project(const std::vector<CVector>& channels, const CVector& v,
                                  bool* full_rank = nullptr) {
  auto basis = orthonormal_basis(channels);
  if (full_rank) *full_rank = basis.size() >= v.size();
  if (basis.size() >= v.size()) return CVector(v.size(), cdouble{0.0, 0.0});
  CVector out = v;
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& u : basis) {
      cdouble proj = cdot(u, out);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] -= proj * u[i];
    }
  }
  return out;
}

struct SurrogateOptions {
  int restarts = 4;
  int iterations = 300;
  double softmin_temperature = 0.01;
  double step_fraction = 0.1;   // step length relative to sqrt(total comm power)
  double step_decay = 0.99;
  std::uint64_t seed = 0;
};

struct SurrogateResult {
  double gamma_high = 0.0;
  std::vector<CMatrix> comm_beams;  // per AP, M x N
  BeamformerSet full;               // comm beams plus the projected sensing beam
  bool converged = true;
};

namespace detail {

// Per-AP communication channels as vectors for projections/ZF.
inline std::vector<CVector> ap_channels(const ChannelScene& scene, int l) {
  std::vector<CVector> out;
  const CMatrix& h = scene.comm[l];
  out.reserve(h.cols());
  for (int n = 0; n < h.cols(); ++n) out.push_back(h.col_copy(n));
  return out;
}

// Rescale each AP's communication block to exactly `power` (or zero it).
inline void project_comm_power(std::vector<CMatrix>& w, double power) {
  for (auto& wl : w) {
    double p = wl.squared_frobenius();
    if (power <= 0.0 || p == 0.0) {
      if (power <= 0.0) wl.set_zero();
      continue;
    }
    wl.scale(std::sqrt(power / p));
  }
}

// SINR of user n from communication beams only (the sensing beam is
// held in the users' null space, so it never interferes).
inline double comm_sinr(const ChannelScene& scene, const std::vector<CMatrix>& w, int n,
                        double noise_var) {
  int users = w[0].cols();
  double desired = 0.0, interference = 0.0;
  for (int q = 0; q < users; ++q) {
    cdouble t{0.0, 0.0};
    for (std::size_t l = 0; l < w.size(); ++l)
      t += cdot(scene.comm[l].col(n), w[l].col(q), w[l].rows());
    double p = std::norm(t);
    if (q == n)
      desired = p;
    else
      interference += p;
  }
  return desired / (interference + noise_var);
}

inline double comm_min_sinr(const ChannelScene& scene, const std::vector<CMatrix>& w,
                            double noise_var) {
  int users = w[0].cols();
  double best = comm_sinr(scene, w, 0, noise_var);
  for (int n = 1; n < users; ++n) best = std::min(best, comm_sinr(scene, w, n, noise_var));
  return best;
}

// Zero-forcing directions from the stacked channel matrix, ridge-damped
// Gram solve; used as one deterministic restart.
inline std::vector<CMatrix> zero_forcing_beams(const ChannelScene& scene, const SystemConfig& sys) {
  int users = sys.num_ues;
  int stacked = sys.num_aps * sys.antennas_per_ap;
  CMatrix gram(users, users);
  for (int i = 0; i < users; ++i)
    for (int j = 0; j < users; ++j) {
      cdouble s{0.0, 0.0};
      for (int l = 0; l < sys.num_aps; ++l)
        s += cdot(scene.comm[l].col(i), scene.comm[l].col(j), sys.antennas_per_ap);
      gram(i, j) = s;
    }
  double ridge = 0.0;
  for (int i = 0; i < users; ++i) ridge += gram(i, i).real();
  ridge = 1e-9 * ridge / users;
  for (int i = 0; i < users; ++i) gram(i, i) += ridge;
  std::vector<CMatrix> w(sys.num_aps, CMatrix(sys.antennas_per_ap, users));
  for (int n = 0; n < users; ++n) {
    CVector e(users, cdouble{0.0, 0.0});
    e[n] = {1.0, 0.0};
    CVector coef = solve_linear(gram, e);
    for (int l = 0; l < sys.num_aps; ++l)
      for (int i = 0; i < sys.antennas_per_ap; ++i) {
        cdouble s{0.0, 0.0};
        for (int j = 0; j < users; ++j) s += scene.comm[l](i, j) * coef[j];
        w[l](i, n) = s;
      }
  }
  (void)stacked;
  return w;
}

inline std::vector<CMatrix> matched_filter_beams(const ChannelScene& scene,
                                                 const SystemConfig& sys) {
  std::vector<CMatrix> w(sys.num_aps, CMatrix(sys.antennas_per_ap, sys.num_ues));
  for (int l = 0; l < sys.num_aps; ++l)
    for (int n = 0; n < sys.num_ues; ++n)
      for (int i = 0; i < sys.antennas_per_ap; ++i) w[l](i, n) = scene.comm[l](i, n);
  return w;
}

}  // namespace detail

// Feasibility-style surrogate for the max-min user SINR: projected
// gradient ascent on a soft-min of the per-user SINRs over the
// communication beams, per-AP power fixed at rho * P_l. The sensing beam
// is the null-space-projected steering vector carrying the remaining
// power, which leaves the user SINRs untouched.
inline SurrogateResult max_min_sinr_surrogate(const ChannelScene& scene, const SystemConfig& sys,
                                              double rho, const SurrogateOptions& opt = {}) {
  sys.validate();
  if (rho < 0.0 || rho > 1.0) throw config_error("max_min_sinr_surrogate: rho must lie in [0, 1]");
  int num_aps = sys.num_aps;
  int m = sys.antennas_per_ap;
  int users = sys.num_ues;
  double comm_power = rho * sys.power_budget;

  SurrogateResult res;
  res.comm_beams.assign(num_aps, CMatrix(m, users));
  res.gamma_high = 0.0;

  if (rho > 0.0) {
    std::vector<std::vector<CMatrix>> starts;
    {
      auto zf = detail::zero_forcing_beams(scene, sys);
      detail::project_comm_power(zf, comm_power);
      starts.push_back(std::move(zf));
      auto mf = detail::matched_filter_beams(scene, sys);
      detail::project_comm_power(mf, comm_power);
      starts.push_back(std::move(mf));
    }
    Rng rng(derive_seed(opt.seed, 0x5ba5eULL));
    while (static_cast<int>(starts.size()) < opt.restarts) {
      std::vector<CMatrix> w(num_aps, CMatrix(m, users));
      for (auto& wl : w)
        for (std::size_t i = 0; i < wl.size(); ++i) wl.data()[i] = rng.cnormal(1.0);
      detail::project_comm_power(w, comm_power);
      starts.push_back(std::move(w));
    }

    double tau = opt.softmin_temperature;
    for (auto& w : starts) {
      double best_here = detail::comm_min_sinr(scene, w, sys.ue_noise_var);
      std::vector<CMatrix> best_w = w;
      double step = opt.step_fraction * std::sqrt(comm_power * num_aps);
      for (int it = 0; it < opt.iterations; ++it) {
        // Soft-min weights over users, computed stably.
        std::vector<double> sinr(users);
        double smin = std::numeric_limits<double>::infinity();
        for (int n = 0; n < users; ++n) {
          sinr[n] = detail::comm_sinr(scene, w, n, sys.ue_noise_var);
          smin = std::min(smin, sinr[n]);
        }
        std::vector<double> weight(users);
        double z = 0.0;
        for (int n = 0; n < users; ++n) {
          weight[n] = std::exp(-(sinr[n] - smin) / tau);
          z += weight[n];
        }
        for (int n = 0; n < users; ++n) weight[n] /= z;

        // Ascent direction: weighted sum of per-user SINR gradients.
        std::vector<CMatrix> grad(num_aps, CMatrix(m, users));
        for (int n = 0; n < users; ++n) {
          if (weight[n] < 1e-14) continue;
          std::vector<cdouble> t(users);
          double denom = sys.ue_noise_var;
          for (int q = 0; q < users; ++q) {
            cdouble s{0.0, 0.0};
            for (int l = 0; l < num_aps; ++l)
              s += cdot(scene.comm[l].col(n), w[l].col(q), m);
            t[q] = s;
            if (q != n) denom += std::norm(s);
          }
          double inv_d = 1.0 / denom;
          double ratio = std::norm(t[n]) * inv_d * inv_d;
          for (int l = 0; l < num_aps; ++l) {
            const cdouble* h = scene.comm[l].col(n);
            for (int q = 0; q < users; ++q) {
              cdouble f = (q == n) ? weight[n] * 2.0 * inv_d * t[q]
                                   : -weight[n] * 2.0 * ratio * t[q];
              cdouble* gc = grad[l].col(q);
              for (int i = 0; i < m; ++i) gc[i] += f * h[i];
            }
          }
        }
        double gnorm = 0.0;
        for (const auto& gl : grad) gnorm += gl.squared_frobenius();
        gnorm = std::sqrt(gnorm);
        if (gnorm < 1e-15) break;
        double s = step / gnorm;
        for (int l = 0; l < num_aps; ++l)
          for (std::size_t i = 0; i < w[l].size(); ++i) w[l].data()[i] += s * grad[l].data()[i];
        detail::project_comm_power(w, comm_power);
        step *= opt.step_decay;

        double exact = detail::comm_min_sinr(scene, w, sys.ue_noise_var);
        if (exact > best_here) {
          best_here = exact;
          best_w = w;
        }
      }
      if (best_here > res.gamma_high) {
        res.gamma_high = best_here;
        res.comm_beams = best_w;
      }
    }
  }

  // Assemble the full beam set: sensing beam = projected steering vector
  // scaled to the residual power budget.
  res.full = BeamformerSet::zeros(num_aps, m, users + 1);
  for (int l = 0; l < num_aps; ++l) {
    for (int n = 0; n < users; ++n)
      for (int i = 0; i < m; ++i) res.full.per_ap[l](i, n) = res.comm_beams[l](i, n);
    double sens_power = (1.0 - rho) * sys.power_budget;
    if (sens_power > 0.0) {
      CVector proj = null_space_project(detail::ap_channels(scene, l), scene.steering[l]);
      double pn = squared_norm(proj);
      if (pn > 1e-20) {
        double sc = std::sqrt(sens_power / pn);
        for (int i = 0; i < m; ++i) res.full.per_ap[l](i, users) = proj[i] * sc;
      }
    }
  }
  return res;
}

struct ConstrainedOptions {
  int max_iterations = 2000;
  int penalty_interval = 50;       // iterations between multiplier doublings
  double penalty_initial = 10.0;
  double slack_target = 1e-3;
  double feasibility_factor = 0.98;  // accepted g2 floor relative to gamma_high
  double step_fraction = 0.05;
  double step_decay = 0.999;
  int stall_limit = 2000;          // iterations without improvement before stopping
};

struct ConstrainedResult {
  BeamformerSet w;
  double g1 = 0.0;
  double g2 = 0.0;
  bool feasible = true;
  int iterations = 0;
};

// Penalty-based projected gradient for the SSNR maximization under the
// min-SINR floor gamma_high and per-AP power budgets, warm-started at the
// surrogate's solution.
inline ConstrainedResult constrained_ssnr_opt(const ChannelScene& scene, const SystemConfig& sys,
                                              double gamma_high, const BeamformerSet& init,
                                              const ConstrainedOptions& opt = {}) {
  sys.validate();
  int num_aps = sys.num_aps;
  int m = sys.antennas_per_ap;
  int beams = sys.beams_per_ap();

  BeamformerSet w = init;
  // Spend the full budget; scaling every beam up never lowers a SINR.
  for (int l = 0; l < num_aps; ++l) {
    double p = w.per_ap[l].squared_frobenius();
    if (p > 0.0) w.per_ap[l].scale(std::sqrt(sys.power_budget / p));
  }

  double floor = opt.feasibility_factor * gamma_high;
  auto eval = [&](const BeamformerSet& cand, double& g1, double& g2) {
    g1 = ssnr(scene, cand, sys.sensing_gain_var, sys.ap_noise_var);
    g2 = min_sinr(scene, cand, sys.ue_noise_var);
  };

  ConstrainedResult best;
  best.w = w;
  eval(w, best.g1, best.g2);
  best.feasible = best.g2 >= floor;

  double mu = opt.penalty_initial;
  double step = opt.step_fraction * std::sqrt(sys.power_budget * num_aps);
  int since_best = 0;
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    double g1, g2;
    eval(w, g1, g2);
    std::vector<CMatrix> grad(num_aps, CMatrix(m, beams));
    add_ssnr_grad(scene, w, sys.sensing_gain_var, sys.ap_noise_var, 1.0, grad);
    double violation = gamma_high - g2;
    if (violation > 0.0) add_min_sinr_grad(scene, w, sys.ue_noise_var, 2.0 * mu * violation, grad);

    double gnorm = 0.0;
    for (const auto& gl : grad) gnorm += gl.squared_frobenius();
    gnorm = std::sqrt(gnorm);
    if (gnorm < 1e-15) break;
    double s = step / gnorm;
    for (int l = 0; l < num_aps; ++l)
      for (std::size_t i = 0; i < w.per_ap[l].size(); ++i)
        w.per_ap[l].data()[i] += s * grad[l].data()[i];
    for (int l = 0; l < num_aps; ++l) {
      double p = w.per_ap[l].squared_frobenius();
      if (p > 0.0) w.per_ap[l].scale(std::sqrt(sys.power_budget / p));
    }
    step *= opt.step_decay;

    eval(w, g1, g2);
    bool cand_feasible = g2 >= floor;
    bool better = (cand_feasible && !best.feasible) ||
                  (cand_feasible == best.feasible && g1 > best.g1);
    if (better) {
      best.w = w;
      best.g1 = g1;
      best.g2 = g2;
      best.feasible = cand_feasible;
      since_best = 0;
    } else if (++since_best >= opt.stall_limit) {
      break;
    }
    if ((it + 1) % opt.penalty_interval == 0 && gamma_high - g2 > opt.slack_target) mu *= 2.0;
  }
  best.iterations = it;
  if (!best.feasible) {
    // Fall back to the warm start, which satisfies the floor by
    // construction when it came from the surrogate.
    best.w = init;
    eval(best.w, best.g1, best.g2);
    best.feasible = best.g2 >= floor;
  }
  return best;
}

// Full per-scene reference pipeline standing in for the convex-solver
// benchmark; reported as "surrogate-cvx" to avoid mis-citation.
struct BaselineResult {
  double gamma_high = 0.0;
  BeamformerSet w;
  double g1 = 0.0;
  double g2 = 0.0;
  double seconds = 0.0;
  bool feasible = true;
};

inline BaselineResult solve_baseline(const ChannelScene& scene, const SystemConfig& sys, double rho,
                                     std::uint64_t seed) {
  auto t0 = std::chrono::steady_clock::now();
  SurrogateOptions sopt;
  sopt.seed = seed;
  auto sur = max_min_sinr_surrogate(scene, sys, rho, sopt);
  auto con = constrained_ssnr_opt(scene, sys, sur.gamma_high, sur.full);
  auto t1 = std::chrono::steady_clock::now();
  BaselineResult r;
  r.gamma_high = sur.gamma_high;
  r.w = con.w;
  r.g1 = con.g1;
  r.g2 = con.g2;
  r.feasible = con.feasible;
  r.seconds = std::chrono::duration<double>(t1 - t0).count();
  return r;
}

// ---------------------------------------------------------------------------
// Benchmark harness: baseline pipeline vs student inference over a
// deterministic scene selection.
// ---------------------------------------------------------------------------

struct ComparisonRow {
  std::size_t scene_id = 0;
  std::string method;
  double g1 = 0.0;
  double g2 = 0.0;
  double seconds = 0.0;
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
  double baseline_mean_g1 = 0.0;
  double baseline_mean_g2 = 0.0;
  double baseline_mean_gamma_high = 0.0;
  double baseline_mean_seconds = 0.0;
  double student_mean_g1 = 0.0;
  double student_mean_g2 = 0.0;
  double student_mean_seconds = 0.0;
  double speedup = 0.0;
  bool single_thread = false;
  std::size_t points = 0;

  std::string to_csv() const {
    std::string out = "scene_id,method,g1,g2,seconds\n";
    for (const auto& r : rows) {
      out += std::to_string(r.scene_id);
      out += ',';
      out += r.method;
      for (double v : {r.g1, r.g2, r.seconds}) {
        out += ',';
        out += format_double(v);
      }
      out += '\n';
    }
    return out;
  }
};

struct BenchmarkOptions {
  std::size_t n_points = 200;
  double rho = 0.5;
  std::uint64_t seed = 0;
  bool single_thread = true;
};

inline ComparisonReport benchmark_compare(const Dataset& dataset, DistributedModel& student,
                                          const BenchmarkOptions& opt) {
  if (!(student.system == dataset.config))
    throw config_error("benchmark_compare: model and dataset system configs differ");
  ComparisonReport rep;
  rep.single_thread = opt.single_thread;
  std::size_t n = std::min(opt.n_points, dataset.size());
  rep.points = n;

  // Deterministic selection: seeded shuffle of all indices, first n taken.
  std::vector<std::size_t> idx(dataset.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Rng rng(derive_seed(opt.seed, 0xbe9cULL));
  for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng.uniform_index(i)]);
  idx.resize(n);

  int guard_threads = opt.single_thread ? 1 : max_threads();
  ThreadGuard tg(guard_threads);

  int m = student.system.antennas_per_ap;
  int beams = student.system.beams_per_ap();
  std::vector<const ChannelScene*> one(1);
  for (std::size_t k = 0; k < n; ++k) {
    const ChannelScene& scene = dataset.scenes[idx[k]];
    BaselineResult base = solve_baseline(scene, student.system, opt.rho, derive_seed(opt.seed, k));
    rep.rows.push_back({idx[k], "surrogate-cvx", base.g1, base.g2, base.seconds});
    rep.baseline_mean_g1 += base.g1;
    rep.baseline_mean_g2 += base.g2;
    rep.baseline_mean_gamma_high += base.gamma_high;
    rep.baseline_mean_seconds += base.seconds;

    // Student: each AP runs independently; the distributed wall clock is
    // the slowest AP.
    one[0] = &scene;
    BeamformerSet w = BeamformerSet::zeros(student.num_aps(), m, beams);
    double worst = 0.0;
    for (int l = 0; l < student.num_aps(); ++l) {
      auto t0 = std::chrono::steady_clock::now();
      Tensor in = build_input_batch(student.spec.kind, one, l);
      Tensor raw = student.nets[l]->forward(in, false);
      w.per_ap[l] =
          normalize_output(raw, 0, m, beams, student.spec.kind, student.system.power_budget);
      auto t1 = std::chrono::steady_clock::now();
      worst = std::max(worst, std::chrono::duration<double>(t1 - t0).count());
    }
    MetricReport mr = metric_report(scene, w, student.system);
    rep.rows.push_back({idx[k], "student", mr.ssnr, mr.min_sinr, worst});
    rep.student_mean_g1 += mr.ssnr;
    rep.student_mean_g2 += mr.min_sinr;
    rep.student_mean_seconds += worst;
  }
  double dn = static_cast<double>(n);
  rep.baseline_mean_g1 /= dn;
  rep.baseline_mean_g2 /= dn;
  rep.baseline_mean_gamma_high /= dn;
  rep.baseline_mean_seconds /= dn;
  rep.student_mean_g1 /= dn;
  rep.student_mean_g2 /= dn;
  rep.student_mean_seconds /= dn;
  rep.speedup = rep.student_mean_seconds > 0.0 ? rep.baseline_mean_seconds / rep.student_mean_seconds
                                               : std::numeric_limits<double>::infinity();
  return rep;
}

inline json to_json(const ComparisonReport& rep) {
  json j;
  j["points"] = rep.points;
  j["single_thread"] = rep.single_thread;
  j["baseline"] = {{"label", "surrogate-cvx"},
                   {"mean_g1", rep.baseline_mean_g1},
                   {"mean_g2", rep.baseline_mean_g2},
                   {"mean_gamma_high", rep.baseline_mean_gamma_high},
                   {"mean_seconds", rep.baseline_mean_seconds}};
  j["student"] = {{"mean_g1", rep.student_mean_g1},
                  {"mean_g2", rep.student_mean_g2},
                  {"mean_seconds", rep.student_mean_seconds}};
  j["speedup"] = rep.speedup;
  return j;
}

}  // namespace cfisac
