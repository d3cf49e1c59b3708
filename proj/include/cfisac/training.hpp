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
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "cfisac/loss.hpp"
#include "cfisac/model.hpp"
#include "cfisac/optim.hpp"

namespace cfisac {

enum class TrainRole { kSsnrTeacher, kSinrTeacher, kStudent };

inline std::string to_string(TrainRole r) {
  switch (r) {
    case TrainRole::kSsnrTeacher: return "ssnr-teacher";
    case TrainRole::kSinrTeacher: return "sinr-teacher";
    case TrainRole::kStudent: return "student";
  }
  throw config_error("unknown training role");
}

inline TrainRole train_role_from_string(const std::string& s) {
  if (s == "ssnr-teacher") return TrainRole::kSsnrTeacher;
  if (s == "sinr-teacher") return TrainRole::kSinrTeacher;
  if (s == "student") return TrainRole::kStudent;
  throw config_error("unknown role: '" + s + "' (expected ssnr-teacher, sinr-teacher or student)");
}

struct EpochRow {
  int epoch = 0;
  double train_g1 = 0.0;
  double train_g2 = 0.0;
  double val_g1 = 0.0;
  double val_g2 = 0.0;
  double loss = 0.0;
  double lambda = 0.0;
  double lr = 0.0;
};

struct TrainingRecord {
  std::vector<EpochRow> rows;

  static constexpr const char* kHeader = "epoch,train_g1,train_g2,val_g1,val_g2,loss,lambda,lr";

  std::string to_csv() const {
    std::string out = kHeader;
    out += '\n';
    for (const auto& r : rows) {
      out += std::to_string(r.epoch);
      for (double v : {r.train_g1, r.train_g2, r.val_g1, r.val_g2, r.loss, r.lambda, r.lr}) {
        out += ',';
        out += format_double(v);
      }
      out += '\n';
    }
    return out;
  }

  static TrainingRecord from_csv(std::istream& in) {
    TrainingRecord rec;
    std::string line;
    if (!std::getline(in, line)) throw io_error("empty curves file");
    if (line != kHeader) throw io_error("unexpected curves header: " + line);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::stringstream ss(line);
      std::string cell;
      std::vector<double> vals;
      while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
      if (vals.size() != 8) throw io_error("malformed curves row: " + line);
      EpochRow r;
      r.epoch = static_cast<int>(vals[0]);
      r.train_g1 = vals[1];
      r.train_g2 = vals[2];
      r.val_g1 = vals[3];
      r.val_g2 = vals[4];
      r.loss = vals[5];
      r.lambda = vals[6];
      r.lr = vals[7];
      rec.rows.push_back(r);
    }
    return rec;
  }

  static TrainingRecord load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open curves file: " + path);
    return from_csv(in);
  }
};

struct TrainResult {
  DistributedModel model;
  TrainingRecord record;
  int best_epoch = 0;
  double final_lambda = 0.0;
  int loss_bound_violations = 0;  // student batches with loss below -1
};

// Per-scene metrics of a model over scenes [begin, end), eval mode.
struct SplitEvaluation {
  std::vector<MetricReport> reports;
  double mean_g1 = 0.0;
  double mean_g2 = 0.0;
};

inline SplitEvaluation evaluate_scenes(DistributedModel& model, const Dataset& dataset,
                                       std::size_t begin, std::size_t end, int batch_size = 256) {
  if (end > dataset.size() || begin >= end) throw config_error("evaluate_scenes: empty scene range");
  if (!(model.system == dataset.config))
    throw config_error("evaluate_scenes: model and dataset system configs differ");
  SplitEvaluation ev;
  ev.reports.resize(end - begin);
  int m = model.system.antennas_per_ap;
  int beams = model.system.beams_per_ap();
  for (std::size_t lo = begin; lo < end; lo += static_cast<std::size_t>(batch_size)) {
    std::size_t hi = std::min(end, lo + static_cast<std::size_t>(batch_size));
    int bsz = static_cast<int>(hi - lo);
    std::vector<const ChannelScene*> ptrs(bsz);
    for (int b = 0; b < bsz; ++b) ptrs[b] = &dataset.scenes[lo + b];
    std::vector<Tensor> raw(model.num_aps());
    for (int l = 0; l < model.num_aps(); ++l)
      raw[l] = model.nets[l]->forward(build_input_batch(model.spec.kind, ptrs, l), false);
    parallel_for(static_cast<std::size_t>(bsz), [&](std::size_t b) {
      BeamformerSet w;
      w.per_ap.reserve(model.num_aps());
      for (int l = 0; l < model.num_aps(); ++l)
        w.per_ap.push_back(normalize_output(raw[l], static_cast<int>(b), m, beams, model.spec.kind,
                                            model.system.power_budget));
      ev.reports[lo - begin + b] = metric_report(*ptrs[b], w, model.system);
    });
  }
  for (const auto& r : ev.reports) {
    ev.mean_g1 += r.ssnr;
    ev.mean_g2 += r.min_sinr;
  }
  ev.mean_g1 /= static_cast<double>(ev.reports.size());
  ev.mean_g2 /= static_cast<double>(ev.reports.size());
  return ev;
}

// Training-set mean teacher scores, computed once and then frozen.
inline CeilingEstimates estimate_ceilings(DistributedModel& ssnr_teacher,
                                          DistributedModel& sinr_teacher, const Dataset& dataset) {
  if (!(ssnr_teacher.spec == sinr_teacher.spec))
    throw config_error("estimate_ceilings: teacher architectures differ");
  if (!(ssnr_teacher.system == sinr_teacher.system))
    throw config_error("estimate_ceilings: teacher system configs differ");
  if (dataset.train_size() == 0) throw config_error("estimate_ceilings: empty training split");
  CeilingEstimates c;
  c.g1_max = evaluate_scenes(ssnr_teacher, dataset, 0, dataset.train_size()).mean_g1;
  c.g2_max = evaluate_scenes(sinr_teacher, dataset, 0, dataset.train_size()).mean_g2;
  c.validate();
  return c;
}

namespace detail {

struct BatchOutcome {
  double loss = 0.0;
  double sum_g1 = 0.0;
  double sum_g2 = 0.0;
};

// One optimization step over a mini-batch: forward all AP nets, score
// every scene, push the loss gradient back through the power
// normalization and the networks, then update each net's parameters.
inline BatchOutcome train_batch(DistributedModel& model, const Dataset& dataset,
                                const std::vector<std::size_t>& indices, std::size_t lo,
                                std::size_t hi, TrainRole role, double beta,
                                const CeilingEstimates& ceilings, double& lambda,
                                const TrainConfig& cfg, std::vector<Adam>& opts, double lr) {
  const SystemConfig& sys = model.system;
  int num_aps = model.num_aps();
  int m = sys.antennas_per_ap;
  int beams = sys.beams_per_ap();
  int bsz = static_cast<int>(hi - lo);
  std::vector<const ChannelScene*> ptrs(bsz);
  for (int b = 0; b < bsz; ++b) ptrs[b] = &dataset.scenes[indices[lo + b]];

  std::vector<Tensor> raw(num_aps);
  for (int l = 0; l < num_aps; ++l)
    raw[l] = model.nets[l]->forward(build_input_batch(model.spec.kind, ptrs, l), true);

  std::vector<std::vector<NormalizeCache>> caches(num_aps, std::vector<NormalizeCache>(bsz));
  std::vector<BeamformerSet> w(bsz);
  std::vector<double> g1(bsz), g2(bsz);
  parallel_for(static_cast<std::size_t>(bsz), [&](std::size_t b) {
    w[b].per_ap.reserve(num_aps);
    for (int l = 0; l < num_aps; ++l)
      w[b].per_ap.push_back(normalize_output(raw[l], static_cast<int>(b), m, beams,
                                             model.spec.kind, sys.power_budget, &caches[l][b]));
    g1[b] = ssnr(*ptrs[b], w[b], sys.sensing_gain_var, sys.ap_noise_var);
    g2[b] = min_sinr(*ptrs[b], w[b], sys.ue_noise_var);
  });

  BatchOutcome out;
  for (int b = 0; b < bsz; ++b) {
    out.sum_g1 += g1[b];
    out.sum_g2 += g2[b];
  }
  double mean_g1 = out.sum_g1 / bsz;
  double mean_g2 = out.sum_g2 / bsz;

  // Per-scene loss sensitivities.
  double dg1, dg2;
  if (role == TrainRole::kStudent) {
    lambda = update_lambda(lambda, std::span<const double>(g1), std::span<const double>(g2),
                           ceilings, cfg.epsilon);
    out.loss = student_loss(mean_g1, mean_g2, ceilings, lambda);
    dg1 = -(1.0 - lambda) / (ceilings.g1_max * bsz);
    dg2 = -lambda / (ceilings.g2_max * bsz);
  } else {
    out.loss = teacher_loss(mean_g1, mean_g2, beta);
    dg1 = -(1.0 - beta) / bsz;
    dg2 = -beta / bsz;
  }
  if (!std::isfinite(out.loss))
    throw numeric_error("training diverged: non-finite loss (role " + to_string(role) + ")");

  std::vector<Tensor> raw_grad(num_aps);
  for (int l = 0; l < num_aps; ++l) raw_grad[l] = Tensor(raw[l].shape());
  parallel_for(static_cast<std::size_t>(bsz), [&](std::size_t b) {
    std::vector<CMatrix> gw(num_aps, CMatrix(m, beams));
    if (dg1 != 0.0)
      add_ssnr_grad(*ptrs[b], w[b], sys.sensing_gain_var, sys.ap_noise_var, dg1, gw);
    if (dg2 != 0.0) add_min_sinr_grad(*ptrs[b], w[b], sys.ue_noise_var, dg2, gw);
    for (int l = 0; l < num_aps; ++l)
      normalize_backward(gw[l], caches[l][b], static_cast<int>(b), model.spec.kind, raw_grad[l]);
  });

  for (int l = 0; l < num_aps; ++l) {
    model.nets[l]->zero_grad();
    model.nets[l]->backward(raw_grad[l]);
    opts[l].step(*model.nets[l], lr);
  }
  return out;
}

}  // namespace detail

// Shared training driver for all three roles.
inline TrainResult run_training(const Dataset& dataset, const ArchitectureSpec& spec,
                                const SystemConfig& system, TrainRole role, double beta,
                                const CeilingEstimates& ceilings, const TrainConfig& cfg) {
  cfg.validate();
  if (!(system == dataset.config))
    throw config_error("run_training: system config does not match the dataset");
  if (dataset.train_size() == 0) throw config_error("run_training: empty training split");
  if (dataset.validation_size() == 0)
    throw config_error("run_training: training requires a validation split");
  if (role == TrainRole::kStudent) ceilings.validate();

  TrainResult result;
  result.model = init_model(spec, system, cfg.init_seed);
  DistributedModel& model = result.model;

  std::vector<Adam> opts;
  opts.reserve(model.num_aps());
  for (auto& net : model.nets) opts.emplace_back(*net, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);

  int max_epochs = role == TrainRole::kSsnrTeacher ? cfg.ssnr_teacher_epochs : cfg.max_epochs;
  bool early_stopping = role != TrainRole::kSsnrTeacher;
  // SSNR teacher selects on validation g1, SINR teacher on validation g2,
  // student on validation loss.
  EarlyStopper stopper(cfg.patience, role != TrainRole::kStudent);
  PlateauLrSchedule schedule(cfg.initial_lr, cfg.lr_decay_factor, cfg.lr_patience);

  double lambda = role == TrainRole::kStudent ? cfg.lambda0 : beta;
  std::vector<std::size_t> order(dataset.train_size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::vector<std::vector<double>> best_snapshot = model.snapshot();
  result.best_epoch = 0;

  for (int epoch = 1; epoch <= max_epochs; ++epoch) {
    // Seeded reshuffle each epoch.
    Rng shuffle_rng(derive_seed(cfg.shuffle_seed, static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[shuffle_rng.uniform_index(i)]);

    double lr = schedule.lr();
    double loss_sum = 0.0, g1_sum = 0.0, g2_sum = 0.0;
    for (std::size_t lo = 0; lo < order.size(); lo += static_cast<std::size_t>(cfg.batch_size)) {
      std::size_t hi = std::min(order.size(), lo + static_cast<std::size_t>(cfg.batch_size));
      auto out = detail::train_batch(model, dataset, order, lo, hi, role, beta, ceilings, lambda,
                                     cfg, opts, lr);
      loss_sum += out.loss * static_cast<double>(hi - lo);
      g1_sum += out.sum_g1;
      g2_sum += out.sum_g2;
      if (role == TrainRole::kStudent && out.loss < -1.0 - 1e-12) ++result.loss_bound_violations;
    }
    double n_train = static_cast<double>(order.size());
    double epoch_loss = loss_sum / n_train;

    auto val = evaluate_scenes(model, dataset, dataset.train_size(), dataset.size(), cfg.batch_size);

    EpochRow row;
    row.epoch = epoch;
    row.train_g1 = g1_sum / n_train;
    row.train_g2 = g2_sum / n_train;
    row.val_g1 = val.mean_g1;
    row.val_g2 = val.mean_g2;
    row.loss = epoch_loss;
    row.lambda = lambda;
    row.lr = lr;
    result.record.rows.push_back(row);

    double stop_metric;
    switch (role) {
      case TrainRole::kSsnrTeacher: stop_metric = val.mean_g1; break;
      case TrainRole::kSinrTeacher: stop_metric = val.mean_g2; break;
      default: stop_metric = student_loss(val.mean_g1, val.mean_g2, ceilings, lambda); break;
    }
    if (stopper.observe(stop_metric)) {
      best_snapshot = model.snapshot();
      result.best_epoch = epoch;
    }
    schedule.step(epoch_loss);
    if (early_stopping && stopper.should_stop()) break;
  }

  model.restore(best_snapshot);
  result.final_lambda = lambda;
  return result;
}

// Teacher training with the fully biased scalarization; beta must sit at
// one of the two endpoints. Arbitrary fixed beta remains available through
// run_training as a diagnostic.
inline TrainResult train_teacher(const Dataset& dataset, const ArchitectureSpec& spec,
                                 const SystemConfig& system, double beta, const TrainConfig& cfg) {
  if (beta != 0.0 && beta != 1.0)
    throw config_error("train_teacher: beta must be exactly 0 (sensing) or 1 (communication)");
  TrainRole role = beta == 0.0 ? TrainRole::kSsnrTeacher : TrainRole::kSinrTeacher;
  return run_training(dataset, spec, system, role, beta, CeilingEstimates{1.0, 1.0}, cfg);
}

inline TrainResult train_student(const Dataset& dataset, const ArchitectureSpec& spec,
                                 const SystemConfig& system, const CeilingEstimates& ceilings,
                                 const TrainConfig& cfg) {
  return run_training(dataset, spec, system, TrainRole::kStudent, 0.0, ceilings, cfg);
}

// Deployment selection: among epochs whose validation min-SINR reaches
// threshold_pct of the best value on record, pick the one with the
// highest validation SSNR. An optional epoch window restricts the search.
inline int select_model(const TrainingRecord& record, double threshold_pct, int epoch_lo = 1,
                        int epoch_hi = std::numeric_limits<int>::max()) {
  if (record.rows.empty()) throw config_error("select_model: empty record");
  if (!(threshold_pct > 0.0 && threshold_pct <= 1.0))
    throw config_error("select_model: threshold must lie in (0, 1]");
  double max_g2 = -std::numeric_limits<double>::infinity();
  for (const auto& r : record.rows)
    if (r.epoch >= epoch_lo && r.epoch <= epoch_hi) max_g2 = std::max(max_g2, r.val_g2);
  if (!std::isfinite(max_g2)) throw config_error("select_model: epoch window selects no rows");
  double bar = threshold_pct * max_g2;
  int best_epoch = -1;
  double best_g1 = -std::numeric_limits<double>::infinity();
  for (const auto& r : record.rows) {
    if (r.epoch < epoch_lo || r.epoch > epoch_hi) continue;
    if (r.val_g2 >= bar && r.val_g1 > best_g1) {
      best_g1 = r.val_g1;
      best_epoch = r.epoch;
    }
  }
  return best_epoch;
}

}  // namespace cfisac
