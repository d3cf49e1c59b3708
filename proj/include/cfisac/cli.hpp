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

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cfisac/io.hpp"

namespace cfisac {

namespace fs = std::filesystem;

// Exit codes: 0 success, 2 usage, 3 data/config mismatch or I/O,
// 4 numeric failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumeric = 4;

namespace detail {

// Relative --out paths resolve under $CFISAC_OUT_ROOT when set.
inline fs::path resolve_out_dir(const std::string& out) {
  fs::path p(out);
  if (p.is_relative()) {
    if (const char* root = std::getenv("CFISAC_OUT_ROOT")) p = fs::path(root) / p;
  }
  fs::create_directories(p);
  return p;
}

struct ConfigFile {
  SystemConfig system;
  TrainConfig train;
};

inline ConfigFile load_config_file(const std::string& path) {
  ConfigFile c;
  if (path.empty()) return c;
  json j = load_json_file(path);
  if (j.contains("system")) c.system = system_config_from_json(j.at("system"));
  if (j.contains("train")) c.train = train_config_from_json(j.at("train"));
  return c;
}

inline ArchitectureSpec resolve_arch(const std::string& arch, const std::string& arch_file) {
  if (!arch_file.empty()) return architecture_from_json(load_json_file(arch_file));
  return [&] {
    switch (arch_kind_from_string(arch)) {
      case ArchKind::kCnn1d: return ArchitectureSpec::cnn1d();
      case ArchKind::kCae: return ArchitectureSpec::cae();
      default: return ArchitectureSpec::unet();
    }
  }();
}

}  // namespace detail

// gen-data: sample a reproducible scene dataset and write it with its
// manifest.
inline int cmd_gen_data(const std::string& config_path, std::size_t size, double train_fraction,
                        std::uint64_t seed, const std::string& out) {
  if (size < 1) throw usage_error("gen-data: --size must be >= 1");
  if (!(train_fraction > 0.0 && train_fraction <= 1.0))
    throw usage_error("gen-data: --train-fraction must lie in (0, 1]");
  auto cfg = detail::load_config_file(config_path);
  fs::path dir = detail::resolve_out_dir(out);
  Dataset ds = generate_dataset(cfg.system, size, train_fraction, seed);
  save_dataset(ds, (dir / "dataset.json").string());
  json details;
  details["system"] = to_json(cfg.system);
  details["size"] = size;
  details["train_fraction"] = train_fraction;
  details["data_seed"] = seed;
  details["split"] = ds.split;
  details["artifacts"] = {"dataset.json"};
  write_manifest(dir, "gen-data", std::move(details));
  std::cout << "wrote " << (dir / "dataset.json").string() << " (" << ds.train_size() << " train / "
            << ds.validation_size() << " validation)\n";
  return kExitOk;
}

struct TrainCliOptions {
  std::string dataset_path;
  std::string config_path;
  std::string arch = "unet";
  std::string arch_file;
  std::string role = "student";
  std::string ssnr_teacher_path;
  std::string sinr_teacher_path;
  std::string ceilings_path;
  std::string out;
  // Optional overrides; negative/zero sentinel keeps the config value.
  int epochs = -1;
  int batch = -1;
  double lr = -1.0;
  int patience = -1;
  std::optional<std::uint64_t> init_seed;
  std::optional<std::uint64_t> shuffle_seed;
  int threads = 1;
};

inline int cmd_train(const TrainCliOptions& o) {
  auto cfgf = detail::load_config_file(o.config_path);
  TrainConfig cfg = cfgf.train;
  if (o.epochs > 0) {
    cfg.max_epochs = o.epochs;
    cfg.ssnr_teacher_epochs = o.epochs;
  }
  if (o.batch > 0) cfg.batch_size = o.batch;
  if (o.lr > 0.0) cfg.initial_lr = o.lr;
  if (o.patience > 0) cfg.patience = o.patience;
  if (o.init_seed) cfg.init_seed = *o.init_seed;
  if (o.shuffle_seed) cfg.shuffle_seed = *o.shuffle_seed;
  cfg.validate();
  set_max_threads(o.threads);

  Dataset ds = load_dataset(o.dataset_path);
  TrainRole role = train_role_from_string(o.role);
  ArchitectureSpec spec = detail::resolve_arch(o.arch, o.arch_file);

  CeilingEstimates ceilings{1.0, 1.0};
  json ceilings_detail;
  if (role == TrainRole::kStudent) {
    if (!o.ceilings_path.empty()) {
      ceilings = load_ceilings(o.ceilings_path);
    } else {
      if (o.ssnr_teacher_path.empty() || o.sinr_teacher_path.empty()) {
        std::string missing;
        if (o.ssnr_teacher_path.empty()) missing += " --ssnr-teacher";
        if (o.sinr_teacher_path.empty()) missing += " --sinr-teacher";
        throw usage_error("train: student role needs" + missing +
                          " checkpoints (or --ceilings)");
      }
      auto t1 = load_checkpoint(o.ssnr_teacher_path);
      auto t2 = load_checkpoint(o.sinr_teacher_path);
      if (!(t1.model.system == ds.config) || !(t2.model.system == ds.config))
        throw config_error("train: teacher checkpoints do not match the dataset system config");
      if (!(t1.model.spec == spec) || !(t2.model.spec == spec))
        throw config_error("train: teacher architectures do not match --arch");
      ceilings = estimate_ceilings(t1.model, t2.model, ds);
    }
    ceilings_detail = {{"g1_max", ceilings.g1_max}, {"g2_max", ceilings.g2_max}};
  }

  TrainResult result;
  switch (role) {
    case TrainRole::kSsnrTeacher: result = train_teacher(ds, spec, ds.config, 0.0, cfg); break;
    case TrainRole::kSinrTeacher: result = train_teacher(ds, spec, ds.config, 1.0, cfg); break;
    case TrainRole::kStudent: result = train_student(ds, spec, ds.config, ceilings, cfg); break;
  }

  fs::path dir = detail::resolve_out_dir(o.out);
  const EpochRow* best = nullptr;
  for (const auto& r : result.record.rows)
    if (r.epoch == result.best_epoch) best = &r;
  CheckpointMeta meta;
  meta.role = o.role;
  meta.epoch = result.best_epoch;
  meta.lambda = result.final_lambda;
  if (best) {
    meta.val_g1 = best->val_g1;
    meta.val_g2 = best->val_g2;
  }
  save_checkpoint(result.model, meta, (dir / "checkpoint.json").string());
  write_text_file((dir / "curves.csv").string(), result.record.to_csv());

  json details;
  details["role"] = o.role;
  details["dataset"] = o.dataset_path;
  details["data_seed"] = ds.seed;
  details["system"] = to_json(ds.config);
  details["train"] = to_json(cfg);
  details["arch"] = to_json(spec);
  details["threads"] = o.threads;
  if (!ceilings_detail.is_null()) details["ceilings"] = ceilings_detail;
  details["best_epoch"] = result.best_epoch;
  details["epochs_run"] = result.record.rows.size();
  if (role == TrainRole::kStudent)
    details["loss_bound_violations"] = result.loss_bound_violations;
  details["artifacts"] = {"checkpoint.json", "curves.csv"};
  write_manifest(dir, "train", std::move(details));

  const auto& last = result.record.rows.back();
  std::cout << o.role << ": " << result.record.rows.size() << " epochs, best epoch "
            << result.best_epoch << ", final val g1 " << format_double(last.val_g1) << ", val g2 "
            << format_double(last.val_g2) << "\n";
  return kExitOk;
}

// ceilings: standalone teacher-score aggregation.
inline int cmd_ceilings(const std::string& dataset_path, const std::string& ssnr_teacher_path,
                        const std::string& sinr_teacher_path, const std::string& out) {
  Dataset ds = load_dataset(dataset_path);
  auto t1 = load_checkpoint(ssnr_teacher_path);
  auto t2 = load_checkpoint(sinr_teacher_path);
  if (!(t1.model.system == ds.config) || !(t2.model.system == ds.config))
    throw config_error("ceilings: teacher checkpoints do not match the dataset system config");
  CeilingEstimates c = estimate_ceilings(t1.model, t2.model, ds);
  fs::path dir = detail::resolve_out_dir(out);
  save_ceilings(c, (dir / "ceilings.json").string());
  json details;
  details["dataset"] = dataset_path;
  details["ssnr_teacher"] = ssnr_teacher_path;
  details["sinr_teacher"] = sinr_teacher_path;
  details["g1_max"] = c.g1_max;
  details["g2_max"] = c.g2_max;
  details["artifacts"] = {"ceilings.json"};
  write_manifest(dir, "ceilings", std::move(details));
  std::cout << "g1_max " << format_double(c.g1_max) << ", g2_max " << format_double(c.g2_max)
            << "\n";
  return kExitOk;
}

// evaluate: per-scene metrics of a checkpoint on a dataset split, plus
// optional selection over a curves CSV.
inline int cmd_evaluate(const std::string& checkpoint_path, const std::string& dataset_path,
                        const std::string& split, const std::string& out,
                        const std::string& curves_path, double select_threshold,
                        int select_from = 1, int select_to = std::numeric_limits<int>::max()) {
  Dataset ds = load_dataset(dataset_path);
  auto ck = load_checkpoint(checkpoint_path);
  if (!(ck.model.system == ds.config))
    throw config_error("evaluate: checkpoint system config does not match the dataset");

  std::size_t begin = 0, end = ds.size();
  if (split == "train")
    end = ds.train_size();
  else if (split == "val")
    begin = ds.train_size();
  else if (split != "all")
    throw usage_error("evaluate: --split must be train, val or all");
  if (begin >= end) throw usage_error("evaluate: selected split is empty");

  auto ev = evaluate_scenes(ck.model, ds, begin, end);
  std::vector<std::size_t> ids(end - begin);
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = begin + i;

  fs::path dir = detail::resolve_out_dir(out);
  write_text_file((dir / "metrics.csv").string(), metrics_csv(ev.reports, ids, ds.config.num_ues));

  double bound = ssnr_upper_bound(ds.config);
  std::cout << "scenes " << ids.size() << ": mean g1 " << format_double(ev.mean_g1) << " (bound "
            << format_double(bound) << "), mean g2 " << format_double(ev.mean_g2) << "\n";

  json details;
  details["checkpoint"] = checkpoint_path;
  details["dataset"] = dataset_path;
  details["split"] = split;
  details["mean_g1"] = ev.mean_g1;
  details["mean_g2"] = ev.mean_g2;
  details["ssnr_upper_bound"] = bound;
  details["artifacts"] = {"metrics.csv"};

  if (!curves_path.empty()) {
    TrainingRecord rec = TrainingRecord::load(curves_path);
    int epoch = select_model(rec, select_threshold, select_from, select_to);
    const EpochRow* row = nullptr;
    for (const auto& r : rec.rows)
      if (r.epoch == epoch) row = &r;
    std::cout << "selected epoch " << epoch;
    if (row)
      std::cout << " (val g2 " << format_double(row->val_g2) << ", val g1 "
                << format_double(row->val_g1) << ")";
    std::cout << " at threshold " << format_double(select_threshold) << "\n";
    details["selected_epoch"] = epoch;
    details["select_threshold"] = select_threshold;
  }
  write_manifest(dir, "evaluate", std::move(details));
  return kExitOk;
}

// benchmark: surrogate baseline pipeline vs student inference.
inline int cmd_benchmark(const std::string& dataset_path, const std::string& checkpoint_path,
                         std::size_t n_points, double rho, std::uint64_t seed, bool single_thread,
                         int threads, const std::string& out) {
  if (n_points < 1) throw usage_error("benchmark: --points must be >= 1");
  set_max_threads(threads);
  Dataset ds = load_dataset(dataset_path);
  auto ck = load_checkpoint(checkpoint_path);
  if (!(ck.model.system == ds.config))
    throw config_error("benchmark: checkpoint system config does not match the dataset");
  if (n_points > ds.size()) {
    std::cerr << "warning: --points " << n_points << " exceeds dataset size " << ds.size()
              << "; clipping\n";
    n_points = ds.size();
  }
  BenchmarkOptions opt;
  opt.n_points = n_points;
  opt.rho = rho;
  opt.seed = seed;
  opt.single_thread = single_thread;
  ComparisonReport rep = benchmark_compare(ds, ck.model, opt);

  fs::path dir = detail::resolve_out_dir(out);
  write_text_file((dir / "comparison.csv").string(), rep.to_csv());
  write_text_file((dir / "summary.json").string(), to_json(rep).dump(1) + "\n");
  json details;
  details["dataset"] = dataset_path;
  details["checkpoint"] = checkpoint_path;
  details["points"] = rep.points;
  details["rho"] = rho;
  details["seed"] = seed;
  details["single_thread"] = single_thread;
  details["summary"] = to_json(rep);
  details["artifacts"] = {"comparison.csv", "summary.json"};
  write_manifest(dir, "benchmark", std::move(details));
  std::cout << "baseline mean g1 " << format_double(rep.baseline_mean_g1) << ", g2 "
            << format_double(rep.baseline_mean_g2) << ", " << format_double(rep.baseline_mean_seconds)
            << " s/scene; student mean g1 " << format_double(rep.student_mean_g1) << ", g2 "
            << format_double(rep.student_mean_g2) << ", " << format_double(rep.student_mean_seconds)
            << " s/scene; speedup " << format_double(rep.speedup) << "x\n";
  return kExitOk;
}

inline int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Unsupervised distributed beamforming for cell-free ISAC systems"};
  app.require_subcommand(1);

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Generate a scene dataset");
  std::string g_config, g_out;
  std::size_t g_size = 20000;
  double g_fraction = 0.97;
  std::uint64_t g_seed = 1;
  gen->add_option("--config", g_config, "Config file (JSON)");
  gen->add_option("--size", g_size, "Number of scenes");
  gen->add_option("--train-fraction", g_fraction, "Training fraction");
  gen->add_option("--seed", g_seed, "Data seed");
  gen->add_option("--out", g_out, "Output directory")->required();

  // train
  auto* tr = app.add_subcommand("train", "Train a teacher or student model");
  TrainCliOptions t;
  tr->add_option("--dataset", t.dataset_path, "Dataset file")->required();
  tr->add_option("--config", t.config_path, "Config file (JSON)");
  tr->add_option("--arch", t.arch, "Architecture preset (cnn1d, cae, unet)");
  tr->add_option("--arch-file", t.arch_file, "Architecture spec file (JSON)");
  tr->add_option("--role", t.role, "ssnr-teacher, sinr-teacher or student")->required();
  tr->add_option("--ssnr-teacher", t.ssnr_teacher_path, "SSNR teacher checkpoint (student role)");
  tr->add_option("--sinr-teacher", t.sinr_teacher_path, "SINR teacher checkpoint (student role)");
  tr->add_option("--ceilings", t.ceilings_path, "Precomputed ceilings file (student role)");
  tr->add_option("--epochs", t.epochs, "Override max epochs");
  tr->add_option("--batch", t.batch, "Override batch size");
  tr->add_option("--lr", t.lr, "Override initial learning rate");
  tr->add_option("--patience", t.patience, "Override early-stopping patience");
  std::uint64_t t_init = 0, t_shuffle = 0;
  auto* oi = tr->add_option("--init-seed", t_init, "Weight init seed");
  auto* os = tr->add_option("--shuffle-seed", t_shuffle, "Epoch shuffle seed");
  tr->add_option("--threads", t.threads, "Worker cap");
  tr->add_option("--out", t.out, "Output directory")->required();

  // ceilings
  auto* ce = app.add_subcommand("ceilings", "Compute teacher score ceilings");
  std::string c_dataset, c_ssnr, c_sinr, c_out;
  ce->add_option("--dataset", c_dataset, "Dataset file")->required();
  ce->add_option("--ssnr-teacher", c_ssnr, "SSNR teacher checkpoint")->required();
  ce->add_option("--sinr-teacher", c_sinr, "SINR teacher checkpoint")->required();
  ce->add_option("--out", c_out, "Output directory")->required();

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "Evaluate a checkpoint on a dataset split");
  std::string e_ckpt, e_dataset, e_split = "val", e_out, e_curves;
  double e_threshold = 0.94;
  int e_from = 1, e_to = std::numeric_limits<int>::max();
  ev->add_option("--checkpoint", e_ckpt, "Checkpoint file")->required();
  ev->add_option("--dataset", e_dataset, "Dataset file")->required();
  ev->add_option("--split", e_split, "train, val or all");
  ev->add_option("--curves", e_curves, "Curves CSV for epoch selection");
  ev->add_option("--select-threshold", e_threshold, "Selection threshold (fraction of max g2)");
  ev->add_option("--select-from", e_from, "First epoch eligible for selection");
  ev->add_option("--select-to", e_to, "Last epoch eligible for selection");
  ev->add_option("--out", e_out, "Output directory")->required();

  // benchmark
  auto* be = app.add_subcommand("benchmark", "Compare the baseline pipeline against the student");
  std::string b_dataset, b_ckpt, b_out;
  std::size_t b_points = 200;
  double b_rho = 0.5;
  std::uint64_t b_seed = 0;
  bool b_single = false;
  int b_threads = 1;
  be->add_option("--dataset", b_dataset, "Dataset file")->required();
  be->add_option("--checkpoint", b_ckpt, "Student checkpoint")->required();
  be->add_option("--points", b_points, "Number of scenes");
  be->add_option("--rho", b_rho, "Communication power ratio");
  be->add_option("--seed", b_seed, "Scene selection seed");
  be->add_flag("--single-thread", b_single, "Force single-threaded timing");
  be->add_option("--threads", b_threads, "Worker cap (ignored with --single-thread)");
  be->add_option("--out", b_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(g_config, g_size, g_fraction, g_seed, g_out);
    if (tr->parsed()) {
      if (oi->count()) t.init_seed = t_init;
      if (os->count()) t.shuffle_seed = t_shuffle;
      return cmd_train(t);
    }
    if (ce->parsed()) return cmd_ceilings(c_dataset, c_ssnr, c_sinr, c_out);
    if (ev->parsed())
      return cmd_evaluate(e_ckpt, e_dataset, e_split, e_out, e_curves, e_threshold, e_from, e_to);
    if (be->parsed())
      return cmd_benchmark(b_dataset, b_ckpt, b_points, b_rho, b_seed, b_single, b_threads, b_out);
  } catch (const usage_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const numeric_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace cfisac
