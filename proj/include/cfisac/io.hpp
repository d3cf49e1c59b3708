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
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "cfisac/baselines.hpp"
#include "cfisac/training.hpp"

namespace cfisac {

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw io_error("failed writing: " + path);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open: " + path);
  std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return s;
}

inline json load_json_file(const std::string& path) {
  try {
    return json::parse(read_text_file(path));
  } catch (const io_error&) {
    throw;
  } catch (const std::exception& e) {
    throw io_error("malformed JSON in " + path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Model checkpoints: versioned header, architecture and system echo,
// per-AP parameter and normalization-state blobs, training metadata.
// ---------------------------------------------------------------------------

struct CheckpointMeta {
  std::string role;
  int epoch = 0;
  double lambda = 0.0;
  double val_g1 = 0.0;
  double val_g2 = 0.0;
};

inline json checkpoint_to_json(DistributedModel& model, const CheckpointMeta& meta) {
  json j;
  j["format"] = "cfisac-checkpoint";
  j["version"] = 1;
  j["system"] = to_json(model.system);
  j["arch"] = to_json(model.spec);
  j["meta"] = {{"role", meta.role},
               {"epoch", meta.epoch},
               {"lambda", meta.lambda},
               {"val_g1", meta.val_g1},
               {"val_g2", meta.val_g2}};
  json aps = json::array();
  for (auto& net : model.nets) {
    json blob;
    for (auto& p : net->params())
      blob[p.name] = std::vector<double>(p.value->data(), p.value->data() + p.value->size());
    for (auto& p : net->state())
      blob[p.name] = std::vector<double>(p.value->data(), p.value->data() + p.value->size());
    aps.push_back(std::move(blob));
  }
  j["aps"] = std::move(aps);
  return j;
}

inline void save_checkpoint(DistributedModel& model, const CheckpointMeta& meta,
                            const std::string& path) {
  write_text_file(path, checkpoint_to_json(model, meta).dump(1) + "\n");
}

struct LoadedCheckpoint {
  DistributedModel model;
  CheckpointMeta meta;
};

inline LoadedCheckpoint load_checkpoint(const std::string& path) {
  json j = load_json_file(path);
  if (j.value("format", "") != "cfisac-checkpoint") throw io_error("not a cfisac checkpoint: " + path);
  if (j.value("version", 0) != 1) throw io_error("unsupported checkpoint version in " + path);
  LoadedCheckpoint lc;
  SystemConfig system = system_config_from_json(j.at("system"));
  ArchitectureSpec spec = architecture_from_json(j.at("arch"));
  lc.model = init_model(spec, system, 0);
  const auto& aps = j.at("aps");
  if (static_cast<int>(aps.size()) != lc.model.num_aps())
    throw io_error("checkpoint AP count mismatch in " + path);
  for (int l = 0; l < lc.model.num_aps(); ++l) {
    auto fill = [&](ParamView& p) {
      auto vals = aps[l].at(p.name).get<std::vector<double>>();
      if (vals.size() != p.value->size())
        throw io_error("checkpoint tensor size mismatch for " + p.name + " in " + path);
      std::copy(vals.begin(), vals.end(), p.value->data());
    };
    for (auto& p : lc.model.nets[l]->params()) fill(p);
    for (auto& p : lc.model.nets[l]->state()) fill(p);
  }
  const auto& meta = j.at("meta");
  lc.meta.role = meta.value("role", "");
  lc.meta.epoch = meta.value("epoch", 0);
  lc.meta.lambda = meta.value("lambda", 0.0);
  lc.meta.val_g1 = meta.value("val_g1", 0.0);
  lc.meta.val_g2 = meta.value("val_g2", 0.0);
  return lc;
}

// ---------------------------------------------------------------------------
// Ceilings file.
// ---------------------------------------------------------------------------

inline void save_ceilings(const CeilingEstimates& c, const std::string& path) {
  json j;
  j["format"] = "cfisac-ceilings";
  j["g1_max"] = c.g1_max;
  j["g2_max"] = c.g2_max;
  write_text_file(path, j.dump(1) + "\n");
}

inline CeilingEstimates load_ceilings(const std::string& path) {
  json j = load_json_file(path);
  if (j.value("format", "") != "cfisac-ceilings") throw io_error("not a ceilings file: " + path);
  CeilingEstimates c{j.at("g1_max").get<double>(), j.at("g2_max").get<double>()};
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// Per-scene metric CSV: linear columns followed by dB duplicates.
// ---------------------------------------------------------------------------

inline std::string metrics_csv(const std::vector<MetricReport>& reports,
                               const std::vector<std::size_t>& scene_ids, int num_users) {
  std::string out = "scene_id";
  for (int n = 1; n <= num_users; ++n) out += ",sinr_" + std::to_string(n);
  out += ",min_sinr,ssnr";
  for (int n = 1; n <= num_users; ++n) out += ",sinr_" + std::to_string(n) + "_db";
  out += ",min_sinr_db,ssnr_db\n";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    out += std::to_string(scene_ids[i]);
    for (double v : r.sinr) out += ',' + format_double(v);
    out += ',' + format_double(r.min_sinr);
    out += ',' + format_double(r.ssnr);
    for (double v : r.sinr) out += ',' + format_double(db10(v));
    out += ',' + format_double(db10(r.min_sinr));
    out += ',' + format_double(db10(r.ssnr));
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Run manifests: one per output directory; enough to reproduce the run.
// ---------------------------------------------------------------------------

inline std::string iso_timestamp() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

inline void write_manifest(const std::filesystem::path& out_dir, const std::string& command,
                           json details) {
  json j;
  j["format"] = "cfisac-manifest";
  j["version"] = kVersion;
  j["command"] = command;
  j["timestamp"] = iso_timestamp();
  j["details"] = std::move(details);
  write_text_file((out_dir / "manifest.json").string(), j.dump(1) + "\n");
}

}  // namespace cfisac
