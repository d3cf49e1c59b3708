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
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "cfisac/config.hpp"
#include "cfisac/linalg.hpp"
#include "cfisac/parallel.hpp"

namespace cfisac {

struct AgentPositions {
  std::vector<std::array<double, 2>> ue_xy;
  std::array<double, 2> target_xy{0.0, 0.0};
};

// One channel realization: per-AP user channels (columns of comm[l]),
// the per-AP sensing steering vector and the AP-to-target angles.
struct ChannelScene {
  std::vector<CMatrix> comm;      // per AP: M x N, column n = h_{ln}
  std::vector<CVector> steering;  // per AP: a(theta_l), length M
  std::vector<double> angles;     // theta_l, radians
  AgentPositions positions;

  int num_aps() const { return static_cast<int>(comm.size()); }
};

struct Dataset {
  SystemConfig config;
  std::vector<ChannelScene> scenes;
  std::size_t split = 0;  // scenes [0, split) train, [split, size) validation
  std::uint64_t seed = 0;
  double train_fraction = 0.97;

  std::size_t size() const { return scenes.size(); }
  std::size_t train_size() const { return split; }
  std::size_t validation_size() const { return scenes.size() - split; }
};

// Draws agent positions for one scene. All coordinates come from uniform
// distributions; the y placement is fixed by the scheme.
inline AgentPositions sample_positions(const SystemConfig& config, Rng& rng) {
  config.validate();
  AgentPositions p;
  p.ue_xy.resize(config.num_ues);
  const double x0 = config.x_range[0];
  const double x1 = config.x_range[1];
  switch (config.position_scheme) {
    case PositionScheme::kPos1:
      for (auto& ue : p.ue_xy) ue = {rng.uniform(x0, x1), 50.0};
      p.target_xy = {rng.uniform(x0, x1), 50.0};
      break;
    case PositionScheme::kPos2:
      for (auto& ue : p.ue_xy) ue = {rng.uniform(x0, x1), 23.0};
      p.target_xy = {rng.uniform(x0, x1), rng.uniform(0.0, 20.0)};
      break;
    default:
      throw config_error("sample_positions: unknown position scheme");
  }
  return p;
}

// Angle of the AP->agent direction measured from the +x axis (the array
// axis). Lies in [0, pi] whenever the agent sits on or above the axis.
inline double angle_of(const std::array<double, 2>& ap_xy, const std::array<double, 2>& agent_xy) {
  double dx = agent_xy[0] - ap_xy[0];
  double dy = agent_xy[1] - ap_xy[1];
  if (dx == 0.0 && dy == 0.0) throw geometry_error("angle_of: AP and agent positions coincide");
  return std::atan2(dy, dx);
}

// Uniform-linear-array steering vector: element m is
// exp(j * 2*pi * spacing_ratio * m * cos(phi)).
inline CVector steering_vector(double phi, int num_antennas, double spacing_ratio) {
  if (num_antennas < 1) throw config_error("steering_vector: need at least one antenna");
  CVector a(num_antennas);
  double step = 2.0 * kPi * spacing_ratio * std::cos(phi);
  for (int m = 0; m < num_antennas; ++m) {
    double ph = step * static_cast<double>(m);
    a[m] = {std::cos(ph), std::sin(ph)};
  }
  a[0] = {1.0, 0.0};
  return a;
}

// Pure line-of-sight channels: both families derive from the steering
// formula, with no path-loss scaling.
inline ChannelScene build_channels(const AgentPositions& positions, const SystemConfig& config) {
  config.validate();
  if (static_cast<int>(positions.ue_xy.size()) != config.num_ues)
    throw config_error("build_channels: positions do not match num_ues");
  ChannelScene scene;
  scene.positions = positions;
  scene.comm.reserve(config.num_aps);
  scene.steering.reserve(config.num_aps);
  scene.angles.reserve(config.num_aps);
  for (int l = 0; l < config.num_aps; ++l) {
    const auto& ap = config.ap_positions[l];
    CMatrix h(config.antennas_per_ap, config.num_ues);
    for (int n = 0; n < config.num_ues; ++n) {
      CVector col = steering_vector(angle_of(ap, positions.ue_xy[n]), config.antennas_per_ap,
                                    config.spacing_ratio);
      std::copy(col.begin(), col.end(), h.col(n));
    }
    double theta = angle_of(ap, positions.target_xy);
    scene.comm.push_back(std::move(h));
    scene.steering.push_back(steering_vector(theta, config.antennas_per_ap, config.spacing_ratio));
    scene.angles.push_back(theta);
  }
  return scene;
}

// Generates `size` scenes. Scene i draws its randomness from
// (seed, i), so parallel and serial generation agree exactly.
inline Dataset generate_dataset(const SystemConfig& config, std::size_t size, double train_fraction,
                                std::uint64_t seed) {
  config.validate();
  if (size < 1) throw config_error("generate_dataset: size must be >= 1");
  if (!(train_fraction > 0.0 && train_fraction <= 1.0))
    throw config_error("generate_dataset: train_fraction must lie in (0, 1]");
  Dataset ds;
  ds.config = config;
  ds.seed = seed;
  ds.train_fraction = train_fraction;
  ds.split = static_cast<std::size_t>(std::floor(static_cast<double>(size) * train_fraction));
  ds.scenes.resize(size);
  parallel_for(size, [&](std::size_t i) {
    Rng rng(derive_seed(seed, i));
    ds.scenes[i] = build_channels(sample_positions(config, rng), config);
  });
  return ds;
}

// ---------------------------------------------------------------------------
// Dataset container format. Positions plus the generation header are
// stored; channels are re-derived on load, which keeps the file free of
// complex-number encoding concerns and guarantees lossless round trips.
// ---------------------------------------------------------------------------

inline json to_json(const Dataset& ds) {
  json j;
  j["format"] = "cfisac-dataset";
  j["version"] = 1;
  j["config"] = to_json(ds.config);
  j["size"] = ds.scenes.size();
  j["seed"] = ds.seed;
  j["train_fraction"] = ds.train_fraction;
  j["split"] = ds.split;
  json scenes = json::array();
  for (const auto& s : ds.scenes) {
    json rec;
    rec["ue"] = s.positions.ue_xy;
    rec["target"] = s.positions.target_xy;
    scenes.push_back(std::move(rec));
  }
  j["scenes"] = std::move(scenes);
  return j;
}

inline Dataset dataset_from_json(const json& j) {
  if (j.value("format", "") != "cfisac-dataset") throw io_error("not a cfisac dataset file");
  if (j.value("version", 0) != 1) throw io_error("unsupported dataset version");
  Dataset ds;
  ds.config = system_config_from_json(j.at("config"));
  ds.seed = j.at("seed").get<std::uint64_t>();
  ds.train_fraction = j.at("train_fraction").get<double>();
  ds.split = j.at("split").get<std::size_t>();
  const auto& scenes = j.at("scenes");
  ds.scenes.resize(scenes.size());
  std::vector<AgentPositions> pos(scenes.size());
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    pos[i].ue_xy = scenes[i].at("ue").get<std::vector<std::array<double, 2>>>();
    pos[i].target_xy = scenes[i].at("target").get<std::array<double, 2>>();
  }
  parallel_for(scenes.size(), [&](std::size_t i) { ds.scenes[i] = build_channels(pos[i], ds.config); });
  if (ds.split > ds.scenes.size()) throw io_error("dataset split exceeds size");
  return ds;
}

inline void save_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open for writing: " + path);
  out << to_json(ds).dump(1) << '\n';
  if (!out) throw io_error("failed writing dataset: " + path);
}

inline Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open dataset: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw io_error("malformed dataset file " + path + ": " + e.what());
  }
  return dataset_from_json(j);
}

}  // namespace cfisac
