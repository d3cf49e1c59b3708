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

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "cfisac/common.hpp"

namespace cfisac {

using json = nlohmann::ordered_json;

// Agent placement schemes. Pos1 pins every agent to y = 50 m; Pos2 pins
// users to y = 23 m and lets the target roam a 20 m-deep strip.
enum class PositionScheme { kPos1, kPos2 };

inline std::string to_string(PositionScheme s) {
  return s == PositionScheme::kPos1 ? "pos1" : "pos2";
}

inline PositionScheme position_scheme_from_string(const std::string& s) {
  if (s == "pos1") return PositionScheme::kPos1;
  if (s == "pos2") return PositionScheme::kPos2;
  throw config_error("unknown position scheme: '" + s + "' (expected pos1 or pos2)");
}

struct SystemConfig {
  int num_aps = 2;                  // L
  int antennas_per_ap = 16;         // M
  int num_ues = 5;                  // N
  double power_budget = 1.0;        // P_l, watts per AP
  double ue_noise_var = 1.0;        // sigma_n^2
  double ap_noise_var = 1.0;        // sigma_a^2
  double sensing_gain_var = 0.1;    // sigma_s^2, per (l, r) pair
  double spacing_ratio = 0.5;       // wavelength-antenna spacing ratio
  PositionScheme position_scheme = PositionScheme::kPos1;
  std::vector<std::array<double, 2>> ap_positions = {{25.0, 0.0}, {75.0, 0.0}};
  std::array<double, 2> x_range = {0.0, 100.0};  // agent x coordinate bounds

  int beams_per_ap() const { return num_ues + 1; }

  void validate() const {
    if (num_aps < 1) throw config_error("num_aps must be >= 1");
    if (antennas_per_ap < 1) throw config_error("antennas_per_ap must be >= 1");
    if (num_ues < 1) throw config_error("num_ues must be >= 1");
    if (power_budget <= 0.0) throw config_error("power_budget must be > 0");
    if (ue_noise_var <= 0.0) throw config_error("ue_noise_var must be > 0");
    if (ap_noise_var <= 0.0) throw config_error("ap_noise_var must be > 0");
    if (sensing_gain_var <= 0.0) throw config_error("sensing_gain_var must be > 0");
    if (spacing_ratio <= 0.0) throw config_error("spacing_ratio must be > 0");
    if (static_cast<int>(ap_positions.size()) != num_aps)
      throw config_error("ap_positions must have exactly num_aps entries");
    if (x_range[1] < x_range[0]) throw config_error("x_range must be non-decreasing");
  }

  bool operator==(const SystemConfig& o) const = default;
};

inline json to_json(const SystemConfig& c) {
  json j;
  j["num_aps"] = c.num_aps;
  j["antennas_per_ap"] = c.antennas_per_ap;
  j["num_ues"] = c.num_ues;
  j["power_budget"] = c.power_budget;
  j["ue_noise_var"] = c.ue_noise_var;
  j["ap_noise_var"] = c.ap_noise_var;
  j["sensing_gain_var"] = c.sensing_gain_var;
  j["spacing_ratio"] = c.spacing_ratio;
  j["position_scheme"] = to_string(c.position_scheme);
  j["ap_positions"] = c.ap_positions;
  j["x_range"] = c.x_range;
  return j;
}

inline SystemConfig system_config_from_json(const json& j) {
  SystemConfig c;
  c.num_aps = j.value("num_aps", c.num_aps);
  c.antennas_per_ap = j.value("antennas_per_ap", c.antennas_per_ap);
  c.num_ues = j.value("num_ues", c.num_ues);
  c.power_budget = j.value("power_budget", c.power_budget);
  c.ue_noise_var = j.value("ue_noise_var", c.ue_noise_var);
  c.ap_noise_var = j.value("ap_noise_var", c.ap_noise_var);
  c.sensing_gain_var = j.value("sensing_gain_var", c.sensing_gain_var);
  c.spacing_ratio = j.value("spacing_ratio", c.spacing_ratio);
  if (j.contains("position_scheme"))
    c.position_scheme = position_scheme_from_string(j.at("position_scheme").get<std::string>());
  if (j.contains("ap_positions"))
    c.ap_positions = j.at("ap_positions").get<std::vector<std::array<double, 2>>>();
  if (j.contains("x_range")) c.x_range = j.at("x_range").get<std::array<double, 2>>();
  c.validate();
  return c;
}

struct TrainConfig {
  int max_epochs = 1000;             // SINR teacher and student cap
  int ssnr_teacher_epochs = 100;     // fixed run length, no early stopping
  int patience = 100;                // early-stopping patience, epochs
  int batch_size = 500;
  double initial_lr = 0.01;
  double lr_decay_factor = 10.0;
  int lr_patience = 10;              // epochs without loss improvement
  double lambda0 = 0.5;
  double epsilon = 0.01;             // lambda update step size
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t init_seed = 1;
  std::uint64_t shuffle_seed = 2;

  void validate() const {
    if (max_epochs < 1 || ssnr_teacher_epochs < 1) throw config_error("epoch counts must be >= 1");
    if (patience < 1 || lr_patience < 1) throw config_error("patience values must be >= 1");
    if (batch_size < 1) throw config_error("batch_size must be >= 1");
    if (initial_lr <= 0.0) throw config_error("initial_lr must be > 0");
    if (lr_decay_factor <= 1.0) throw config_error("lr_decay_factor must be > 1");
    if (lambda0 < 0.0 || lambda0 > 1.0) throw config_error("lambda0 must lie in [0, 1]");
    if (epsilon <= 0.0) throw config_error("epsilon must be > 0");
  }

  bool operator==(const TrainConfig& o) const = default;
};

inline json to_json(const TrainConfig& c) {
  json j;
  j["max_epochs"] = c.max_epochs;
  j["ssnr_teacher_epochs"] = c.ssnr_teacher_epochs;
  j["patience"] = c.patience;
  j["batch_size"] = c.batch_size;
  j["initial_lr"] = c.initial_lr;
  j["lr_decay_factor"] = c.lr_decay_factor;
  j["lr_patience"] = c.lr_patience;
  j["lambda0"] = c.lambda0;
  j["epsilon"] = c.epsilon;
  j["adam_beta1"] = c.adam_beta1;
  j["adam_beta2"] = c.adam_beta2;
  j["adam_eps"] = c.adam_eps;
  j["init_seed"] = c.init_seed;
  j["shuffle_seed"] = c.shuffle_seed;
  return j;
}

inline TrainConfig train_config_from_json(const json& j) {
  TrainConfig c;
  c.max_epochs = j.value("max_epochs", c.max_epochs);
  c.ssnr_teacher_epochs = j.value("ssnr_teacher_epochs", c.ssnr_teacher_epochs);
  c.patience = j.value("patience", c.patience);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.initial_lr = j.value("initial_lr", c.initial_lr);
  c.lr_decay_factor = j.value("lr_decay_factor", c.lr_decay_factor);
  c.lr_patience = j.value("lr_patience", c.lr_patience);
  c.lambda0 = j.value("lambda0", c.lambda0);
  c.epsilon = j.value("epsilon", c.epsilon);
  c.adam_beta1 = j.value("adam_beta1", c.adam_beta1);
  c.adam_beta2 = j.value("adam_beta2", c.adam_beta2);
  c.adam_eps = j.value("adam_eps", c.adam_eps);
  c.init_seed = j.value("init_seed", c.init_seed);
  c.shuffle_seed = j.value("shuffle_seed", c.shuffle_seed);
  c.validate();
  return c;
}

}  // namespace cfisac
