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
#include <string>
#include <vector>

#include "cfisac/config.hpp"

namespace cfisac {

enum class ArchKind { kCnn1d, kCae, kUnet };

inline std::string to_string(ArchKind k) {
  switch (k) {
    case ArchKind::kCnn1d: return "cnn1d";
    case ArchKind::kCae: return "cae";
    case ArchKind::kUnet: return "unet";
  }
  throw config_error("unknown architecture kind");
}

inline ArchKind arch_kind_from_string(const std::string& s) {
  if (s == "cnn1d") return ArchKind::kCnn1d;
  if (s == "cae") return ArchKind::kCae;
  if (s == "unet") return ArchKind::kUnet;
  throw config_error("unknown architecture: '" + s + "' (expected cnn1d, cae or unet)");
}

// One 2D (de)convolution stage. Feature maps are laid out (channels,
// antennas, agents); kernel extents are named per axis to keep the
// filter-size bookkeeping unambiguous.
struct ConvStageSpec {
  int channels = 0;
  int k_agents = 1;
  int k_antennas = 1;
  int pad_agents = 0;
  int pad_antennas = 0;

  bool operator==(const ConvStageSpec&) const = default;
};

struct ArchitectureSpec {
  ArchKind kind = ArchKind::kUnet;
  double leaky_slope = 0.01;

  // cnn1d: 1D conv chain over the flattened CSI vector, then FC layers
  // and an affine output head.
  std::vector<int> conv_channels;
  std::vector<int> conv_kernels;
  std::vector<int> fc_widths;

  // cae/unet: encoder-decoder chains. The decoder uses transposed
  // convolutions for the CAE (zero padding shrinks the map, the adjoint
  // restores it) and plain padded convolutions for the U-net style.
  std::vector<ConvStageSpec> encoder;
  std::vector<ConvStageSpec> decoder;

  // {encoder stage, decoder stage}, 1-based: the encoder stage's output
  // map is concatenated onto the decoder stage's input.
  std::vector<std::array<int, 2>> skips;

  bool operator==(const ArchitectureSpec&) const = default;

  // Three-layer 1D conv stack with 90-unit FC layers.
  static ArchitectureSpec cnn1d() {
    ArchitectureSpec s;
    s.kind = ArchKind::kCnn1d;
    s.conv_channels = {2, 4, 8};
    s.conv_kernels = {11, 11, 11};
    s.fc_widths = {90, 90};
    return s;
  }

  // Convolutional autoencoder: unpadded encoder, mirrored transposed-conv
  // decoder, skip concatenations from encoder stages 2 and 3.
  static ArchitectureSpec cae() {
    ArchitectureSpec s;
    s.kind = ArchKind::kCae;
    s.encoder = {{16, 3, 5, 0, 0}, {32, 2, 5, 0, 0}, {64, 1, 3, 0, 0}, {128, 1, 3, 0, 0}};
    s.decoder = {{32, 1, 3, 0, 0}, {64, 1, 3, 0, 0}, {128, 2, 5, 0, 0}, {256, 3, 5, 0, 0}};
    s.skips = {{3, 2}, {2, 3}};
    return s;
  }

  // U-net style: same channel progression as the CAE, 3x3 filters with
  // unit padding so every map keeps the input size, no pooling.
  static ArchitectureSpec unet() {
    ArchitectureSpec s;
    s.kind = ArchKind::kUnet;
    s.encoder = {{16, 3, 3, 1, 1}, {32, 3, 3, 1, 1}, {64, 3, 3, 1, 1}, {128, 3, 3, 1, 1}};
    s.decoder = {{32, 3, 3, 1, 1}, {64, 3, 3, 1, 1}, {128, 3, 3, 1, 1}, {256, 3, 3, 1, 1}};
    s.skips = {{3, 2}, {2, 3}};
    return s;
  }

  // Narrow U-net-style variant for CPU-budget experiments and the test
  // rigs; same structure, two stages per side.
  static ArchitectureSpec unet_small(int enc1 = 4, int enc2 = 8) {
    ArchitectureSpec s;
    s.kind = ArchKind::kUnet;
    s.encoder = {{enc1, 3, 3, 1, 1}, {enc2, 3, 3, 1, 1}};
    s.decoder = {{enc1, 3, 3, 1, 1}, {enc2, 3, 3, 1, 1}};
    s.skips = {{1, 2}};
    return s;
  }
};

inline json to_json(const ConvStageSpec& c) {
  json j;
  j["channels"] = c.channels;
  j["k_agents"] = c.k_agents;
  j["k_antennas"] = c.k_antennas;
  j["pad_agents"] = c.pad_agents;
  j["pad_antennas"] = c.pad_antennas;
  return j;
}

inline ConvStageSpec conv_stage_from_json(const json& j) {
  ConvStageSpec c;
  c.channels = j.at("channels").get<int>();
  c.k_agents = j.at("k_agents").get<int>();
  c.k_antennas = j.at("k_antennas").get<int>();
  c.pad_agents = j.value("pad_agents", 0);
  c.pad_antennas = j.value("pad_antennas", 0);
  return c;
}

inline json to_json(const ArchitectureSpec& s) {
  json j;
  j["kind"] = to_string(s.kind);
  j["leaky_slope"] = s.leaky_slope;
  if (s.kind == ArchKind::kCnn1d) {
    j["conv_channels"] = s.conv_channels;
    j["conv_kernels"] = s.conv_kernels;
    j["fc_widths"] = s.fc_widths;
  } else {
    json enc = json::array(), dec = json::array();
    for (const auto& c : s.encoder) enc.push_back(to_json(c));
    for (const auto& c : s.decoder) dec.push_back(to_json(c));
    j["encoder"] = std::move(enc);
    j["decoder"] = std::move(dec);
    j["skips"] = s.skips;
  }
  return j;
}

inline ArchitectureSpec architecture_from_json(const json& j) {
  ArchitectureSpec s;
  s.kind = arch_kind_from_string(j.at("kind").get<std::string>());
  s.leaky_slope = j.value("leaky_slope", 0.01);
  if (s.kind == ArchKind::kCnn1d) {
    s.conv_channels = j.at("conv_channels").get<std::vector<int>>();
    s.conv_kernels = j.at("conv_kernels").get<std::vector<int>>();
    s.fc_widths = j.at("fc_widths").get<std::vector<int>>();
  } else {
    for (const auto& c : j.at("encoder")) s.encoder.push_back(conv_stage_from_json(c));
    for (const auto& c : j.at("decoder")) s.decoder.push_back(conv_stage_from_json(c));
    if (j.contains("skips")) s.skips = j.at("skips").get<std::vector<std::array<int, 2>>>();
  }
  return s;
}

}  // namespace cfisac
