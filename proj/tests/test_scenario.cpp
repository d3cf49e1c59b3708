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

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "cfisac/io.hpp"
#include "cfisac/scenario.hpp"
#include "oracles.hpp"

using namespace cfisac;
using Catch::Approx;

namespace {
SystemConfig desk_config() {
  SystemConfig c;
  return c;  // defaults: L=2, M=16, N=5, Pos1
}
}  // namespace

TEST_CASE("sample_positions pins scheme coordinates", "[scenario]") {
  SystemConfig cfg = desk_config();

  SECTION("pos1 fixes every agent at y = 50") {
    for (std::uint64_t seed : {1ull, 7ull, 123ull}) {
      Rng rng(seed);
      auto p = sample_positions(cfg, rng);
      for (const auto& ue : p.ue_xy) {
        REQUIRE(ue[1] == 50.0);
        REQUIRE(ue[0] >= 0.0);
        REQUIRE(ue[0] <= 100.0);
      }
      REQUIRE(p.target_xy[1] == 50.0);
    }
  }

  SECTION("pos2 fixes users at y = 23 and bounds the target strip") {
    cfg.position_scheme = PositionScheme::kPos2;
    for (std::uint64_t seed : {2ull, 9ull, 77ull}) {
      Rng rng(seed);
      auto p = sample_positions(cfg, rng);
      for (const auto& ue : p.ue_xy) REQUIRE(ue[1] == 23.0);
      REQUIRE(p.target_xy[0] >= 0.0);
      REQUIRE(p.target_xy[0] <= 100.0);
      REQUIRE(p.target_xy[1] >= 0.0);
      REQUIRE(p.target_xy[1] <= 20.0);
    }
  }

  SECTION("degenerate x range collapses every x to the endpoint") {
    cfg.x_range = {0.0, 0.0};
    Rng rng(5);
    auto p = sample_positions(cfg, rng);
    for (const auto& ue : p.ue_xy) REQUIRE(ue[0] == 0.0);
    REQUIRE(p.target_xy[0] == 0.0);
  }

  SECTION("bounds hold over many draws") {
    cfg.position_scheme = PositionScheme::kPos2;
    Rng rng(31);
    for (int i = 0; i < 500; ++i) {
      auto p = sample_positions(cfg, rng);
      for (const auto& ue : p.ue_xy) {
        REQUIRE(ue[0] >= 0.0);
        REQUIRE(ue[0] <= 100.0);
        REQUIRE(ue[1] == 23.0);
      }
      REQUIRE(p.target_xy[1] <= 20.0);
    }
  }
}

TEST_CASE("angle_of basic geometry", "[scenario]") {
  REQUIRE(angle_of({25, 0}, {25, 50}) == Approx(kPi / 2).margin(1e-15));
  REQUIRE(angle_of({25, 0}, {125, 0}) == Approx(0.0).margin(1e-15));
  REQUIRE(angle_of({75, 0}, {25, 50}) == Approx(3 * kPi / 4).margin(1e-15));
  REQUIRE_THROWS_AS(angle_of({1, 2}, {1, 2}), geometry_error);
}

TEST_CASE("steering_vector matches the scalar element formula", "[scenario]") {
  SECTION("broadside gives the all-ones vector") {
    auto a = steering_vector(kPi / 2, 4, 0.5);
    for (const auto& v : a) {
      REQUIRE(v.real() == Approx(1.0).margin(1e-12));
      REQUIRE(v.imag() == Approx(0.0).margin(1e-12));
    }
  }

  SECTION("endfire at half-wavelength spacing alternates sign") {
    auto a = steering_vector(0.0, 2, 0.5);
    REQUIRE(a[0] == cdouble{1.0, 0.0});
    REQUIRE(a[1].real() == Approx(-1.0).margin(1e-12));
    REQUIRE(a[1].imag() == Approx(0.0).margin(1e-12));
  }

  SECTION("unit modulus and uniform phase increments at pi/3") {
    auto a = steering_vector(kPi / 3, 3, 0.5);
    for (int m = 0; m < 3; ++m) {
      REQUIRE(std::abs(a[m]) == Approx(1.0).margin(1e-12));
      auto expected = oracle::steering_element(kPi / 3, m, 0.5);
      REQUIRE(std::abs(a[m] - expected) < 1e-12);
    }
    double inc1 = std::arg(a[1] / a[0]);
    double inc2 = std::arg(a[2] / a[1]);
    REQUIRE(inc1 == Approx(inc2).margin(1e-12));
    REQUIRE(a[0] == cdouble{1.0, 0.0});
  }

  SECTION("independent scalar oracle across random angles") {
    Rng rng(11);
    for (int t = 0; t < 50; ++t) {
      double phi = rng.uniform(0.0, kPi);
      auto a = steering_vector(phi, 8, 0.5);
      for (int m = 0; m < 8; ++m)
        REQUIRE(std::abs(a[m] - oracle::steering_element(phi, m, 0.5)) < 1e-12);
    }
  }
}

TEST_CASE("build_channels wiring", "[scenario]") {
  SystemConfig cfg = desk_config();
  cfg.num_aps = 1;
  cfg.ap_positions = {{25.0, 0.0}};
  cfg.num_ues = 2;

  SECTION("user directly above the AP gets the all-ones channel") {
    AgentPositions p;
    p.ue_xy = {{25.0, 50.0}, {60.0, 50.0}};
    p.target_xy = {10.0, 50.0};
    auto scene = build_channels(p, cfg);
    for (int i = 0; i < cfg.antennas_per_ap; ++i) {
      REQUIRE(scene.comm[0](i, 0).real() == Approx(1.0).margin(1e-12));
      REQUIRE(scene.comm[0](i, 0).imag() == Approx(0.0).margin(1e-12));
    }
  }

  SECTION("mirror-symmetric users get conjugate channels") {
    AgentPositions p;
    p.ue_xy = {{25.0 - 13.0, 50.0}, {25.0 + 13.0, 50.0}};
    p.target_xy = {40.0, 50.0};
    auto scene = build_channels(p, cfg);
    for (int i = 0; i < cfg.antennas_per_ap; ++i)
      REQUIRE(std::abs(scene.comm[0](i, 0) - std::conj(scene.comm[0](i, 1))) < 1e-9);
  }

  SECTION("unit-modulus entries give squared channel norm M") {
    SystemConfig full = desk_config();
    Rng rng(3);
    auto scene = build_channels(sample_positions(full, rng), full);
    for (int l = 0; l < full.num_aps; ++l) {
      for (int n = 0; n < full.num_ues; ++n) {
        double ss = 0.0;
        for (int i = 0; i < full.antennas_per_ap; ++i) ss += std::norm(scene.comm[l](i, n));
        REQUIRE(ss == Approx(static_cast<double>(full.antennas_per_ap)).margin(1e-9));
      }
      for (int i = 0; i < full.antennas_per_ap; ++i)
        REQUIRE(std::abs(std::abs(scene.steering[l][i]) - 1.0) < 1e-12);
      REQUIRE(scene.steering[l][0] == cdouble{1.0, 0.0});
    }
  }
}

TEST_CASE("translation invariance of the angle-to-steering chain", "[scenario]") {
  Rng rng(17);
  for (int t = 0; t < 30; ++t) {
    std::array<double, 2> ap{rng.uniform(-50, 50), rng.uniform(-50, 50)};
    std::array<double, 2> agent{rng.uniform(-50, 50), rng.uniform(-50, 50)};
    if (ap == agent) continue;
    std::array<double, 2> shift{rng.uniform(-100, 100), rng.uniform(-100, 100)};
    std::array<double, 2> ap2{ap[0] + shift[0], ap[1] + shift[1]};
    std::array<double, 2> agent2{agent[0] + shift[0], agent[1] + shift[1]};
    auto a1 = steering_vector(angle_of(ap, agent), 6, 0.5);
    auto a2 = steering_vector(angle_of(ap2, agent2), 6, 0.5);
    for (int m = 0; m < 6; ++m) REQUIRE(std::abs(a1[m] - a2[m]) < 1e-9);
  }
}

TEST_CASE("generate_dataset split and determinism", "[scenario]") {
  SystemConfig cfg = desk_config();

  SECTION("full-scale split bookkeeping") {
    auto ds = generate_dataset(cfg, 20000, 0.97, 42);
    REQUIRE(ds.train_size() == 19400);
    REQUIRE(ds.validation_size() == 600);
  }

  SECTION("single scene, full train fraction") {
    auto ds = generate_dataset(cfg, 1, 1.0, 0);
    REQUIRE(ds.train_size() == 1);
    REQUIRE(ds.validation_size() == 0);
  }

  SECTION("same seed twice gives byte-identical serialization") {
    auto a = generate_dataset(cfg, 40, 0.9, 7);
    auto b = generate_dataset(cfg, 40, 0.9, 7);
    REQUIRE(to_json(a).dump() == to_json(b).dump());
  }

  SECTION("invalid arguments") {
    REQUIRE_THROWS_AS(generate_dataset(cfg, 0, 0.9, 1), config_error);
    REQUIRE_THROWS_AS(generate_dataset(cfg, 10, 0.0, 1), config_error);
    REQUIRE_THROWS_AS(generate_dataset(cfg, 10, 1.5, 1), config_error);
  }
}

TEST_CASE("dataset file round trip is lossless", "[scenario]") {
  SystemConfig cfg = desk_config();
  cfg.position_scheme = PositionScheme::kPos2;
  auto ds = generate_dataset(cfg, 25, 0.8, 99);
  auto dir = std::filesystem::temp_directory_path() / "cfisac_test_dataset";
  std::filesystem::create_directories(dir);
  auto path = (dir / "ds.json").string();
  save_dataset(ds, path);
  auto loaded = load_dataset(path);
  REQUIRE(loaded.size() == ds.size());
  REQUIRE(loaded.split == ds.split);
  REQUIRE(loaded.seed == ds.seed);
  REQUIRE(loaded.config == ds.config);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    REQUIRE(loaded.scenes[i].positions.ue_xy == ds.scenes[i].positions.ue_xy);
    REQUIRE(loaded.scenes[i].positions.target_xy == ds.scenes[i].positions.target_xy);
    for (int l = 0; l < cfg.num_aps; ++l)
      for (int n = 0; n < cfg.num_ues; ++n)
        for (int m = 0; m < cfg.antennas_per_ap; ++m)
          REQUIRE(loaded.scenes[i].comm[l](m, n) == ds.scenes[i].comm[l](m, n));
  }
  // Re-saving the loaded dataset reproduces the file byte for byte.
  auto path2 = (dir / "ds2.json").string();
  save_dataset(loaded, path2);
  REQUIRE(read_text_file(path) == read_text_file(path2));
}

TEST_CASE("parallel and serial generation agree", "[scenario]") {
  SystemConfig cfg = desk_config();
  ThreadGuard tg(4);
  auto par = generate_dataset(cfg, 64, 0.9, 1234);
  set_max_threads(1);
  auto ser = generate_dataset(cfg, 64, 0.9, 1234);
  REQUIRE(to_json(par).dump() == to_json(ser).dump());
}
