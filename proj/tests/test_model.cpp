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

#include "cfisac/loss.hpp"
#include "cfisac/model.hpp"
#include "oracles.hpp"

using namespace cfisac;
using Catch::Approx;

namespace {

SystemConfig toy_system() {
  SystemConfig c;
  c.num_aps = 2;
  c.antennas_per_ap = 4;
  c.num_ues = 2;
  c.ap_positions = {{25.0, 0.0}, {75.0, 0.0}};
  return c;
}

ArchitectureSpec toy_cnn1d() {
  ArchitectureSpec s;
  s.kind = ArchKind::kCnn1d;
  s.conv_channels = {2, 3};
  s.conv_kernels = {5, 5};
  s.fc_widths = {16};
  return s;
}

ArchitectureSpec toy_cae() {
  ArchitectureSpec s;
  s.kind = ArchKind::kCae;
  s.encoder = {{8, 2, 2, 0, 0}, {12, 2, 2, 0, 0}};
  s.decoder = {{8, 2, 2, 0, 0}, {12, 2, 2, 0, 0}};
  s.skips = {{1, 2}};
  return s;
}

ArchitectureSpec toy_unet() { return ArchitectureSpec::unet_small(3, 5); }

ChannelScene toy_scene_example() {
  // M = 2, N = 1, h = [1, j], a = [1, -1].
  ChannelScene s;
  CMatrix h(2, 1);
  h(0, 0) = {1.0, 0.0};
  h(1, 0) = {0.0, 1.0};
  s.comm.push_back(h);
  s.steering.push_back({cdouble{1.0, 0.0}, cdouble{-1.0, 0.0}});
  s.angles.push_back(0.0);
  return s;
}

std::vector<ChannelScene> random_scenes(const SystemConfig& cfg, int count, std::uint64_t seed) {
  std::vector<ChannelScene> out;
  for (int i = 0; i < count; ++i) {
    Rng rng(derive_seed(seed, i));
    out.push_back(build_channels(sample_positions(cfg, rng), cfg));
  }
  return out;
}

// Composite objective used by the gradient checks: train-mode forward of
// every AP net, power normalization, per-scene metric, batch mean,
// negated. Mirrors one training step without the optimizer.
double composite_loss(DistributedModel& model, const std::vector<const ChannelScene*>& scenes,
                      bool sensing_objective) {
  const SystemConfig& sys = model.system;
  int bsz = static_cast<int>(scenes.size());
  int m = sys.antennas_per_ap, beams = sys.beams_per_ap();
  std::vector<Tensor> raw(model.num_aps());
  for (int l = 0; l < model.num_aps(); ++l)
    raw[l] = model.nets[l]->forward(build_input_batch(model.spec.kind, scenes, l), true);
  double sum = 0.0;
  for (int b = 0; b < bsz; ++b) {
    BeamformerSet w;
    for (int l = 0; l < model.num_aps(); ++l)
      w.per_ap.push_back(
          normalize_output(raw[l], b, m, beams, model.spec.kind, sys.power_budget));
    sum += sensing_objective ? ssnr(*scenes[b], w, sys.sensing_gain_var, sys.ap_noise_var)
                             : min_sinr(*scenes[b], w, sys.ue_noise_var);
  }
  return -sum / bsz;
}

// Reverse-mode gradients of the same objective, accumulated into the
// nets' parameter grads.
void composite_backward(DistributedModel& model, const std::vector<const ChannelScene*>& scenes,
                        bool sensing_objective) {
  const SystemConfig& sys = model.system;
  int bsz = static_cast<int>(scenes.size());
  int m = sys.antennas_per_ap, beams = sys.beams_per_ap();
  std::vector<Tensor> raw(model.num_aps());
  for (int l = 0; l < model.num_aps(); ++l) {
    model.nets[l]->zero_grad();
    raw[l] = model.nets[l]->forward(build_input_batch(model.spec.kind, scenes, l), true);
  }
  std::vector<Tensor> raw_grad(model.num_aps());
  for (int l = 0; l < model.num_aps(); ++l) raw_grad[l] = Tensor(raw[l].shape());
  double scale = -1.0 / bsz;
  for (int b = 0; b < bsz; ++b) {
    std::vector<NormalizeCache> caches(model.num_aps());
    BeamformerSet w;
    for (int l = 0; l < model.num_aps(); ++l)
      w.per_ap.push_back(normalize_output(raw[l], b, m, beams, model.spec.kind, sys.power_budget,
                                          &caches[l]));
    std::vector<CMatrix> gw(model.num_aps(), CMatrix(m, beams));
    if (sensing_objective)
      add_ssnr_grad(*scenes[b], w, sys.sensing_gain_var, sys.ap_noise_var, scale, gw);
    else
      add_min_sinr_grad(*scenes[b], w, sys.ue_noise_var, scale, gw);
    for (int l = 0; l < model.num_aps(); ++l)
      normalize_backward(gw[l], caches[l], b, model.spec.kind, raw_grad[l]);
  }
  for (int l = 0; l < model.num_aps(); ++l) model.nets[l]->backward(raw_grad[l]);
}

// Full finite-difference sweep over every parameter of every AP net.
void check_composite_gradients(const ArchitectureSpec& spec, bool sensing_objective,
                               double rel_tol, double& max_rel_err) {
  SystemConfig sys = toy_system();
  DistributedModel model = init_model(spec, sys, 77);
  auto scenes = random_scenes(sys, 3, 500);
  std::vector<const ChannelScene*> ptrs;
  for (auto& s : scenes) ptrs.push_back(&s);

  // Stay away from min-SINR ties: the chosen seeds keep the per-user
  // values well separated at the batch statistics actually used.
  {
    std::vector<Tensor> raw(model.num_aps());
    for (int l = 0; l < model.num_aps(); ++l)
      raw[l] = model.nets[l]->forward(build_input_batch(spec.kind, ptrs, l), true);
    for (int b = 0; b < static_cast<int>(ptrs.size()); ++b) {
      BeamformerSet w;
      for (int l = 0; l < model.num_aps(); ++l)
        w.per_ap.push_back(normalize_output(raw[l], b, sys.antennas_per_ap, sys.beams_per_ap(),
                                            spec.kind, sys.power_budget));
      double s0 = sinr_user(*ptrs[b], w, 0, sys.ue_noise_var);
      double s1 = sinr_user(*ptrs[b], w, 1, sys.ue_noise_var);
      REQUIRE(std::abs(s0 - s1) > 1e-3);
    }
  }

  composite_backward(model, ptrs, sensing_objective);
  std::vector<std::vector<Tensor>> saved_grads(model.num_aps());
  for (int l = 0; l < model.num_aps(); ++l)
    for (auto& p : model.nets[l]->params()) saved_grads[l].push_back(*p.grad);

  auto f = [&] { return composite_loss(model, ptrs, sensing_objective); };
  double step = 1e-4;
  max_rel_err = 0.0;
  for (int l = 0; l < model.num_aps(); ++l) {
    auto params = model.nets[l]->params();
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
      Tensor& val = *params[pi].value;
      const Tensor& grad = saved_grads[l][pi];
      for (std::size_t k = 0; k < val.size(); ++k) {
        double numeric = oracle::central_diff(f, val[k], step);
        double analytic = grad[k];
        REQUIRE(oracle::grad_close(analytic, numeric, rel_tol));
        double diff = std::abs(analytic - numeric);
        double den = std::max({std::abs(analytic), std::abs(numeric), 1e-12});
        if (diff > 1e-8) max_rel_err = std::max(max_rel_err, diff / den);
      }
    }
  }
}

}  // namespace

TEST_CASE("build_input_1d toy example and sizes", "[model]") {
  ChannelScene s = toy_scene_example();
  auto v = build_input_1d(s, 0);
  std::vector<double> expected{1, 0, 1, -1, 0, 1, 0, 0};
  REQUIRE(v.size() == expected.size());
  for (std::size_t i = 0; i < v.size(); ++i) REQUIRE(v[i] == Approx(expected[i]).margin(1e-15));

  SECTION("real scene zeroes the imaginary half") {
    ChannelScene r = s;
    r.comm[0](1, 0) = {0.5, 0.0};
    auto u = build_input_1d(r, 0);
    for (std::size_t i = u.size() / 2; i < u.size(); ++i) REQUIRE(u[i] == 0.0);
  }

  SECTION("default config input length is 192") {
    SystemConfig cfg;
    Rng rng(1);
    auto scene = build_channels(sample_positions(cfg, rng), cfg);
    REQUIRE(build_input_1d(scene, 0).size() == 192u);
  }
}

TEST_CASE("build_input_2d toy example and layout", "[model]") {
  ChannelScene s = toy_scene_example();
  Tensor t = build_input_2d(s, 0);
  REQUIRE(t.shape() == std::vector<int>{1, 2, 2, 2});
  // Real plane rows: [[1, 1], [0, -1]]; imaginary: [[0, 0], [1, 0]].
  REQUIRE(t.at(0, 0, 0, 0) == 1.0);
  REQUIRE(t.at(0, 0, 0, 1) == 1.0);
  REQUIRE(t.at(0, 0, 1, 0) == 0.0);
  REQUIRE(t.at(0, 0, 1, 1) == -1.0);
  REQUIRE(t.at(0, 1, 0, 0) == 0.0);
  REQUIRE(t.at(0, 1, 0, 1) == 0.0);
  REQUIRE(t.at(0, 1, 1, 0) == 1.0);
  REQUIRE(t.at(0, 1, 1, 1) == 0.0);

  SECTION("default config shape is 2 x 16 x 6") {
    SystemConfig cfg;
    Rng rng(2);
    auto scene = build_channels(sample_positions(cfg, rng), cfg);
    Tensor u = build_input_2d(scene, 1);
    REQUIRE(u.shape() == std::vector<int>{1, 2, 16, 6});
  }

  SECTION("1d and 2d builders carry the same data") {
    SystemConfig cfg = toy_system();
    Rng rng(3);
    auto scene = build_channels(sample_positions(cfg, rng), cfg);
    auto v = build_input_1d(scene, 0);
    Tensor u = build_input_2d(scene, 0);
    int m = cfg.antennas_per_ap, a = cfg.beams_per_ap();
    for (int q = 0; q < a; ++q)
      for (int i = 0; i < m; ++i) {
        REQUIRE(v[q * m + i] == u.at(0, 0, i, q));
        REQUIRE(v[m * a + q * m + i] == u.at(0, 1, i, q));
      }
  }
}

TEST_CASE("init_model determinism and dimensioning", "[model]") {
  SystemConfig sys = toy_system();

  SECTION("same seed reproduces every parameter") {
    auto a = init_model(toy_unet(), sys, 9);
    auto b = init_model(toy_unet(), sys, 9);
    auto sa = a.snapshot(), sb = b.snapshot();
    REQUIRE(sa == sb);
  }

  SECTION("per-AP parameter sets are disjoint draws") {
    auto m = init_model(toy_unet(), sys, 9);
    auto s = m.snapshot();
    REQUIRE(s.size() == 2);
    REQUIRE(s[0] != s[1]);
  }

  SECTION("full-size cnn1d emits 192 values at the default system") {
    SystemConfig full;
    auto m = init_model(ArchitectureSpec::cnn1d(), full, 1);
    Rng rng(4);
    auto scene = build_channels(sample_positions(full, rng), full);
    std::vector<const ChannelScene*> one{&scene};
    Tensor out = m.nets[0]->forward(build_input_batch(ArchKind::kCnn1d, one, 0), false);
    REQUIRE(out.shape() == std::vector<int>{1, 192});
  }

  SECTION("full-size cae and unet restore the 16 x 6 map") {
    SystemConfig full;
    for (auto spec : {ArchitectureSpec::cae(), ArchitectureSpec::unet()}) {
      auto m = init_model(spec, full, 2);
      Rng rng(5);
      auto scene = build_channels(sample_positions(full, rng), full);
      std::vector<const ChannelScene*> one{&scene};
      Tensor out = m.nets[0]->forward(build_input_batch(spec.kind, one, 0), false);
      REQUIRE(out.shape() == std::vector<int>{1, 2, 16, 6});
    }
  }

  SECTION("incompatible spec is rejected") {
    // The full-size CAE filters cannot run on a 4 x 3 map.
    REQUIRE_THROWS_AS(init_model(ArchitectureSpec::cae(), sys, 1), config_error);
  }
}

TEST_CASE("forward basics", "[model]") {
  SystemConfig sys = toy_system();
  auto scenes = random_scenes(sys, 4, 42);
  std::vector<const ChannelScene*> ptrs;
  for (auto& s : scenes) ptrs.push_back(&s);

  SECTION("zeroed head weights produce zero output") {
    auto model = init_model(toy_cnn1d(), sys, 11);
    auto* net = dynamic_cast<Cnn1dNet*>(model.nets[0].get());
    REQUIRE(net != nullptr);
    net->head().weight().set_zero();
    net->head().bias().set_zero();
    Tensor out = net->forward(build_input_batch(ArchKind::kCnn1d, ptrs, 0), false);
    for (std::size_t i = 0; i < out.size(); ++i) REQUIRE(out[i] == 0.0);
  }

  SECTION("identical batch rows give identical outputs") {
    auto model = init_model(toy_unet(), sys, 12);
    std::vector<const ChannelScene*> same{ptrs[0], ptrs[0], ptrs[0]};
    Tensor out = model.nets[0]->forward(build_input_batch(ArchKind::kUnet, same, 0), true);
    std::size_t stride = out.size() / 3;
    for (std::size_t i = 0; i < stride; ++i) {
      REQUIRE(out[i] == out[stride + i]);
      REQUIRE(out[i] == out[2 * stride + i]);
    }
  }

  SECTION("repeated eval forwards are deterministic") {
    auto model = init_model(toy_cae(), sys, 13);
    Tensor in = build_input_batch(ArchKind::kCae, ptrs, 1);
    Tensor a = model.nets[1]->forward(in, false);
    Tensor b = model.nets[1]->forward(in, false);
    for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(a[i] == b[i]);
  }

  SECTION("inference at AP l ignores other APs' CSI") {
    auto model = init_model(toy_unet(), sys, 14);
    ChannelScene scene = scenes[0];
    std::vector<const ChannelScene*> one{&scene};
    Tensor before = model.nets[0]->forward(build_input_batch(ArchKind::kUnet, one, 0), false);
    // Wreck AP 1's CSI; AP 0's view is untouched.
    for (int i = 0; i < sys.antennas_per_ap; ++i) {
      scene.steering[1][i] = {5.0, -3.0};
      for (int n = 0; n < sys.num_ues; ++n) scene.comm[1](i, n) = {9.0, 9.0};
    }
    Tensor after = model.nets[0]->forward(build_input_batch(ArchKind::kUnet, one, 0), false);
    for (std::size_t i = 0; i < before.size(); ++i) REQUIRE(before[i] == after[i]);
  }
}

TEST_CASE("normalize_output power handling", "[model]") {
  SECTION("stacked norm 2 at unit budget gives norm 1") {
    std::vector<double> raw(12, 0.0);
    raw[0] = 2.0;  // ||u|| = 2
    CMatrix w = normalize_output(raw, 2, 3, 1.0);
    REQUIRE(std::sqrt(w.squared_frobenius()) == Approx(1.0).margin(1e-9));
  }

  SECTION("unit raw at budget 4 doubles") {
    std::vector<double> raw(12, 0.0);
    raw[3] = 1.0;
    CMatrix w = normalize_output(raw, 2, 3, 4.0);
    REQUIRE(std::abs(w(1, 1)) == Approx(2.0).margin(1e-9));
  }

  SECTION("random raw hits the budget to 1e-9") {
    Rng rng(7);
    for (int t = 0; t < 100; ++t) {
      std::vector<double> raw(24);
      for (auto& v : raw) v = rng.normal();
      CMatrix w = normalize_output(raw, 3, 4, 1.0);
      REQUIRE(std::abs(w.squared_frobenius() - 1.0) < 1e-9);
    }
  }

  SECTION("projective invariance under positive scaling") {
    Rng rng(8);
    std::vector<double> raw(24);
    for (auto& v : raw) v = rng.normal();
    std::vector<double> scaled = raw;
    for (auto& v : scaled) v *= 4.0;  // exact in binary
    CMatrix a = normalize_output(raw, 3, 4, 2.0);
    CMatrix b = normalize_output(scaled, 3, 4, 2.0);
    for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(std::abs(a.data()[i] - b.data()[i]) < 1e-12);
  }

  SECTION("agent-major layout mapping") {
    std::vector<double> raw(12, 0.0);
    raw[2 * 2 + 1] = 3.0;  // real part of beam q=2, antenna m=1
    CMatrix w = normalize_output(raw, 2, 3, 9.0);
    REQUIRE(w(1, 2).real() == Approx(3.0).margin(1e-9));
    REQUIRE(w(0, 0) == cdouble{0.0, 0.0});
  }
}

TEST_CASE("layer gradients in isolation match finite differences", "[model][grad]") {
  Rng rng(21);
  double step = 1e-5;

  auto weighted_sum = [&](const Tensor& y, const std::vector<double>& c) {
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += c[i] * y[i];
    return s;
  };

  SECTION("dense layer") {
    Dense d("d", 7, 5);
    d.init(rng, 0.01);
    Tensor x({3, 7});
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.normal();
    std::vector<double> c(15);
    for (auto& v : c) v = rng.normal();
    Tensor y = d.forward(x);
    Tensor gy(y.shape());
    for (std::size_t i = 0; i < gy.size(); ++i) gy[i] = c[i];
    Tensor gx = d.backward(gy);
    auto params = d.params();
    auto f = [&] { return weighted_sum(d.forward(x), c); };
    for (auto& p : params)
      for (std::size_t k = 0; k < p.value->size(); ++k)
        REQUIRE(oracle::grad_close((*p.grad)[k],
                                   oracle::central_diff(f, (*p.value)[k], step), 1e-4));
    for (std::size_t k = 0; k < x.size(); ++k)
      REQUIRE(oracle::grad_close(gx[k], oracle::central_diff(f, x[k], step), 1e-4));
  }

  SECTION("conv2d with padding") {
    Conv2d conv("c", 2, 3, 3, 2, 1, 1);
    conv.init(rng, 0.01);
    Tensor x({2, 2, 4, 3});
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.normal();
    Tensor y = conv.forward(x);
    std::vector<double> c(y.size());
    for (auto& v : c) v = rng.normal();
    Tensor gy(y.shape());
    for (std::size_t i = 0; i < gy.size(); ++i) gy[i] = c[i];
    Tensor gx = conv.backward(gy);
    auto f = [&] { return weighted_sum(conv.forward(x), c); };
    for (auto& p : conv.params())
      for (std::size_t k = 0; k < p.value->size(); ++k)
        REQUIRE(oracle::grad_close((*p.grad)[k],
                                   oracle::central_diff(f, (*p.value)[k], step), 1e-4));
    for (std::size_t k = 0; k < x.size(); ++k)
      REQUIRE(oracle::grad_close(gx[k], oracle::central_diff(f, x[k], step), 1e-4));
  }

  SECTION("transposed conv") {
    ConvTranspose2d tc("t", 3, 2, 2, 2, 0, 0);
    tc.init(rng, 0.01);
    Tensor x({2, 3, 2, 2});
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.normal();
    Tensor y = tc.forward(x);
    REQUIRE(y.shape() == std::vector<int>{2, 2, 3, 3});
    std::vector<double> c(y.size());
    for (auto& v : c) v = rng.normal();
    Tensor gy(y.shape());
    for (std::size_t i = 0; i < gy.size(); ++i) gy[i] = c[i];
    Tensor gx = tc.backward(gy);
    auto f = [&] { return weighted_sum(tc.forward(x), c); };
    for (auto& p : tc.params())
      for (std::size_t k = 0; k < p.value->size(); ++k)
        REQUIRE(oracle::grad_close((*p.grad)[k],
                                   oracle::central_diff(f, (*p.value)[k], step), 1e-4));
    for (std::size_t k = 0; k < x.size(); ++k)
      REQUIRE(oracle::grad_close(gx[k], oracle::central_diff(f, x[k], step), 1e-4));
  }

  SECTION("batch norm, training mode") {
    BatchNorm2d bn("b", 3);
    Tensor x({4, 3, 2, 2});
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.normal() * 1.5 + 0.3;
    Tensor y = bn.forward(x, true);
    std::vector<double> c(y.size());
    for (auto& v : c) v = rng.normal();
    Tensor gy(y.shape());
    for (std::size_t i = 0; i < gy.size(); ++i) gy[i] = c[i];
    Tensor gx = bn.backward(gy);
    // Running stats drift on every forward but do not enter the
    // train-mode output.
    auto f = [&] { return weighted_sum(bn.forward(x, true), c); };
    auto params = bn.params();
    for (auto& p : params)
      for (std::size_t k = 0; k < p.value->size(); ++k)
        REQUIRE(oracle::grad_close((*p.grad)[k],
                                   oracle::central_diff(f, (*p.value)[k], step), 1e-4));
    for (std::size_t k = 0; k < x.size(); ++k)
      REQUIRE(oracle::grad_close(gx[k], oracle::central_diff(f, x[k], step), 1e-4));
  }

  SECTION("leaky rectifier away from the kink") {
    LeakyRelu act(0.01);
    Tensor x({2, 6});
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = rng.normal();
      if (std::abs(x[i]) < 0.05) x[i] = 0.1;  // keep clear of zero
    }
    std::vector<double> c(x.size());
    for (auto& v : c) v = rng.normal();
    Tensor y = act.forward(x);
    Tensor gy(y.shape());
    for (std::size_t i = 0; i < gy.size(); ++i) gy[i] = c[i];
    Tensor gx = act.backward(gy);
    auto f = [&] { return weighted_sum(act.forward(x), c); };
    for (std::size_t k = 0; k < x.size(); ++k)
      REQUIRE(oracle::grad_close(gx[k], oracle::central_diff(f, x[k], step), 1e-4));
  }
}

TEST_CASE("composite objective gradients match finite differences", "[model][grad]") {
  double max_err = 0.0;
  SECTION("cnn1d, sensing objective") {
    check_composite_gradients(toy_cnn1d(), true, 1e-3, max_err);
  }
  SECTION("cnn1d, communication objective") {
    check_composite_gradients(toy_cnn1d(), false, 1e-3, max_err);
  }
  SECTION("cae, sensing objective") { check_composite_gradients(toy_cae(), true, 1e-3, max_err); }
  SECTION("cae, communication objective") {
    check_composite_gradients(toy_cae(), false, 1e-3, max_err);
  }
  SECTION("unet, sensing objective") {
    check_composite_gradients(toy_unet(), true, 1e-3, max_err);
  }
  SECTION("unet, communication objective") {
    check_composite_gradients(toy_unet(), false, 1e-3, max_err);
  }
}

TEST_CASE("normalize backward agrees with finite differences", "[model][grad]") {
  Rng rng(33);
  int m = 3, beams = 3;
  Tensor raw({2, 2, m, beams});
  for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = rng.normal();

  // Scalar probe: weighted real/imaginary sum of the normalized beams.
  CMatrix cw(m, beams);
  for (int q = 0; q < beams; ++q)
    for (int i = 0; i < m; ++i) cw(i, q) = rng.cnormal(1.0);
  auto probe = [&](int item) {
    CMatrix w = normalize_output(raw, item, m, beams, ArchKind::kUnet, 2.0);
    double s = 0.0;
    for (int q = 0; q < beams; ++q)
      for (int i = 0; i < m; ++i)
        s += cw(i, q).real() * w(i, q).real() + cw(i, q).imag() * w(i, q).imag();
    return s;
  };

  for (int item = 0; item < 2; ++item) {
    NormalizeCache cache;
    normalize_output(raw, item, m, beams, ArchKind::kUnet, 2.0, &cache);
    Tensor raw_grad(raw.shape());
    normalize_backward(cw, cache, item, ArchKind::kUnet, raw_grad);
    auto f = [&] { return probe(item); };
    for (std::size_t k = 0; k < raw.size(); ++k) {
      double numeric = oracle::central_diff(f, raw[k], 1e-6);
      REQUIRE(oracle::grad_close(raw_grad[k], numeric, 1e-5));
    }
  }
}
