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

#include <charconv>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace cfisac {

inline constexpr const char* kVersion = "0.1.0";

using cdouble = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

// Error taxonomy. The CLI maps these onto process exit codes:
// usage -> 2, config/data mismatch/io -> 3, numeric -> 4.
struct usage_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct geometry_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct shape_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// splitmix64 step; used to derive independent stream seeds from a base
// seed and an index so that parallel and serial generation agree.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return splitmix64(splitmix64(base) ^ splitmix64(index + 0x51ed2701a2b3c4d5ULL));
}

// Deterministic RNG. xoshiro-free: plain splitmix64 stream, which is
// plenty for sampling geometry, weights and Monte-Carlo draws, and keeps
// every draw bit-reproducible across platforms (no reliance on the
// implementation-defined std::*_distribution).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(splitmix64(seed ^ 0x6a09e667f3bcc909ULL)) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; the spare value is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    // Avoid log(0).
    while (u1 <= 0.0) u1 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * kPi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  // Circularly-symmetric complex Gaussian CN(0, var).
  cdouble cnormal(double var) {
    double s = std::sqrt(var * 0.5);
    double re = normal();
    double im = normal();
    return {s * re, s * im};
  }

  // Unit-modulus symbol with uniform phase.
  cdouble unit_symbol() {
    double a = 2.0 * kPi * uniform();
    return {std::cos(a), std::sin(a)};
  }

  std::uint64_t uniform_index(std::uint64_t n) { return next_u64() % n; }

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Shortest round-trip decimal representation; used everywhere numbers are
// written to CSV/JSON-adjacent text so outputs are byte-reproducible.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double db10(double linear) { return 10.0 * std::log10(linear); }

}  // namespace cfisac
