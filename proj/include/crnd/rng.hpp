#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace crnd {

/// Name recorded in reports so runs can be reproduced by other implementations.
inline constexpr std::string_view kRngAlgorithm =
    "mt19937_64; seeds derived by splitmix64(master ^ splitmix64(index)); "
    "uniform = (u64 >> 11) * 2^-53; normal = Box-Muller (cos branch)";

std::uint64_t splitmix64(std::uint64_t x);

/// Seed for stream `index` under master seed `master`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Deterministic generator. All draws are defined bit-exactly from the
/// underlying mt19937_64 output, independent of standard-library
/// distribution implementations.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  bool bernoulli(double p) { return uniform() < p; }
  std::uint8_t bit() { return static_cast<std::uint8_t>(engine_() >> 63); }
  double normal();

private:
  std::mt19937_64 engine_;
};

}  // namespace crnd
