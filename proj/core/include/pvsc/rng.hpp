#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace pvsc {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Counter-based seed for (seed, index) pairs. Every path/repetition draws
// from its own stream, so results do not depend on thread scheduling.
inline std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t s = seed ^ (0xa24baed4963ee407ull * (index + 1));
  const std::uint64_t a = splitmix64(s);
  const std::uint64_t b = splitmix64(s);
  return a ^ (b << 1) ^ (b >> 63);
}

// Standard normal draws: Box-Muller on top of mt19937_64. The engine is fully
// specified by the standard, so streams are identical across platforms
// (std::normal_distribution is not).
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : engine_(seed) {}

  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  // Uniform in (0, 1]; never 0, so the log above is finite.
  double uniform01() {
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
  }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace pvsc
