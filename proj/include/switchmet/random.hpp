#pragma once

// Deterministic random streams.
//
// Reproducibility contract: a run is fully determined by (master seed, mode,
// point index, trial index).  Each task derives its own 64-bit seed through
// the splitmix-style mix below and owns a private std::mt19937_64, so results
// do not depend on scheduling or thread count.  std::mt19937_64 output is
// specified bit-for-bit by the standard; the distribution transforms are
// implemented here (not via std::*_distribution, whose streams are
// implementation-defined) so identical seeds give identical bytes on any
// conforming platform.

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace switchmet {

// splitmix64 finalizer.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seed for one (stream, point, trial) task:
//   h = mix64(master); h = mix64(h ^ stream); h = mix64(h ^ point);
//   h = mix64(h ^ trial).
// `stream` separates experiment modes and sub-streams within a mode.
inline constexpr std::uint64_t derive_seed(std::uint64_t master,
                                           std::uint64_t stream,
                                           std::uint64_t point,
                                           std::uint64_t trial) {
  std::uint64_t h = mix64(master);
  h = mix64(h ^ stream);
  h = mix64(h ^ point);
  h = mix64(h ^ trial);
  return h;
}

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t raw() { return engine_(); }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform on [lo, hi).
  double uniform(double lo, double hi) {
    if (!(lo <= hi)) {
      throw std::domain_error("RandomStream::uniform: invalid range");
    }
    return lo + (hi - lo) * uniform();
  }

  // Uniform on [-half_width, half_width).
  double uniform_symmetric(double half_width) {
    return half_width * (2.0 * uniform() - 1.0);
  }

  bool bernoulli(double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::domain_error("RandomStream::bernoulli: p outside [0, 1]");
    }
    return uniform() < p;
  }

  // Standard normal via Box-Muller, two uniforms per call.  The sine branch
  // is discarded to keep the stream position a pure function of call count.
  double gaussian() {
    const double u1 = 1.0 - uniform();  // (0, 1]: keeps log finite
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi_ * u2);
  }

  double gaussian(double mean, double stddev) {
    if (!(stddev >= 0.0)) {
      throw std::domain_error("RandomStream::gaussian: negative stddev");
    }
    return mean + stddev * gaussian();
  }

 private:
  static constexpr double two_pi_ = 6.283185307179586476925286766559;
  std::mt19937_64 engine_;
};

}  // namespace switchmet
