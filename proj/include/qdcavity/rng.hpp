#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "qdcavity/units.hpp"

namespace qdc {

/// Counter-based generator: the n-th draw of stream (seed, stream) is a pure
/// function mix(key + n * golden), so independent streams can be created for
/// every trajectory or click without shared state. Distribution sampling is
/// implemented here, not through <random>, so sequences are identical across
/// standard libraries.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_(mix(seed ^ mix(stream + 0x632be59bd9b4e019ULL))) {}

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t bits_at(std::uint64_t counter) const {
    return mix(key_ + counter * 0x9e3779b97f4a7c15ULL);
  }
  /// Uniform in [0, 1).
  double uniform_at(std::uint64_t counter) const {
    return static_cast<double>(bits_at(counter) >> 11) * 0x1.0p-53;
  }

  std::uint64_t next_bits() { return bits_at(counter_++); }
  double uniform() { return uniform_at(counter_++); }
  /// Uniform in (0, 1].
  double uniform_pos() { return 1.0 - uniform(); }
  double exponential(double mean) { return -mean * std::log(uniform_pos()); }
  /// Standard normal by Box-Muller (one value per two draws).
  double normal() {
    const double r = std::sqrt(-2.0 * std::log(uniform_pos()));
    return r * std::cos(units::kTwoPi * uniform());
  }
  /// Poisson by sequential inversion; means above 30 are split into chunks.
  std::int64_t poisson(double mean) {
    if (!(mean >= 0.0) || !std::isfinite(mean)) throw std::invalid_argument("bad Poisson mean");
    std::int64_t k = 0;
    while (mean > 30.0) {
      k += poisson(30.0);
      mean -= 30.0;
    }
    double p = std::exp(-mean), cdf = p;
    const double u = uniform();
    std::int64_t n = 0;
    while (u >= cdf && n < 1000) {
      ++n;
      p *= mean / static_cast<double>(n);
      cdf += p;
    }
    return k + n;
  }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace qdc
