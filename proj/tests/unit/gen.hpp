#pragma once

#include <cstdint>
#include <cmath>
#include <random>

// Seeded value generators for property tests.
struct Gen {
  explicit Gen(std::uint64_t seed) : eng(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng); }
  double log_uniform(double lo, double hi) {
    return std::exp(uniform(std::log(lo), std::log(hi)));
  }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng); }
  bool coin() { return integer(0, 1) == 1; }

  std::mt19937_64 eng;
};
