#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "qdcavity/hbt.hpp"
#include "qdcavity/instrument.hpp"
#include "qdcavity/params.hpp"
#include "qdcavity/specdiff.hpp"
#include "qdcavity/trajectories.hpp"

// Run configuration read from JSON. Sections mirror the parameter structs:
//   { "system": {...}, "instrument": {...}, "pulses": {...}, "telegraph": {...},
//     "trajectories": {...}, "correlation": {...}, "seed": 7, "output_dir": "out" }
// Every key is optional; unknown keys are rejected.

namespace qdc::config {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Coincidence settings for simulated correlation measurements.
struct CorrelationConfig {
  double bin_ns = 0.05;
  double window_ns = 100.0;
  hbt::Estimator estimator = hbt::Estimator::all_pairs;
  double cw_duration_ns = 1e6;  ///< simulated acquisition for CW trajectories
  /// Fraction of detected photons replaced by uncorrelated (Poissonian) light
  /// in pulsed runs; see recipes::admix_uncorrelated.
  double uncorrelated_fraction = 0.0;
  std::int64_t admixture_block_pulses = 100;
  double peak_half_window_ns = 0.0;  ///< 0: period / 4

  void validate() const;
};

struct RunConfig {
  SystemParams system;
  instrument::InstrumentConfig instrument;
  trajectories::PulseConfig pulses;
  specdiff::TelegraphConfig telegraph;
  trajectories::TrajectoryOptions trajectories;
  CorrelationConfig correlation;
  std::optional<std::uint64_t> seed;
  std::string output_dir = ".";

  /// Throws ConfigError if any section is invalid.
  void validate() const;
};

/// Throws ConfigError on unreadable files, malformed JSON, unknown keys or
/// wrongly typed values.
RunConfig load(const std::string& path);
RunConfig parse(const std::string& json_text);

/// Canonical JSON of every setting (sorted keys, fixed number format).
std::string canonical_json(const RunConfig& cfg);

/// 64-bit FNV-1a, as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& bytes);

/// Thread count from QDC_THREADS, or 1 if unset. Throws ConfigError if the
/// variable is not a positive integer.
int default_threads();

}  // namespace qdc::config
