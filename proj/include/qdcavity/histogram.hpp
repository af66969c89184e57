#pragma once

#include <cstdint>
#include <vector>

namespace qdc {

/// Event counts on strictly increasing bin edges (ns).
struct Histogram {
  std::vector<double> bin_edges_ns;
  std::vector<std::int64_t> counts;
  /// Totals used for normalization; zero when not applicable.
  std::int64_t n_starts = 0;
  std::int64_t n_stops = 0;
  double duration_ns = 0.0;

  std::size_t size() const { return counts.size(); }
  double center(std::size_t i) const { return 0.5 * (bin_edges_ns[i] + bin_edges_ns[i + 1]); }
  double width(std::size_t i) const { return bin_edges_ns[i + 1] - bin_edges_ns[i]; }
  std::int64_t total() const;

  /// Throws std::invalid_argument unless edges are strictly increasing, there is
  /// one more edge than bins, and all counts are non-negative.
  void validate() const;
};

/// Uniform edges lo, lo + w, ..., covering [lo, hi].
std::vector<double> uniform_edges(double lo, double hi, double width);

}  // namespace qdc
