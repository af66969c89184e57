#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "qdcavity/histogram.hpp"
#include "qdcavity/rng.hpp"

// Coincidence analysis of photon time tags: beam-splitter routing, delay
// histograms, g2 normalization and pulsed peak areas. Times are in ns.

namespace qdc::hbt {

/// Each click goes to detector A or B with probability 1/2, decided by a
/// per-click counter draw so the split does not depend on processing order.
std::pair<std::vector<double>, std::vector<double>> split_beam(std::span<const double> times,
                                                               std::uint64_t seed);

enum class Estimator {
  all_pairs,   ///< every start/stop pair within the window
  start_stop,  ///< first stop after each start; tau < 0 by swapping the roles
};

struct HistogramOptions {
  double bin_ns = 0.25;
  double window_ns = 100.0;
  Estimator estimator = Estimator::all_pairs;
  /// Acquisition time used for rate normalization; 0 means the span of the
  /// union of both streams.
  double duration_ns = 0.0;
};

/// Delay tau = t_stop - t_start histogram on bins centred at k * bin_ns,
/// |k| <= ceil(window / bin). Both streams must be sorted.
Histogram start_stop_histogram(std::span<const double> starts, std::span<const double> stops,
                               const HistogramOptions& opt = {});

/// Histogram of the starts in [first, last) against all stops; merging the
/// shards of a partition of the starts reproduces the full histogram.
Histogram histogram_shard(std::span<const double> starts, std::span<const double> stops,
                          std::size_t first, std::size_t last, const HistogramOptions& opt = {});

/// Sums counts and starts; stops, duration and edges must agree.
Histogram merge_shards(const std::vector<Histogram>& shards);

enum class Normalization { cw, pulsed };

struct G2Trace {
  std::vector<double> tau_ns;
  std::vector<double> g2;
  std::vector<double> sigma;  ///< Poisson error of each bin after normalization
  double normalization = 0.0;
};

/// CW: counts / (n_starts * (n_stops / duration) * bin). Pulsed: counts divided
/// by the mean side-peak area (needs rep_period_ns). Throws std::domain_error
/// on a zero normalization.
G2Trace normalize_g2(const Histogram& h, Normalization mode, double rep_period_ns = 0.0,
                     double half_window_ns = 0.0);

struct PeakArea {
  int order = 0;  ///< peak at order * period
  double delay_ns = 0.0;
  double area = 0.0;
};

struct PeakAreaReport {
  double central_area = 0.0;
  double mean_side_area = 0.0;
  double ratio = 0.0;
  double ratio_stderr = 0.0;
  double half_window_ns = 0.0;
  std::vector<PeakArea> peaks;
};

/// Integrates counts of bins whose centre lies within +-half_window of each
/// multiple of the period fully inside the histogram; half_window <= 0 selects
/// period / 4. Requires >= 3 side peaks and non-overlapping windows.
PeakAreaReport pulsed_peak_areas(const Histogram& h, double rep_period_ns,
                                 double half_window_ns = 0.0);

/// Homogeneous Poisson arrival times on [t0, t0 + duration).
std::vector<double> poisson_times(double rate_per_ns, double duration_ns, CounterRng& rng,
                                  double t0 = 0.0);

}  // namespace qdc::hbt
