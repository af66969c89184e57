#include "qdcavity/hbt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qdc::hbt {

std::pair<std::vector<double>, std::vector<double>> split_beam(std::span<const double> times,
                                                               std::uint64_t seed) {
  const CounterRng rng(seed, 0x5b1173a4ULL);
  std::pair<std::vector<double>, std::vector<double>> out;
  for (std::size_t i = 0; i < times.size(); ++i) {
    (rng.uniform_at(i) < 0.5 ? out.first : out.second).push_back(times[i]);
  }
  return out;
}

namespace {

void require_sorted(std::span<const double> t, const char* what) {
  if (!std::is_sorted(t.begin(), t.end())) {
    throw std::invalid_argument(std::string(what) + " stream must be time-sorted");
  }
}

Histogram empty_histogram(const HistogramOptions& opt) {
  if (!(opt.bin_ns > 0.0) || !(opt.window_ns > 0.0)) {
    throw std::invalid_argument("bin width and window must be positive");
  }
  const auto k = static_cast<std::int64_t>(std::ceil(opt.window_ns / opt.bin_ns - 1e-9));
  Histogram h;
  for (std::int64_t i = -k; i <= k + 1; ++i) h.bin_edges_ns.push_back((static_cast<double>(i) - 0.5) * opt.bin_ns);
  h.counts.assign(h.bin_edges_ns.size() - 1, 0);
  return h;
}

void add(Histogram& h, double tau, double bin, std::int64_t k) {
  const auto i = static_cast<std::int64_t>(std::floor(tau / bin + 0.5)) + k;
  if (i >= 0 && i < static_cast<std::int64_t>(h.counts.size())) ++h.counts[static_cast<std::size_t>(i)];
}

}  // namespace

Histogram histogram_shard(std::span<const double> starts, std::span<const double> stops,
                          std::size_t first, std::size_t last, const HistogramOptions& opt) {
  if (starts.empty() || stops.empty()) throw std::invalid_argument("empty click stream");
  require_sorted(starts, "start");
  require_sorted(stops, "stop");
  if (first > last || last > starts.size()) throw std::invalid_argument("bad shard range");
  Histogram h = empty_histogram(opt);
  const double bin = opt.bin_ns;
  const auto k = static_cast<std::int64_t>(h.counts.size() / 2);
  const double reach = (static_cast<double>(k) + 0.5) * bin;

  if (opt.estimator == Estimator::all_pairs) {
    auto lo = std::lower_bound(stops.begin(), stops.end(), starts[first < starts.size() ? first : 0] - reach);
    for (std::size_t i = first; i < last; ++i) {
      const double s = starts[i];
      while (lo != stops.end() && *lo < s - reach) ++lo;
      for (auto it = lo; it != stops.end() && *it < s + reach; ++it) add(h, *it - s, bin, k);
    }
  } else {
    // tau >= 0: first stop at or after each start.
    for (std::size_t i = first; i < last; ++i) {
      const double s = starts[i];
      auto it = std::lower_bound(stops.begin(), stops.end(), s);
      if (it != stops.end() && *it - s < reach) add(h, *it - s, bin, k);
    }
    // tau < 0: each stop restarts the timer and the next start (strictly later)
    // ends it. A stop belongs to this shard when that start does.
    for (std::size_t j = 0; j < stops.size(); ++j) {
      const double t = stops[j];
      auto it = std::upper_bound(starts.begin(), starts.end(), t);
      if (it == starts.end()) continue;
      const auto idx = static_cast<std::size_t>(it - starts.begin());
      if (idx < first || idx >= last) continue;
      if (*it - t < reach) add(h, t - *it, bin, k);
    }
  }
  h.n_starts = static_cast<std::int64_t>(last - first);
  h.n_stops = static_cast<std::int64_t>(stops.size());
  h.duration_ns = opt.duration_ns > 0.0
                      ? opt.duration_ns
                      : std::max(starts.back(), stops.back()) - std::min(starts.front(), stops.front());
  if (!(h.duration_ns > 0.0)) throw std::invalid_argument("streams span zero time");
  return h;
}

Histogram start_stop_histogram(std::span<const double> starts, std::span<const double> stops,
                               const HistogramOptions& opt) {
  return histogram_shard(starts, stops, 0, starts.size(), opt);
}

Histogram merge_shards(const std::vector<Histogram>& shards) {
  if (shards.empty()) throw std::invalid_argument("nothing to merge");
  Histogram out = shards.front();
  for (std::size_t s = 1; s < shards.size(); ++s) {
    const auto& h = shards[s];
    if (h.bin_edges_ns != out.bin_edges_ns || h.n_stops != out.n_stops ||
        h.duration_ns != out.duration_ns) {
      throw std::invalid_argument("shards differ in binning, stop stream or duration");
    }
    for (std::size_t i = 0; i < out.counts.size(); ++i) out.counts[i] += h.counts[i];
    out.n_starts += h.n_starts;
  }
  return out;
}

PeakAreaReport pulsed_peak_areas(const Histogram& h, double period, double half_window) {
  h.validate();
  if (!(period > 0.0)) throw std::invalid_argument("repetition period must be positive");
  if (half_window <= 0.0) half_window = 0.25 * period;
  if (2.0 * half_window > period) throw std::invalid_argument("peak windows overlap");
  const double lo = h.bin_edges_ns.front(), hi = h.bin_edges_ns.back();
  const auto k_min = static_cast<int>(std::ceil((lo + half_window) / period - 1e-9));
  const auto k_max = static_cast<int>(std::floor((hi - half_window) / period + 1e-9));
  PeakAreaReport r;
  r.half_window_ns = half_window;
  for (int k = k_min; k <= k_max; ++k) {
    const double c = k * period;
    PeakArea pk{k, c, 0.0};
    for (std::size_t i = 0; i < h.size(); ++i) {
      const double x = h.center(i);
      if (x >= c - half_window && x < c + half_window) pk.area += static_cast<double>(h.counts[i]);
    }
    r.peaks.push_back(pk);
  }
  int n_side = 0;
  bool has_central = false;
  double side = 0.0;
  for (const auto& pk : r.peaks) {
    if (pk.order == 0) {
      r.central_area = pk.area;
      has_central = true;
    } else {
      side += pk.area;
      ++n_side;
    }
  }
  if (!has_central || n_side < 3) {
    throw std::invalid_argument("need the central peak and at least 3 side peaks in the window");
  }
  r.mean_side_area = side / n_side;
  if (!(r.mean_side_area > 0.0)) throw std::domain_error("side peaks are empty");
  r.ratio = r.central_area / r.mean_side_area;
  // Poisson errors on the central area and on the side-peak sum.
  r.ratio_stderr = r.ratio * std::sqrt((r.central_area > 0.0 ? 1.0 / r.central_area : 0.0) + 1.0 / side);
  if (r.central_area == 0.0) r.ratio_stderr = 1.0 / r.mean_side_area;
  return r;
}

G2Trace normalize_g2(const Histogram& h, Normalization mode, double period, double half_window) {
  h.validate();
  G2Trace out;
  if (mode == Normalization::cw) {
    if (h.n_starts <= 0 || h.n_stops <= 0 || !(h.duration_ns > 0.0)) {
      throw std::domain_error("histogram carries no start/stop totals for normalization");
    }
    out.normalization = static_cast<double>(h.n_starts) * static_cast<double>(h.n_stops) / h.duration_ns;
  } else {
    out.normalization = pulsed_peak_areas(h, period, half_window).mean_side_area;
  }
  if (!(out.normalization > 0.0)) throw std::domain_error("zero g2 normalization");
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double norm = mode == Normalization::cw ? out.normalization * h.width(i) : out.normalization;
    const double c = static_cast<double>(h.counts[i]);
    out.tau_ns.push_back(h.center(i));
    out.g2.push_back(c / norm);
    out.sigma.push_back(std::sqrt(std::max(c, 1.0)) / norm);
  }
  return out;
}

std::vector<double> poisson_times(double rate, double duration, CounterRng& rng, double t0) {
  if (!(rate >= 0.0) || !(duration >= 0.0)) throw std::invalid_argument("bad Poisson stream");
  std::vector<double> t;
  if (rate == 0.0) return t;
  double x = t0 + rng.exponential(1.0 / rate);
  while (x < t0 + duration) {
    t.push_back(x);
    x += rng.exponential(1.0 / rate);
  }
  return t;
}

}  // namespace qdc::hbt
