#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "gen.hpp"
#include "qdcavity/hbt.hpp"
#include "qdcavity/histogram.hpp"

using namespace qdc;
using namespace qdc::hbt;

namespace {

std::vector<double> sorted_uniform(Gen& g, int n, double span) {
  std::vector<double> v(n);
  for (auto& x : v) x = g.uniform(0, span);
  std::sort(v.begin(), v.end());
  return v;
}

// Direct pair count for bins centred at k * bin.
std::vector<std::int64_t> brute_all_pairs(const std::vector<double>& a, const std::vector<double>& b,
                                          const Histogram& h) {
  std::vector<std::int64_t> c(h.size(), 0);
  for (double s : a) {
    for (double t : b) {
      const double tau = t - s;
      for (std::size_t i = 0; i < h.size(); ++i) {
        if (tau >= h.bin_edges_ns[i] && tau < h.bin_edges_ns[i + 1]) ++c[i];
      }
    }
  }
  return c;
}

}  // namespace

TEST_CASE("uniform edges and histogram validation") {
  const auto e = uniform_edges(0.0, 1.0, 0.25);
  REQUIRE(e.size() == 5);
  CHECK(e.back() == doctest::Approx(1.0));
  Histogram h{{0.0, 1.0, 0.5}, {1, 1}};
  CHECK_THROWS_AS(h.validate(), std::invalid_argument);
  Histogram neg{{0.0, 1.0}, {-1}};
  CHECK_THROWS_AS(neg.validate(), std::invalid_argument);
  Histogram ok{{0.0, 1.0, 2.0}, {3, 4}};
  CHECK(ok.total() == 7);
  CHECK(ok.center(1) == 1.5);
}

TEST_CASE("beam splitter") {
  Gen g(1);
  const auto t = sorted_uniform(g, 20000, 1e4);
  const auto [a, b] = split_beam(t, 9);
  CHECK(a.size() + b.size() == t.size());
  CHECK(std::abs(static_cast<double>(a.size()) - 10000.0) < 4 * std::sqrt(5000.0));
  CHECK(std::is_sorted(a.begin(), a.end()));
  const auto again = split_beam(t, 9);
  CHECK(again.first == a);
}

TEST_CASE("property: all-pairs histogram equals a direct count") {
  Gen g(2);
  for (int k = 0; k < 20; ++k) {
    const auto a = sorted_uniform(g, g.integer(1, 60), 50.0);
    const auto b = sorted_uniform(g, g.integer(1, 60), 50.0);
    HistogramOptions o;
    o.bin_ns = g.uniform(0.2, 2.0);
    o.window_ns = g.uniform(3.0, 20.0);
    const auto h = start_stop_histogram(a, b, o);
    CHECK(h.counts == brute_all_pairs(a, b, h));
    CHECK(h.n_starts == static_cast<std::int64_t>(a.size()));
    CHECK(h.n_stops == static_cast<std::int64_t>(b.size()));
    // Bins are centred on multiples of the bin width.
    const std::size_t mid = h.size() / 2;
    CHECK(std::abs(h.center(mid)) < 1e-9);

    o.estimator = Estimator::start_stop;
    const auto s = start_stop_histogram(a, b, o);
    for (std::size_t i = 0; i < h.size(); ++i) CHECK(s.counts[i] <= h.counts[i]);

    const std::size_t cut = static_cast<std::size_t>(g.integer(0, static_cast<int>(a.size())));
    o.estimator = Estimator::all_pairs;
    const auto m = merge_shards({histogram_shard(a, b, 0, cut, o), histogram_shard(a, b, cut, a.size(), o)});
    CHECK(m.counts == h.counts);
  }
}

TEST_CASE("uncorrelated streams give g2 of one") {
  CounterRng rng(3, 0);
  const auto a = poisson_times(0.05, 2e6, rng);
  const auto b = poisson_times(0.05, 2e6, rng);
  HistogramOptions o;
  o.bin_ns = 1.0;
  o.window_ns = 50.0;
  o.duration_ns = 2e6;
  const auto tr = normalize_g2(start_stop_histogram(a, b, o), Normalization::cw);
  double mean = 0;
  for (double v : tr.g2) mean += v;
  mean /= static_cast<double>(tr.g2.size());
  CHECK(mean == doctest::Approx(1.0).epsilon(0.01));
  for (std::size_t i = 0; i < tr.g2.size(); ++i) CHECK(std::abs(tr.g2[i] - 1.0) < 5 * tr.sigma[i]);
}

TEST_CASE("pulsed peak areas") {
  const double period = 25.0;
  const int n = 40000;
  CounterRng rng(4, 0);
  SUBCASE("one photon per pulse has an empty central peak") {
    std::vector<double> t;
    for (int k = 0; k < n; ++k) {
      if (rng.uniform() < 0.3) t.push_back(k * period + rng.exponential(0.5));
    }
    const auto [a, b] = split_beam(t, 1);
    HistogramOptions o;
    o.bin_ns = 0.25;
    o.window_ns = 4.5 * period;
    const auto h = start_stop_histogram(a, b, o);
    const auto r = pulsed_peak_areas(h, period);
    CHECK(r.central_area == 0.0);
    CHECK(r.peaks.size() >= 7);
    const auto tr = normalize_g2(h, Normalization::pulsed, period);
    CHECK(tr.normalization == doctest::Approx(r.mean_side_area / 1.0));
  }
  SUBCASE("Poissonian pulses have equal peaks") {
    std::vector<double> t;
    for (int k = 0; k < n; ++k) {
      const auto m = rng.poisson(0.3);
      for (std::int64_t j = 0; j < m; ++j) t.push_back(k * period + rng.exponential(0.5));
    }
    std::sort(t.begin(), t.end());
    const auto [a, b] = split_beam(t, 2);
    HistogramOptions o;
    o.window_ns = 4.5 * period;
    const auto r = pulsed_peak_areas(start_stop_histogram(a, b, o), period);
    CHECK(std::abs(r.ratio - 1.0) < 4 * r.ratio_stderr);
  }
}

TEST_CASE("invalid inputs") {
  const std::vector<double> unsorted = {2.0, 1.0}, ok = {1.0, 2.0}, empty;
  CHECK_THROWS_AS(start_stop_histogram(unsorted, ok), std::invalid_argument);
  CHECK_THROWS_AS(start_stop_histogram(ok, empty), std::invalid_argument);
  HistogramOptions bad;
  bad.bin_ns = 0.0;
  CHECK_THROWS_AS(start_stop_histogram(ok, ok, bad), std::invalid_argument);
  Histogram h{{0.0, 1.0}, {0}};
  CHECK_THROWS_AS(normalize_g2(h, Normalization::cw), std::domain_error);
  CounterRng rng(1, 1);
  CHECK_THROWS_AS(poisson_times(-1.0, 1.0, rng), std::invalid_argument);
}
