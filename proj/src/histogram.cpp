#include "qdcavity/histogram.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace qdc {

std::int64_t Histogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

void Histogram::validate() const {
  if (bin_edges_ns.size() != counts.size() + 1 || counts.empty()) {
    throw std::invalid_argument("histogram needs one more edge than bins");
  }
  for (std::size_t i = 0; i + 1 < bin_edges_ns.size(); ++i) {
    if (!(bin_edges_ns[i + 1] > bin_edges_ns[i])) {
      throw std::invalid_argument("histogram edges must be strictly increasing");
    }
  }
  for (auto c : counts) {
    if (c < 0) throw std::invalid_argument("histogram counts must be non-negative");
  }
}

std::vector<double> uniform_edges(double lo, double hi, double width) {
  if (!(width > 0.0) || !(hi > lo)) throw std::invalid_argument("bad histogram range");
  const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / width - 1e-9));
  std::vector<double> e(n + 1);
  for (std::size_t i = 0; i <= n; ++i) e[i] = lo + static_cast<double>(i) * width;
  return e;
}

}  // namespace qdc
