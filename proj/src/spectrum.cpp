#include "qdcavity/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "qdcavity/units.hpp"

namespace qdc {

double area(const Spectrum& s) {
  double a = 0.0;
  for (std::size_t i = 1; i < s.x.size(); ++i) {
    a += 0.5 * (s.y[i] + s.y[i - 1]) * (s.x[i] - s.x[i - 1]);
  }
  return a;
}

void normalize_peak(Spectrum& s) {
  if (s.y.empty()) throw std::domain_error("empty spectrum");
  const double m = *std::max_element(s.y.begin(), s.y.end());
  if (!(m > 0.0)) throw std::domain_error("spectrum has no positive maximum");
  for (double& v : s.y) v /= m;
}

void normalize_area(Spectrum& s) {
  const double a = area(s);
  if (!(a > 0.0)) throw std::domain_error("spectrum has no positive area");
  for (double& v : s.y) v /= a;
}

namespace {

// nu = c / lambda is its own inverse map, as is the density Jacobian c / x^2.
Spectrum flip_axis(const Spectrum& s, Axis target) {
  const std::size_t n = s.x.size();
  Spectrum out;
  out.axis = target;
  out.x.resize(n);
  out.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = n - 1 - i;
    const double x = s.x[j];
    out.x[i] = units::kSpeedOfLight / x;
    out.y[i] = s.y[j] * units::kSpeedOfLight / (out.x[i] * out.x[i]);
  }
  return out;
}

}  // namespace

Spectrum to_wavelength(const Spectrum& s) {
  if (s.axis == Axis::wavelength_nm) return s;
  return flip_axis(s, Axis::wavelength_nm);
}

Spectrum to_frequency(const Spectrum& s) {
  if (s.axis == Axis::frequency_GHz) return s;
  return flip_axis(s, Axis::frequency_GHz);
}

std::vector<Peak> find_peaks(const Spectrum& s, double min_rel_height) {
  std::vector<Peak> peaks;
  const std::size_t n = s.y.size();
  if (n < 3) return peaks;
  const double ymax = *std::max_element(s.y.begin(), s.y.end());
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double y0 = s.y[i - 1], y1 = s.y[i], y2 = s.y[i + 1];
    if (!(y1 > y0 && y1 >= y2)) continue;
    if (y1 < min_rel_height * ymax) continue;
    // Parabola through three (possibly non-uniform) points.
    const double x0 = s.x[i - 1], x1 = s.x[i], x2 = s.x[i + 1];
    const double d01 = (y1 - y0) / (x1 - x0);
    const double d12 = (y2 - y1) / (x2 - x1);
    const double curv = (d12 - d01) / (x2 - x0);
    double xp = x1, yp = y1;
    if (curv < 0.0) {
      xp = std::clamp(0.5 * (x0 + x1) - d01 / (2.0 * curv), x0, x2);
      yp = y0 + d01 * (xp - x0) + curv * (xp - x0) * (xp - x1);
    }
    peaks.push_back({xp, yp});
  }
  std::sort(peaks.begin(), peaks.end(),
            [](const Peak& a, const Peak& b) { return a.height > b.height; });
  return peaks;
}

std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 2) throw std::invalid_argument("linspace needs at least 2 points");
  std::vector<double> v(static_cast<std::size_t>(n));
  const double step = (hi - lo) / (n - 1);
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = lo + step * i;
  v.back() = hi;
  return v;
}

}  // namespace qdc
