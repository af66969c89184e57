#include "qdcavity/instrument.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qdcavity/rng.hpp"
#include "qdcavity/units.hpp"

namespace qdc::instrument {

void InstrumentConfig::validate() const {
  if (!(spectral_resolution_pm >= 0.0)) throw std::invalid_argument("spectral resolution must be >= 0");
  if (!(apd_irf_ps >= 0.0)) throw std::invalid_argument("APD IRF width must be >= 0");
  if (!(efficiency > 0.0 && efficiency <= 1.0)) throw std::invalid_argument("efficiency must be in (0, 1]");
  if (!(rep_rate_MHz > 0.0)) throw std::invalid_argument("repetition rate must be positive");
}

double fwhm_to_sigma(double fwhm) { return fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0))); }

double voigt_fwhm(double fl, double fg) {
  return 0.5346 * fl + std::sqrt(0.2166 * fl * fl + fg * fg);
}

double lorentz_from_voigt(double fv, double fg) {
  if (!(fv >= fg)) throw std::domain_error("Voigt width below the Gaussian width");
  // (fv - 0.5346 fl)^2 = 0.2166 fl^2 + fg^2, smaller root.
  const double a = 0.5346 * 0.5346 - 0.2166, b = -2.0 * 0.5346 * fv, c = fv * fv - fg * fg;
  return (-b - std::sqrt(b * b - 4.0 * a * c)) / (2.0 * a);
}

Spectrum convolve_spectrum(const Spectrum& s, const InstrumentConfig& cfg) {
  cfg.validate();
  const std::size_t n = s.x.size();
  if (n != s.y.size() || n < 2) throw std::invalid_argument("spectrum needs matching x and y");
  if (cfg.spectral_resolution_pm == 0.0) return s;
  double fwhm = cfg.spectral_resolution_pm * 1e-3;  // nm
  if (s.axis == Axis::frequency_GHz) {
    const double mid = 0.5 * (s.x.front() + s.x.back());
    fwhm = units::detuning_nm_to_GHz(fwhm, units::frequency_to_wavelength(mid));
  }
  for (std::size_t i = 1; i < n; ++i) {
    const double dx = s.x[i] - s.x[i - 1];
    if (!(dx > 0.0)) throw std::invalid_argument("spectrum axis must increase");
    if (dx > 0.25 * fwhm) throw std::invalid_argument("grid too coarse for the spectrometer resolution");
  }
  const double sigma = fwhm_to_sigma(fwhm);
  const double reach = 8.0 * sigma;
  std::vector<double> w(n);  // trapezoid weights
  for (std::size_t i = 0; i < n; ++i) {
    const double left = i > 0 ? s.x[i] - s.x[i - 1] : 0.0;
    const double right = i + 1 < n ? s.x[i + 1] - s.x[i] : 0.0;
    w[i] = 0.5 * (left + right);
  }
  Spectrum out{s.axis, s.x, std::vector<double>(n, 0.0)};
  std::size_t lo = 0;
  std::vector<double> k;
  for (std::size_t i = 0; i < n; ++i) {
    if (s.y[i] == 0.0) continue;
    while (s.x[lo] < s.x[i] - reach) ++lo;
    std::size_t hi = lo;
    k.clear();
    double z = 0.0;
    for (; hi < n && s.x[hi] <= s.x[i] + reach; ++hi) {
      const double u = (s.x[hi] - s.x[i]) / sigma;
      k.push_back(std::exp(-0.5 * u * u));
      z += k.back() * w[hi];
    }
    const double mass = s.y[i] * w[i] / z;
    for (std::size_t j = lo; j < hi; ++j) out.y[j] += mass * k[j - lo];
  }
  return out;
}

trajectories::ClickStream jitter_and_thin(const trajectories::ClickStream& clicks,
                                          const InstrumentConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const CounterRng rng(seed, 0x1a77e2ULL);
  const double sigma = fwhm_to_sigma(cfg.apd_irf_ps * 1e-3);
  trajectories::ClickStream out;
  out.reserve(clicks.size());
  for (std::size_t i = 0; i < clicks.size(); ++i) {
    const std::uint64_t base = 3 * static_cast<std::uint64_t>(i);
    if (rng.uniform_at(base) >= cfg.efficiency) continue;
    double t = clicks[i].time_ns;
    if (sigma > 0.0) {
      const double r = std::sqrt(-2.0 * std::log(1.0 - rng.uniform_at(base + 1)));
      t += sigma * r * std::cos(units::kTwoPi * rng.uniform_at(base + 2));
    }
    out.push_back({clicks[i].channel, t});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.time_ns < b.time_ns; });
  return out;
}

}  // namespace qdc::instrument
