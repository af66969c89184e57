#include "qdcavity/polariton.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace qdc::polariton {

using cd = std::complex<double>;

namespace {

// Photon weight of the eigenvector of [[d_m, g], [g, d_x]] belonging to lambda.
// Either row of (M - lambda) v = 0 gives a candidate; the longer one is the
// numerically meaningful one (the other vanishes when g -> 0).
double photon_fraction(cd lambda, cd d_m, cd d_x, double g) {
  const cd va_m = g, va_x = lambda - d_m;
  const cd vb_m = lambda - d_x, vb_x = g;
  const double na = std::norm(va_m) + std::norm(va_x);
  const double nb = std::norm(vb_m) + std::norm(vb_x);
  if (na == 0.0 && nb == 0.0) return 0.5;
  return na >= nb ? std::norm(va_m) / na : std::norm(vb_m) / nb;
}

}  // namespace

PolaritonPair eigenmodes(double omega_m, double omega_x, double g, double gamma_x,
                         double gamma_m) {
  const cd d_m{omega_m, -0.5 * gamma_m};
  const cd d_x{omega_x, -0.5 * gamma_x};
  const cd mean = 0.5 * (d_m + d_x);
  const cd half_diff = 0.5 * (d_m - d_x);
  // Principal branch has Re >= 0, so mean + root is the upper polariton.
  const cd root = std::sqrt(g * g + half_diff * half_diff);
  const cd upper = mean + root;
  const cd lower = mean - root;

  PolaritonPair out;
  out.omega_plus_GHz = upper.real();
  out.omega_minus_GHz = lower.real();
  out.hwhm_plus_GHz = -upper.imag();
  out.hwhm_minus_GHz = -lower.imag();
  out.photon_fraction_plus = photon_fraction(upper, d_m, d_x, g);
  out.photon_fraction_minus = photon_fraction(lower, d_m, d_x, g);
  return out;
}

PolaritonPair eigenmodes(const SystemParams& p, const units::Detuning& d) {
  p.validate();
  const double omega_m = p.cavity_frequency_GHz();
  return eigenmodes(omega_m, omega_m - d.dw_GHz, p.g_GHz, p.gamma_x_GHz, p.gamma_m_GHz);
}

bool is_strong_coupling(const SystemParams& p) {
  const double dg = p.gamma_x_GHz - p.gamma_m_GHz;
  return p.g_GHz * p.g_GHz > dg * dg / 16.0;
}

RabiSplitting rabi_splitting(const SystemParams& p) {
  p.validate();
  if (!is_strong_coupling(p)) {
    throw std::domain_error("no real splitting: parameters are not in strong coupling");
  }
  const double dg = p.gamma_x_GHz - p.gamma_m_GHz;
  RabiSplitting r;
  r.GHz = 2.0 * std::sqrt(p.g_GHz * p.g_GHz - dg * dg / 16.0);
  r.nm = units::detuning_GHz_to_nm(r.GHz, p.lambda_m_nm);
  return r;
}

Spectrum spectral_function_raw(std::span<const double> grid, const SystemParams& p,
                               const units::Detuning& d, const AmplitudeModel& model) {
  if (grid.empty()) throw std::invalid_argument("empty frequency grid");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw std::invalid_argument("grid must be strictly ascending");
  }
  const PolaritonPair pp = eigenmodes(p, d);
  double a_plus = model.a_plus, a_minus = model.a_minus;
  if (model.kind == AmplitudeModel::Kind::hopfield_weighted) {
    a_plus = pp.photon_fraction_plus;
    a_minus = pp.photon_fraction_minus;
  }
  Spectrum s;
  s.axis = Axis::frequency_GHz;
  s.x.assign(grid.begin(), grid.end());
  s.y.resize(grid.size());
  const double gp2 = pp.hwhm_plus_GHz * pp.hwhm_plus_GHz;
  const double gm2 = pp.hwhm_minus_GHz * pp.hwhm_minus_GHz;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double up = grid[i] - pp.omega_plus_GHz;
    const double dn = grid[i] - pp.omega_minus_GHz;
    s.y[i] = a_plus / (up * up + gp2) + a_minus / (dn * dn + gm2);
  }
  return s;
}

Spectrum spectral_function(std::span<const double> grid, const SystemParams& p,
                           const units::Detuning& d, const AmplitudeModel& model) {
  Spectrum s = spectral_function_raw(grid, p, d, model);
  normalize_peak(s);
  return s;
}

double purcell_lifetime_ns(double g, double gamma_m, double gamma_b, double dw) {
  const double se = gamma_m * g * g / (dw * dw + 0.25 * gamma_m * gamma_m);
  return 1.0 / (units::kTwoPi * (gamma_b + se));
}

PurcellRates purcell_lifetime(const SystemParams& p, const units::Detuning& d) {
  if (!(p.gamma_m_GHz > 0.0)) throw std::invalid_argument("gamma_m must be positive");
  PurcellRates r;
  r.gamma_b_GHz = p.gamma_b_GHz;
  r.gamma_se_GHz = p.gamma_m_GHz * p.g_GHz * p.g_GHz /
                   (d.dw_GHz * d.dw_GHz + 0.25 * p.gamma_m_GHz * p.gamma_m_GHz);
  r.gamma_tot_GHz = r.gamma_b_GHz + r.gamma_se_GHz;
  r.lifetime_ns = units::lifetime_from_fwhm(r.gamma_tot_GHz);
  return r;
}

}  // namespace qdc::polariton
