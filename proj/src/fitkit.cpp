#include "qdcavity/fitkit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>

#include "qdcavity/polariton.hpp"
#include "qdcavity/units.hpp"

namespace qdc::fit {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using units::kPi;
using units::kTwoPi;

// ---- Lorentzian spectra -------------------------------------------------

double lorentzian(double x, double center, double fwhm, double area, double dispersion) {
  const double u = x - center, h = 0.5 * fwhm;
  const double q = u * u + h * h;
  return (area * h + dispersion * u) / (kPi * q);
}

namespace {

std::vector<double> smooth(const std::vector<double>& y, int half) {
  const int n = static_cast<int>(y.size());
  std::vector<double> out(y.size());
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - half), hi = std::min(n - 1, i + half);
    double s = 0.0;
    for (int k = lo; k <= hi; ++k) s += y[static_cast<std::size_t>(k)];
    out[static_cast<std::size_t>(i)] = s / (hi - lo + 1);
  }
  return out;
}

std::size_t nearest_index(const std::vector<double>& x, double v) {
  const auto it = std::lower_bound(x.begin(), x.end(), v);
  if (it == x.begin()) return 0;
  if (it == x.end()) return x.size() - 1;
  const auto i = static_cast<std::size_t>(it - x.begin());
  return (v - x[i - 1] < x[i] - v) ? i - 1 : i;
}

// Full width at half height (above base) around index i, walking outward.
double half_max_width(const std::vector<double>& x, const std::vector<double>& y, std::size_t i,
                      double base) {
  const double half = base + 0.5 * (y[i] - base);
  std::size_t l = i, r = i;
  while (l > 0 && y[l] > half && y[l - 1] <= y[l] * 1.0000001) --l;
  while (r + 1 < y.size() && y[r] > half && y[r + 1] <= y[r] * 1.0000001) ++r;
  return x[r] - x[l];
}

struct LorentzLayout {
  int n_peaks;
  bool dispersive;
  int per_peak() const { return dispersive ? 4 : 3; }
  int background() const { return n_peaks * per_peak(); }
  int size() const { return background() + 1; }
};

VectorXd lorentz_model(const LorentzLayout& L, const std::vector<double>& x, const VectorXd& p) {
  VectorXd m = VectorXd::Constant(static_cast<Eigen::Index>(x.size()), p[L.background()]);
  for (int k = 0; k < L.n_peaks; ++k) {
    const int o = k * L.per_peak();
    const double d = L.dispersive ? p[o + 3] : 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      m[static_cast<Eigen::Index>(i)] += lorentzian(x[i], p[o], p[o + 1], p[o + 2], d);
    }
  }
  return m;
}

MatrixXd lorentz_jacobian(const LorentzLayout& L, const std::vector<double>& x,
                          const VectorXd& p) {
  MatrixXd j = MatrixXd::Zero(static_cast<Eigen::Index>(x.size()), L.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    for (int k = 0; k < L.n_peaks; ++k) {
      const int o = k * L.per_peak();
      const double a = p[o + 2], d = L.dispersive ? p[o + 3] : 0.0;
      const double u = x[i] - p[o], h = 0.5 * p[o + 1];
      const double q = u * u + h * h, q2 = q * q;
      // d/dc and d/dh of h/q and u/q
      const double hq_c = 2.0 * h * u / q2, uq_c = (u * u - h * h) / q2;
      const double hq_h = (u * u - h * h) / q2, uq_h = -2.0 * u * h / q2;
      j(r, o) = (a * hq_c + d * uq_c) / kPi;
      j(r, o + 1) = 0.5 * (a * hq_h + d * uq_h) / kPi;
      j(r, o + 2) = h / (kPi * q);
      if (L.dispersive) j(r, o + 3) = u / (kPi * q);
    }
    j(r, L.background()) = 1.0;
  }
  return j;
}

}  // namespace

LorentzianFit fit_lorentzians(const Spectrum& data, int n_peaks, const LorentzianOptions& opt) {
  if (n_peaks < 1 || n_peaks > 3) throw std::invalid_argument("n_peaks must be 1, 2 or 3");
  const std::size_t n = data.x.size();
  if (data.y.size() != n) throw std::invalid_argument("spectrum x and y differ in length");
  const LorentzLayout L{n_peaks, opt.dispersive};
  if (n < static_cast<std::size_t>(3 * n_peaks + 1) || n < static_cast<std::size_t>(L.size())) {
    throw std::invalid_argument("too few samples for " + std::to_string(n_peaks) + " peaks");
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (!(data.x[i] > data.x[i - 1])) throw std::invalid_argument("spectrum axis must increase");
  }
  const double span = data.x.back() - data.x.front();
  const double dx_min = span / static_cast<double>(n - 1);

  const auto ys = smooth(data.y, std::max(1, static_cast<int>(n / 200)));
  const double base = opt.fit_background ? *std::min_element(ys.begin(), ys.end()) : 0.0;

  std::vector<double> centers = opt.init_centers;
  if (centers.empty()) {
    Spectrum sm{data.axis, data.x, ys};
    for (const auto& pk : find_peaks(sm, 0.01)) {
      if (static_cast<int>(centers.size()) == n_peaks) break;
      centers.push_back(pk.position);
    }
  }
  if (static_cast<int>(centers.size()) > n_peaks) centers.resize(static_cast<std::size_t>(n_peaks));

  auto initial_peak = [&](double c, const std::vector<double>& y, double b) {
    const std::size_t i = nearest_index(data.x, c);
    double w = half_max_width(data.x, y, i, b);
    w = std::clamp(w, 2.0 * dx_min, 0.5 * span);
    const double a = std::max(y[i] - b, 1e-12) * kPi * 0.5 * w;
    return std::array<double, 3>{c, w, a};
  };

  std::vector<std::array<double, 3>> peaks;
  for (double c : centers) peaks.push_back(initial_peak(c, ys, base));

  // Residual peeling: add the largest remaining excess as a new peak.
  while (static_cast<int>(peaks.size()) < n_peaks) {
    std::vector<double> resid(n);
    for (std::size_t i = 0; i < n; ++i) {
      double m = base;
      for (const auto& pk : peaks) m += lorentzian(data.x[i], pk[0], pk[1], pk[2]);
      resid[i] = ys[i] - m;
    }
    const auto imax = static_cast<std::size_t>(
        std::max_element(resid.begin(), resid.end()) - resid.begin());
    peaks.push_back(initial_peak(data.x[imax], resid, 0.0));
  }
  std::sort(peaks.begin(), peaks.end(), [](auto& a, auto& b) { return a[0] < b[0]; });

  VectorXd p0 = VectorXd::Zero(L.size());
  Problem prob;
  for (int k = 0; k < n_peaks; ++k) {
    const int o = k * L.per_peak();
    const auto s = std::to_string(k);
    p0[o] = peaks[static_cast<std::size_t>(k)][0];
    p0[o + 1] = peaks[static_cast<std::size_t>(k)][1];
    p0[o + 2] = peaks[static_cast<std::size_t>(k)][2];
    prob.names.insert(prob.names.end(), {"center_" + s, "fwhm_" + s, "area_" + s});
    if (L.dispersive) prob.names.push_back("dispersion_" + s);
  }
  p0[L.background()] = base;
  prob.names.push_back("background");
  prob.fixed.assign(static_cast<std::size_t>(L.size()), false);
  prob.fixed.back() = !opt.fit_background;

  const VectorXd y = Eigen::Map<const VectorXd>(data.y.data(), static_cast<Eigen::Index>(n));
  prob.residuals = [&](const VectorXd& p) { return VectorXd(lorentz_model(L, data.x, p) - y); };
  prob.jacobian = [&](const VectorXd& p) { return lorentz_jacobian(L, data.x, p); };

  LorentzianFit out;
  out.result = levenberg_marquardt(prob, p0, opt.lm);
  const auto& v = out.result.values;
  double total = 0.0;
  for (int k = 0; k < n_peaks; ++k) {
    const auto o = static_cast<std::size_t>(k * L.per_peak());
    LorentzianComponent c;
    c.center = v[o];
    c.fwhm = std::abs(v[o + 1]);
    c.area = v[o + 2];
    c.dispersion = L.dispersive ? v[o + 3] : 0.0;
    out.result.values[o + 1] = c.fwhm;
    total += c.area;
    out.peaks.push_back(c);
  }
  for (auto& c : out.peaks) c.area_fraction = total != 0.0 ? c.area / total : 0.0;
  std::sort(out.peaks.begin(), out.peaks.end(),
            [](const auto& a, const auto& b) { return a.center < b.center; });
  out.background = v.back();
  return out;
}

// ---- Anti-crossing ------------------------------------------------------

std::pair<double, double> branch_wavelengths(double dl_nm, double g, double lambda_x_nm,
                                             double gamma_x, double gamma_m, double dl_offset_nm) {
  const double lambda_m = lambda_x_nm - (dl_nm + dl_offset_nm);
  if (!(lambda_m > 0.0)) throw std::invalid_argument("cavity wavelength must be positive");
  const auto pp = polariton::eigenmodes(units::wavelength_to_frequency(lambda_m),
                                        units::wavelength_to_frequency(lambda_x_nm), g, gamma_x,
                                        gamma_m);
  return {units::frequency_to_wavelength(pp.omega_plus_GHz),
          units::frequency_to_wavelength(pp.omega_minus_GHz)};
}

AnticrossingFit fit_anticrossing(const std::vector<BranchPoint>& points,
                                 const AnticrossingInit& init) {
  if (points.empty()) throw std::invalid_argument("no anti-crossing points");
  std::map<double, std::vector<std::size_t>> by_dl;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!std::isfinite(points[i].dl_nm) || !(points[i].lambda_nm > 0.0)) {
      throw std::invalid_argument("anti-crossing point with invalid detuning or wavelength");
    }
    by_dl[points[i].dl_nm].push_back(i);
  }
  if (by_dl.size() < 6) throw std::invalid_argument("need at least 6 distinct detunings");

  double lambda_x0 = init.lambda_x_nm;
  if (!(lambda_x0 > 0.0)) {
    std::vector<double> all;
    for (const auto& p : points) all.push_back(p.lambda_nm);
    std::nth_element(all.begin(), all.begin() + static_cast<long>(all.size() / 2), all.end());
    lambda_x0 = all[all.size() / 2];
  }

  AnticrossingFit out;
  out.assigned = points;
  for (auto& [dl, idx] : by_dl) {
    std::vector<std::size_t> open;
    for (auto i : idx) {
      if (out.assigned[i].branch == 0) open.push_back(i);
    }
    if (open.size() >= 2) {
      std::sort(open.begin(), open.end(), [&](auto a, auto b) {
        return out.assigned[a].lambda_nm < out.assigned[b].lambda_nm;
      });
      if (open.size() > 2) throw std::invalid_argument("more than two peaks at one detuning");
      out.assigned[open.front()].branch = +1;
      out.assigned[open.back()].branch = -1;
    } else if (open.size() == 1) {
      const auto [lp, lm] = branch_wavelengths(dl, init.g_GHz, lambda_x0, init.gamma_x_GHz,
                                               init.gamma_m_GHz, init.dl_offset_nm);
      const double l = out.assigned[open[0]].lambda_nm;
      out.assigned[open[0]].branch = std::abs(l - lp) <= std::abs(l - lm) ? +1 : -1;
    }
  }
  bool has_plus = false, has_minus = false;
  for (const auto& p : out.assigned) {
    if (p.branch != 1 && p.branch != -1) throw std::invalid_argument("branch must be -1, 0 or +1");
    (p.branch > 0 ? has_plus : has_minus) = true;
  }
  if (!has_plus || !has_minus) throw std::invalid_argument("data lie entirely on one branch");

  // lambda_x is fitted as an offset from its initial value so that the
  // finite-difference step is on the scale of the line positions.
  Problem prob;
  prob.names = {"g_GHz", "lambda_x_nm", "gamma_x_GHz", "gamma_m_GHz", "dl_offset_nm"};
  prob.fixed = {false, false, !init.fit_gammas, !init.fit_gammas, !init.fit_offset};
  const auto& pts = out.assigned;
  prob.residuals = [&](const VectorXd& p) {
    VectorXd r(static_cast<Eigen::Index>(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto [lp, lm] = branch_wavelengths(pts[i].dl_nm, p[0], lambda_x0 + p[1], p[2], p[3], p[4]);
      r[static_cast<Eigen::Index>(i)] = (pts[i].branch > 0 ? lp : lm) - pts[i].lambda_nm;
    }
    return r;
  };
  VectorXd p0(5);
  p0 << init.g_GHz, 0.0, init.gamma_x_GHz, init.gamma_m_GHz, init.dl_offset_nm;
  Options lm;
  out.result = levenberg_marquardt(prob, p0, lm);
  out.result.values[0] = std::abs(out.result.values[0]);
  out.result.values[1] += lambda_x0;

  const auto& v = out.result.values;
  const auto [lp, lm0] = branch_wavelengths(-v[4], v[0], v[1], v[2], v[3], v[4]);
  out.min_splitting_nm = lm0 - lp;
  return out;
}

// ---- Lifetime versus detuning -------------------------------------------

FitResult fit_lifetime_curve(const std::vector<LifetimePoint>& points,
                             const LifetimeCurveOptions& opt) {
  if (points.size() < 3) throw std::invalid_argument("need at least 3 lifetime points");
  std::vector<double> dw;
  double min_abs = std::numeric_limits<double>::infinity(), max_abs = 0.0;
  for (const auto& p : points) {
    if (!(p.tau_ns > 0.0)) throw std::invalid_argument("lifetimes must be positive");
    dw.push_back(units::detuning_nm_to_GHz(p.dl_nm, opt.lambda_ref_nm));
    min_abs = std::min(min_abs, std::abs(p.dl_nm));
    max_abs = std::max(max_abs, std::abs(p.dl_nm));
  }
  if (max_abs - min_abs <= 1e-12 * std::max(1.0, max_abs)) {
    throw std::invalid_argument("all lifetime points are at the same detuning");
  }
  if (!(opt.relative_sigma > 0.0)) throw std::invalid_argument("relative_sigma must be positive");
  const double gm = opt.gamma_m_GHz;

  auto tau_model = [&](double g, double gb, double w) {
    const double se = gm * g * g / (w * w + 0.25 * gm * gm);
    return 1.0 / (kTwoPi * (gb + se));
  };
  Problem prob;
  prob.names = {"g_GHz", "gamma_b_GHz"};
  prob.residuals = [&](const VectorXd& p) {
    VectorXd r(static_cast<Eigen::Index>(points.size()));
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double t = points[i].tau_ns;
      r[static_cast<Eigen::Index>(i)] = (tau_model(p[0], p[1], dw[i]) - t) / (opt.relative_sigma * t);
    }
    return r;
  };
  prob.jacobian = [&](const VectorXd& p) {
    MatrixXd j(static_cast<Eigen::Index>(points.size()), 2);
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double d = dw[i] * dw[i] + 0.25 * gm * gm;
      const double tm = tau_model(p[0], p[1], dw[i]);
      const double s = opt.relative_sigma * points[i].tau_ns;
      const double dtau_drate = -kTwoPi * tm * tm;
      j(static_cast<Eigen::Index>(i), 0) = dtau_drate * 2.0 * gm * p[0] / d / s;
      j(static_cast<Eigen::Index>(i), 1) = dtau_drate / s;
    }
    return j;
  };
  VectorXd p0(2);
  p0 << opt.g_GHz, opt.gamma_b_GHz;
  FitResult r = levenberg_marquardt(prob, p0, opt.lm);
  r.values[0] = std::abs(r.values[0]);
  return r;
}

// ---- Time-resolved decays -----------------------------------------------

namespace {

// exp(x^2) erfc(x) for x >= 0.
double erfcx(double x) {
  if (x < 3.0) return std::exp(x * x) * std::erfc(x);
  // Continued fraction 1 / (x + (1/2) / (x + 1 / (x + (3/2) / (x + ...)))), evaluated backwards.
  double f = x;
  for (int k = 80; k >= 1; --k) f = x + 0.5 * k / f;
  return 1.0 / (f * std::sqrt(kPi));
}

// Survival 1 - F(t) of the exponentially modified Gaussian, and F(t) itself.
// The exponential term exp(-u + s^2/2) Phi(z - s) equals
// 0.5 exp(-z^2/2) erfcx((s - z)/sqrt 2) where z = (t - t0)/sigma, s = sigma/tau.
double exg_tail_term(double z, double s) {
  const double w = (s - z) / std::sqrt(2.0);
  if (w >= 0.0) return 0.5 * std::exp(-0.5 * z * z) * erfcx(w);
  // z > s: the direct form, both factors are benign.
  return 0.5 * std::exp(-z * s + 0.5 * s * s) * std::erfc(w);
}

}  // namespace

double exp_bin_fraction(double a, double b, double t0, double tau, double sigma) {
  if (!(tau > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  if (sigma <= 0.0) {
    const double lo = std::max(a, t0), hi = std::max(b, t0);
    if (hi <= lo) return 0.0;
    return std::exp(-(lo - t0) / tau) - std::exp(-(hi - t0) / tau);
  }
  const double s = sigma / tau;
  const double za = (a - t0) / sigma, zb = (b - t0) / sigma;
  if (zb < 0.0) {
    // Before the onset F = 0.5 exp(-z^2/2) [erfcx(-z/sqrt 2) - erfcx((s - z)/sqrt 2)]; the direct
    // difference Phi(z) - term cancels catastrophically for z << 0.
    auto cdf = [&](double z) {
      return 0.5 * std::exp(-0.5 * z * z) *
             (erfcx(-z / std::sqrt(2.0)) - erfcx((s - z) / std::sqrt(2.0)));
    };
    return std::max(0.0, cdf(zb) - cdf(za));
  }
  auto survival = [&](double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)) + exg_tail_term(z, s); };
  return std::max(0.0, survival(za) - survival(zb));
}

DecayFit fit_decay(const Histogram& h, const DecayOptions& opt) {
  h.validate();
  const std::size_t nb = h.size();
  std::size_t nonempty = 0;
  for (auto c : h.counts) nonempty += c > 0 ? 1 : 0;
  if (nonempty < 10) throw std::invalid_argument("decay histogram needs at least 10 non-empty bins");
  const double sigma = opt.irf_fwhm_ns / (2.0 * std::sqrt(2.0 * std::log(2.0)));
  if (opt.irf_fwhm_ns < 0.0) throw std::invalid_argument("IRF width must be non-negative");
  if (opt.period_ns < 0.0) throw std::invalid_argument("period must be non-negative");
  const bool bi = opt.model == DecayModel::bi;

  const auto pk = static_cast<std::size_t>(
      std::max_element(h.counts.begin(), h.counts.end()) - h.counts.begin());
  const double t0_init = opt.t0_ns.value_or(h.bin_edges_ns[pk]);
  const bool fit_t0 = !opt.t0_ns.has_value() && (sigma > 0.0 || !opt.tail_only);

  // Bins entering the likelihood.
  std::size_t first = 0;
  if (sigma <= 0.0 && opt.tail_only) {
    while (first < nb && h.bin_edges_ns[first + 1] <= t0_init) ++first;
  }
  if (nb - first < 3) throw std::invalid_argument("too few bins after the excitation time");

  // Background from the last tenth of the window, decay constant from a
  // log-linear regression over the top decade above it.
  const std::size_t tail = std::max<std::size_t>(1, nb / 10);
  double bg = 0.0, bg_w = 0.0;
  for (std::size_t i = nb - tail; i < nb; ++i) {
    bg += static_cast<double>(h.counts[i]);
    bg_w += h.width(i);
  }
  bg /= bg_w;
  const double peak_excess = static_cast<double>(h.counts[pk]) - bg * h.width(pk);
  double sx = 0, sy = 0, sxx = 0, sxy = 0, sw = 0, excess = 0.0;
  std::size_t used = 0;
  for (std::size_t i = pk; i < nb; ++i) {
    const double e = static_cast<double>(h.counts[i]) - bg * h.width(i);
    if (e < 0.1 * peak_excess || e <= 0.0) break;
    const double t = h.center(i), wgt = e, lny = std::log(e);
    sw += wgt;
    sx += wgt * t;
    sy += wgt * lny;
    sxx += wgt * t * t;
    sxy += wgt * t * lny;
    excess += e;
    ++used;
  }
  const double span = h.bin_edges_ns.back() - h.bin_edges_ns.front();
  double tau0 = h.width(pk);
  if (used >= 3) {
    const double slope = (sw * sxy - sx * sy) / (sw * sxx - sx * sx);
    if (slope < 0.0) tau0 = -1.0 / slope;
  } else if (used == 2) {
    const double r = static_cast<double>(h.counts[pk + 1]) / static_cast<double>(h.counts[pk]);
    if (r > 0.0 && r < 1.0) tau0 = -h.width(pk) / std::log(r);
  }
  tau0 = std::clamp(tau0, 0.5 * h.width(pk), 10.0 * span);
  double n0 = 0.0;
  for (std::size_t i = first; i < nb; ++i) n0 += static_cast<double>(h.counts[i]) - bg * h.width(i);
  n0 = std::max(n0, std::max(excess, 1.0));

  PoissonProblem prob;
  VectorXd p0;
  if (bi) {
    prob.names = {"counts_1", "tau_1_ns", "counts_2", "tau_2_ns", "background", "t0_ns"};
    p0.resize(6);
    p0 << 0.5 * n0, tau0 / 3.0, 0.5 * n0, 3.0 * tau0, bg, t0_init;
  } else {
    prob.names = {"counts_1", "tau_1_ns", "background", "t0_ns"};
    p0.resize(4);
    p0 << n0, tau0, bg, t0_init;
  }
  prob.fixed.assign(prob.names.size(), false);
  prob.fixed.back() = !fit_t0;
  const int n_exp = bi ? 2 : 1;
  if (opt.fit_background) {
    const double bg_floor = 0.1 / std::max(span, 1e-9) / static_cast<double>(nb);
    p0[2 * n_exp] = std::max(p0[2 * n_exp], bg_floor);
  } else {
    p0[2 * n_exp] = 0.0;
    prob.fixed[static_cast<std::size_t>(2 * n_exp)] = true;
  }

  prob.counts.resize(static_cast<Eigen::Index>(nb - first));
  for (std::size_t i = first; i < nb; ++i) {
    prob.counts[static_cast<Eigen::Index>(i - first)] = static_cast<double>(h.counts[i]);
  }
  const double period = opt.period_ns;
  auto folded_fraction = [&](double a, double b, double t0, double tau) {
    double f = exp_bin_fraction(a, b, t0, tau, sigma);
    if (period <= 0.0 || !(tau > 0.0)) return f;
    // Leading edge of the next pulse and tails of earlier ones.
    f += exp_bin_fraction(a - period, b - period, t0, tau, sigma);
    const double carry = std::exp(-period / tau);
    double w = carry;
    for (int k = 1; k < 200 && w > 1e-14; ++k, w *= carry) {
      f += exp_bin_fraction(a + k * period, b + k * period, t0, tau, sigma);
    }
    return f;
  };
  prob.expected = [&](const VectorXd& p) {
    VectorXd mu(static_cast<Eigen::Index>(nb - first));
    const double t0 = p[p.size() - 1];
    for (std::size_t i = first; i < nb; ++i) {
      const double a = h.bin_edges_ns[i], b = h.bin_edges_ns[i + 1];
      double m = p[2 * n_exp] * (b - a);
      for (int k = 0; k < n_exp; ++k) m += p[2 * k] * folded_fraction(a, b, t0, p[2 * k + 1]);
      mu[static_cast<Eigen::Index>(i - first)] = m;
    }
    return mu;
  };

  DecayFit out;
  out.result = poisson_levenberg_marquardt(prob, p0, opt.lm);
  auto& v = out.result.values;
  if (bi) {
    // Report the shorter component first.
    if (v[1] > v[3]) {
      std::swap(v[0], v[2]);
      std::swap(v[1], v[3]);
      std::swap(out.result.stderrs[0], out.result.stderrs[2]);
      std::swap(out.result.stderrs[1], out.result.stderrs[3]);
    }
    const double s12 = std::hypot(out.result.stderrs[1], out.result.stderrs[3]);
    if (std::abs(v[3] - v[1]) < 0.05 * v[3] || !(std::abs(v[3] - v[1]) > 2.0 * s12)) {
      out.result.warnings.push_back("degenerate bi-exponential: tau_1 and tau_2 are not separable");
    }
    const double amp = v[0] / v[1] + v[2] / v[3];
    out.tau_ns = (v[0] + v[2]) / amp;
  } else {
    out.tau_ns = v[1];
  }
  return out;
}

}  // namespace qdc::fit
