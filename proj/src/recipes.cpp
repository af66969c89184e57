#include "qdcavity/recipes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "qdcavity/dynamics.hpp"
#include "qdcavity/fitkit.hpp"
#include "qdcavity/hbt.hpp"
#include "qdcavity/hilbert.hpp"
#include "qdcavity/instrument.hpp"
#include "qdcavity/polariton.hpp"
#include "qdcavity/rng.hpp"
#include "qdcavity/specdiff.hpp"
#include "qdcavity/units.hpp"

namespace qdc::recipes {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kGridStep_GHz = 0.25;

std::uint64_t derive(std::uint64_t seed, std::uint64_t tag) {
  return CounterRng::mix(seed ^ CounterRng::mix(tag + 0x51ed27ULL));
}

// Pulsed measurements excite only through captures.
SystemParams without_cw_pump(SystemParams p) {
  p.pump_GHz = 0.0;
  p.feeder_pump_GHz = 0.0;
  return p;
}

std::string mode_name(SpectrumMode m) {
  switch (m) {
    case SpectrumMode::analytic: return "analytic";
    case SpectrumMode::master: return "master";
    case SpectrumMode::diffused: return "diffused";
  }
  return "";
}

void add_fit_meta(csv::Table& t, const fit::FitResult& r) {
  t.add_meta("converged", r.converged ? "true" : "false");
  t.add_meta("iterations", std::to_string(r.n_iterations));
  t.add_meta("residual_norm", csv::format_number(r.residual_norm));
  t.add_meta("message", r.message);
  for (const auto& w : r.warnings) t.add_meta("warning", w);
}

void add_parameters(csv::Table& t, const fit::FitResult& r) {
  for (std::size_t i = 0; i < r.names.size(); ++i) {
    t.add_row({r.names[i], csv::format_number(r.values[i]), csv::format_number(r.stderrs[i])});
  }
}

std::vector<double> column_or_throw(const csv::NumericTable& d, const std::string& name) {
  const int c = d.column(name);
  if (c < 0) throw std::invalid_argument("data lacks column " + name);
  return d.values(c);
}

}  // namespace

std::vector<double> spectrum_grid(const config::RunConfig& cfg, double dl_nm, SpectrumMode mode) {
  const SystemParams p = cfg.system.with_detuning_nm(dl_nm);
  const auto d = p.detuning();
  const double nu_m = p.cavity_frequency_GHz();
  const double nu_x = nu_m - d.dw_GHz;
  double lo = std::min(nu_m, nu_x), hi = std::max(nu_m, nu_x);
  if (mode == SpectrumMode::diffused) {
    const double shifted = nu_x + cfg.telegraph.offset_GHz(p.g_GHz);
    lo = std::min(lo, shifted);
    hi = std::max(hi, shifted);
  }
  const double w = std::max({p.gamma_m_GHz, p.gamma_x_GHz, 2.0 * p.g_GHz});
  lo -= 10.0 * w;
  hi += 10.0 * w;
  const int n = static_cast<int>(std::ceil((hi - lo) / kGridStep_GHz)) + 1;
  return linspace(lo, lo + kGridStep_GHz * (n - 1), n);
}

Spectrum measured_spectrum(const config::RunConfig& cfg, double dl_nm, SpectrumMode mode) {
  const SystemParams p = cfg.system.with_detuning_nm(dl_nm);
  const auto d = p.detuning();
  const auto grid = spectrum_grid(cfg, dl_nm, mode);
  Spectrum s;
  switch (mode) {
    case SpectrumMode::analytic:
      s = polariton::spectral_function(grid, p, d);
      break;
    case SpectrumMode::master:
      s = dynamics::emission_spectrum(dynamics::OpenSystem::build(p, d), grid).spectrum;
      break;
    case SpectrumMode::diffused:
      s = specdiff::averaged_spectrum(p, d, cfg.telegraph, grid).total;
      break;
  }
  s = instrument::convolve_spectrum(to_wavelength(s), cfg.instrument);
  // Drop the edges, where the kernel is cut off by the end of the grid.
  const double margin = 4e-3 * cfg.instrument.spectral_resolution_pm;
  std::size_t a = 0, b = s.x.size();
  while (a < b && s.x[a] < s.x.front() + margin) ++a;
  while (b > a && s.x[b - 1] > s.x.back() - margin) --b;
  s.x = std::vector<double>(s.x.begin() + static_cast<std::ptrdiff_t>(a), s.x.begin() + static_cast<std::ptrdiff_t>(b));
  s.y = std::vector<double>(s.y.begin() + static_cast<std::ptrdiff_t>(a), s.y.begin() + static_cast<std::ptrdiff_t>(b));
  normalize_peak(s);
  return s;
}

csv::Table spectrum_table(const config::RunConfig& cfg, double dl_nm, SpectrumMode mode) {
  const Spectrum s = measured_spectrum(cfg, dl_nm, mode);
  csv::Table t;
  t.add_meta("mode", mode_name(mode));
  t.add_meta("detuning_nm", csv::format_number(dl_nm));
  if (mode == SpectrumMode::master) t.add_meta("frame", std::string(hilbert::kFrame));
  t.header = {"wavelength_nm", "intensity"};
  for (std::size_t i = 0; i < s.x.size(); ++i) t.add_row(std::vector<double>{s.x[i], s.y[i]});
  return t;
}

std::vector<double> Sweep::points() const {
  if (steps < 2) throw std::invalid_argument("a sweep needs at least two steps");
  if (!(start_nm != end_nm) || !std::isfinite(start_nm) || !std::isfinite(end_nm)) {
    throw std::invalid_argument("sweep start and end must differ");
  }
  return linspace(start_nm, end_nm, steps);
}

csv::Table anticross_table(const config::RunConfig& cfg, const Sweep& sweep, SpectrumMode mode) {
  if (mode == SpectrumMode::diffused) {
    throw std::invalid_argument("anti-crossing tracks use the analytic or master spectrum");
  }
  csv::Table t;
  t.add_meta("mode", mode_name(mode));
  t.header = {"dl_nm", "lambda_plus_nm", "lambda_minus_nm", "splitting_nm", "model_plus_nm",
              "model_minus_nm"};
  for (double dl : sweep.points()) {
    const SystemParams p = cfg.system.with_detuning_nm(dl);
    const auto modes = polariton::eigenmodes(p, p.detuning());
    const double mp = units::frequency_to_wavelength(modes.omega_plus_GHz);
    const double mm = units::frequency_to_wavelength(modes.omega_minus_GHz);
    const Spectrum s = measured_spectrum(cfg, dl, mode);
    auto peaks = find_peaks(s, 1e-3);
    if (peaks.size() > 2) peaks.resize(2);
    std::vector<double> centers;
    for (const auto& pk : peaks) centers.push_back(pk.position);
    std::sort(centers.begin(), centers.end());
    if (!centers.empty()) {
      fit::LorentzianOptions o;
      o.init_centers = centers;
      o.dispersive = mode == SpectrumMode::master;
      try {
        const auto f = fit::fit_lorentzians(s, static_cast<int>(centers.size()), o);
        std::vector<double> fitted;
        for (const auto& c : f.peaks) fitted.push_back(c.center);
        const bool sane = std::all_of(fitted.begin(), fitted.end(), [&](double c) {
          return std::isfinite(c) && c > s.x.front() && c < s.x.back();
        });
        if (sane) centers = fitted;
      } catch (const std::exception&) {
        // Keep the raw maxima.
      }
    }
    double lp = kNaN, lm = kNaN;
    if (centers.size() == 2) {
      lp = centers[0];
      lm = centers[1];
    } else if (centers.size() == 1) {
      (std::abs(centers[0] - mp) <= std::abs(centers[0] - mm) ? lp : lm) = centers[0];
    }
    t.add_row(std::vector<double>{dl, lp, lm, lm - lp, mp, mm});
  }
  return t;
}

Histogram arrival_histogram(const trajectories::ClickStream& clicks, double period_ns,
                            double bin_ns) {
  if (!(period_ns > 0.0) || !(bin_ns > 0.0)) throw std::invalid_argument("period and bin must be positive");
  const auto n = static_cast<std::size_t>(std::max(1.0, std::round(period_ns / bin_ns)));
  Histogram h;
  h.bin_edges_ns.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) h.bin_edges_ns[i] = period_ns * static_cast<double>(i) / static_cast<double>(n);
  h.counts.assign(n, 0);
  const double w = period_ns / static_cast<double>(n);
  for (const auto& c : clicks) {
    const double t = c.time_ns - std::floor(c.time_ns / period_ns) * period_ns;
    const auto i = std::min(n - 1, static_cast<std::size_t>(t / w));
    ++h.counts[i];
  }
  h.n_starts = static_cast<std::int64_t>(clicks.size());
  h.duration_ns = period_ns;
  return h;
}

csv::Table lifetime_table(const config::RunConfig& cfg, const Sweep& sweep, std::uint64_t seed) {
  const auto pts = sweep.points();
  const double period = cfg.pulses.period_ns();
  csv::Table t;
  t.add_meta("irf_fwhm_ps", csv::format_number(cfg.instrument.apd_irf_ps));
  t.add_meta("capture_delay_ns", csv::format_number(cfg.pulses.capture_delay_ns));
  t.header = {"dl_nm", "tau_ns", "tau_stderr_ns", "purcell_tau_ns", "clicks", "converged"};
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const SystemParams p = without_cw_pump(cfg.system.with_detuning_nm(pts[i]));
    const auto d = p.detuning();
    const double tau_formula = polariton::purcell_lifetime(p, d).lifetime_ns;
    auto clicks = trajectories::run_pulsed(p, d, cfg.pulses, derive(seed, 2 * i), cfg.trajectories);
    clicks = instrument::jitter_and_thin(clicks, cfg.instrument, derive(seed, 2 * i + 1));
    const double expected = tau_formula + cfg.pulses.capture_delay_ns;
    const double bins = std::clamp(std::round(period / (expected / 25.0)), 256.0, 8192.0);
    const Histogram h = arrival_histogram(clicks, period, period / bins);
    fit::DecayOptions o;
    o.irf_fwhm_ns = cfg.instrument.apd_irf_ps * 1e-3;
    o.fit_background = false;
    o.period_ns = period;
    const auto f = fit::fit_decay(h, o);
    t.add_row(std::vector<double>{pts[i], f.tau_ns, f.result.stderr_of("tau_1_ns"), tau_formula,
                                  static_cast<double>(clicks.size()),
                                  f.result.converged ? 1.0 : 0.0});
  }
  return t;
}

trajectories::ClickStream admix_uncorrelated(const trajectories::ClickStream& clicks,
                                             trajectories::ChannelLabel channel,
                                             double period_ns, std::int64_t n_pulses,
                                             double fraction, std::int64_t block_pulses,
                                             double delay_ns, std::uint64_t seed) {
  if (!(period_ns > 0.0) || n_pulses < 1 || block_pulses < 1) {
    throw std::invalid_argument("admixture needs a positive period, pulse count and block size");
  }
  if (!(fraction >= 0.0 && fraction < 1.0)) throw std::invalid_argument("fraction must be in [0, 1)");
  if (!(delay_ns >= 0.0)) throw std::invalid_argument("delay must be non-negative");
  const CounterRng switching(seed, 0);
  auto switched = [&](std::int64_t pulse) {
    return switching.uniform_at(static_cast<std::uint64_t>(pulse / block_pulses)) < fraction;
  };
  trajectories::ClickStream out;
  out.reserve(clicks.size());
  std::int64_t kept = 0;
  for (const auto& c : clicks) {
    const auto pulse = static_cast<std::int64_t>(std::floor(c.time_ns / period_ns));
    if (c.channel == channel && pulse >= 0 && pulse < n_pulses && switched(pulse)) continue;
    if (c.channel == channel) ++kept;
    out.push_back(c);
  }
  std::int64_t resonant_pulses = 0;
  for (std::int64_t k = 0; k < n_pulses; ++k) resonant_pulses += switched(k) ? 0 : 1;
  if (resonant_pulses == 0) throw std::domain_error("every pulse block was switched; no emitter photons left");
  const double m = static_cast<double>(kept) / static_cast<double>(resonant_pulses);
  for (std::int64_t k = 0; k < n_pulses; ++k) {
    if (!switched(k)) continue;
    CounterRng rng(seed, 1 + static_cast<std::uint64_t>(k));
    const std::int64_t n = rng.poisson(m);
    for (std::int64_t j = 0; j < n; ++j) {
      out.push_back({channel, static_cast<double>(k) * period_ns + rng.exponential(delay_ns)});
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.time_ns < b.time_ns; });
  return out;
}

G2Outputs g2_tables(const config::RunConfig& cfg, const G2Request& req,
                    std::optional<std::uint64_t> seed) {
  const SystemParams p = cfg.system.with_detuning_nm(req.dl_nm);
  const auto d = p.detuning();
  const auto& k = cfg.correlation;
  G2Outputs out;
  auto& g = out.g2;
  g.add_meta("kind", req.kind == G2Kind::autocorrelation ? "auto" : "cross");
  g.add_meta("detuning_nm", csv::format_number(req.dl_nm));

  if (req.method == G2Method::regression) {
    if (req.pulsed) throw std::invalid_argument("pulsed correlations need the trajectory method");
    const auto sys = dynamics::OpenSystem::build(p, d);
    const int n = static_cast<int>(std::round(k.window_ns / k.bin_ns));
    const auto tau = req.kind == G2Kind::autocorrelation
                         ? linspace(0.0, k.bin_ns * n, n + 1)
                         : linspace(-k.bin_ns * n, k.bin_ns * n, 2 * n + 1);
    const auto tr = req.kind == G2Kind::autocorrelation ? dynamics::g2_auto(sys, tau)
                                                        : dynamics::g2_cross(sys, tau);
    g.add_meta("method", "regression");
    g.add_meta("frame", std::string(hilbert::kFrame));
    g.header = {"tau_ns", "g2"};
    for (std::size_t i = 0; i < tr.tau_ns.size(); ++i) {
      g.add_row(std::vector<double>{tr.tau_ns[i], tr.values[i].real()});
    }
    return out;
  }

  if (!seed) throw std::invalid_argument("trajectory runs need a seed");
  g.add_meta("method", "trajectories");
  const double period = cfg.pulses.period_ns();
  trajectories::ClickStream clicks;
  double duration = k.cw_duration_ns;
  if (req.pulsed) {
    clicks = trajectories::run_pulsed(without_cw_pump(p), d, cfg.pulses, *seed, cfg.trajectories);
    duration = period * static_cast<double>(cfg.pulses.n_pulses);
    if (k.uncorrelated_fraction > 0.0) {
      clicks = admix_uncorrelated(clicks, hilbert::ChannelLabel::cavity_loss, period,
                                  cfg.pulses.n_pulses, k.uncorrelated_fraction,
                                  k.admixture_block_pulses, cfg.pulses.capture_delay_ns,
                                  derive(*seed, 1));
    }
  } else {
    clicks = trajectories::run_cw(p, d, k.cw_duration_ns, *seed, cfg.trajectories);
  }
  clicks = instrument::jitter_and_thin(clicks, cfg.instrument, derive(*seed, 2));

  std::vector<double> starts, stops;
  const auto cav = trajectories::times_of(clicks, hilbert::ChannelLabel::cavity_loss);
  if (req.kind == G2Kind::autocorrelation) {
    std::tie(starts, stops) = hbt::split_beam(cav, derive(*seed, 3));
  } else {
    starts = cav;
    stops = trajectories::times_of(clicks, hilbert::ChannelLabel::exciton_radiative);
  }
  if (starts.empty() || stops.empty()) throw std::domain_error("no coincidences: a detector saw no photons");

  hbt::HistogramOptions ho;
  ho.bin_ns = k.bin_ns;
  ho.window_ns = req.pulsed ? std::max(k.window_ns, 3.5 * period) : k.window_ns;
  ho.estimator = k.estimator;
  ho.duration_ns = duration;
  const Histogram h = hbt::start_stop_histogram(starts, stops, ho);

  csv::Table ct;
  ct.header = {"channel", "time_ns"};
  for (const auto& c : clicks) ct.add_row({std::string(hilbert::to_string(c.channel)), csv::format_number(c.time_ns)});
  out.clicks = std::move(ct);

  csv::Table ht;
  ht.add_meta("starts", std::to_string(h.n_starts));
  ht.add_meta("stops", std::to_string(h.n_stops));
  ht.add_meta("duration_ns", csv::format_number(h.duration_ns));
  ht.header = {"tau_lo_ns", "tau_hi_ns", "counts"};
  for (std::size_t i = 0; i < h.size(); ++i) {
    ht.add_row({csv::format_number(h.bin_edges_ns[i]), csv::format_number(h.bin_edges_ns[i + 1]),
                std::to_string(h.counts[i])});
  }
  out.histogram = std::move(ht);

  const auto trace = hbt::normalize_g2(h, req.pulsed ? hbt::Normalization::pulsed : hbt::Normalization::cw,
                                       period, k.peak_half_window_ns);
  g.add_meta("normalization", csv::format_number(trace.normalization));
  if (req.pulsed) {
    const auto rep = hbt::pulsed_peak_areas(h, period, k.peak_half_window_ns);
    csv::Table pt;
    pt.add_meta("central_area", csv::format_number(rep.central_area));
    pt.add_meta("mean_side_area", csv::format_number(rep.mean_side_area));
    pt.add_meta("ratio", csv::format_number(rep.ratio));
    pt.add_meta("ratio_stderr", csv::format_number(rep.ratio_stderr));
    pt.add_meta("half_window_ns", csv::format_number(rep.half_window_ns));
    pt.header = {"order", "delay_ns", "area"};
    for (const auto& pk : rep.peaks) {
      pt.add_row(std::vector<double>{static_cast<double>(pk.order), pk.delay_ns, pk.area});
    }
    out.peaks = std::move(pt);
    g.add_meta("central_ratio", csv::format_number(rep.ratio));
  }
  g.header = {"tau_ns", "g2", "sigma"};
  for (std::size_t i = 0; i < trace.tau_ns.size(); ++i) {
    g.add_row(std::vector<double>{trace.tau_ns[i], trace.g2[i], trace.sigma[i]});
  }
  return out;
}

csv::Table fit_table(const config::RunConfig& cfg, const FitRequest& req,
                     const csv::NumericTable& data) {
  csv::Table t;
  t.header = {"parameter", "value", "stderr"};
  const auto& sys = cfg.system;
  switch (req.model) {
    case FitModel::lorentz: {
      if (data.header.size() < 2) throw std::invalid_argument("spectrum data needs two columns");
      Spectrum s;
      s.axis = data.header[0].find("nm") != std::string::npos ? Axis::wavelength_nm : Axis::frequency_GHz;
      s.x = data.values(0);
      s.y = data.values(1);
      if (s.x.size() >= 2 && s.x.front() > s.x.back()) {
        std::reverse(s.x.begin(), s.x.end());
        std::reverse(s.y.begin(), s.y.end());
      }
      fit::LorentzianOptions o;
      o.dispersive = req.dispersive;
      const auto f = fit::fit_lorentzians(s, req.n_peaks, o);
      t.add_meta("model", "lorentz");
      add_fit_meta(t, f.result);
      add_parameters(t, f.result);
      for (std::size_t i = 0; i < f.peaks.size(); ++i) {
        t.add_row({"area_fraction_" + std::to_string(i + 1), csv::format_number(f.peaks[i].area_fraction),
                   "nan"});
      }
      break;
    }
    case FitModel::anticross: {
      std::vector<fit::BranchPoint> pts;
      const auto dl = column_or_throw(data, "dl_nm");
      if (data.column("lambda_nm") >= 0) {
        const auto lam = data.values(data.column("lambda_nm"));
        const int bc = data.column("branch");
        for (std::size_t i = 0; i < dl.size(); ++i) {
          if (!std::isfinite(lam[i])) continue;
          const double b = bc >= 0 ? data.rows[i][static_cast<std::size_t>(bc)] : 0.0;
          pts.push_back({dl[i], lam[i], std::isfinite(b) ? static_cast<int>(b) : 0});
        }
      } else {
        const auto lp = column_or_throw(data, "lambda_plus_nm");
        const auto lm = column_or_throw(data, "lambda_minus_nm");
        for (std::size_t i = 0; i < dl.size(); ++i) {
          if (std::isfinite(lp[i])) pts.push_back({dl[i], lp[i], +1});
          if (std::isfinite(lm[i])) pts.push_back({dl[i], lm[i], -1});
        }
      }
      fit::AnticrossingInit init;
      init.g_GHz = sys.g_GHz;
      init.gamma_x_GHz = sys.gamma_x_GHz;
      init.gamma_m_GHz = sys.gamma_m_GHz;
      const auto f = fit::fit_anticrossing(pts, init);
      t.add_meta("model", "anticross");
      add_fit_meta(t, f.result);
      add_parameters(t, f.result);
      t.add_row({"min_splitting_nm", csv::format_number(f.min_splitting_nm), "nan"});
      break;
    }
    case FitModel::lifetime: {
      const auto dl = column_or_throw(data, "dl_nm");
      const auto tau = column_or_throw(data, "tau_ns");
      std::vector<fit::LifetimePoint> pts;
      for (std::size_t i = 0; i < dl.size(); ++i) {
        if (std::isfinite(dl[i]) && std::isfinite(tau[i])) pts.push_back({dl[i], tau[i]});
      }
      fit::LifetimeCurveOptions o;
      o.g_GHz = sys.g_GHz;
      o.gamma_b_GHz = sys.gamma_b_GHz;
      o.gamma_m_GHz = sys.gamma_m_GHz;
      o.lambda_ref_nm = sys.lambda_m_nm;
      const auto f = fit::fit_lifetime_curve(pts, o);
      t.add_meta("model", "lifetime");
      add_fit_meta(t, f);
      add_parameters(t, f);
      break;
    }
    case FitModel::decay: {
      const auto lo = column_or_throw(data, "t_lo_ns");
      const auto hi = column_or_throw(data, "t_hi_ns");
      const auto n = column_or_throw(data, "counts");
      if (lo.empty()) throw std::invalid_argument("empty decay histogram");
      Histogram h;
      h.bin_edges_ns = lo;
      h.bin_edges_ns.push_back(hi.back());
      for (std::size_t i = 0; i < n.size(); ++i) {
        if (!(n[i] >= 0.0)) throw std::invalid_argument("counts must be non-negative");
        if (i + 1 < lo.size() && hi[i] != lo[i + 1]) throw std::invalid_argument("decay bins must be contiguous");
        h.counts.push_back(static_cast<std::int64_t>(std::llround(n[i])));
      }
      fit::DecayOptions o;
      o.model = req.bi_exponential ? fit::DecayModel::bi : fit::DecayModel::mono;
      o.irf_fwhm_ns = cfg.instrument.apd_irf_ps * 1e-3;
      o.period_ns = req.period_ns;
      const auto f = fit::fit_decay(h, o);
      t.add_meta("model", req.bi_exponential ? "decay_bi" : "decay_mono");
      add_fit_meta(t, f.result);
      add_parameters(t, f.result);
      t.add_row({"tau_ns", csv::format_number(f.tau_ns), "nan"});
      break;
    }
  }
  return t;
}

}  // namespace qdc::recipes
