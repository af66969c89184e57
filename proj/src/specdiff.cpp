#include "qdcavity/specdiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qdcavity/dynamics.hpp"
#include "qdcavity/polariton.hpp"

namespace qdc::specdiff {

double TelegraphConfig::offset_GHz(double g_GHz) const {
  return std::isnan(detuned_offset_GHz) ? -20.0 * g_GHz : detuned_offset_GHz;
}

void TelegraphConfig::validate(double g_GHz) const {
  if (!(resonant_fraction >= 0.0 && resonant_fraction <= 1.0)) {
    throw std::invalid_argument("resonant fraction must lie in [0, 1]");
  }
  const double off = offset_GHz(g_GHz);
  if (!std::isfinite(off) || !(std::abs(off) > 5.0 * g_GHz)) {
    throw std::invalid_argument("detuned offset must exceed 5 g in magnitude");
  }
}

namespace {

Spectrum term(const SystemParams& p, const units::Detuning& d, std::span<const double> grid,
              TermModel model) {
  Spectrum s;
  if (model == TermModel::analytic) {
    s = polariton::spectral_function_raw(grid, p, d);
  } else {
    const auto sys = dynamics::OpenSystem::build(p, d);
    s = dynamics::emission_spectrum(sys, grid).spectrum;
  }
  normalize_area(s);
  return s;
}

}  // namespace

DiffusedSpectrum averaged_spectrum(const SystemParams& p, const units::Detuning& d,
                                   const TelegraphConfig& cfg, std::span<const double> grid,
                                   TermModel model) {
  p.validate();
  cfg.validate(p.g_GHz);
  if (grid.size() < 16) throw std::invalid_argument("grid too short for a spectrum");
  const double f = cfg.resonant_fraction;
  // Exciton shifted by `offset`: dw = w_m - w_x grows by -offset.
  const auto shifted = units::Detuning::from_GHz(d.dw_GHz - cfg.offset_GHz(p.g_GHz), d.lambda_ref_nm);

  DiffusedSpectrum out;
  out.resonant = term(p, d, grid, model);
  out.detuned = term(p, shifted, grid, model);
  out.total = out.resonant;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out.total.y[i] = f * out.resonant.y[i] + (1.0 - f) * out.detuned.y[i];
  }

  const double wm = p.cavity_frequency_GHz();
  const auto near = polariton::eigenmodes(p, d);
  const auto far = polariton::eigenmodes(p, shifted);
  // Cavity-like pole of the far configuration: the one with larger photon weight.
  const bool plus_is_cavity = far.photon_fraction_plus >= far.photon_fraction_minus;
  const double far_center = plus_is_cavity ? far.omega_plus_GHz : far.omega_minus_GHz;
  const double far_hwhm = plus_is_cavity ? far.hwhm_plus_GHz : far.hwhm_minus_GHz;
  std::vector<std::pair<double, double>> expected;
  if (f > 0.0) {
    expected.emplace_back(near.omega_minus_GHz, near.hwhm_minus_GHz);
    expected.emplace_back(near.omega_plus_GHz, near.hwhm_plus_GHz);
  }
  if (f < 1.0) expected.emplace_back(far_center, far_hwhm);
  for (const auto& [c, hw] : expected) {
    if (c - 2.0 * hw < grid.front() || c + 2.0 * hw > grid.back()) {
      out.warnings.push_back("grid does not cover the peak near " + std::to_string(c - wm) +
                             " GHz from the cavity");
    }
  }

  fit::LorentzianOptions lo;
  for (const auto& e : expected) lo.init_centers.push_back(e.first);
  std::sort(lo.init_centers.begin(), lo.init_centers.end());
  try {
    auto fr = fit::fit_lorentzians(out.total, static_cast<int>(expected.size()), lo);
    out.components = fr.peaks;
    if (!fr.result.converged) out.warnings.push_back("component fit did not converge: " + fr.result.message);
  } catch (const std::exception& e) {
    out.warnings.push_back(std::string("component fit failed: ") + e.what());
  }
  return out;
}

}  // namespace qdc::specdiff
