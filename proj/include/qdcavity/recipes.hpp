#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qdcavity/config.hpp"
#include "qdcavity/csv.hpp"
#include "qdcavity/spectrum.hpp"
#include "qdcavity/trajectories.hpp"

// Measurement pipelines behind the command-line tool. Each returns CSV tables
// holding results and pipeline-specific metadata; the caller adds the run
// metadata and writes the files.

namespace qdc::recipes {

inline constexpr const char* kToolVersion = "qdcavity 1.0.0";

enum class SpectrumMode { analytic, master, diffused };

/// Frequency grid covering the polaritons (and, for the diffused mode, the
/// shifted exciton) with 0.25 GHz spacing.
std::vector<double> spectrum_grid(const config::RunConfig& cfg, double dl_nm, SpectrumMode mode);

/// Emission spectrum at exciton-cavity detuning dl_nm, converted to a
/// wavelength axis, convolved with the spectrometer response and scaled to
/// unit peak.
Spectrum measured_spectrum(const config::RunConfig& cfg, double dl_nm, SpectrumMode mode);

csv::Table spectrum_table(const config::RunConfig& cfg, double dl_nm, SpectrumMode mode);

/// Inclusive detuning sweep of `steps` points; needs steps >= 2 and start != end.
struct Sweep {
  double start_nm = 0.0;
  double end_nm = 0.0;
  int steps = 0;

  std::vector<double> points() const;
};

/// Polariton peak positions from Lorentzian fits to measured spectra,
/// with the model eigenfrequencies alongside.
csv::Table anticross_table(const config::RunConfig& cfg, const Sweep& sweep, SpectrumMode mode);

/// Pulsed trajectory simulation, detector jitter and a Poisson decay fit
/// with the detector response at every detuning. Pulsed runs switch the CW
/// pump channels off.
csv::Table lifetime_table(const config::RunConfig& cfg, const Sweep& sweep, std::uint64_t seed);

/// Folded photon-arrival histogram of all recorded channels after jitter
/// and thinning; bins divide the period exactly.
Histogram arrival_histogram(const trajectories::ClickStream& clicks, double period_ns,
                            double bin_ns);

/// Quasi-static switching of the mode emission between the simulated
/// emitter and an uncorrelated source: whole blocks of pulses are switched
/// with probability `fraction`, and in those blocks the clicks of `channel`
/// are replaced by Poisson(m) clicks per pulse, m being the mean number of
/// emitter clicks per pulse in the remaining blocks. Arrival times after a
/// pulse are exponential with mean delay_ns. Other channels pass unchanged.
trajectories::ClickStream admix_uncorrelated(const trajectories::ClickStream& clicks,
                                             trajectories::ChannelLabel channel,
                                             double period_ns, std::int64_t n_pulses,
                                             double fraction, std::int64_t block_pulses,
                                             double delay_ns, std::uint64_t seed);

enum class G2Kind { autocorrelation, cross };
enum class G2Method { regression, trajectories };

struct G2Request {
  G2Kind kind = G2Kind::autocorrelation;
  G2Method method = G2Method::regression;
  bool pulsed = false;
  double dl_nm = 0.0;
};

struct G2Outputs {
  csv::Table g2;
  std::optional<csv::Table> clicks;
  std::optional<csv::Table> histogram;
  std::optional<csv::Table> peaks;
};

/// Regression traces need CW pumping; trajectory runs need a seed. Pulsed
/// runs switch the CW pump channels off.
G2Outputs g2_tables(const config::RunConfig& cfg, const G2Request& req,
                    std::optional<std::uint64_t> seed);

enum class FitModel { lorentz, anticross, lifetime, decay };

struct FitRequest {
  FitModel model = FitModel::lorentz;
  int n_peaks = 1;
  bool dispersive = false;
  bool bi_exponential = false;
  double period_ns = 0.0;  ///< folded decay histograms
};

/// Data layouts (header names):
///   lorentz    first two columns: axis, intensity
///   anticross  dl_nm and lambda_nm [, branch], or dl_nm, lambda_plus_nm, lambda_minus_nm
///   lifetime   dl_nm, tau_ns
///   decay      t_lo_ns, t_hi_ns, counts
/// Output rows: parameter, value, stderr.
csv::Table fit_table(const config::RunConfig& cfg, const FitRequest& req,
                     const csv::NumericTable& data);

}  // namespace qdc::recipes
