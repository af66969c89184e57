#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qdcavity/dynamics.hpp"
#include "qdcavity/histogram.hpp"
#include "qdcavity/hilbert.hpp"
#include "qdcavity/rng.hpp"

// Monte Carlo wave-function unraveling of the master equation. Between jumps
// the state follows exp(-i H_eff t) with H_eff = H - (i/2) sum_k L_k^dag L_k;
// a jump happens when the squared norm falls to a uniform random level, and the
// channel is drawn with weights ||L_k psi||^2.

namespace qdc::trajectories {

using hilbert::ChannelLabel;

struct ClickRecord {
  ChannelLabel channel;
  double time_ns;
};

using ClickStream = std::vector<ClickRecord>;

/// Pulsed excitation: each pulse produces k ~ Poisson(mu) capture events, each
/// after an independent exponential delay, which raise the emitter from the
/// ground state to capture_level.
struct PulseConfig {
  double rep_rate_MHz = 40.0;
  double mean_captures_per_pulse = 1.0;
  double capture_delay_ns = 0.06;
  std::int64_t n_pulses = 10000;
  /// When false at most one capture per pulse is kept.
  bool allow_reexcitation = true;
  int capture_level = hilbert::kExciton;

  double period_ns() const { return 1e3 / rep_rate_MHz; }
  void validate(int emitter_levels) const;
};

struct TrajectoryOptions {
  std::vector<ChannelLabel> recorded = {ChannelLabel::cavity_loss,
                                        ChannelLabel::exciton_radiative};
  double jump_time_tolerance_ns = 1e-6;
  int threads = 1;
  /// CW runs are cut into independent segments of this length (each starting
  /// in the ground state with its own random stream), pulsed runs into blocks
  /// of pulses. The partition does not depend on the thread count.
  double cw_segment_ns = 1e5;
  std::int64_t pulses_per_block = 5000;
};

/// One quantum trajectory: drift, jumps, and instantaneous capture events.
class Unraveling {
 public:
  Unraveling(const dynamics::OpenSystem& sys, const TrajectoryOptions& opt);

  void reset(const Eigen::VectorXcd& psi, double t_ns);
  const Eigen::VectorXcd& state() const { return psi_; }
  double time() const { return t_; }

  /// Evolves to t_end (jumps included) and leaves the normalized state there.
  /// Jumps on recorded channels are appended to clicks; every jump increments
  /// jump_counts[channel index].
  void run_until(double t_end, CounterRng& rng, ClickStream* clicks);

  /// Capture Kraus pair K1 = |level><g| (x) 1, K0 = 1 - |g><g| (x) 1.
  /// Returns true if the emitter was raised.
  bool capture(int level, CounterRng& rng);

  const std::vector<std::int64_t>& jump_counts() const { return jump_counts_; }
  const std::vector<hilbert::CollapseChannel>& channels() const { return channels_; }
  bool uses_eigenbasis() const { return eigen_ok_; }

 private:
  Eigen::VectorXcd drift(double dt) const;
  double norm2_after(double dt) const;
  void jump(CounterRng& rng, ClickStream* clicks);
  void rebase();

  const dynamics::OpenSystem* sys_;
  TrajectoryOptions opt_;
  std::vector<hilbert::CollapseChannel> channels_;  ///< non-zero rates only
  std::vector<bool> recorded_;
  Eigen::MatrixXcd h_eff_;
  Eigen::MatrixXcd decay_;  ///< sum_k L_k^dag L_k
  bool eigen_ok_ = false;
  Eigen::VectorXcd lambda_;
  Eigen::MatrixXcd v_, v_inv_;

  Eigen::VectorXcd psi_;
  Eigen::VectorXcd coeff_;  ///< V^-1 psi at the last rebase
  double t_ = 0.0;
  double level_ = 1.0;      ///< norm^2 at which the next jump happens
  std::vector<std::int64_t> jump_counts_;
};

/// Continuous incoherent pumping (exciton_pump / feeder_pump channels) for
/// duration_ns. Clicks are time-ordered.
ClickStream run_cw(const SystemParams& p, const units::Detuning& d, double duration_ns,
                   std::uint64_t seed, const TrajectoryOptions& opt = {});

/// Pulsed capture excitation at t = k * period. The pump channels of p are
/// still active.
ClickStream run_pulsed(const SystemParams& p, const units::Detuning& d, const PulseConfig& pulses,
                       std::uint64_t seed, const TrajectoryOptions& opt = {});

/// Ensemble averages over n_traj trajectories started in psi0 at t = 0.
struct EnsembleStats {
  std::vector<double> t_ns;
  std::vector<double> exciton_mean, exciton_stderr;  ///< <sigma^dag sigma>
  std::vector<double> photon_mean, photon_stderr;    ///< <a^dag a>
  /// Jumps per trajectory on [0, t_grid.back()] for each active channel.
  std::map<ChannelLabel, std::pair<double, double>> jumps_mean_stderr;
  int n_trajectories = 0;
};

EnsembleStats ensemble(const dynamics::OpenSystem& sys, const Eigen::VectorXcd& psi0,
                       std::span<const double> t_grid, int n_traj, std::uint64_t seed,
                       const TrajectoryOptions& opt = {});

/// Histogram of click times modulo the pulse period on [0, period).
Histogram lifetime_from_clicks(const ClickStream& clicks, ChannelLabel channel,
                               double rep_period_ns, double bin_ns);

/// Sorted click times of one channel.
std::vector<double> times_of(const ClickStream& clicks, ChannelLabel channel);

}  // namespace qdc::trajectories
