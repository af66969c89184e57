#include "qdcavity/trajectories.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <unsupported/Eigen/MatrixFunctions>

#include "qdcavity/error.hpp"

namespace qdc::trajectories {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using cd = std::complex<double>;

void PulseConfig::validate(int emitter_levels) const {
  if (!(rep_rate_MHz > 0.0)) throw std::invalid_argument("repetition rate must be positive");
  if (!(mean_captures_per_pulse >= 0.0)) {
    throw std::invalid_argument("mean captures per pulse must be non-negative");
  }
  if (!(capture_delay_ns >= 0.0)) throw std::invalid_argument("capture delay must be non-negative");
  if (n_pulses < 1) throw std::invalid_argument("need at least one pulse");
  if (capture_level != hilbert::kExciton &&
      !(capture_level == hilbert::kFeeder && emitter_levels == 3)) {
    throw std::invalid_argument("capture level must be the exciton or an existing feeder level");
  }
}

namespace {

// Runs fn(i) for i in [0, n) on up to `threads` workers; the first exception is
// rethrown after all workers stop.
template <class Fn>
void for_each_index(std::int64_t n, int threads, Fn&& fn) {
  const auto workers = static_cast<int>(std::clamp<std::int64_t>(threads, 1, std::max<std::int64_t>(n, 1)));
  if (workers == 1) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::int64_t i = next.fetch_add(1);
        if (i >= n || failed) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          failed = true;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

VectorXcd ground_state(const hilbert::Space& s) {
  VectorXcd psi = VectorXcd::Zero(s.dim);
  psi[s.index(hilbert::kGround, 0)] = 1.0;
  return psi;
}

}  // namespace

Unraveling::Unraveling(const dynamics::OpenSystem& sys, const TrajectoryOptions& opt)
    : sys_(&sys), opt_(opt) {
  if (!(opt.jump_time_tolerance_ns > 0.0)) {
    throw std::invalid_argument("jump-time tolerance must be positive");
  }
  const int dim = sys.space.dim;
  decay_ = MatrixXcd::Zero(dim, dim);
  for (const auto& c : sys.channels) {
    if (c.rate_GHz <= 0.0) continue;
    channels_.push_back(c);
    recorded_.push_back(std::find(opt.recorded.begin(), opt.recorded.end(), c.label) !=
                        opt.recorded.end());
    decay_ += c.op.adjoint() * c.op;
  }
  h_eff_ = sys.hamiltonian - cd(0.0, 0.5) * decay_;

  Eigen::ComplexEigenSolver<MatrixXcd> es(h_eff_);
  if (es.info() == Eigen::Success) {
    v_ = es.eigenvectors();
    lambda_ = es.eigenvalues();
    Eigen::PartialPivLU<MatrixXcd> lu(v_);
    v_inv_ = lu.inverse();
    const double cond = v_.norm() * v_inv_.norm();
    const double recon =
        (v_ * lambda_.asDiagonal() * v_inv_ - h_eff_).norm() / std::max(h_eff_.norm(), 1e-300);
    eigen_ok_ = std::isfinite(cond) && cond < 1e8 && recon < 1e-9;
  }
  jump_counts_.assign(channels_.size(), 0);
  reset(ground_state(sys.space), 0.0);
}

void Unraveling::reset(const VectorXcd& psi, double t_ns) {
  if (psi.size() != sys_->space.dim) throw std::invalid_argument("state dimension mismatch");
  psi_ = psi;
  t_ = t_ns;
  level_ = -1.0;
  std::fill(jump_counts_.begin(), jump_counts_.end(), 0);
  rebase();
}

void Unraveling::rebase() {
  const double n = psi_.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    std::ostringstream msg;
    msg << "trajectory state lost its norm at t = " << t_ << " ns";
    throw NumericError(msg.str());
  }
  psi_ /= n;
  if (eigen_ok_) coeff_ = v_inv_ * psi_;
}

VectorXcd Unraveling::drift(double dt) const {
  if (eigen_ok_) {
    VectorXcd c = coeff_;
    for (Eigen::Index k = 0; k < c.size(); ++k) c[k] *= std::exp(cd(0.0, -dt) * lambda_[k]);
    return v_ * c;
  }
  const MatrixXcd gen = cd(0.0, -dt) * h_eff_;
  return gen.exp() * psi_;
}

double Unraveling::norm2_after(double dt) const { return drift(dt).squaredNorm(); }

void Unraveling::run_until(double t_end, CounterRng& rng, ClickStream* clicks) {
  if (t_end < t_) throw std::invalid_argument("cannot run a trajectory backwards");
  if (level_ < 0.0) level_ = rng.uniform_pos();
  while (t_ < t_end) {
    const double span = t_end - t_;
    const double n_end = channels_.empty() ? 1.0 : norm2_after(span);
    if (n_end > level_) {
      // No jump before t_end; the remaining threshold level / n_end is again
      // uniform given survival, so no new draw is needed.
      psi_ = drift(span);
      t_ = t_end;
      level_ /= n_end;
      rebase();
      return;
    }
    // Bracket the crossing of log norm^2 with log level.
    const double log_level = std::log(level_);
    auto f = [&](double dt) { return std::log(norm2_after(dt)) - log_level; };
    double a = 0.0, fa = -log_level;
    double b = span, fb = std::log(n_end) - log_level;
    const double rate = std::real(psi_.dot(decay_ * psi_));
    if (rate > 0.0 && fa > 0.0) {
      double guess = std::min(span, 2.0 * fa / rate);
      while (guess < b) {
        const double fg = f(guess);
        if (fg <= 0.0) {
          b = guess;
          fb = fg;
          break;
        }
        a = guess;
        fa = fg;
        guess = std::min(b, 2.0 * guess);
      }
    }
    // Illinois regula falsi; bisection once it stalls.
    double root = b;
    int side = 0;
    for (int it = 0; it < 200 && fa > 0.0; ++it) {
      if (b - a < opt_.jump_time_tolerance_ns) break;
      double c = it < 100 ? (a * fb - b * fa) / (fb - fa) : 0.5 * (a + b);
      if (!(c > a && c < b)) c = 0.5 * (a + b);
      const double fc = f(c);
      if (std::abs(fc) < 1e-13) {
        a = b = c;
        break;
      }
      if (fc > 0.0) {
        a = c;
        fa = fc;
        if (side == -1) fb *= 0.5;
        side = -1;
      } else {
        b = c;
        fb = fc;
        if (side == 1) fa *= 0.5;
        side = 1;
      }
    }
    root = fa <= 0.0 ? a : b;
    psi_ = drift(root);
    t_ += root;
    jump(rng, clicks);
  }
}

void Unraveling::jump(CounterRng& rng, ClickStream* clicks) {
  std::vector<double> w(channels_.size());
  double total = 0.0;
  std::vector<VectorXcd> out(channels_.size());
  for (std::size_t k = 0; k < channels_.size(); ++k) {
    out[k] = channels_[k].op * psi_;
    w[k] = out[k].squaredNorm();
    total += w[k];
  }
  if (!(total > 0.0)) {
    std::ostringstream msg;
    msg << "jump requested with zero total jump weight at t = " << t_ << " ns";
    throw NumericError(msg.str());
  }
  const double u = rng.uniform() * total;
  std::size_t k = 0;
  double acc = w[0];
  while (u >= acc && k + 1 < w.size()) acc += w[++k];
  while (w[k] == 0.0 && k > 0) --k;
  psi_ = out[k];
  rebase();
  level_ = rng.uniform_pos();
  ++jump_counts_[k];
  if (clicks && recorded_[k]) clicks->push_back({channels_[k].label, t_});
}

bool Unraveling::capture(int level, CounterRng& rng) {
  const auto& s = sys_->space;
  double p_ground = 0.0;
  for (int n = 0; n <= s.n_max; ++n) p_ground += std::norm(psi_[s.index(hilbert::kGround, n)]);
  const bool raise = rng.uniform() < p_ground;
  if (raise) {
    VectorXcd next = VectorXcd::Zero(s.dim);
    for (int n = 0; n <= s.n_max; ++n) next[s.index(level, n)] = psi_[s.index(hilbert::kGround, n)];
    psi_ = next;
  } else {
    for (int n = 0; n <= s.n_max; ++n) psi_[s.index(hilbert::kGround, n)] = 0.0;
  }
  rebase();
  return raise;
}

namespace {

ClickStream concatenate(std::vector<ClickStream>& parts) {
  std::size_t total = 0;
  for (const auto& p : parts) total += p.size();
  ClickStream out;
  out.reserve(total);
  for (auto& p : parts) {
    out.insert(out.end(), p.begin(), p.end());
    ClickStream().swap(p);
  }
  return out;
}

}  // namespace

ClickStream run_cw(const SystemParams& p, const units::Detuning& d, double duration_ns,
                   std::uint64_t seed, const TrajectoryOptions& opt) {
  if (!(duration_ns > 0.0)) throw std::invalid_argument("duration must be positive");
  if (!(opt.cw_segment_ns > 0.0)) throw std::invalid_argument("segment length must be positive");
  const auto sys = dynamics::OpenSystem::build(p, d);
  const Unraveling proto(sys, opt);
  const auto n_seg = static_cast<std::int64_t>(std::ceil(duration_ns / opt.cw_segment_ns));
  std::vector<ClickStream> parts(static_cast<std::size_t>(n_seg));
  for_each_index(n_seg, opt.threads, [&](std::int64_t s) {
    Unraveling u = proto;
    CounterRng rng(seed, static_cast<std::uint64_t>(s));
    const double t0 = static_cast<double>(s) * opt.cw_segment_ns;
    u.reset(ground_state(sys.space), t0);
    u.run_until(std::min(t0 + opt.cw_segment_ns, duration_ns), rng,
                &parts[static_cast<std::size_t>(s)]);
  });
  return concatenate(parts);
}

ClickStream run_pulsed(const SystemParams& p, const units::Detuning& d, const PulseConfig& pulses,
                       std::uint64_t seed, const TrajectoryOptions& opt) {
  pulses.validate(p.emitter_levels);
  if (opt.pulses_per_block < 1) throw std::invalid_argument("pulses per block must be positive");
  const auto sys = dynamics::OpenSystem::build(p, d);
  const Unraveling proto(sys, opt);
  const double period = pulses.period_ns();
  const std::int64_t n_blocks = (pulses.n_pulses + opt.pulses_per_block - 1) / opt.pulses_per_block;
  std::vector<ClickStream> parts(static_cast<std::size_t>(n_blocks));
  for_each_index(n_blocks, opt.threads, [&](std::int64_t b) {
    Unraveling u = proto;
    CounterRng rng(seed, static_cast<std::uint64_t>(b));
    const std::int64_t first = b * opt.pulses_per_block;
    const std::int64_t last = std::min(pulses.n_pulses, first + opt.pulses_per_block);
    const double t_start = static_cast<double>(first) * period;
    const double t_end = static_cast<double>(last) * period;
    std::vector<double> captures;
    for (std::int64_t k = first; k < last; ++k) {
      std::int64_t n = rng.poisson(pulses.mean_captures_per_pulse);
      if (!pulses.allow_reexcitation) n = std::min<std::int64_t>(n, 1);
      for (std::int64_t j = 0; j < n; ++j) {
        const double t = static_cast<double>(k) * period + rng.exponential(pulses.capture_delay_ns);
        if (t < t_end) captures.push_back(t);
      }
    }
    std::sort(captures.begin(), captures.end());
    u.reset(ground_state(sys.space), t_start);
    auto& clicks = parts[static_cast<std::size_t>(b)];
    for (double t : captures) {
      u.run_until(t, rng, &clicks);
      u.capture(pulses.capture_level, rng);
    }
    u.run_until(t_end, rng, &clicks);
  });
  return concatenate(parts);
}

EnsembleStats ensemble(const dynamics::OpenSystem& sys, const VectorXcd& psi0,
                       std::span<const double> t_grid, int n_traj, std::uint64_t seed,
                       const TrajectoryOptions& opt) {
  if (n_traj < 2) throw std::invalid_argument("need at least two trajectories");
  if (t_grid.empty()) throw std::invalid_argument("empty time grid");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] >= 0.0) || (i > 0 && t_grid[i] < t_grid[i - 1])) {
      throw std::invalid_argument("time grid must be non-negative and non-decreasing");
    }
  }
  const Unraveling proto(sys, opt);
  const std::size_t nt = t_grid.size();
  const std::size_t nc = proto.channels().size();
  std::vector<double> exc(static_cast<std::size_t>(n_traj) * nt), pho(exc.size());
  std::vector<std::int64_t> jumps(static_cast<std::size_t>(n_traj) * nc);
  const auto& s = sys.space;
  for_each_index(n_traj, opt.threads, [&](std::int64_t i) {
    Unraveling u = proto;
    CounterRng rng(seed, static_cast<std::uint64_t>(i));
    u.reset(psi0, 0.0);
    for (std::size_t k = 0; k < nt; ++k) {
      u.run_until(t_grid[k], rng, nullptr);
      const auto& psi = u.state();
      const auto row = static_cast<std::size_t>(i) * nt + k;
      exc[row] = std::real(psi.dot(s.exciton_projector * psi));
      pho[row] = std::real(psi.dot(s.photon_number * psi));
    }
    for (std::size_t c = 0; c < nc; ++c) jumps[static_cast<std::size_t>(i) * nc + c] = u.jump_counts()[c];
  });

  auto mean_se = [&](auto get) {
    double m = 0.0, m2 = 0.0;
    for (int i = 0; i < n_traj; ++i) {
      const double x = get(static_cast<std::size_t>(i));
      m += x;
      m2 += x * x;
    }
    m /= n_traj;
    const double var = std::max(0.0, (m2 / n_traj - m * m) * n_traj / (n_traj - 1.0));
    return std::pair<double, double>{m, std::sqrt(var / n_traj)};
  };
  EnsembleStats out;
  out.n_trajectories = n_traj;
  out.t_ns.assign(t_grid.begin(), t_grid.end());
  for (std::size_t k = 0; k < nt; ++k) {
    auto [em, es] = mean_se([&](std::size_t i) { return exc[i * nt + k]; });
    auto [pm, ps] = mean_se([&](std::size_t i) { return pho[i * nt + k]; });
    out.exciton_mean.push_back(em);
    out.exciton_stderr.push_back(es);
    out.photon_mean.push_back(pm);
    out.photon_stderr.push_back(ps);
  }
  for (std::size_t c = 0; c < nc; ++c) {
    out.jumps_mean_stderr[proto.channels()[c].label] =
        mean_se([&](std::size_t i) { return static_cast<double>(jumps[i * nc + c]); });
  }
  return out;
}

Histogram lifetime_from_clicks(const ClickStream& clicks, ChannelLabel channel,
                               double rep_period_ns, double bin_ns) {
  if (!(rep_period_ns > 0.0) || !(bin_ns > 0.0)) {
    throw std::invalid_argument("period and bin width must be positive");
  }
  Histogram h;
  h.bin_edges_ns = uniform_edges(0.0, rep_period_ns, bin_ns);
  h.bin_edges_ns.back() = std::max(h.bin_edges_ns.back(), rep_period_ns);
  h.counts.assign(h.bin_edges_ns.size() - 1, 0);
  const double w = bin_ns;
  for (const auto& c : clicks) {
    if (c.channel != channel) continue;
    const double t = c.time_ns - std::floor(c.time_ns / rep_period_ns) * rep_period_ns;
    auto i = static_cast<std::size_t>(t / w);
    if (i >= h.counts.size()) i = h.counts.size() - 1;
    ++h.counts[i];
    ++h.n_starts;
  }
  if (h.n_starts == 0) throw std::invalid_argument("no clicks in the requested channel");
  h.duration_ns = rep_period_ns;
  return h;
}

std::vector<double> times_of(const ClickStream& clicks, ChannelLabel channel) {
  std::vector<double> t;
  for (const auto& c : clicks) {
    if (c.channel == channel) t.push_back(c.time_ns);
  }
  std::sort(t.begin(), t.end());
  return t;
}

}  // namespace qdc::trajectories
