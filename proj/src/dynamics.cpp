#include "qdcavity/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <unsupported/Eigen/KroneckerProduct>

#include "qdcavity/error.hpp"
#include "qdcavity/polariton.hpp"

namespace qdc::dynamics {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using cd = std::complex<double>;

VectorXcd vec(const MatrixXcd& m) {
  return Eigen::Map<const VectorXcd>(m.data(), m.size());
}

MatrixXcd unvec(const VectorXcd& v, int dim) {
  return Eigen::Map<const MatrixXcd>(v.data(), dim, dim);
}

namespace {

double spectral_radius_hermitian(const MatrixXcd& h) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double hermitian_spread(const MatrixXcd& h) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff() - es.eigenvalues().minCoeff();
}

// Row vector w with w . vec(X) = Tr[B X].
Eigen::RowVectorXcd trace_functional(const MatrixXcd& b) {
  MatrixXcd bt = b.transpose();
  return vec(bt).transpose();
}

cd trace_with(const Eigen::RowVectorXcd& w, const VectorXcd& x) { return w * x; }

}  // namespace

Liouvillian::Liouvillian(const Operator& h,
                         const std::vector<hilbert::CollapseChannel>& channels)
    : dim_(static_cast<int>(h.rows())) {
  const int d = dim_;
  const MatrixXcd id = MatrixXcd::Identity(d, d);
  const cd i{0.0, 1.0};
  super_ = -i * (Eigen::kroneckerProduct(id, h).eval() -
                 Eigen::kroneckerProduct(h.transpose(), id).eval());
  rate_bound_ = hermitian_spread(h);
  for (const auto& c : channels) {
    if (c.rate_GHz == 0.0) continue;
    if (c.op.rows() != d || c.op.cols() != d) {
      throw std::invalid_argument("collapse operator dimension mismatch");
    }
    const MatrixXcd ldl = c.op.adjoint() * c.op;
    super_ += Eigen::kroneckerProduct(c.op.conjugate(), c.op).eval();
    super_ -= 0.5 * Eigen::kroneckerProduct(id, ldl).eval();
    super_ -= 0.5 * Eigen::kroneckerProduct(ldl.transpose(), id).eval();
    rate_bound_ += 2.0 * spectral_radius_hermitian(ldl);
  }
}

OpenSystem OpenSystem::build(const SystemParams& p, const units::Detuning& d) {
  p.validate();
  hilbert::Space space = hilbert::build_space(p);
  Operator h = hilbert::hamiltonian(space, p, d);
  auto channels = hilbert::collapse_channels(space, p);
  Liouvillian l(h, channels);
  return OpenSystem{p, d, std::move(space), std::move(h), std::move(channels), std::move(l)};
}

Propagator::Propagator(const Liouvillian& l, const StepControl& ctl) : l_(&l) {
  const double bound = l.rate_bound();
  max_step_ = bound > 0.0 ? 1.0 / (ctl.steps_per_efold * bound)
                          : std::numeric_limits<double>::infinity();
  if (max_step_ < ctl.min_step_ns) {
    std::ostringstream msg;
    msg << "step size underflow: rate bound " << bound << " /ns requires step " << max_step_
        << " ns < minimum " << ctl.min_step_ns << " ns";
    throw NumericError(msg.str());
  }
}

const MatrixXcd& Propagator::map(double dt) {
  if (!(dt >= 0.0)) throw std::invalid_argument("propagation interval must be >= 0");
  if (auto it = cache_.find(dt); it != cache_.end()) return it->second;
  if (cache_.size() > 64) cache_.clear();

  const auto n = l_->matrix().rows();
  MatrixXcd result = MatrixXcd::Identity(n, n);
  if (dt > 0.0 && l_->rate_bound() > 0.0) {
    const double steps = std::max(1.0, std::ceil(dt / max_step_));
    auto m = static_cast<unsigned long long>(steps);
    const MatrixXcd hl = (dt / steps) * l_->matrix();
    // Horner form of the degree-4 Taylor polynomial.
    MatrixXcd step = MatrixXcd::Identity(n, n) + hl / 4.0;
    step = MatrixXcd::Identity(n, n) + (hl * step) / 3.0;
    step = MatrixXcd::Identity(n, n) + (hl * step) / 2.0;
    step = MatrixXcd::Identity(n, n) + hl * step;
    MatrixXcd base = step;
    bool first = true;
    while (m > 0) {
      if (m & 1ULL) {
        result = first ? base : (base * result).eval();
        first = false;
      }
      m >>= 1ULL;
      if (m > 0) base = (base * base).eval();
    }
  }
  return cache_.emplace(dt, std::move(result)).first->second;
}

double expectation(const DensityMatrix& rho, const Operator& op) {
  return (op * rho).trace().real();
}

DensityMatrix basis_state(const hilbert::Space& s, int level, int n) {
  DensityMatrix rho = DensityMatrix::Zero(s.dim, s.dim);
  rho(s.index(level, n), s.index(level, n)) = 1.0;
  return rho;
}

std::vector<DensityMatrix> evolve(const OpenSystem& sys, const DensityMatrix& rho0,
                                  std::span<const double> t_grid, const EvolveOptions& opt) {
  const int d = sys.liouvillian.dim();
  if (rho0.rows() != d || rho0.cols() != d) {
    throw std::invalid_argument("initial state dimension mismatch");
  }
  const double trace0 = rho0.trace().real();
  if (std::abs(trace0 - 1.0) > 1e-8) throw std::invalid_argument("initial state must have unit trace");

  Propagator prop(sys.liouvillian, opt.step);
  std::vector<DensityMatrix> out;
  out.reserve(t_grid.size());
  VectorXcd x = vec(rho0);
  double t = 0.0;
  for (double target : t_grid) {
    if (target < t) throw std::invalid_argument("time grid must be non-decreasing and >= 0");
    x = prop.advance(x, target - t);
    t = target;
    DensityMatrix rho = unvec(x, d);
    const double drift = std::abs(rho.trace().real() - trace0);
    if (drift > opt.trace_tolerance) {
      std::ostringstream msg;
      msg << "trace drift " << drift << " at t = " << t << " ns (step "
          << prop.max_step_ns() << " ns)";
      throw NumericError(msg.str());
    }
    out.push_back(std::move(rho));
  }
  return out;
}

DensityMatrix steady_state(const Liouvillian& l) {
  const int d = l.dim();
  const MatrixXcd& m = l.matrix();
  const auto n = m.rows();

  Eigen::FullPivLU<MatrixXcd> rank_check(m);
  if (rank_check.rank() < n - 1) {
    throw NumericError("degenerate null space: the generator has " +
                       std::to_string(n - rank_check.rank()) + " stationary states");
  }
  MatrixXcd a = m;
  VectorXcd b = VectorXcd::Zero(n);
  a.row(0).setZero();
  for (int k = 0; k < d; ++k) a(0, k * d + k) = 1.0;
  b(0) = 1.0;
  VectorXcd x = a.partialPivLu().solve(b);

  const double residual = (m * x).cwiseAbs().maxCoeff();
  if (residual > 1e-10) {
    throw NumericError("steady-state residual " + std::to_string(residual) + " exceeds 1e-10");
  }
  DensityMatrix rho = unvec(x, d);
  return 0.5 * (rho + rho.adjoint());
}

DensityMatrix steady_state(const OpenSystem& sys) { return steady_state(sys.liouvillian); }

EmissionSpectrum emission_spectrum(const OpenSystem& sys, std::span<const double> grid,
                                   const SpectrumOptions& opt) {
  if (grid.empty()) throw std::invalid_argument("empty frequency grid");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw std::invalid_argument("grid must be strictly ascending");
  }
  const DensityMatrix rho = steady_state(sys);
  const Operator& op = opt.source == Source::cavity ? sys.space.a : sys.space.sigma;
  const Operator opd = op.adjoint();

  const double nu_m = sys.params.cavity_frequency_GHz();
  double max_offset = 0.0;
  for (double nu : grid) max_offset = std::max(max_offset, std::abs(nu - nu_m));

  Propagator prop(sys.liouvillian, opt.step);
  double h = prop.max_step_ns();
  if (max_offset > 0.0) h = std::min(h, 0.1 / (units::kTwoPi * max_offset));
  if (!std::isfinite(h)) throw std::domain_error("generator is zero; no emission dynamics");

  const Eigen::RowVectorXcd w = trace_functional(opd);
  VectorXcd x = vec(op * rho);
  const cd c0 = trace_with(w, x);
  if (std::abs(c0) <= 0.0) throw std::domain_error("no emission: <A^dag A> is zero");

  std::vector<cd> corr{c0};
  const MatrixXcd& step = prop.map(h);
  const auto max_samples = static_cast<std::size_t>(std::ceil(opt.max_tau_ns / h));
  // Require the cutoff to hold over a short run so that zero crossings of an
  // oscillating correlation do not end the window early.
  int below = 0;
  while (corr.size() < max_samples) {
    x = step * x;
    corr.push_back(trace_with(w, x));
    below = std::abs(corr.back()) < opt.cutoff * std::abs(c0) ? below + 1 : 0;
    if (below >= 16) break;
  }

  EmissionSpectrum out;
  out.tau_cutoff_ns = h * static_cast<double>(corr.size() - 1);
  Spectrum& s = out.spectrum;
  s.axis = Axis::frequency_GHz;
  s.x.assign(grid.begin(), grid.end());
  s.y.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double phase = -units::kTwoPi * (grid[i] - nu_m) * h;
    const cd rot{std::cos(phase), std::sin(phase)};
    cd z{1.0, 0.0};
    cd acc = 0.5 * corr[0];
    for (std::size_t j = 1; j < corr.size(); ++j) {
      z *= rot;
      acc += corr[j] * z;
    }
    s.y[i] = h * acc.real();
  }
  normalize_peak(s);

  const auto modes = polariton::eigenmodes(sys.params, sys.detuning);
  double narrowest = std::min(modes.hwhm_plus_GHz, modes.hwhm_minus_GHz);
  if (sys.params.g_GHz == 0.0) {
    narrowest = opt.source == Source::cavity ? 0.5 * sys.params.gamma_m_GHz
                                             : 0.5 * sys.params.gamma_x_GHz;
  }
  for (const auto& pk : find_peaks(s, 1e-3)) {
    auto it = std::lower_bound(s.x.begin(), s.x.end(), pk.position);
    const auto k = static_cast<std::size_t>(std::distance(s.x.begin(), it));
    const double lo = s.x[k == 0 ? 0 : k - 1];
    const double hi = s.x[std::min(k, s.x.size() - 1)];
    if (hi - lo > narrowest) out.under_resolved = true;
  }
  return out;
}

CorrelationTrace intensity_correlation(const Liouvillian& l, const DensityMatrix& rho,
                                       const Operator& start, const Operator& stop,
                                       std::span<const double> tau_ns,
                                       const StepControl& ctl) {
  const double n_start = expectation(rho, start.adjoint() * start);
  const double n_stop = expectation(rho, stop.adjoint() * stop);
  const double norm = n_start * n_stop;
  if (!(norm > 0.0)) throw std::domain_error("zero denominator: no emission in a correlated stream");

  Propagator prop(l, ctl);
  const Eigen::RowVectorXcd w = trace_functional(stop.adjoint() * stop);
  VectorXcd x = vec(start * rho * start.adjoint());
  CorrelationTrace out;
  out.normalization = norm;
  double t = 0.0;
  for (double tau : tau_ns) {
    if (tau < t) throw std::invalid_argument("delay grid must be non-decreasing and >= 0");
    x = prop.advance(x, tau - t);
    t = tau;
    out.tau_ns.push_back(tau);
    out.values.push_back(trace_with(w, x) / norm);
  }
  return out;
}

CorrelationTrace g2_auto(const OpenSystem& sys, std::span<const double> tau_ns, Source source) {
  const DensityMatrix rho = steady_state(sys);
  const Operator& op = source == Source::cavity ? sys.space.a : sys.space.sigma;
  return intensity_correlation(sys.liouvillian, rho, op, op, tau_ns);
}

CorrelationTrace g2_cross(const OpenSystem& sys, std::span<const double> tau_ns) {
  const DensityMatrix rho = steady_state(sys);
  std::vector<double> neg, pos;
  for (std::size_t i = 0; i < tau_ns.size(); ++i) {
    if (i > 0 && !(tau_ns[i] > tau_ns[i - 1])) {
      throw std::invalid_argument("delay grid must be strictly increasing");
    }
    (tau_ns[i] < 0.0 ? neg : pos).push_back(tau_ns[i]);
  }
  std::vector<double> neg_abs(neg.rbegin(), neg.rend());
  for (double& t : neg_abs) t = -t;

  const auto& s = sys.space;
  CorrelationTrace out;
  if (!neg_abs.empty()) {
    auto back = intensity_correlation(sys.liouvillian, rho, s.sigma, s.a, neg_abs);
    out.normalization = back.normalization;
    for (std::size_t i = neg_abs.size(); i-- > 0;) {
      out.tau_ns.push_back(-neg_abs[i]);
      out.values.push_back(back.values[i]);
    }
  }
  if (!pos.empty()) {
    auto fwd = intensity_correlation(sys.liouvillian, rho, s.a, s.sigma, pos);
    out.normalization = fwd.normalization;
    out.tau_ns.insert(out.tau_ns.end(), fwd.tau_ns.begin(), fwd.tau_ns.end());
    out.values.insert(out.values.end(), fwd.values.begin(), fwd.values.end());
  }
  return out;
}

}  // namespace qdc::dynamics
