#pragma once

#include <complex>
#include <map>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qdcavity/hilbert.hpp"
#include "qdcavity/params.hpp"
#include "qdcavity/spectrum.hpp"

// Lindblad master equation: propagation, steady state, and two-time
// correlations through the quantum regression theorem.

namespace qdc::dynamics {

using DensityMatrix = Eigen::MatrixXcd;
using hilbert::Operator;

/// Column-stacking vectorization, vec(A X B) = (B^T (x) A) vec(X).
Eigen::VectorXcd vec(const Eigen::MatrixXcd& m);
Eigen::MatrixXcd unvec(const Eigen::VectorXcd& v, int dim);

/// Superoperator of d rho/dt = -i[H, rho] + sum_k D[L_k] rho (rad/ns).
class Liouvillian {
 public:
  Liouvillian(const Operator& hamiltonian, const std::vector<hilbert::CollapseChannel>& channels);

  int dim() const { return dim_; }
  const Eigen::MatrixXcd& matrix() const { return super_; }

  /// Upper bound on the magnitude of any generator eigenvalue, in 1/ns:
  /// spread(H) + 2 sum_k ||L_k||^2.
  double rate_bound() const { return rate_bound_; }

 private:
  int dim_ = 0;
  Eigen::MatrixXcd super_;
  double rate_bound_ = 0.0;
};

/// Everything needed to propagate one parameter point.
struct OpenSystem {
  SystemParams params;
  units::Detuning detuning;
  hilbert::Space space;
  Operator hamiltonian;
  std::vector<hilbert::CollapseChannel> channels;
  Liouvillian liouvillian;

  static OpenSystem build(const SystemParams& p, const units::Detuning& d);
  static OpenSystem build(const SystemParams& p) { return build(p, p.detuning()); }
};

struct StepControl {
  double steps_per_efold = 20.0;  ///< h <= 1 / (steps_per_efold * rate_bound)
  double min_step_ns = 1e-12;
};

/// Fixed-step fourth-order Runge-Kutta on the vectorized density matrix. For a
/// linear autonomous generator one RK4 step is the matrix
/// 1 + hL + (hL)^2/2 + (hL)^3/6 + (hL)^4/24; maps over longer intervals are its
/// integer powers. Interval maps are cached, so uniform output grids cost one
/// map construction.
class Propagator {
 public:
  explicit Propagator(const Liouvillian& l, const StepControl& ctl = {});

  double max_step_ns() const { return max_step_; }
  /// Propagation map over dt (dt >= 0).
  const Eigen::MatrixXcd& map(double dt);
  Eigen::VectorXcd advance(const Eigen::VectorXcd& x, double dt) { return map(dt) * x; }

 private:
  const Liouvillian* l_;
  double max_step_;
  std::map<double, Eigen::MatrixXcd> cache_;
};

struct EvolveOptions {
  StepControl step;
  double trace_tolerance = 1e-8;
};

/// rho0 is the state at t = 0; returns rho(t) for every t in t_grid
/// (non-decreasing, >= 0). Throws NumericError on trace drift above tolerance.
std::vector<DensityMatrix> evolve(const OpenSystem& sys, const DensityMatrix& rho0,
                                  std::span<const double> t_grid,
                                  const EvolveOptions& opt = {});

/// Null vector of the generator normalized to unit trace; residual checked
/// against 1e-10. Throws NumericError if the null space is degenerate.
DensityMatrix steady_state(const Liouvillian& l);
DensityMatrix steady_state(const OpenSystem& sys);

double expectation(const DensityMatrix& rho, const Operator& op);

/// Projector |level, n><level, n| as a density matrix.
DensityMatrix basis_state(const hilbert::Space& s, int level, int n);

enum class Source { cavity, exciton };

struct SpectrumOptions {
  Source source = Source::cavity;
  double cutoff = 1e-8;       ///< stop when |C(tau)| < cutoff * |C(0)|
  double max_tau_ns = 500.0;  ///< hard limit on the correlation window
  StepControl step;
};

struct EmissionSpectrum {
  Spectrum spectrum;        ///< absolute frequency axis, unit peak
  double tau_cutoff_ns = 0.0;
  bool under_resolved = false;  ///< grid spacing at a peak exceeds the narrowest HWHM
};

/// S(nu) = Re int_0^inf exp(-2 pi i (nu - nu_m) tau) <A^dag(tau) A(0)>_ss dtau,
/// A = a or sigma, by regression propagation of A rho_ss and trapezoidal
/// quadrature at the propagation step.
EmissionSpectrum emission_spectrum(const OpenSystem& sys, std::span<const double> grid_GHz,
                                   const SpectrumOptions& opt = {});

struct CorrelationTrace {
  std::vector<double> tau_ns;
  std::vector<std::complex<double>> values;
  double normalization = 0.0;  ///< denominator applied to the raw correlation
};

/// <S^dag(0) T^dag(tau) T(tau) S(0)> / (<S^dag S><T^dag T>) for tau >= 0 from a
/// generic generator and state.
CorrelationTrace intensity_correlation(const Liouvillian& l, const DensityMatrix& rho,
                                       const Operator& start, const Operator& stop,
                                       std::span<const double> tau_ns,
                                       const StepControl& step = {});

/// Autocorrelation of the cavity (or exciton) photon stream; tau >= 0.
CorrelationTrace g2_auto(const OpenSystem& sys, std::span<const double> tau_ns,
                         Source source = Source::cavity);

/// Exciton/mode cross-correlation on a two-sided grid. tau > 0: a cavity photon
/// starts, an exciton photon stops; tau < 0: roles swapped.
CorrelationTrace g2_cross(const OpenSystem& sys, std::span<const double> tau_ns);

}  // namespace qdc::dynamics
