#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace qdc::fit {

/// Nonlinear least-squares problem: minimize ||r(x)||^2.
struct Problem {
  std::vector<std::string> names;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> residuals;
  /// Optional analytic Jacobian dr/dx; central differences are used when empty.
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> jacobian;
  /// Parameters held at their initial value. Empty means all free.
  std::vector<bool> fixed;
};

struct Options {
  int max_iterations = 500;
  double initial_damping = 1e-3;
  double damping_factor = 10.0;
  /// Convergence on the scaled gradient max_j |J_j . r| / (|J_j| max(|r|, 1e-6 |r_0|)),
  /// r_0 the initial residual; the floor makes exact fits count as converged.
  double gtol = 1e-6;
  double xtol = 1e-12;
  double ftol = 1e-15;
  double fd_relative_step = 1e-6;
  /// Multiply the covariance by ||r||^2 / (m - n). Off for residuals that are
  /// already normalized by their standard deviation.
  bool scale_covariance = true;
};

struct FitResult {
  std::vector<std::string> names;
  std::vector<double> values;
  std::vector<double> stderrs;
  double residual_norm = 0.0;
  double gradient_norm = 0.0;
  int n_iterations = 0;
  bool converged = false;
  std::string message;
  std::vector<std::string> warnings;
  /// ||r|| after every accepted step, starting with the initial point.
  std::vector<double> residual_history;
  Eigen::MatrixXd covariance;

  /// Throws std::out_of_range for unknown names.
  double value(std::string_view name) const;
  double stderr_of(std::string_view name) const;
};

FitResult levenberg_marquardt(const Problem& problem, const Eigen::VectorXd& init,
                              const Options& opt = {});

/// Poisson maximum likelihood: minimizes the deviance
/// 2 sum [mu - n + n ln(n / mu)] of expected counts mu(x) against observed n.
/// Steps use the Fisher information J^T diag(1/mu) J of the expected-count
/// Jacobian; the covariance is its inverse. Steps giving mu < 0, or mu = 0 where
/// n > 0, are rejected.
struct PoissonProblem {
  std::vector<std::string> names;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> expected;
  Eigen::VectorXd counts;
  std::vector<bool> fixed;
};

FitResult poisson_levenberg_marquardt(const PoissonProblem& problem, const Eigen::VectorXd& init,
                                      const Options& opt = {});

/// Central-difference Jacobian with step rel * max(|x_j|, 1e-2).
Eigen::MatrixXd numerical_jacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
    double rel);

}  // namespace qdc::fit
