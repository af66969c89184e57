#include "qdcavity/levenberg_marquardt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qdc::fit {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double FitResult::value(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return values[i];
  }
  throw std::out_of_range("no fit parameter named '" + std::string(name) + "'");
}

double FitResult::stderr_of(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return stderrs[i];
  }
  throw std::out_of_range("no fit parameter named '" + std::string(name) + "'");
}

MatrixXd numerical_jacobian(const std::function<VectorXd(const VectorXd&)>& f,
                            const VectorXd& x, double rel) {
  const VectorXd f0 = f(x);
  MatrixXd j(f0.size(), x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double h = rel * std::max(std::abs(x[k]), 1e-2);
    VectorXd xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    j.col(k) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return j;
}

namespace {

// Local quadratic model of a cost: cost ~ c + 2 grad.dx + dx.normal.dx, with
// normal = Jw^T Jw and grad = Jw^T rw for weighted residuals rw.
struct Linearization {
  double cost = 0.0;
  VectorXd grad;
  MatrixXd normal;
  double rw_norm = 0.0;
};

double scaled_gradient(const Linearization& lin, double r_floor) {
  const double rn = std::max(lin.rw_norm, r_floor);
  if (rn == 0.0) return 0.0;
  double g = 0.0;
  for (Eigen::Index k = 0; k < lin.grad.size(); ++k) {
    const double cn = std::sqrt(std::max(lin.normal(k, k), 0.0));
    if (cn == 0.0) continue;
    g = std::max(g, std::abs(lin.grad[k]) / (cn * rn));
  }
  return g;
}

double relative_step(const VectorXd& step, const VectorXd& x) {
  double r = 0.0;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    r = std::max(r, std::abs(step[k]) / (std::abs(x[k]) + 1e-12));
  }
  return r;
}

struct Core {
  std::vector<std::string> names;
  std::vector<bool> fixed;
  std::size_t n_data = 0;
  std::function<double(const VectorXd&)> cost;           // full parameter vector
  std::function<Linearization(const VectorXd&)> linearize;  // free-parameter columns only
  bool scale_covariance = true;
};

std::vector<Eigen::Index> free_indices(const std::vector<bool>& fixed, Eigen::Index n_all) {
  std::vector<Eigen::Index> free;
  for (Eigen::Index k = 0; k < n_all; ++k) {
    if (fixed.empty() || !fixed[static_cast<std::size_t>(k)]) free.push_back(k);
  }
  return free;
}

FitResult run_core(const Core& core, const VectorXd& init, const std::vector<Eigen::Index>& free,
                   const Options& opt) {
  const auto n_all = init.size();
  const auto n = static_cast<Eigen::Index>(free.size());
  auto expand = [&](const VectorXd& xf) {
    VectorXd x = init;
    for (Eigen::Index k = 0; k < n; ++k) x[free[k]] = xf[k];
    return x;
  };

  VectorXd x(n);
  for (Eigen::Index k = 0; k < n; ++k) x[k] = init[free[k]];
  double cost = core.cost(expand(x));
  if (!std::isfinite(cost)) throw std::domain_error("fit objective is not finite at the initial point");
  if (static_cast<Eigen::Index>(core.n_data) < n) {
    throw std::invalid_argument("fewer data points than free parameters");
  }

  FitResult out;
  out.residual_history.push_back(std::sqrt(cost));
  Linearization lin = core.linearize(expand(x));
  const double r_floor = 1e-6 * lin.rw_norm;
  double lambda = opt.initial_damping;
  bool stop = false;
  int it = 0;
  for (; it < opt.max_iterations && !stop; ++it) {
    if (n == 0 || scaled_gradient(lin, r_floor) < opt.gtol) {
      out.message = "gradient tolerance reached";
      break;
    }
    VectorXd diag = lin.normal.diagonal();
    const double dmax = diag.maxCoeff();
    for (Eigen::Index k = 0; k < n; ++k) diag[k] = std::max(diag[k], 1e-12 * dmax + 1e-300);

    bool accepted = false;
    for (int inner = 0; inner < 60; ++inner) {
      MatrixXd a = lin.normal;
      a.diagonal() += lambda * diag;
      const VectorXd step = a.ldlt().solve(-lin.grad);
      const VectorXd x_new = x + step;
      double cost_new = step.allFinite() ? core.cost(expand(x_new))
                                         : std::numeric_limits<double>::infinity();
      if (!std::isfinite(cost_new)) cost_new = std::numeric_limits<double>::infinity();
      if (cost_new < cost) {
        const double reduction = (cost - cost_new) / std::max(cost, 1e-300);
        const bool small_step = relative_step(step, x) < opt.xtol;
        x = x_new;
        cost = cost_new;
        out.residual_history.push_back(std::sqrt(cost));
        lambda = std::max(lambda / opt.damping_factor, 1e-15);
        lin = core.linearize(expand(x));
        accepted = true;
        if (reduction < opt.ftol) {
          out.message = "relative reduction below tolerance";
          stop = true;
        } else if (small_step) {
          out.message = "step below tolerance";
          stop = true;
        }
        break;
      }
      lambda *= opt.damping_factor;
      if (relative_step(step, x) < opt.xtol) break;
    }
    if (!accepted) {
      out.message = "no downhill step found";
      ++it;
      break;
    }
  }
  if (it >= opt.max_iterations && out.message.empty()) out.message = "maximum iterations reached";

  out.names = core.names;
  const VectorXd xfull = expand(x);
  out.values.assign(xfull.data(), xfull.data() + n_all);
  out.residual_norm = std::sqrt(cost);
  out.gradient_norm = n == 0 ? 0.0 : scaled_gradient(lin, r_floor);
  out.n_iterations = it;
  out.converged = out.gradient_norm < opt.gtol;

  // Covariance from the pseudo-inverse of the normal matrix after scaling it
  // to unit diagonal; unidentifiable directions get infinite variance.
  out.covariance = MatrixXd::Zero(n_all, n_all);
  out.stderrs.assign(static_cast<std::size_t>(n_all), 0.0);
  if (n > 0) {
    const VectorXd d = lin.normal.diagonal().cwiseMax(0.0).cwiseSqrt();
    VectorXd d_inv(n);
    for (Eigen::Index k = 0; k < n; ++k) d_inv[k] = d[k] > 0.0 ? 1.0 / d[k] : 0.0;
    const MatrixXd scaled = d_inv.asDiagonal() * lin.normal * d_inv.asDiagonal();
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(scaled);
    const VectorXd ev = es.eigenvalues();
    const MatrixXd v = es.eigenvectors();
    const auto m = static_cast<Eigen::Index>(core.n_data);
    const double s2 = core.scale_covariance && m > n ? cost / static_cast<double>(m - n) : 1.0;
    MatrixXd cov = MatrixXd::Zero(n, n);
    std::vector<bool> unidentified(static_cast<std::size_t>(n), false);
    for (Eigen::Index k = 0; k < n; ++k) {
      if (d[k] == 0.0) unidentified[static_cast<std::size_t>(k)] = true;
    }
    for (Eigen::Index k = 0; k < n; ++k) {
      if (ev[k] > 1e-12) {
        cov += (v.col(k) * v.col(k).transpose()) / ev[k];
      } else {
        for (Eigen::Index q = 0; q < n; ++q) {
          if (std::abs(v(q, k)) > 1e-6) unidentified[static_cast<std::size_t>(q)] = true;
        }
      }
    }
    cov = s2 * (d_inv.asDiagonal() * cov * d_inv.asDiagonal());
    for (Eigen::Index a = 0; a < n; ++a) {
      for (Eigen::Index b = 0; b < n; ++b) out.covariance(free[a], free[b]) = cov(a, b);
      out.stderrs[static_cast<std::size_t>(free[a])] =
          unidentified[static_cast<std::size_t>(a)] ? std::numeric_limits<double>::infinity()
                                                    : std::sqrt(std::max(cov(a, a), 0.0));
    }
    if (std::find(unidentified.begin(), unidentified.end(), true) != unidentified.end()) {
      out.warnings.push_back("singular normal matrix: some parameters are unidentifiable");
    }
  }
  return out;
}

MatrixXd free_columns(const MatrixXd& full, const std::vector<Eigen::Index>& free) {
  MatrixXd j(full.rows(), static_cast<Eigen::Index>(free.size()));
  for (std::size_t k = 0; k < free.size(); ++k) j.col(static_cast<Eigen::Index>(k)) = full.col(free[k]);
  return j;
}

// Jacobian with respect to the free parameters only.
MatrixXd fd_free(const std::function<VectorXd(const VectorXd&)>& f, const VectorXd& x,
                 const std::vector<Eigen::Index>& free, double rel) {
  const VectorXd f0 = f(x);
  MatrixXd j(f0.size(), static_cast<Eigen::Index>(free.size()));
  for (std::size_t c = 0; c < free.size(); ++c) {
    const Eigen::Index k = free[c];
    const double h = rel * std::max(std::abs(x[k]), 1e-2);
    VectorXd xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    j.col(static_cast<Eigen::Index>(c)) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return j;
}

void check_names(const std::vector<std::string>& names, Eigen::Index n) {
  if (static_cast<Eigen::Index>(names.size()) != n) {
    throw std::invalid_argument("parameter name count does not match initial vector");
  }
}

}  // namespace

FitResult levenberg_marquardt(const Problem& problem, const VectorXd& init, const Options& opt) {
  if (!problem.residuals) throw std::invalid_argument("problem has no residual function");
  check_names(problem.names, init.size());
  const auto free = free_indices(problem.fixed, init.size());
  Core core;
  core.names = problem.names;
  core.fixed = problem.fixed;
  core.scale_covariance = opt.scale_covariance;
  core.n_data = static_cast<std::size_t>(problem.residuals(init).size());
  core.cost = [&](const VectorXd& x) {
    const VectorXd r = problem.residuals(x);
    return r.allFinite() ? r.squaredNorm() : std::numeric_limits<double>::infinity();
  };
  core.linearize = [&](const VectorXd& x) {
    const VectorXd r = problem.residuals(x);
    const MatrixXd j = problem.jacobian ? free_columns(problem.jacobian(x), free)
                                        : fd_free(problem.residuals, x, free, opt.fd_relative_step);
    Linearization lin;
    lin.cost = r.squaredNorm();
    lin.grad = j.transpose() * r;
    lin.normal = j.transpose() * j;
    lin.rw_norm = r.norm();
    return lin;
  };
  return run_core(core, init, free, opt);
}

FitResult poisson_levenberg_marquardt(const PoissonProblem& problem, const VectorXd& init,
                                      const Options& opt) {
  if (!problem.expected) throw std::invalid_argument("problem has no expected-count function");
  check_names(problem.names, init.size());
  const auto free = free_indices(problem.fixed, init.size());
  const VectorXd& n = problem.counts;
  if ((n.array() < 0.0).any()) throw std::invalid_argument("counts must be non-negative");
  Core core;
  core.names = problem.names;
  core.fixed = problem.fixed;
  core.scale_covariance = false;
  core.n_data = static_cast<std::size_t>(n.size());
  auto deviance = [&](const VectorXd& mu) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (mu.size() != n.size() || !mu.allFinite()) return inf;
    double d = 0.0;
    for (Eigen::Index i = 0; i < n.size(); ++i) {
      if (mu[i] < 0.0 || (mu[i] == 0.0 && n[i] > 0.0)) return inf;
      d += mu[i] - n[i] + (n[i] > 0.0 ? n[i] * std::log(n[i] / mu[i]) : 0.0);
    }
    return 2.0 * d;
  };
  core.cost = [&](const VectorXd& x) { return deviance(problem.expected(x)); };
  core.linearize = [&](const VectorXd& x) {
    const VectorXd mu = problem.expected(x);
    const MatrixXd j = fd_free(problem.expected, x, free, opt.fd_relative_step);
    // Weighted residual (mu - n) / sqrt(mu) with Jacobian J / sqrt(mu) gives
    // the Fisher-scoring quadratic model of the deviance.
    VectorXd w(mu.size());
    for (Eigen::Index i = 0; i < mu.size(); ++i) w[i] = mu[i] > 0.0 ? 1.0 / std::sqrt(mu[i]) : 0.0;
    const VectorXd rw = (mu - n).cwiseProduct(w);
    const MatrixXd jw = w.asDiagonal() * j;
    Linearization lin;
    lin.cost = deviance(mu);
    lin.grad = jw.transpose() * rw;
    lin.normal = jw.transpose() * jw;
    lin.rw_norm = rw.norm();
    return lin;
  };
  return run_core(core, init, free, opt);
}

}  // namespace qdc::fit
