#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

#include <Eigen/Dense>

#include "doctest.h"
#include "gen.hpp"
#include "qdcavity/dynamics.hpp"
#include "qdcavity/polariton.hpp"

using namespace qdc;
using namespace qdc::dynamics;
using cd = std::complex<double>;

namespace {

SystemParams quiet() {
  SystemParams p;
  p.pump_GHz = 0.0;
  p.transfer_GHz = 0.0;
  return p;
}

void check_physical(const DensityMatrix& rho) {
  CHECK((rho - rho.adjoint()).norm() < 1e-10);
  CHECK(std::abs(rho.trace() - 1.0) < 1e-8);
  const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<DensityMatrix>(0.5 * (rho + rho.adjoint())).eigenvalues();
  CHECK(ev.minCoeff() > -1e-8);
}

}  // namespace

TEST_CASE("empty cavity photon decays at gamma_m") {
  auto p = quiet();
  p.g_GHz = 0.0;
  const auto sys = OpenSystem::build(p);
  const double half = std::log(2.0) / (units::kTwoPi * 24.1);
  const std::vector<double> t = {0.0, half, 2 * half, 0.05};
  const auto rho = evolve(sys, basis_state(sys.space, 0, 1), t);
  CHECK(expectation(rho[1], sys.space.photon_number) == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(expectation(rho[2], sys.space.photon_number) == doctest::Approx(0.25).epsilon(1e-8));
  CHECK(expectation(rho[3], sys.space.photon_number) ==
        doctest::Approx(std::exp(-units::kTwoPi * 24.1 * 0.05)).epsilon(1e-7));
}

TEST_CASE("uncoupled exciton decays at gamma_b") {
  auto p = quiet();
  p.g_GHz = 0.0;
  p.gamma_b_GHz = 0.5;
  const auto sys = OpenSystem::build(p);
  const std::vector<double> t = {0.1, 0.3, 1.0};
  const auto rho = evolve(sys, basis_state(sys.space, 1, 0), t);
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(expectation(rho[i], sys.space.exciton_projector) ==
          doctest::Approx(std::exp(-units::kTwoPi * 0.5 * t[i])).epsilon(1e-8));
  }
}

TEST_CASE("zero generator leaves the state unchanged") {
  SystemParams p;
  p.g_GHz = p.gamma_x_GHz = p.gamma_m_GHz = p.gamma_b_GHz = p.pump_GHz = 0.0;
  const auto sys = OpenSystem::build(p, units::Detuning::from_GHz(0.0, p.lambda_m_nm));
  DensityMatrix rho0 = 0.5 * basis_state(sys.space, 1, 2) + 0.5 * basis_state(sys.space, 0, 1);
  rho0(sys.space.index(1, 2), sys.space.index(0, 1)) = cd(0.2, 0.1);
  rho0(sys.space.index(0, 1), sys.space.index(1, 2)) = cd(0.2, -0.1);
  const std::vector<double> t = {0.0, 1.0, 100.0};
  for (const auto& r : evolve(sys, rho0, t)) CHECK((r - rho0).norm() == 0.0);
}

TEST_CASE("single-excitation dynamics match the damped Rabi solution") {
  auto p = quiet();
  p.n_max = 1;
  p.gamma_b_GHz = 0.2;
  p.gamma_x_GHz = 0.2;  // no pure dephasing: the no-jump evolution is exact
  const double dw = 13.0;
  const auto sys = OpenSystem::build(p, units::Detuning::from_GHz(dw, p.lambda_m_nm));
  // Closed form: amplitudes (c_m, c_x) evolve under i d/dt c = 2 pi M c.
  const cd a{0.0, -p.gamma_m_GHz / 2}, d{-dw, -p.gamma_x_GHz / 2};
  const double g = p.g_GHz;
  const cd mean = (a + d) / 2.0, root = std::sqrt(g * g + (a - d) * (a - d) / 4.0);
  const cd l1 = mean + root, l2 = mean - root;
  std::vector<double> t;
  for (int k = 0; k <= 40; ++k) t.push_back(0.005 * k);
  const auto rho = evolve(sys, basis_state(sys.space, 1, 0), t);
  for (std::size_t k = 0; k < t.size(); ++k) {
    const cd e1 = std::exp(cd(0, -units::kTwoPi) * l1 * t[k]);
    const cd e2 = std::exp(cd(0, -units::kTwoPi) * l2 * t[k]);
    // Starting in the exciton: c_x = ((l1 - a) e1 - (l2 - a) e2) / (l1 - l2), c_m = g (e1 - e2) / (l1 - l2).
    const cd cx = ((l1 - a) * e1 - (l2 - a) * e2) / (l1 - l2);
    const cd cm = g * (e1 - e2) / (l1 - l2);
    CHECK(std::abs(expectation(rho[k], sys.space.exciton_projector) - std::norm(cx)) < 1e-6);
    CHECK(std::abs(expectation(rho[k], sys.space.photon_number) - std::norm(cm)) < 1e-6);
  }
}

TEST_CASE("steady states") {
  SUBCASE("no pump gives the vacuum") {
    const auto sys = OpenSystem::build(quiet());
    const auto rho = steady_state(sys);
    CHECK(std::abs(rho(0, 0) - 1.0) < 1e-10);
  }
  SUBCASE("two-level rate equation") {
    SystemParams p;
    p.g_GHz = 0.0;
    p.gamma_b_GHz = p.gamma_x_GHz = 0.3;
    p.pump_GHz = 0.1;
    p.n_max = 1;
    const auto rho = steady_state(OpenSystem::build(p));
    CHECK(expectation(rho, hilbert::build_space(p).exciton_projector) == doctest::Approx(0.1 / 0.4).epsilon(1e-9));
  }
  SUBCASE("weak pump on resonance agrees with long-time evolution") {
    SystemParams p;
    p.g_GHz = 18.4;
    p.n_max = 3;
    const auto sys = OpenSystem::build(p, units::Detuning::from_GHz(0.0, p.lambda_m_nm));
    const auto rho = steady_state(sys);
    const std::vector<double> t = {500.0};
    const auto late = evolve(sys, basis_state(sys.space, 0, 0), t);
    CHECK((late[0] - rho).norm() < 1e-7);
    const double pop = expectation(rho, sys.space.exciton_projector);
    CHECK(pop < 1e-3);
    CHECK(pop > 0.0);
    check_physical(rho);
  }
}

TEST_CASE("emission spectrum") {
  SUBCASE("resonant doublet matches linear response") {
    SystemParams p;
    p.n_max = 3;
    const auto d = units::Detuning::from_GHz(0.0, p.lambda_m_nm);
    const auto sys = OpenSystem::build(p, d);
    const double nu = p.cavity_frequency_GHz();
    const auto grid = linspace(nu - 80, nu + 80, 3201);
    const auto es = emission_spectrum(sys, grid);
    const auto pk = find_peaks(es.spectrum, 0.3);
    REQUIRE(pk.size() == 2);
    // Linear-response oracle for an exciton-fed cavity: |g / ((w - w_m + i gm/2)(w - w_x + i gx'/2) - g^2)|^2,
    // with the pump adding to the exciton coherence decay.
    const double gx = p.gamma_x_GHz + p.pump_GHz;
    auto oracle = [&](double w) {
      const cd den = cd(w - nu, p.gamma_m_GHz / 2) * cd(w - nu, gx / 2) - p.g_GHz * p.g_GHz;
      return std::norm(p.g_GHz / den);
    };
    std::vector<double> ref;
    for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
      if (oracle(grid[i]) > oracle(grid[i - 1]) && oracle(grid[i]) >= oracle(grid[i + 1])) ref.push_back(grid[i]);
    }
    REQUIRE(ref.size() == 2);
    std::vector<double> pos = {pk[0].position, pk[1].position};
    std::sort(pos.begin(), pos.end());
    CHECK(std::abs(pos[0] - ref[0]) < 0.2);
    CHECK(std::abs(pos[1] - ref[1]) < 0.2);
    // Overlapping lines pull the apparent maxima inside the pole frequencies.
    const auto m = polariton::eigenmodes(p, d);
    CHECK(pos[1] - pos[0] < m.omega_plus_GHz - m.omega_minus_GHz);
    CHECK_FALSE(es.under_resolved);
  }
  SUBCASE("uncoupled exciton line has width gamma_x") {
    SystemParams p;
    p.g_GHz = 0.0;
    p.n_max = 1;
    const auto d = units::Detuning::from_GHz(30.0, p.lambda_m_nm);
    const auto sys = OpenSystem::build(p, d);
    const double nu_x = p.cavity_frequency_GHz() - 30.0;
    const auto grid = linspace(nu_x - 40, nu_x + 40, 8001);
    SpectrumOptions o;
    o.source = Source::exciton;
    const auto s = emission_spectrum(sys, grid, o).spectrum;
    const auto pk = find_peaks(s, 0.5);
    REQUIRE(pk.size() == 1);
    CHECK(pk[0].position == doctest::Approx(nu_x).epsilon(1e-9));
    double lo = 0, hi = 0;
    for (std::size_t i = 1; i < s.x.size(); ++i) {
      if (s.y[i - 1] < 0.5 && s.y[i] >= 0.5) lo = s.x[i - 1] + (0.5 - s.y[i - 1]) / (s.y[i] - s.y[i - 1]) * (s.x[i] - s.x[i - 1]);
      if (s.y[i - 1] >= 0.5 && s.y[i] < 0.5) hi = s.x[i - 1] + (s.y[i - 1] - 0.5) / (s.y[i - 1] - s.y[i]) * (s.x[i] - s.x[i - 1]);
    }
    // The incoherent pump adds its own rate to the coherence decay.
    CHECK(hi - lo == doctest::Approx(8.5 + 0.01).epsilon(0.02));
  }
  SUBCASE("far detuned cavity line with transfer feeding") {
    SystemParams p;
    p.transfer_GHz = 0.5;
    p.n_max = 2;
    const auto d = units::Detuning::from_nm(4.1, p.lambda_m_nm);
    const auto sys = OpenSystem::build(p, d);
    const double nu = p.cavity_frequency_GHz();
    const auto grid = linspace(nu - 60, nu + 60, 1201);
    const auto s = emission_spectrum(sys, grid).spectrum;
    const auto pk = find_peaks(s, 0.5);
    REQUIRE(!pk.empty());
    CHECK(std::abs(pk[0].position - nu) < 1.0);
  }
  SUBCASE("bad grids") {
    const auto sys = OpenSystem::build(SystemParams{});
    std::vector<double> empty, unsorted = {3.0, 2.0};
    CHECK_THROWS_AS(emission_spectrum(sys, empty), std::invalid_argument);
    CHECK_THROWS_AS(emission_spectrum(sys, unsorted), std::invalid_argument);
  }
}

TEST_CASE("intensity correlations") {
  SUBCASE("single two-level emitter antibunches") {
    SystemParams p;
    p.g_GHz = 0.0;
    p.n_max = 1;
    p.gamma_b_GHz = p.gamma_x_GHz = 0.2;
    const auto sys = OpenSystem::build(p);
    const auto tau = linspace(0.0, 5.0, 51);
    const auto tr = g2_auto(sys, tau, Source::exciton);
    CHECK(std::abs(tr.values[0]) < 1e-10);
    for (std::size_t i = 1; i < tau.size(); ++i) CHECK(tr.values[i].real() >= tr.values[i - 1].real() - 1e-12);
    // Analytic: g2 = 1 - exp(-2 pi (P + gamma_b) tau).
    CHECK(tr.values[10].real() == doctest::Approx(1 - std::exp(-units::kTwoPi * 0.21 * 1.0)).epsilon(1e-6));
  }
  SUBCASE("fast incoherent feeding approaches Poissonian cavity light") {
    SystemParams p;
    p.g_GHz = 0.0;
    p.transfer_GHz = 1000.0;
    p.n_max = 4;
    const auto sys = OpenSystem::build(p, units::Detuning::from_nm(4.1, p.lambda_m_nm));
    const std::vector<double> tau = {0.0, 2.0};
    const auto tr = g2_auto(sys, tau);
    CHECK(std::abs(tr.values[0].real() - 1.0) < 0.02);
    CHECK(std::abs(tr.values[1].real() - 1.0) < 1e-3);
  }
  SUBCASE("detuned cross-correlation dip with unequal sides") {
    SystemParams p;
    p.g_GHz = 20.7;
    p.transfer_GHz = 0.5;
    p.n_max = 2;
    const auto sys = OpenSystem::build(p, units::Detuning::from_nm(4.1, p.lambda_m_nm));
    const std::vector<double> tau = {-2.0, -0.5, 0.0, 0.5, 2.0, 200.0};
    const auto tr = g2_cross(sys, tau);
    CHECK(tr.values[2].real() < 1.0);
    CHECK(std::abs(tr.values[1].real() - tr.values[3].real()) > 1e-3);
    CHECK(std::abs(tr.values[5].real() - 1.0) < 1e-3);
  }
  SUBCASE("no emission is rejected") {
    const auto sys = OpenSystem::build(quiet());
    const std::vector<double> tau = {0.0};
    CHECK_THROWS_AS(g2_auto(sys, tau), std::domain_error);
  }
}

TEST_CASE("property: evolution keeps the density matrix physical") {
  Gen g(41);
  for (int t = 0; t < 12; ++t) {
    SystemParams p;
    p.n_max = g.integer(1, 3);
    p.emitter_levels = g.coin() ? 3 : 2;
    p.g_GHz = g.uniform(0, 30);
    p.pump_GHz = g.uniform(0, 0.5);
    p.transfer_GHz = g.uniform(0, 1);
    p.feeder_pump_GHz = p.emitter_levels == 3 ? g.uniform(0, 0.5) : 0.0;
    p.feeder_decay_GHz = p.emitter_levels == 3 ? g.uniform(0.05, 1) : 0.0;
    const auto sys = OpenSystem::build(p, units::Detuning::from_GHz(g.uniform(-100, 100), p.lambda_m_nm));
    const std::vector<double> times = {0.01, 0.1, 1.0, 3.0};
    const auto states = evolve(sys, basis_state(sys.space, 1, 1), times);
    for (const auto& r : states) check_physical(r);
  }
}

TEST_CASE("property: g2 tends to one at long delays") {
  Gen g(42);
  for (int t = 0; t < 6; ++t) {
    SystemParams p;
    p.n_max = 3;
    p.g_GHz = g.uniform(0, 25);
    p.pump_GHz = g.uniform(0.005, 0.1);
    p.transfer_GHz = g.uniform(0, 2);
    const auto sys = OpenSystem::build(p, units::Detuning::from_GHz(g.uniform(-500, 500), p.lambda_m_nm));
    const std::vector<double> tau = {0.0, 400.0};
    const auto tr = g2_auto(sys, tau);
    CHECK(std::abs(tr.values[1].real() - 1.0) < 1e-3);
    CHECK(tr.values[0].real() >= -1e-8);
  }
}
