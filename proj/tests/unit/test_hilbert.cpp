#include <cmath>
#include <complex>
#include <stdexcept>

#include <Eigen/Dense>

#include "doctest.h"
#include "gen.hpp"
#include "qdcavity/hilbert.hpp"
#include "qdcavity/polariton.hpp"

using namespace qdc;
using hilbert::ChannelLabel;
using cd = std::complex<double>;

TEST_CASE("smallest space") {
  const auto s = hilbert::build_space(2, 1);
  CHECK(s.dim == 4);
  // a connects |l,1> to |l,0> once per emitter level.
  CHECK((s.a.array().abs() > 0).count() == 2);
  CHECK(s.a(s.index(0, 0), s.index(0, 1)) == cd(1.0));
  CHECK(s.a(s.index(1, 0), s.index(1, 1)) == cd(1.0));
  CHECK(hilbert::build_space(3, 4).dim == 15);
  CHECK_THROWS_AS(hilbert::build_space(2, 0), std::invalid_argument);
  CHECK_THROWS_AS(hilbert::build_space(4, 2), std::invalid_argument);
}

TEST_CASE("number operator and truncated commutator") {
  const auto s = hilbert::build_space(2, 5);
  for (int l = 0; l < 2; ++l) {
    for (int n = 0; n <= 5; ++n) CHECK(s.photon_number(s.index(l, n), s.index(l, n)).real() == doctest::Approx(n));
  }
  const hilbert::Operator c = s.a * s.adag - s.adag * s.a;
  for (int l = 0; l < 2; ++l) {
    for (int n = 0; n <= 4; ++n) CHECK(std::abs(c(s.index(l, n), s.index(l, n)) - 1.0) < 1e-15);
  }
  CHECK((c - c.diagonal().asDiagonal().toDenseMatrix()).norm() < 1e-15);
}

TEST_CASE("uncoupled resonant Hamiltonian is zero in the rotating frame") {
  SystemParams p;
  p.g_GHz = 0.0;
  const auto s = hilbert::build_space(p);
  const auto h = hilbert::hamiltonian(s, p, units::Detuning::from_GHz(0.0, p.lambda_m_nm));
  CHECK(h.norm() == 0.0);
  const auto hd = hilbert::hamiltonian(s, p, units::Detuning::from_GHz(30.0, p.lambda_m_nm));
  CHECK((hd - hd.diagonal().asDiagonal().toDenseMatrix()).norm() == 0.0);
}

TEST_CASE("one-excitation block reproduces the polariton poles") {
  SystemParams p;
  p.pump_GHz = 0.0;
  p.n_max = 3;
  const double two_pi = units::kTwoPi;
  for (double dw : {0.0, 50.0, -50.0, 1383.7}) {
    const auto d = units::Detuning::from_GHz(dw, p.lambda_m_nm);
    const auto s = hilbert::build_space(p);
    hilbert::Operator heff = hilbert::hamiltonian(s, p, d);
    for (const auto& ch : hilbert::collapse_channels(s, p)) heff -= cd(0, 0.5) * ch.op.adjoint() * ch.op;
    const int i = s.index(0, 1), j = s.index(1, 0);
    Eigen::Matrix2cd block;
    block << heff(i, i), heff(i, j), heff(j, i), heff(j, j);
    const Eigen::Vector2cd ev = block.eigenvalues() / two_pi;
    const auto m = polariton::eigenmodes(p, d);
    const double nu_m = p.cavity_frequency_GHz();
    const cd up = ev[0].real() > ev[1].real() ? ev[0] : ev[1];
    const cd dn = ev[0].real() > ev[1].real() ? ev[1] : ev[0];
    CHECK(std::abs(up.real() - (m.omega_plus_GHz - nu_m)) < 1e-9 * (1 + std::abs(dw)));
    CHECK(std::abs(dn.real() - (m.omega_minus_GHz - nu_m)) < 1e-9 * (1 + std::abs(dw)));
    CHECK(-up.imag() == doctest::Approx(m.hwhm_plus_GHz).epsilon(1e-9));
    CHECK(-dn.imag() == doctest::Approx(m.hwhm_minus_GHz).epsilon(1e-9));
  }
}

TEST_CASE("second rung splitting") {
  SystemParams p;
  p.n_max = 2;
  const auto s = hilbert::build_space(p);
  const auto h = hilbert::hamiltonian(s, p, units::Detuning::from_GHz(0.0, p.lambda_m_nm));
  const int i = s.index(0, 2), j = s.index(1, 1);
  Eigen::Matrix2cd block;
  block << h(i, i), h(i, j), h(j, i), h(j, j);
  const auto ev = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd>(block).eigenvalues();
  CHECK((ev[1] - ev[0]) / units::kTwoPi == doctest::Approx(2 * std::sqrt(2.0) * p.g_GHz).epsilon(1e-12));
}

TEST_CASE("collapse channels") {
  SystemParams p;
  p.transfer_GHz = 0.1;
  const auto s = hilbert::build_space(p);
  const auto ch = hilbert::collapse_channels(s, p);
  CHECK(ch.size() == 5);
  for (const auto& c : ch) {
    if (c.label == ChannelLabel::pure_dephasing) CHECK(c.rate_GHz == doctest::Approx(4.2425));
    if (c.label == ChannelLabel::cavity_loss) {
      CHECK((c.op - std::sqrt(units::kTwoPi * 24.1) * s.a).norm() < 1e-12);
    }
  }
  SUBCASE("pure decay model") {
    p.transfer_GHz = 0.0;
    p.pump_GHz = 0.0;
    for (const auto& c : hilbert::collapse_channels(s, p)) {
      if (c.label == ChannelLabel::exciton_pump || c.label == ChannelLabel::transfer) {
        CHECK(c.rate_GHz == 0.0);
        CHECK(c.op.norm() == 0.0);
      }
    }
  }
  SUBCASE("feeder level") {
    p.emitter_levels = 3;
    p.feeder_decay_GHz = units::fwhm_from_lifetime(1.3);
    CHECK(p.feeder_decay_GHz == doctest::Approx(0.1224).epsilon(1e-3));
    const auto s3 = hilbert::build_space(p);
    const auto c3 = hilbert::collapse_channels(s3, p);
    CHECK(c3.size() == 7);
    CHECK(c3.back().label == ChannelLabel::feeder_decay);
    // The feeder decays into the mode: |f,0> -> |g,1>.
    CHECK(std::abs(c3.back().op(s3.index(0, 1), s3.index(2, 0))) > 0);
  }
  SUBCASE("negative rates are rejected") {
    p.gamma_m_GHz = -1.0;
    CHECK_THROWS_AS(hilbert::collapse_channels(s, p), std::invalid_argument);
  }
}

TEST_CASE("channel names round trip") {
  for (auto c : {ChannelLabel::cavity_loss, ChannelLabel::exciton_radiative, ChannelLabel::pure_dephasing,
                 ChannelLabel::exciton_pump, ChannelLabel::transfer, ChannelLabel::feeder_pump,
                 ChannelLabel::feeder_decay}) {
    CHECK(hilbert::channel_from_string(hilbert::to_string(c)) == c);
  }
  CHECK_THROWS_AS(hilbert::channel_from_string("photon"), std::invalid_argument);
}

TEST_CASE("property: H is Hermitian and conserves excitations below the truncation") {
  Gen g(31);
  for (int t = 0; t < 50; ++t) {
    SystemParams p;
    p.n_max = g.integer(1, 6);
    p.emitter_levels = g.coin() ? 3 : 2;
    p.g_GHz = g.uniform(0, 40);
    const auto d = units::Detuning::from_GHz(g.uniform(-2000, 2000), p.lambda_m_nm);
    const auto s = hilbert::build_space(p);
    const auto h = hilbert::hamiltonian(s, p, d);
    CHECK((h - h.adjoint()).norm() < 1e-12 * (1 + h.norm()));
    const hilbert::Operator n = s.photon_number + s.exciton_projector;
    const hilbert::Operator comm = h * n - n * h;
    // Only matrix elements touching the top Fock state may violate the conservation law.
    for (int i = 0; i < s.dim; ++i) {
      for (int j = 0; j < s.dim; ++j) {
        const bool boundary = i % (p.n_max + 1) == p.n_max || j % (p.n_max + 1) == p.n_max;
        if (!boundary) CHECK(std::abs(comm(i, j)) < 1e-9);
      }
    }
    for (const auto& c : hilbert::collapse_channels(s, p)) CHECK(c.rate_GHz >= 0.0);
  }
}
