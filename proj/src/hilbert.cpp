#include "qdcavity/hilbert.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qdc::hilbert {

Space build_space(int emitter_levels, int n_max) {
  if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
  if (emitter_levels != 2 && emitter_levels != 3) {
    throw std::invalid_argument("emitter_levels must be 2 or 3");
  }
  Space s;
  s.levels = emitter_levels;
  s.n_max = n_max;
  s.dim = emitter_levels * (n_max + 1);
  const int d = s.dim;

  s.identity = Operator::Identity(d, d);
  s.a = Operator::Zero(d, d);
  s.sigma = Operator::Zero(d, d);
  s.sigma_feeder = Operator::Zero(d, d);
  s.ground_projector = Operator::Zero(d, d);
  s.exciton_projector = Operator::Zero(d, d);
  s.feeder_projector = Operator::Zero(d, d);

  for (int lvl = 0; lvl < emitter_levels; ++lvl) {
    for (int n = 1; n <= n_max; ++n) {
      s.a(s.index(lvl, n - 1), s.index(lvl, n)) = std::sqrt(static_cast<double>(n));
    }
  }
  for (int n = 0; n <= n_max; ++n) {
    s.sigma(s.index(kGround, n), s.index(kExciton, n)) = 1.0;
    s.ground_projector(s.index(kGround, n), s.index(kGround, n)) = 1.0;
    s.exciton_projector(s.index(kExciton, n), s.index(kExciton, n)) = 1.0;
    if (emitter_levels == 3) {
      s.sigma_feeder(s.index(kGround, n), s.index(kFeeder, n)) = 1.0;
      s.feeder_projector(s.index(kFeeder, n), s.index(kFeeder, n)) = 1.0;
    }
  }
  s.adag = s.a.adjoint();
  s.sigma_dag = s.sigma.adjoint();
  s.photon_number = s.adag * s.a;
  return s;
}

Space build_space(const SystemParams& p) {
  p.validate();
  return build_space(p.emitter_levels, p.n_max);
}

Operator hamiltonian(const Space& s, const SystemParams& p, const units::Detuning& d) {
  const double w = units::kTwoPi;
  Operator h = -w * d.dw_GHz * s.exciton_projector;
  h += w * p.g_GHz * (s.adag * s.sigma + s.sigma_dag * s.a);
  return h;
}

std::string_view to_string(ChannelLabel c) {
  switch (c) {
    case ChannelLabel::cavity_loss: return "cavity_loss";
    case ChannelLabel::exciton_radiative: return "exciton_radiative";
    case ChannelLabel::pure_dephasing: return "pure_dephasing";
    case ChannelLabel::exciton_pump: return "exciton_pump";
    case ChannelLabel::transfer: return "transfer";
    case ChannelLabel::feeder_pump: return "feeder_pump";
    case ChannelLabel::feeder_decay: return "feeder_decay";
  }
  return "unknown";
}

ChannelLabel channel_from_string(std::string_view name) {
  for (auto c : {ChannelLabel::cavity_loss, ChannelLabel::exciton_radiative,
                 ChannelLabel::pure_dephasing, ChannelLabel::exciton_pump,
                 ChannelLabel::transfer, ChannelLabel::feeder_pump,
                 ChannelLabel::feeder_decay}) {
    if (to_string(c) == name) return c;
  }
  throw std::invalid_argument("unknown channel '" + std::string(name) + "'");
}

std::vector<CollapseChannel> collapse_channels(const Space& s, const SystemParams& p) {
  p.validate();
  if (s.levels != p.emitter_levels || s.n_max != p.n_max) {
    throw std::invalid_argument("space does not match parameters");
  }
  auto scaled = [](double rate, const Operator& op) -> Operator {
    return std::sqrt(units::kTwoPi * rate) * op;
  };
  const double gamma_d = p.dephasing_GHz();
  std::vector<CollapseChannel> out;
  out.push_back({ChannelLabel::cavity_loss, p.gamma_m_GHz, scaled(p.gamma_m_GHz, s.a)});
  out.push_back({ChannelLabel::exciton_radiative, p.gamma_b_GHz,
                 scaled(p.gamma_b_GHz, s.sigma)});
  out.push_back({ChannelLabel::pure_dephasing, gamma_d,
                 scaled(2.0 * gamma_d, s.exciton_projector)});
  out.push_back({ChannelLabel::exciton_pump, p.pump_GHz, scaled(p.pump_GHz, s.sigma_dag)});
  out.push_back({ChannelLabel::transfer, p.transfer_GHz,
                 scaled(p.transfer_GHz, s.adag * s.sigma)});
  if (p.emitter_levels == 3) {
    out.push_back({ChannelLabel::feeder_pump, p.feeder_pump_GHz,
                   scaled(p.feeder_pump_GHz, s.sigma_feeder.adjoint())});
    out.push_back({ChannelLabel::feeder_decay, p.feeder_decay_GHz,
                   scaled(p.feeder_decay_GHz, s.adag * s.sigma_feeder)});
  }
  return out;
}

}  // namespace qdc::hilbert
