#pragma once

#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "qdcavity/params.hpp"

// Truncated emitter (x) Fock space, its operators, the Jaynes-Cummings
// Hamiltonian and the collapse channels of the open-system model.
//
// Basis ordering: |level, n> -> level * (n_max + 1) + n, with level 0 = ground,
// 1 = exciton, 2 = feeder.

namespace qdc::hilbert {

using Operator = Eigen::MatrixXcd;

enum Level : int { kGround = 0, kExciton = 1, kFeeder = 2 };

/// Description of the rotating frame used by hamiltonian(); emitted as output metadata.
inline constexpr std::string_view kFrame = "rotating at the cavity frequency";

struct Space {
  int levels = 2;
  int n_max = 1;
  int dim = 0;

  Operator identity;
  Operator a;
  Operator adag;
  Operator photon_number;      ///< a^dag a
  Operator sigma;              ///< |g><e|
  Operator sigma_dag;          ///< |e><g|
  Operator sigma_feeder;       ///< |g><f| (zero for two-level emitters)
  Operator ground_projector;   ///< |g><g| (x) 1
  Operator exciton_projector;  ///< |e><e| (x) 1
  Operator feeder_projector;   ///< |f><f| (x) 1

  int index(int level, int n) const { return level * (n_max + 1) + n; }
};

Space build_space(int emitter_levels, int n_max);
Space build_space(const SystemParams& p);

/// H / hbar in rad/ns in the frame rotating at the cavity frequency:
/// 2 pi [ -dw sigma^dag sigma + g (a^dag sigma + sigma^dag a) ].
Operator hamiltonian(const Space& s, const SystemParams& p, const units::Detuning& d);

enum class ChannelLabel {
  cavity_loss,
  exciton_radiative,
  pure_dephasing,
  exciton_pump,
  transfer,
  feeder_pump,
  feeder_decay,
};

std::string_view to_string(ChannelLabel c);
/// Throws std::invalid_argument for unknown names.
ChannelLabel channel_from_string(std::string_view name);

struct CollapseChannel {
  ChannelLabel label;
  double rate_GHz = 0.0;  ///< FWHM-convention rate
  Operator op;            ///< includes the sqrt(2 pi rate) prefactor
};

/// cavity_loss sqrt(2pi gamma_m) a, exciton_radiative sqrt(2pi gamma_b) sigma,
/// pure_dephasing sqrt(2 * 2pi gamma_d) sigma^dag sigma, exciton_pump
/// sqrt(2pi P) sigma^dag, transfer sqrt(2pi gamma_t) a^dag sigma; three-level
/// emitters add feeder_pump sqrt(2pi P_f) |f><g| and feeder_decay
/// sqrt(2pi gamma_f) a^dag |g><f|.
std::vector<CollapseChannel> collapse_channels(const Space& s, const SystemParams& p);

}  // namespace qdc::hilbert
