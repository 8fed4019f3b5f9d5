#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <vector>

#include "risuav/rng.hpp"
#include "risuav/scenario.hpp"

namespace risuav {

// Slot positions of the UAV; back() is pinned to the mission goal. The hop
// into slot 0 starts from the mission start point.
using Trajectory = std::vector<Eigen::Vector2d>;

// Reflection phases, slots x elements, radians.
using PhaseConfig = Eigen::MatrixXd;

// Fading realizations for one run. The scattered device->UAV coefficient is
// redrawn every slot; the device->surface scattered vector is drawn once
// (both ends are static). Draws are addressed per (device, slot) and
// (device, element), so enlarging the surface or the horizon preserves
// existing coefficients.
struct ChannelDraws {
  Eigen::MatrixXcd direct_fade;  // devices x slots
  Eigen::MatrixXcd ris_nlos;     // devices x elements

  static ChannelDraws sample(const Scenario& s, std::uint64_t seed);
  // Unit direct fading, zero scattered surface components.
  static ChannelDraws deterministic(const Scenario& s);
};

double device_uav_distance(const Scenario& s, int device, const Eigen::Vector2d& q);
double ris_uav_distance(const Scenario& s, const Eigen::Vector2d& q);
double device_ris_distance(const Scenario& s, int device);

// Surface -> UAV line-of-sight steering vector with free-space decay.
Eigen::VectorXcd ris_uav_channel(const Scenario& s, const Eigen::Vector2d& q);

// Device -> surface Rician vector; constant over slots.
Eigen::VectorXcd device_ris_channel(const Scenario& s, const ChannelDraws& d, int device);

// Device -> UAV scattered link.
std::complex<double> direct_channel(const Scenario& s, const ChannelDraws& d, int device,
                                    int slot, const Eigen::Vector2d& q);

// Element-wise reflected coefficients (before the phase shift is applied):
// entry m is conj(device->surface)_m * (surface->UAV)_m.
Eigen::VectorXcd cascade_row(const Scenario& s, const ChannelDraws& d, int device,
                             const Eigen::Vector2d& q);

// Direct plus phase-shifted reflected sum.
std::complex<double> combined_gain(const Scenario& s, const ChannelDraws& d, int device,
                                   int slot, const Eigen::Vector2d& q,
                                   const Eigen::VectorXd& theta);

// |device->surface| element magnitudes; includes the distance decay.
Eigen::VectorXd cascade_magnitudes(const Scenario& s, const ChannelDraws& d, int device);

// Magnitude of the combined link when every reflected term is phase-aligned
// with the direct term, as a function of the two link distances. This is the
// model the trajectory step optimizes; it equals |combined_gain| under
// aligned phases at the true distances.
double coherent_magnitude_gain(const Scenario& s, const ChannelDraws& d, int device,
                               int slot, double dist_device_uav, double dist_ris_uav);

// Phases that align every reflected term with the direct term for one device.
Eigen::VectorXd align_phases(const Scenario& s, const ChannelDraws& d, int device, int slot,
                             const Eigen::Vector2d& q);

// Successive decoding order: ascending squared gain, ties by device index.
struct DecodingOrder {
  std::vector<int> order;     // order[k] = device decoded k-th
  std::vector<int> position;  // position[device] = k
};
DecodingOrder decoding_order(const Eigen::VectorXd& gains_sq);

// Per-device achievable rates (bits/s) under successive decoding: stronger
// devices are decoded and subtracted first, so the signals still interfering
// with a device are exactly the weaker-gain ones.
Eigen::VectorXd offload_rates(const Eigen::VectorXd& powers, const Eigen::VectorXd& gains_sq,
                              const DecodingOrder& order, double bandwidth_hz,
                              double noise_w);

// Caches for a whole trajectory. Geometry and fading parts are phase-free;
// apply_phases fills the combined gains and decoding orders.
struct ChannelState {
  Eigen::MatrixXd dist_du;   // devices x slots
  Eigen::VectorXd dist_ru;   // slots
  Eigen::MatrixXcd direct;   // devices x slots
  std::vector<Eigen::MatrixXcd> cascade;  // per slot, devices x elements
  Eigen::MatrixXd direct_mag_coeff;  // sqrt(ref_gain) * |fade|, devices x slots
  Eigen::VectorXd cascade_mag_coeff; // sqrt(ref_gain) * sum element magnitudes, devices

  Eigen::MatrixXcd combined;  // devices x slots
  Eigen::MatrixXd gain_sq;    // devices x slots
  std::vector<DecodingOrder> orders;  // per slot
};

ChannelState compute_channel_state(const Scenario& s, const ChannelDraws& d,
                                   const Trajectory& traj);
void apply_phases(const Scenario& s, ChannelState& state, const PhaseConfig& phases);
ChannelState compute_channel_state(const Scenario& s, const ChannelDraws& d,
                                   const Trajectory& traj, const PhaseConfig& phases);

// Straight line from start to goal in equal hops; meets the endpoint pin.
Trajectory straight_line_trajectory(const Scenario& s);

}  // namespace risuav
