#pragma once

#include <Eigen/Dense>

#include "risuav/channel.hpp"
#include "risuav/decision.hpp"
#include "risuav/scenario.hpp"

namespace risuav::bitpower {

// One slot viewed through its decoding order: gains ascending, plus the
// coefficients of the telescoped offload-energy sum.
struct SlotOrder {
  std::vector<int> device;  // device id at each decoding position
  Eigen::VectorXd gain;     // |h|^2 ascending
  Eigen::VectorXd coeff;    // sigma^2 * (1/G_i - 1/G_{i+1}), last term sigma^2/G_I
  double boundary = 0.0;    // sigma^2 / G_1, constant credit in the energy sum
};

SlotOrder slot_order(const Eigen::VectorXd& gains_sq, double noise_w);

// Cumulative spectral usage by decoding position: Y_i = sum_{j<=i} R_j / B.
Eigen::VectorXd cumulative_usage(const SlotOrder& so, const Eigen::MatrixXd& rates,
                                 int slot, double bandwidth_hz);

// Sum transmit energy of a slot via the telescoped form, J.
double offload_energy(const SlotOrder& so, const Eigen::VectorXd& usage, double slot_len);

// Per-device transmit powers (W) that realize the given rates under
// successive decoding; inverts the rate recursion.
Eigen::VectorXd recover_powers(const SlotOrder& so, const Eigen::VectorXd& usage);

// maximize sum_i a_i y_i - d_i 2^{y_i} over 0 <= y_1 <= ... <= y_I <= cap.
// Separable concave terms under a chain: pool-adjacent-violators.
Eigen::VectorXd isotonic_usage_argmax(const Eigen::VectorXd& a, const Eigen::VectorXd& d,
                                      double cap);

// Stationary points of the per-entry bit terms, before clamping to caps.
double local_bits_stationary(double omega, double alpha, double kappa, double slot_len);
double uav_bits_stationary(double coef, double alpha, double kappa, double slot_len);

struct Inputs {
  const Scenario* scenario = nullptr;
  const ChannelState* channel = nullptr;  // phases already applied
  double alpha = 0.0;                     // bits per joule
  bool allow_local = true;                // false forces every bit through the UAV
};

struct Result {
  BitAllocation bits;      // bits
  Eigen::MatrixXd rates;   // bits/s, devices x slots
  Eigen::MatrixXd powers;  // W, devices x slots
  double objective = 0.0;  // completed bits - alpha * block energy
  double kkt_residual = 0.0;
  int iterations = 0;
  bool used_fallback = false;  // dual search delegated to the direct solver
  Eigen::VectorXd demand_mult;      // per device
  Eigen::VectorXd uav_cpu_mult;     // per slot
  Eigen::MatrixXd serve_mult;       // devices x slots
  Eigen::MatrixXd device_cpu_mult;  // devices x slots, recovered at bound caps
};

// Completed bits minus alpha times the energy this block controls (local CPU,
// UAV CPU, transmit). Flying energy is outside this subproblem.
double block_objective(const Inputs& in, const Result& r);

// Interior-point solve of the joint allocation program; reference route.
Result solve_direct(const Inputs& in, const Result* warm = nullptr);

// Multiplier search with closed-form inner maximizers; falls back to
// solve_direct when the gap stalls or alpha is degenerate.
Result dual_search(const Inputs& in, const Result* warm = nullptr);

// Clamp a candidate onto the feasible set (serve, CPU caps, demand) and
// recompute rates, powers, and the objective.
void polish_feasible(const Inputs& in, Result& r);

// True when every demand can be met at all: local caps plus UAV throughput.
bool demand_attainable(const Scenario& s);

}  // namespace risuav::bitpower
