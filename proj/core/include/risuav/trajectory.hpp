#pragma once

#include <Eigen/Dense>
#include <vector>

#include "risuav/channel.hpp"
#include "risuav/decision.hpp"
#include "risuav/scenario.hpp"

namespace risuav::trajectory {

// Noise-normalized received power for one slot as a function of the device
// link distances u (one per transmitting device, decoding order) and the
// surface link distance w:
//   S(u, w) = offset + sum_k [ a_k u_k^-e + b_k u_k^(-e/2) w^-1 + c_k w^-2 ].
// Every coefficient is nonnegative, so ln S is jointly convex in (u, w) and
// its first-order expansion is a global lower bound, tight at the expansion.
struct SlotSignalModel {
  double offset = 1.0;
  Eigen::VectorXd a, b, c;  // per transmitting device
  double exponent = 0.0;    // direct-link power decay e

  // ln S over the first `count` devices of the chain.
  double log_value(int count, const Eigen::VectorXd& u, double w) const;
  void log_gradient(int count, const Eigen::VectorXd& u, double w,
                    Eigen::VectorXd& du, double& dw) const;
};

// First-order expansion of SlotSignalModel::log_value at (u0, w0).
struct LogTangent {
  double value0 = 0.0;
  Eigen::VectorXd du;
  double dw = 0.0;
  Eigen::VectorXd u0;
  double w0 = 0.0;

  double at(const Eigen::VectorXd& u, double w) const {
    return value0 + du.dot(u - u0) + dw * (w - w0);
  }
};

LogTangent linearize(const SlotSignalModel& m, int count, const Eigen::VectorXd& u0,
                     double w0);

// Coefficients from the phase-aligned magnitude model: amplitude
// k1/d_device^(e/2) + k2/d_surface per device, squared into monomials.
SlotSignalModel build_slot_model(const Scenario& s, const ChannelState& ch,
                                 const Eigen::VectorXd& slot_powers,
                                 const std::vector<int>& active, int slot);

struct Inputs {
  const Scenario* scenario = nullptr;
  const ChannelState* channel = nullptr;   // magnitude coefficients + orders, frozen
  const BitAllocation* bits = nullptr;     // offloaded bits pin the serve floor
  const Eigen::MatrixXd* powers = nullptr; // devices x slots, fixed
  double alpha = 0.0;                      // energy price, bits/J
};

// Parametric objective under the aligned-magnitude channel: completed bits
// minus alpha * total energy, with bits and powers held fixed.
double model_objective(const Inputs& in, const Trajectory& path);

struct Result {
  Trajectory path;
  std::vector<double> trace;  // model objective per accepted round, bits
  int iterations = 0;
  bool improved = false;
};

// Successive convex refinement of the flight path: auxiliary per-link
// distances bound the real ones through second-order-cone rows, rates enter
// through tangents of the log-power model, and hop speeds keep the propulsion
// terms convex. Returns the incumbent unless a round strictly improves the
// model objective.
Result optimize(const Inputs& in, const Trajectory& incumbent);

}  // namespace risuav::trajectory
