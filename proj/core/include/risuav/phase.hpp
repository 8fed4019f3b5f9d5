#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <vector>

#include "risuav/channel.hpp"
#include "risuav/scenario.hpp"

namespace risuav::phase {

// Rank-one Hermitian lift of one device link. With F = [e^{i theta}; 1],
//   |direct + cascade^T e^{i theta}|^2 = Re tr(lift(cascade, direct) * F F^H).
// Any unit-diagonal PSD relaxation of F F^H keeps the trace nonnegative.
Eigen::MatrixXcd lift_matrix(const Eigen::VectorXcd& cascade, std::complex<double> direct);

// Sum of per-device successive-decoding rates for one slot, bits/s. The sum
// telescopes to a single log of the total received power, so it does not
// depend on the decoding order.
double slot_sum_rate(const Scenario& s, const Eigen::VectorXcd& combined,
                     const Eigen::VectorXd& powers);

struct Inputs {
  const Scenario* scenario = nullptr;
  const ChannelState* channel = nullptr;    // phase-free parts + decoding orders
  const Eigen::MatrixXd* powers = nullptr;  // devices x slots, fixed in this block
  std::uint64_t seed = 0;
};

struct SlotReport {
  int iterations = 0;      // surrogate refinement rounds
  bool solved = false;     // false when the slot carries no transmit power
  bool rank_one = false;   // relaxation returned a (numerically) rank-one matrix
  double relaxed_bound = 0.0;    // relaxation value, bits/s
  double achieved_value = 0.0;   // slot_sum_rate at the returned phases, bits/s
  std::vector<double> trace;     // relaxation value per refinement round, bits/s
};

struct Result {
  PhaseConfig phases;  // slots x elements
  std::vector<SlotReport> slots;
  int total_iterations = 0;
};

// Per-slot reflection-phase optimization: lift the unit-modulus vector to a
// unit-diagonal PSD matrix, refine the concave-minus-concave rate objective by
// linearizing the subtracted part, then recover feasible phases from the
// principal eigenvector or by covariance sampling. Slots with no transmit
// power keep their incumbent row; every slot keeps the incumbent unless a
// candidate scores strictly better.
Result optimize(const Inputs& in, const PhaseConfig& incumbent);

}  // namespace risuav::phase
