#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "risuav/channel.hpp"

namespace risuav {

// Bits processed per device per slot, split by executor.
struct BitAllocation {
  Eigen::MatrixXd local;  // devices x slots
  Eigen::MatrixXd uav;    // devices x slots

  static BitAllocation zero(int devices, int slots) {
    return {Eigen::MatrixXd::Zero(devices, slots), Eigen::MatrixXd::Zero(devices, slots)};
  }
};

// One full operating point of the system.
struct DecisionVariables {
  BitAllocation bits;
  Eigen::MatrixXd powers;  // transmit power, devices x slots, watts
  Eigen::MatrixXd rates;   // achieved offload rates, devices x slots, bits/s
  PhaseConfig phases;      // slots x elements, radians
  Trajectory path;         // slot positions
};

struct FeasibilityItem {
  std::string constraint;
  int device = -1;  // -1 when not device-indexed
  int slot = -1;    // -1 when not slot-indexed
  double violation = 0.0;  // positive = violated, in natural units
};

struct FeasibilityReport {
  std::vector<FeasibilityItem> items;
  double max_violation = 0.0;
  bool ok(double tol) const { return max_violation <= tol; }
};

}  // namespace risuav
