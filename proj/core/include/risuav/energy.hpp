#pragma once

#include <Eigen/Dense>
#include <vector>

#include "risuav/decision.hpp"
#include "risuav/scenario.hpp"

namespace risuav {

// Cubic CPU energy for processing `bits` within a slot of length t.
double local_compute_energy(double kappa, double bits, double slot_length);

// Same law on the shared CPU, summed over the per-device shares.
double uav_compute_energy(double kappa, const Eigen::VectorXd& bits_per_device,
                          double slot_length);

// Fixed-wing propulsion power tau1*v^3 + tau2/v. Throws std::domain_error
// below the speed floor, where the model is invalid.
double fly_power(double tau1, double tau2, double speed, double speed_floor);
double fly_energy(double tau1, double tau2, double speed, double slot_length,
                  double speed_floor);

// Speed that minimizes fly power.
double fly_optimal_speed(double tau1, double tau2);

// Hop speeds of a trajectory; the first hop starts at the mission start.
Eigen::VectorXd hop_speeds(const Scenario& s, const Trajectory& traj);

// Transmit energy in one slot.
double offload_energy(const Eigen::VectorXd& powers, double slot_length);

// Bits credited in one slot: locally processed plus rate * slot length.
double completed_bits_slot(const Eigen::VectorXd& local_bits, const Eigen::VectorXd& rates,
                           double slot_length);

// Per-slot totals over a full operating point.
struct EnergyBreakdown {
  Eigen::VectorXd offload;      // per slot
  Eigen::VectorXd local_cpu;    // per slot
  Eigen::VectorXd uav_cpu;      // per slot
  Eigen::VectorXd fly;          // per slot
  Eigen::VectorXd completed;    // bits per slot
  double total_energy() const {
    return offload.sum() + local_cpu.sum() + uav_cpu.sum() + fly.sum();
  }
  double total_bits() const { return completed.sum(); }
};

EnergyBreakdown energy_breakdown(const Scenario& s, const DecisionVariables& v);

// Total completed bits over total energy.
double energy_efficiency(const Scenario& s, const DecisionVariables& v);

// Signed residual check of every mission constraint, natural units.
FeasibilityReport check_feasibility(const Scenario& s, const DecisionVariables& v);

}  // namespace risuav
