#include "risuav/energy.hpp"

#include <cmath>
#include <stdexcept>

namespace risuav {

double local_compute_energy(double kappa, double bits, double slot_length) {
  return kappa * bits * bits * bits / (slot_length * slot_length);
}

double uav_compute_energy(double kappa, const Eigen::VectorXd& bits_per_device,
                          double slot_length) {
  double cubes = 0.0;
  for (int i = 0; i < bits_per_device.size(); ++i)
    cubes += bits_per_device(i) * bits_per_device(i) * bits_per_device(i);
  return kappa * cubes / (slot_length * slot_length);
}

double fly_power(double tau1, double tau2, double speed, double speed_floor) {
  if (speed < speed_floor)
    throw std::domain_error("fly_power: speed below the model floor");
  return tau1 * speed * speed * speed + tau2 / speed;
}

double fly_energy(double tau1, double tau2, double speed, double slot_length,
                  double speed_floor) {
  return slot_length * fly_power(tau1, tau2, speed, speed_floor);
}

double fly_optimal_speed(double tau1, double tau2) {
  return std::pow(tau2 / (3.0 * tau1), 0.25);
}

Eigen::VectorXd hop_speeds(const Scenario& s, const Trajectory& traj) {
  const int slots = static_cast<int>(traj.size());
  const double t = s.slot_length();
  Eigen::VectorXd v(slots);
  Eigen::Vector2d prev = s.geometry.uav_start;
  for (int n = 0; n < slots; ++n) {
    v(n) = (traj[n] - prev).norm() / t;
    prev = traj[n];
  }
  return v;
}

double offload_energy(const Eigen::VectorXd& powers, double slot_length) {
  return slot_length * powers.sum();
}

double completed_bits_slot(const Eigen::VectorXd& local_bits, const Eigen::VectorXd& rates,
                           double slot_length) {
  return local_bits.sum() + slot_length * rates.sum();
}

EnergyBreakdown energy_breakdown(const Scenario& s, const DecisionVariables& v) {
  const int slots = s.time.slots;
  const double t = s.slot_length();
  EnergyBreakdown b;
  b.offload.resize(slots);
  b.local_cpu.resize(slots);
  b.uav_cpu.resize(slots);
  b.fly.resize(slots);
  b.completed.resize(slots);

  const Eigen::VectorXd speeds = hop_speeds(s, v.path);
  for (int n = 0; n < slots; ++n) {
    b.offload(n) = offload_energy(v.powers.col(n), t);
    double local = 0.0;
    for (int i = 0; i < s.device_count(); ++i)
      local += local_compute_energy(s.energy.kappa_device, v.bits.local(i, n), t);
    b.local_cpu(n) = local;
    b.uav_cpu(n) = uav_compute_energy(s.energy.kappa_uav, v.bits.uav.col(n), t);
    b.fly(n) = fly_energy(s.energy.fly_tau1, s.energy.fly_tau2, speeds(n), t,
                          s.solver.min_speed_floor);
    b.completed(n) = completed_bits_slot(v.bits.local.col(n), v.rates.col(n), t);
  }
  return b;
}

double energy_efficiency(const Scenario& s, const DecisionVariables& v) {
  const EnergyBreakdown b = energy_breakdown(s, v);
  return b.total_bits() / b.total_energy();
}

FeasibilityReport check_feasibility(const Scenario& s, const DecisionVariables& v) {
  FeasibilityReport rep;
  const int device_count = s.device_count();
  const int slots = s.time.slots;
  const double t = s.slot_length();
  auto add = [&rep](const std::string& name, int device, int slot, double violation) {
    rep.items.push_back({name, device, slot, violation});
    rep.max_violation = std::max(rep.max_violation, violation);
  };

  for (int i = 0; i < device_count; ++i) {
    const double done = v.bits.local.row(i).sum() + v.bits.uav.row(i).sum();
    add("task_demand", i, -1, s.tasks.bits[i] - done);
  }

  for (int n = 0; n < slots; ++n) {
    double uav_load = 0.0;
    for (int i = 0; i < device_count; ++i)
      uav_load += v.bits.uav(i, n) * s.tasks.cycles_per_bit[i];
    add("uav_cpu_cap", -1, n, uav_load / t - s.energy.uav_cpu_hz);
  }

  for (int i = 0; i < device_count; ++i)
    for (int n = 0; n < slots; ++n) {
      add("device_cpu_cap", i, n,
          v.bits.local(i, n) * s.tasks.cycles_per_bit[i] / t - s.energy.device_cpu_hz);
      add("offload_service", i, n, v.bits.uav(i, n) - v.rates(i, n) * t);
      add("local_bits_nonneg", i, n, -v.bits.local(i, n));
      add("uav_bits_nonneg", i, n, -v.bits.uav(i, n));
      add("power_nonneg", i, n, -v.powers(i, n));
    }

  const Eigen::VectorXd speeds = hop_speeds(s, v.path);
  for (int n = 0; n < slots; ++n)
    add("speed_cap", -1, n, speeds(n) - s.energy.max_speed);

  add("endpoint_pin", -1, slots - 1, (v.path.back() - s.geometry.uav_goal).norm());

  // Reflection coefficients are stored as phases, so unit modulus is exact.
  add("unit_modulus", -1, -1, 0.0);

  return rep;
}

}  // namespace risuav
