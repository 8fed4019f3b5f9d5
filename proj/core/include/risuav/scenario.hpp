#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace risuav {

struct Geometry {
  std::vector<Eigen::Vector2d> devices;  // ground positions, meters
  Eigen::Vector2d ris_position{0.0, 0.0};
  double ris_height = 0.0;
  double uav_altitude = 0.0;
  Eigen::Vector2d uav_start{0.0, 0.0};
  Eigen::Vector2d uav_goal{0.0, 0.0};
};

struct TaskSpec {
  std::vector<double> bits;            // L_i, bits per device over the mission
  std::vector<double> cycles_per_bit;  // C_i
};

struct RadioParams {
  double bandwidth_hz = 0.0;
  double ref_gain = 0.0;         // channel power gain at 1 m, linear
  double noise_power_w = 0.0;    // receiver noise power, linear watts
  double direct_exponent = 0.0;  // device -> UAV path loss exponent
  double ris_exponent = 0.0;     // device -> RIS path loss exponent
  double rician_beta = 0.0;      // LoS/NLoS power ratio, linear
  int ris_elements = 0;
  double element_spacing = 0.5;  // inter-element spacing over wavelength
};

struct EnergyParams {
  double kappa_device = 0.0;  // effective switched capacitance, device CPUs
  double kappa_uav = 0.0;     // same for the UAV CPU
  double fly_tau1 = 0.0;      // blade/parasite drag coefficient
  double fly_tau2 = 0.0;      // induced lift coefficient
  double device_cpu_hz = 0.0;
  double uav_cpu_hz = 0.0;
  double max_speed = 0.0;  // m/s
};

struct TimeBudget {
  double horizon_s = 0.0;
  int slots = 0;
  double slot_length() const { return horizon_s / slots; }
};

struct SolverSettings {
  double outer_tol = 1e-3;        // fractional-program residual, bits
  int outer_max_iters = 20;
  double bcd_tol = 1e-3;          // inner objective change, bits
  int bcd_max_passes = 15;
  double dc_tol = 1e-3;           // per-slot phase objective change
  int dc_max_iters = 20;
  double sca_tol = 1e-3;          // trajectory objective change, bits
  int sca_max_iters = 30;
  int randomization_count = 50;
  double min_speed_floor = 0.1;   // m/s
  double nlp_tol = 1e-7;
  double sdp_tol = 1e-6;
  double feasibility_tol = 1e-6;
  double rate_ceiling_bps_hz = 40.0;  // spectral-efficiency box on offload rates
};

struct Scenario {
  int schema_version = 1;
  Geometry geometry;
  TaskSpec tasks;
  RadioParams radio;
  EnergyParams energy;
  TimeBudget time;
  SolverSettings solver;

  int device_count() const { return static_cast<int>(geometry.devices.size()); }
  double slot_length() const { return time.slot_length(); }
};

struct Violation {
  std::string field;
  std::string message;
};

// Structural checks: counts match, positivity, altitude ordering, mission
// reachability at max speed, mean mission speed above the fly-power floor.
std::vector<Violation> validate(const Scenario& s);

// Reference configuration at full experiment scale.
Scenario reference_default();

// Small configuration for fast tests and local sweeps.
Scenario desk_default();

// JSON file I/O. Loading accepts dB/dBm keys for gains and noise and converts
// them to linear once; writing emits linear keys so a round trip is exact.
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& json_text);
void write_scenario(const Scenario& s, const std::string& path);
std::string serialize_scenario(const Scenario& s);

// Stable content hash of the canonical serialization, for run manifests.
std::string scenario_digest(const Scenario& s);

}  // namespace risuav
