#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "risuav/channel.hpp"
#include "risuav/decision.hpp"
#include "risuav/energy.hpp"
#include "risuav/scenario.hpp"

namespace risuav::optimizer {

// proposed optimizes every block; the baselines freeze one aspect each.
enum class Strategy { proposed, straight_line, random_phase, no_ris, full_offload };

const char* strategy_name(Strategy s);
Strategy strategy_from_name(const std::string& name);  // throws on unknown names

struct RunConfig {
  Scenario scenario;
  std::uint64_t seed = 0;
  Strategy strategy = Strategy::proposed;
};

// One outer ratio iteration: the energy price it entered with, the inner
// coordinate-descent trace, and the totals of the point it settled on.
struct OuterRecord {
  double alpha = 0.0;            // bits per joule
  double completed_bits = 0.0;
  double energy_j = 0.0;
  double residual_bits = 0.0;    // completed_bits - alpha * energy_j
  std::vector<double> pass_values;  // parametric value after each descent pass
  double wall_time_s = 0.0;
};

struct RunResult {
  DecisionVariables decision;
  double energy_efficiency = 0.0;  // bits per joule of the returned decision
  double completed_bits = 0.0;
  double total_energy_j = 0.0;
  std::vector<OuterRecord> outer;
  bool converged = false;        // ratio residual inside outer_tol
  bool demand_feasible = true;   // false: tasks cannot fit the compute budget
  double wall_time_s = 0.0;
  EnergyBreakdown breakdown;
  FeasibilityReport feasibility;
};

// Completed bits minus alpha * total energy of an operating point.
double parametric_value(const Scenario& s, const DecisionVariables& v, double alpha);

// Feasible starting point: straight constant-speed path, seeded uniform
// phases, tasks spread evenly over the horizon and pushed through the repair
// pass. Its efficiency prices the first outer iteration.
DecisionVariables warm_start(const Scenario& s, const ChannelDraws& draws, Strategy strategy,
                             std::uint64_t seed);

// Full pipeline: ratio iteration wrapping block descent over allocation,
// phases, and path, with the strategy's frozen blocks skipped.
RunResult run(const RunConfig& cfg);

}  // namespace risuav::optimizer
