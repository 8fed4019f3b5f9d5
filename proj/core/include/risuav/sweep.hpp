#pragma once
// Experiment sweeps: run a grid of (scheme, parameter value, seed) cells,
// optionally in parallel, and collect one result row per cell. Failures in a
// cell become error rows; the sweep always finishes.

#include <cstdint>
#include <string>
#include <vector>

#include "risuav/csv.hpp"
#include "risuav/optimizer.hpp"

namespace risuav::harness {

enum class SweepParam { task_bits, ris_elements, period, cycles_per_bit };

const char* sweep_param_name(SweepParam p);
SweepParam sweep_param_from_name(const std::string& name);

struct SweepSpec {
  SweepParam param = SweepParam::task_bits;
  std::vector<double> values;
  std::vector<optimizer::Strategy> schemes;
  std::vector<std::uint64_t> seeds;
};

SweepSpec parse_sweep_spec(const std::string& json_text);
SweepSpec load_sweep_spec(const std::string& path);

// Returns a copy of `base` with the swept parameter set. task_bits rescales
// every device load so the fleet total equals `value`; cycles_per_bit sets
// the per-bit workload of every device.
Scenario apply_sweep_value(const Scenario& base, SweepParam p, double value);

// One optimizer run folded into a table row. `manifest_path` nonempty writes
// the full run manifest beside the row.
ResultRow run_single(const Scenario& s, optimizer::Strategy strategy, std::uint64_t seed,
                     const std::string& param, double value,
                     const std::string& manifest_path = "");

// Executes every (scheme, value, seed) cell, up to `jobs` at a time. Rows are
// sorted before return so assembly order never shows in the output. With a
// nonempty manifest_dir each cell writes <scheme>_<param>_<value>_<seed>.json.
ResultTable run_sweep(const SweepSpec& spec, const Scenario& base, int jobs = 1,
                      const std::string& manifest_dir = "");

// All requested schemes on one unmodified scenario and seed.
ResultTable run_compare(const Scenario& base, const std::vector<optimizer::Strategy>& schemes,
                        std::uint64_t seed, int jobs = 1, const std::string& manifest_dir = "");

}  // namespace risuav::harness
