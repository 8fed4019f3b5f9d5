#pragma once
// Per-run manifest: the optimizer trace and the full decision state, written
// as JSON so a finished run can be audited or re-scored without re-solving.

#include <cstdint>
#include <string>

#include "risuav/optimizer.hpp"

namespace risuav::harness {

struct RunRecord {
  std::string scheme;
  std::uint64_t seed = 0;
  Scenario scenario;
  optimizer::RunResult result;
};

RunRecord make_record(const Scenario& s, std::uint64_t seed, optimizer::Strategy strategy,
                      const optimizer::RunResult& result);

std::string serialize_record(const RunRecord& r);
void write_record(const RunRecord& r, const std::string& path);
RunRecord load_record(const std::string& path);
RunRecord parse_record(const std::string& json_text);

// Result metrics shared by tables and manifests.
double total_offloaded_bits(const DecisionVariables& v);
double mean_ris_distance(const Scenario& s, const Trajectory& path);

}  // namespace risuav::harness
