#pragma once
// Result tables and their CSV form. Formatting is locale-independent with a
// fixed 9-significant-digit contract so identical tables produce identical
// bytes on every platform.

#include <cstdint>
#include <string>
#include <vector>

namespace risuav::harness {

struct ResultRow {
  std::string scheme;
  std::string param = "-";  // swept parameter name, "-" for single runs
  double value = 0.0;       // swept parameter value
  std::uint64_t seed = 0;
  double energy_efficiency = 0.0;  // bits per joule
  double offloaded_bits = 0.0;
  double mean_ris_distance = 0.0;  // meters, averaged over slots
  int outer_iterations = 0;
  std::string status = "ok";  // "ok" or a short error description
  double wall_time_s = 0.0;   // kept in manifests only, never written to CSV
};

struct ResultTable {
  std::vector<ResultRow> rows;
};

// 9 significant digits, shortest form, '.' decimal point regardless of locale.
std::string format_sig9(double v);

// Orders rows by (scheme, param, value, seed) so concurrent assembly is
// reproducible.
void sort_rows(ResultTable& table);

// Header plus one line per row. Throws std::invalid_argument when the table
// is empty. Commas inside status text are replaced with ';'.
std::string to_csv(const ResultTable& table);
void write_csv(const ResultTable& table, const std::string& path);

// Inverse of to_csv up to the wall_time_s field, which the CSV omits.
ResultTable parse_csv(const std::string& text);
ResultTable read_csv(const std::string& path);

}  // namespace risuav::harness
