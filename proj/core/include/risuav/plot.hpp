#pragma once
// Deterministic SVG renderings of result tables and run traces. The output
// bytes are a pure function of the inputs: no timestamps, no randomness.

#include <string>
#include <utility>
#include <vector>

#include "risuav/csv.hpp"
#include "risuav/optimizer.hpp"

namespace risuav::harness {

struct SeriesPlotSpec {
  std::string y_column = "energy_efficiency";  // energy_efficiency |
                                               // offloaded_bits |
                                               // mean_ris_distance |
                                               // outer_iterations
  std::string title;
  std::string x_label;
  std::string y_label;
};

// One line per scheme, seeds averaged per swept value, error rows skipped.
// Throws std::invalid_argument on an unknown y_column or when no usable rows
// remain.
std::string render_series_svg(const ResultTable& table, const SeriesPlotSpec& spec);

// Price and residual of the outer iteration, one point per iteration. Each
// trace is scaled to its own vertical range.
std::string render_convergence_svg(const std::vector<optimizer::OuterRecord>& outer,
                                   const std::string& title);

// Top-down mission view: device and RIS markers, start and goal, one
// polyline per named path.
std::string render_trajectory_svg(const Scenario& s,
                                  const std::vector<std::pair<std::string, Trajectory>>& paths,
                                  const std::string& title);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace risuav::harness
