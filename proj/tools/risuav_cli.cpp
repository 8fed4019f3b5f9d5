// Command line front end: single runs, parameter sweeps, scheme comparisons,
// and channel dumps. Every invocation with the same inputs and seeds writes
// byte-identical CSV and SVG artifacts.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "nlohmann/json.hpp"
#include "risuav/channel.hpp"
#include "risuav/plot.hpp"
#include "risuav/record.hpp"
#include "risuav/sweep.hpp"

namespace {

using namespace risuav;
namespace fs = std::filesystem;

struct CommonOpts {
  std::string scenario_path;
  std::string profile = "desk";
  std::string out_dir = "out";
  std::uint64_t seed = 1;
  int jobs = 1;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--scenario", o.scenario_path, "Scenario JSON file (overrides --profile)");
  cmd->add_option("--profile", o.profile, "Built-in scenario preset")
      ->check(CLI::IsMember({"desk", "reference"}));
  cmd->add_option("--out-dir", o.out_dir, "Directory for output artifacts");
  cmd->add_option("--seed", o.seed, "Channel realization seed");
  cmd->add_option("--jobs", o.jobs, "Concurrent runs")->check(CLI::PositiveNumber);
}

Scenario pick_scenario(const CommonOpts& o) {
  if (!o.scenario_path.empty()) return load_scenario(o.scenario_path);
  return o.profile == "reference" ? reference_default() : desk_default();
}

std::string out_path(const CommonOpts& o, const std::string& name) {
  fs::create_directories(o.out_dir);
  return (fs::path(o.out_dir) / name).string();
}

void print_table(const harness::ResultTable& table) {
  std::cout << harness::to_csv(table);
}

int cmd_run(const CommonOpts& o, const std::string& strategy_name) {
  const Scenario s = pick_scenario(o);
  const auto strategy = optimizer::strategy_from_name(strategy_name);
  const std::string manifest =
      out_path(o, std::string("run_") + strategy_name + "_" + std::to_string(o.seed) + ".json");
  harness::ResultRow row =
      harness::run_single(s, strategy, o.seed, "-", 0.0, manifest);
  harness::ResultTable table;
  table.rows.push_back(row);
  print_table(table);

  if (row.status == "ok" || row.status == "iteration-limit") {
    const harness::RunRecord rec = harness::load_record(manifest);
    harness::write_text_file(
        out_path(o, std::string("convergence_") + strategy_name + ".svg"),
        harness::render_convergence_svg(rec.result.outer, "outer loop convergence"));
    harness::write_text_file(
        out_path(o, std::string("trajectory_") + strategy_name + ".svg"),
        harness::render_trajectory_svg(s, {{strategy_name, rec.result.decision.path}},
                                       "mission path"));
  }
  return row.status.rfind("error", 0) == 0 ? 1 : 0;
}

int cmd_sweep(const CommonOpts& o, const std::string& spec_path) {
  const Scenario s = pick_scenario(o);
  const harness::SweepSpec spec = harness::load_sweep_spec(spec_path);
  fs::create_directories(o.out_dir);
  const harness::ResultTable table = harness::run_sweep(spec, s, o.jobs, o.out_dir);
  const std::string param = harness::sweep_param_name(spec.param);
  harness::write_csv(table, out_path(o, "sweep_" + param + ".csv"));

  harness::SeriesPlotSpec ee;
  ee.y_column = "energy_efficiency";
  ee.title = "energy efficiency vs " + param;
  ee.x_label = param;
  ee.y_label = "bits per joule";
  harness::write_text_file(out_path(o, "sweep_" + param + "_ee.svg"),
                           harness::render_series_svg(table, ee));

  harness::SeriesPlotSpec off;
  off.y_column = "offloaded_bits";
  off.title = "offloaded bits vs " + param;
  off.x_label = param;
  off.y_label = "bits";
  harness::write_text_file(out_path(o, "sweep_" + param + "_offload.svg"),
                           harness::render_series_svg(table, off));
  print_table(table);
  return 0;
}

int cmd_compare(const CommonOpts& o, std::vector<std::string> scheme_names) {
  const Scenario s = pick_scenario(o);
  if (scheme_names.empty()) {
    scheme_names = {"proposed", "straight-line", "random-phase", "no-ris", "full-offload"};
  }
  std::vector<optimizer::Strategy> schemes;
  schemes.reserve(scheme_names.size());
  for (const auto& n : scheme_names) schemes.push_back(optimizer::strategy_from_name(n));
  fs::create_directories(o.out_dir);
  const harness::ResultTable table =
      harness::run_compare(s, schemes, o.seed, o.jobs, o.out_dir);
  harness::write_csv(table, out_path(o, "compare.csv"));

  std::vector<std::pair<std::string, Trajectory>> paths;
  for (const auto& n : scheme_names) {
    const fs::path manifest = fs::path(o.out_dir) / (n + "_" + std::to_string(o.seed) + ".json");
    if (!fs::exists(manifest)) continue;
    const harness::RunRecord rec = harness::load_record(manifest.string());
    if (rec.result.demand_feasible) paths.emplace_back(n, rec.result.decision.path);
  }
  if (!paths.empty()) {
    harness::write_text_file(out_path(o, "compare_paths.svg"),
                             harness::render_trajectory_svg(s, paths, "mission paths"));
  }
  print_table(table);
  return 0;
}

int cmd_dump_channels(const CommonOpts& o) {
  const Scenario s = pick_scenario(o);
  const ChannelDraws draws = ChannelDraws::sample(s, o.seed);
  const Trajectory path = straight_line_trajectory(s);
  ChannelState ch = compute_channel_state(s, draws, path);
  PhaseConfig zero = PhaseConfig::Zero(s.time.slots, s.radio.ris_elements);
  apply_phases(s, ch, zero);

  nlohmann::ordered_json j;
  j["scenario_digest"] = scenario_digest(s);
  j["seed"] = o.seed;
  nlohmann::ordered_json slots = nlohmann::ordered_json::array();
  for (int n = 0; n < s.time.slots; ++n) {
    nlohmann::ordered_json slot;
    slot["position"] = {path[static_cast<std::size_t>(n)].x(),
                        path[static_cast<std::size_t>(n)].y()};
    slot["ris_distance_m"] = ch.dist_ru(n);
    nlohmann::ordered_json devs = nlohmann::ordered_json::array();
    for (int i = 0; i < s.device_count(); ++i) {
      nlohmann::ordered_json d;
      d["device_distance_m"] = ch.dist_du(i, n);
      d["gain_sq_zero_phase"] = ch.gain_sq(i, n);
      d["aligned_gain"] = coherent_magnitude_gain(s, draws, i, n, ch.dist_du(i, n),
                                                  ch.dist_ru(n));
      devs.push_back(std::move(d));
    }
    slot["devices"] = std::move(devs);
    slot["decode_order"] = ch.orders[static_cast<std::size_t>(n)].order;
    slots.push_back(std::move(slot));
  }
  j["slots"] = std::move(slots);
  const std::string path_out = out_path(o, "channels_" + std::to_string(o.seed) + ".json");
  harness::write_text_file(path_out, j.dump(2) + "\n");
  std::cout << path_out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RIS-assisted UAV offloading experiment harness"};
  app.require_subcommand(1);

  CommonOpts run_opts, sweep_opts, cmp_opts, dump_opts;
  std::string strategy = "proposed";
  std::string spec_path;
  std::vector<std::string> scheme_names;

  CLI::App* run = app.add_subcommand("run", "Optimize one scenario with one scheme");
  add_common(run, run_opts);
  run->add_option("--strategy", strategy, "Scheme to run");

  CLI::App* sweep = app.add_subcommand("sweep", "Run a sweep described by a spec file");
  add_common(sweep, sweep_opts);
  sweep->add_option("--spec", spec_path, "Sweep spec JSON")->required();

  CLI::App* cmp = app.add_subcommand("compare", "Run several schemes on one scenario");
  add_common(cmp, cmp_opts);
  cmp->add_option("--schemes", scheme_names, "Schemes to include (default: all)");

  CLI::App* dump = app.add_subcommand("dump-channels", "Write channel state along the straight line");
  add_common(dump, dump_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_opts, strategy);
    if (sweep->parsed()) return cmd_sweep(sweep_opts, spec_path);
    if (cmp->parsed()) return cmd_compare(cmp_opts, scheme_names);
    if (dump->parsed()) return cmd_dump_channels(dump_opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
