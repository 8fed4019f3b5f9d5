#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "risuav/csv.hpp"
#include "risuav/energy.hpp"
#include "risuav/optimizer.hpp"
#include "risuav/plot.hpp"
#include "risuav/record.hpp"
#include "risuav/scenario.hpp"
#include "risuav/sweep.hpp"

using namespace risuav;
using namespace risuav::harness;
namespace opt = risuav::optimizer;

namespace {

ResultRow make_row(const std::string& scheme, const std::string& param, double value,
                   std::uint64_t seed, double ee, const std::string& status = "ok") {
  ResultRow r;
  r.scheme = scheme;
  r.param = param;
  r.value = value;
  r.seed = seed;
  r.energy_efficiency = ee;
  r.offloaded_bits = ee * 2.0;
  r.mean_ris_distance = 21.5;
  r.outer_iterations = 4;
  r.status = status;
  return r;
}

// Small scenario so the real runs in this suite stay quick; the harness logic
// under test does not depend on the instance.
Scenario small() {
  Scenario s = desk_default();
  s.geometry.devices.resize(2);
  s.tasks.bits.resize(2);
  s.tasks.cycles_per_bit.resize(2);
  s.radio.ris_elements = 4;
  return s;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("CSV text survives a parse and re-emit byte for byte") {
  ResultTable t;
  t.rows.push_back(make_row("proposed", "ris_elements", 8.0, 1, 236327.737));
  t.rows.push_back(make_row("no-ris", "ris_elements", 8.0, 2, 1e-7));
  t.rows.push_back(make_row("full-offload", "-", 0.0, 3, 12345678.9, "iteration-limit"));
  const std::string once = to_csv(t);
  const ResultTable back = parse_csv(once);
  REQUIRE(back.rows.size() == t.rows.size());
  CHECK(to_csv(back) == once);

  CHECK(back.rows[0].scheme == "proposed");
  CHECK(back.rows[0].param == "ris_elements");
  CHECK(back.rows[0].value == 8.0);
  CHECK(back.rows[0].seed == 1);
  CHECK(back.rows[0].energy_efficiency == 236327.737);
  CHECK(back.rows[1].energy_efficiency == 1e-7);
  CHECK(back.rows[2].status == "iteration-limit");
  CHECK(back.rows[2].outer_iterations == 4);
}

TEST_CASE("CSV files round trip through disk") {
  ResultTable t;
  t.rows.push_back(make_row("proposed", "period", 16.0, 1, 282132.157));
  const std::string path = temp_path("risuav_csv_roundtrip.csv");
  write_csv(t, path);
  const ResultTable back = read_csv(path);
  std::filesystem::remove(path);
  CHECK(to_csv(back) == to_csv(t));
}

TEST_CASE("rows sort by scheme, parameter, value, then seed") {
  ResultTable t;
  t.rows.push_back(make_row("proposed", "period", 12.0, 2, 1.0));
  t.rows.push_back(make_row("no-ris", "period", 16.0, 1, 2.0));
  t.rows.push_back(make_row("proposed", "period", 12.0, 1, 3.0));
  t.rows.push_back(make_row("proposed", "cycles_per_bit", 99.0, 9, 4.0));
  t.rows.push_back(make_row("proposed", "period", 8.0, 5, 5.0));
  sort_rows(t);
  CHECK(t.rows[0].scheme == "no-ris");
  CHECK(t.rows[1].param == "cycles_per_bit");
  CHECK(t.rows[2].value == 8.0);
  CHECK(t.rows[3].seed == 1);
  CHECK(t.rows[4].seed == 2);
}

TEST_CASE("an empty table refuses to serialize") {
  CHECK_THROWS_AS(to_csv(ResultTable{}), std::invalid_argument);
}

TEST_CASE("separators inside status text are neutralized") {
  ResultTable t;
  ResultRow r = make_row("proposed", "-", 0.0, 1, 1.0);
  r.status = "error: bad,thing\nhappened";
  t.rows.push_back(r);
  const std::string text = to_csv(t);
  CHECK(text.find("bad;thing happened") != std::string::npos);
  const ResultTable back = parse_csv(text);
  CHECK(back.rows[0].status == "error: bad;thing happened");
}

TEST_CASE("nine-significant-digit formatting is parse-stable") {
  for (const double v : {0.0, 1.0, -1.0, 0.5, 236327.737, 1e-7, 12345678.9, 3.0e8,
                         19.7089798}) {
    const std::string f1 = format_sig9(v);
    ResultTable t;
    t.rows.push_back(make_row("x", "-", v, 1, v));
    const ResultTable back = parse_csv(to_csv(t));
    CHECK(format_sig9(back.rows[0].value) == f1);
    CHECK(format_sig9(back.rows[0].energy_efficiency) == f1);
  }
}

TEST_CASE("sweep values rewrite the scenario as documented") {
  Scenario base = desk_default();
  base.tasks.bits = {10e6, 20e6, 30e6};

  SUBCASE("total task bits rescale proportionally") {
    const Scenario s = apply_sweep_value(base, SweepParam::task_bits, 120e6);
    CHECK(s.tasks.bits[0] == doctest::Approx(20e6).epsilon(1e-12));
    CHECK(s.tasks.bits[1] == doctest::Approx(40e6).epsilon(1e-12));
    CHECK(s.tasks.bits[2] == doctest::Approx(60e6).epsilon(1e-12));
  }
  SUBCASE("element count takes integers only") {
    CHECK(apply_sweep_value(base, SweepParam::ris_elements, 12.0).radio.ris_elements == 12);
    CHECK_THROWS_AS(apply_sweep_value(base, SweepParam::ris_elements, 7.5),
                    std::invalid_argument);
    CHECK_THROWS_AS(apply_sweep_value(base, SweepParam::ris_elements, 0.0),
                    std::invalid_argument);
  }
  SUBCASE("period sets the horizon and leaves the slot count alone") {
    const Scenario s = apply_sweep_value(base, SweepParam::period, 16.0);
    CHECK(s.time.horizon_s == 16.0);
    CHECK(s.time.slots == base.time.slots);
  }
  SUBCASE("per-bit workload applies to every device") {
    const Scenario s = apply_sweep_value(base, SweepParam::cycles_per_bit, 2500.0);
    for (const double c : s.tasks.cycles_per_bit) CHECK(c == 2500.0);
  }
  SUBCASE("nonpositive values are rejected") {
    CHECK_THROWS_AS(apply_sweep_value(base, SweepParam::task_bits, 0.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(apply_sweep_value(base, SweepParam::period, -1.0),
                    std::invalid_argument);
  }
}

TEST_CASE("sweep specs parse from JSON and reject junk") {
  const SweepSpec spec = parse_sweep_spec(
      R"({"param":"period","values":[8,10],"schemes":["proposed","no-ris"],"seeds":[1,2]})");
  CHECK(spec.param == SweepParam::period);
  CHECK(spec.values == std::vector<double>{8.0, 10.0});
  REQUIRE(spec.schemes.size() == 2);
  CHECK(spec.schemes[1] == opt::Strategy::no_ris);
  CHECK(spec.seeds == std::vector<std::uint64_t>{1, 2});

  CHECK_THROWS(parse_sweep_spec("not json"));
  CHECK_THROWS(parse_sweep_spec(R"({"values":[1],"schemes":["proposed"],"seeds":[1]})"));
  CHECK_THROWS_AS(parse_sweep_spec(
                      R"({"param":"bogus","values":[1],"schemes":["proposed"],"seeds":[1]})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_sweep_spec(
                      R"({"param":"period","values":[],"schemes":["proposed"],"seeds":[1]})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_sweep_spec(
                      R"({"param":"period","values":[8],"schemes":["warp"],"seeds":[1]})"),
                  std::invalid_argument);
  CHECK_THROWS(load_sweep_spec(temp_path("risuav_missing_spec.json")));
}

TEST_CASE("single runs report failure modes in the status column") {
  SUBCASE("demand beyond all compute budgets") {
    Scenario s = small();
    for (double& b : s.tasks.bits) b = 1e12;
    const ResultRow row = run_single(s, opt::Strategy::proposed, 1, "-", 0.0);
    CHECK(row.status == "infeasible-demand");
    CHECK(row.energy_efficiency == 0.0);
  }
  SUBCASE("invalid scenarios become error rows") {
    Scenario s = small();
    s.radio.bandwidth_hz = 0.0;
    const ResultRow row = run_single(s, opt::Strategy::proposed, 1, "-", 0.0);
    CHECK(row.status.rfind("error: ", 0) == 0);
  }
}

TEST_CASE("run manifests audit against an independent recount") {
  const Scenario s = small();
  const std::string path = temp_path("risuav_manifest_audit.json");
  const ResultRow row =
      run_single(s, opt::Strategy::straight_line, 1, "ris_elements", 4.0, path);
  REQUIRE(row.status == "ok");

  const RunRecord rec = load_record(path);
  std::filesystem::remove(path);
  CHECK(rec.scheme == "straight-line");
  CHECK(rec.seed == 1);
  CHECK(scenario_digest(rec.scenario) == scenario_digest(s));
  CHECK(rec.result.converged);

  // The stored decision must re-score to the stored efficiency.
  const double recount = energy_efficiency(rec.scenario, rec.result.decision);
  CHECK(recount == doctest::Approx(rec.result.energy_efficiency).epsilon(1e-9));
  CHECK(row.energy_efficiency == doctest::Approx(rec.result.energy_efficiency).epsilon(1e-12));
  CHECK(row.offloaded_bits ==
        doctest::Approx(total_offloaded_bits(rec.result.decision)).epsilon(1e-12));
  CHECK(row.mean_ris_distance ==
        doctest::Approx(mean_ris_distance(rec.scenario, rec.result.decision.path))
            .epsilon(1e-12));

  // Serialized form is stable through a parse cycle.
  CHECK(serialize_record(rec) == serialize_record(parse_record(serialize_record(rec))));
}

TEST_CASE("sweeps produce identical bytes regardless of worker count") {
  SweepSpec spec;
  spec.param = SweepParam::ris_elements;
  spec.values = {4.0};
  spec.schemes = {opt::Strategy::straight_line};
  spec.seeds = {1, 2};
  const Scenario base = small();
  const std::string serial = to_csv(run_sweep(spec, base, 1));
  const std::string threaded = to_csv(run_sweep(spec, base, 4));
  CHECK(serial == threaded);
}

TEST_CASE("a failing sweep cell becomes an error row, not a crash") {
  SweepSpec spec;
  spec.param = SweepParam::ris_elements;
  spec.values = {4.0, 6.5};  // 6.5 is not a valid element count
  spec.schemes = {opt::Strategy::straight_line};
  spec.seeds = {1};
  const ResultTable t = run_sweep(spec, small(), 2);
  REQUIRE(t.rows.size() == 2);
  // Rows come back sorted by value.
  CHECK(t.rows[0].value == 4.0);
  CHECK(t.rows[0].status == "ok");
  CHECK(t.rows[1].value == 6.5);
  CHECK(t.rows[1].status.rfind("error: ", 0) == 0);
}

TEST_CASE("series plots are deterministic and reject unknown columns") {
  ResultTable t;
  t.rows.push_back(make_row("proposed", "ris_elements", 4.0, 1, 2.0e5));
  t.rows.push_back(make_row("proposed", "ris_elements", 8.0, 1, 2.4e5));
  t.rows.push_back(make_row("no-ris", "ris_elements", 4.0, 1, 1.5e5));
  t.rows.push_back(make_row("no-ris", "ris_elements", 8.0, 1, 1.5e5));

  SeriesPlotSpec spec;
  spec.title = "elements";
  const std::string svg = render_series_svg(t, spec);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(render_series_svg(t, spec) == svg);

  SeriesPlotSpec bad = spec;
  bad.y_column = "wall_time_s";
  CHECK_THROWS_AS(render_series_svg(t, bad), std::invalid_argument);
}

TEST_CASE("plots drop error rows but keep iteration-limited ones") {
  ResultTable ok;
  ok.rows.push_back(make_row("proposed", "period", 8.0, 1, 2.0e5));
  ok.rows.push_back(make_row("proposed", "period", 12.0, 1, 2.6e5));

  ResultTable with_error = ok;
  with_error.rows.push_back(make_row("proposed", "period", 16.0, 1, 9.9e5, "error: boom"));
  SeriesPlotSpec spec;
  CHECK(render_series_svg(with_error, spec) == render_series_svg(ok, spec));

  ResultTable limited = ok;
  limited.rows[1].status = "iteration-limit";
  CHECK(render_series_svg(limited, spec) == render_series_svg(ok, spec));

  ResultTable hopeless;
  hopeless.rows.push_back(make_row("proposed", "period", 8.0, 1, 1.0, "error: boom"));
  CHECK_THROWS_AS(render_series_svg(hopeless, spec), std::invalid_argument);
}

TEST_CASE("trace and trajectory plots render deterministically") {
  std::vector<opt::OuterRecord> outer(2);
  outer[0].alpha = 1.0e5;
  outer[0].residual_bits = 3.0e6;
  outer[0].pass_values = {1.0, 2.0};
  outer[1].alpha = 1.5e5;
  outer[1].residual_bits = 120.0;
  const std::string conv = render_convergence_svg(outer, "price trace");
  CHECK(conv.find("<svg") != std::string::npos);
  CHECK(render_convergence_svg(outer, "price trace") == conv);

  const Scenario s = desk_default();
  const std::vector<std::pair<std::string, Trajectory>> paths = {
      {"straight", straight_line_trajectory(s)}};
  const std::string traj = render_trajectory_svg(s, paths, "mission");
  CHECK(traj.find("polyline") != std::string::npos);
  CHECK(render_trajectory_svg(s, paths, "mission") == traj);
}

TEST_CASE("text files write the exact bytes they are given") {
  const std::string path = temp_path("risuav_text_roundtrip.svg");
  const std::string payload = "<svg>\nline one\n</svg>\n";
  write_text_file(path, payload);
  std::ifstream in(path, std::ios::binary);
  std::string back((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();
  std::filesystem::remove(path);
  CHECK(back == payload);
}
