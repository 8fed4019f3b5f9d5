#include "risuav/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "nlohmann/json.hpp"
#include "risuav/record.hpp"

namespace risuav::harness {

namespace {

struct Cell {
  optimizer::Strategy scheme;
  double value = 0.0;
  std::uint64_t seed = 0;
};

std::string manifest_name(const Cell& c, const std::string& param) {
  std::ostringstream name;
  name << optimizer::strategy_name(c.scheme) << '_' << param << '_' << format_sig9(c.value)
       << '_' << c.seed << ".json";
  return name.str();
}

}  // namespace

const char* sweep_param_name(SweepParam p) {
  switch (p) {
    case SweepParam::task_bits: return "task_bits";
    case SweepParam::ris_elements: return "ris_elements";
    case SweepParam::period: return "period";
    case SweepParam::cycles_per_bit: return "cycles_per_bit";
  }
  return "unknown";
}

SweepParam sweep_param_from_name(const std::string& name) {
  if (name == "task_bits") return SweepParam::task_bits;
  if (name == "ris_elements") return SweepParam::ris_elements;
  if (name == "period") return SweepParam::period;
  if (name == "cycles_per_bit") return SweepParam::cycles_per_bit;
  throw std::invalid_argument("unknown sweep parameter: " + name);
}

SweepSpec parse_sweep_spec(const std::string& json_text) {
  const auto j = nlohmann::json::parse(json_text);
  SweepSpec spec;
  spec.param = sweep_param_from_name(j.at("param").get<std::string>());
  for (const auto& v : j.at("values")) spec.values.push_back(v.get<double>());
  for (const auto& s : j.at("schemes")) {
    spec.schemes.push_back(optimizer::strategy_from_name(s.get<std::string>()));
  }
  for (const auto& s : j.at("seeds")) spec.seeds.push_back(s.get<std::uint64_t>());
  if (spec.values.empty()) throw std::invalid_argument("sweep needs at least one value");
  if (spec.schemes.empty()) throw std::invalid_argument("sweep needs at least one scheme");
  if (spec.seeds.empty()) throw std::invalid_argument("sweep needs at least one seed");
  return spec;
}

SweepSpec load_sweep_spec(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_sweep_spec(buf.str());
}

Scenario apply_sweep_value(const Scenario& base, SweepParam p, double value) {
  Scenario s = base;
  switch (p) {
    case SweepParam::task_bits: {
      if (value <= 0.0) throw std::invalid_argument("task_bits value must be positive");
      const double total = std::accumulate(s.tasks.bits.begin(), s.tasks.bits.end(), 0.0);
      if (total <= 0.0) throw std::invalid_argument("base scenario has no task bits to scale");
      const double scale = value / total;
      for (double& b : s.tasks.bits) b *= scale;
      break;
    }
    case SweepParam::ris_elements: {
      const int m = static_cast<int>(std::lround(value));
      if (m < 1 || std::abs(value - m) > 1e-9) {
        throw std::invalid_argument("ris_elements value must be a positive integer");
      }
      s.radio.ris_elements = m;
      break;
    }
    case SweepParam::period: {
      if (value <= 0.0) throw std::invalid_argument("period value must be positive");
      s.time.horizon_s = value;
      break;
    }
    case SweepParam::cycles_per_bit: {
      if (value <= 0.0) throw std::invalid_argument("cycles_per_bit value must be positive");
      for (double& c : s.tasks.cycles_per_bit) c = value;
      break;
    }
  }
  return s;
}

ResultRow run_single(const Scenario& s, optimizer::Strategy strategy, std::uint64_t seed,
                     const std::string& param, double value, const std::string& manifest_path) {
  ResultRow row;
  row.scheme = optimizer::strategy_name(strategy);
  row.param = param;
  row.value = value;
  row.seed = seed;
  try {
    optimizer::RunConfig cfg;
    cfg.scenario = s;
    cfg.seed = seed;
    cfg.strategy = strategy;
    const optimizer::RunResult res = optimizer::run(cfg);
    row.wall_time_s = res.wall_time_s;
    if (!res.demand_feasible) {
      row.status = "infeasible-demand";
    } else {
      row.energy_efficiency = res.energy_efficiency;
      row.offloaded_bits = total_offloaded_bits(res.decision);
      row.mean_ris_distance = mean_ris_distance(s, res.decision.path);
      row.outer_iterations = static_cast<int>(res.outer.size());
      if (!res.converged) row.status = "iteration-limit";
    }
    if (!manifest_path.empty()) {
      write_record(make_record(s, seed, strategy, res), manifest_path);
    }
  } catch (const std::exception& e) {
    row.status = std::string("error: ") + e.what();
  }
  return row;
}

ResultTable run_sweep(const SweepSpec& spec, const Scenario& base, int jobs,
                      const std::string& manifest_dir) {
  if (spec.values.empty() || spec.schemes.empty() || spec.seeds.empty()) {
    throw std::invalid_argument("sweep spec must list values, schemes and seeds");
  }
  const std::string param = sweep_param_name(spec.param);

  std::vector<Cell> cells;
  for (const auto scheme : spec.schemes) {
    for (const double value : spec.values) {
      for (const auto seed : spec.seeds) cells.push_back({scheme, value, seed});
    }
  }

  ResultTable table;
  table.rows.resize(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= cells.size()) return;
      const Cell& c = cells[idx];
      ResultRow row;
      try {
        const Scenario s = apply_sweep_value(base, spec.param, c.value);
        std::string manifest;
        if (!manifest_dir.empty()) manifest = manifest_dir + "/" + manifest_name(c, param);
        row = run_single(s, c.scheme, c.seed, param, c.value, manifest);
      } catch (const std::exception& e) {
        row.scheme = optimizer::strategy_name(c.scheme);
        row.param = param;
        row.value = c.value;
        row.seed = c.seed;
        row.status = std::string("error: ") + e.what();
      }
      table.rows[idx] = std::move(row);
    }
  };

  const int thread_count =
      std::max(1, std::min<int>(jobs, static_cast<int>(cells.size())));
  if (thread_count <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(thread_count));
    for (int i = 0; i < thread_count; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  sort_rows(table);
  return table;
}

ResultTable run_compare(const Scenario& base, const std::vector<optimizer::Strategy>& schemes,
                        std::uint64_t seed, int jobs, const std::string& manifest_dir) {
  if (schemes.empty()) throw std::invalid_argument("compare needs at least one scheme");
  ResultTable table;
  table.rows.resize(schemes.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= schemes.size()) return;
      std::string manifest;
      if (!manifest_dir.empty()) {
        manifest = manifest_dir + "/" + std::string(optimizer::strategy_name(schemes[idx])) +
                   "_" + std::to_string(seed) + ".json";
      }
      table.rows[idx] = run_single(base, schemes[idx], seed, "-", 0.0, manifest);
    }
  };
  const int thread_count =
      std::max(1, std::min<int>(jobs, static_cast<int>(schemes.size())));
  if (thread_count <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(thread_count));
    for (int i = 0; i < thread_count; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  sort_rows(table);
  return table;
}

}  // namespace risuav::harness
