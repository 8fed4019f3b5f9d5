#include "risuav/record.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "nlohmann/json.hpp"
#include "risuav/channel.hpp"

namespace risuav::harness {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json matrix_to_json(const Eigen::MatrixXd& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const ordered_json& j) {
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  if (rows == 0) return Eigen::MatrixXd(0, 0);
  const Eigen::Index cols = static_cast<Eigen::Index>(j.at(0).size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw std::invalid_argument("ragged matrix in manifest");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row.at(static_cast<std::size_t>(c));
  }
  return m;
}

ordered_json path_to_json(const Trajectory& path) {
  ordered_json pts = ordered_json::array();
  for (const auto& q : path) pts.push_back(ordered_json::array({q.x(), q.y()}));
  return pts;
}

Trajectory path_from_json(const ordered_json& j) {
  Trajectory path;
  path.reserve(j.size());
  for (const auto& pt : j) {
    path.emplace_back(pt.at(0).get<double>(), pt.at(1).get<double>());
  }
  return path;
}

ordered_json decision_to_json(const DecisionVariables& v) {
  ordered_json d;
  d["local_bits"] = matrix_to_json(v.bits.local);
  d["uav_bits"] = matrix_to_json(v.bits.uav);
  d["powers"] = matrix_to_json(v.powers);
  d["rates"] = matrix_to_json(v.rates);
  d["phases"] = matrix_to_json(v.phases);
  d["path"] = path_to_json(v.path);
  return d;
}

DecisionVariables decision_from_json(const ordered_json& d) {
  DecisionVariables v;
  v.bits.local = matrix_from_json(d.at("local_bits"));
  v.bits.uav = matrix_from_json(d.at("uav_bits"));
  v.powers = matrix_from_json(d.at("powers"));
  v.rates = matrix_from_json(d.at("rates"));
  v.phases = matrix_from_json(d.at("phases"));
  v.path = path_from_json(d.at("path"));
  return v;
}

std::vector<double> doubles_from_json(const ordered_json& j) {
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& x : j) out.push_back(x.get<double>());
  return out;
}

}  // namespace

RunRecord make_record(const Scenario& s, std::uint64_t seed, optimizer::Strategy strategy,
                      const optimizer::RunResult& result) {
  RunRecord r;
  r.scheme = optimizer::strategy_name(strategy);
  r.seed = seed;
  r.scenario = s;
  r.result = result;
  return r;
}

std::string serialize_record(const RunRecord& r) {
  ordered_json j;
  j["scheme"] = r.scheme;
  j["seed"] = r.seed;
  j["scenario_digest"] = scenario_digest(r.scenario);
  j["scenario"] = ordered_json::parse(serialize_scenario(r.scenario));
  j["converged"] = r.result.converged;
  j["demand_feasible"] = r.result.demand_feasible;
  j["energy_efficiency"] = r.result.energy_efficiency;
  j["completed_bits"] = r.result.completed_bits;
  j["total_energy_j"] = r.result.total_energy_j;
  j["wall_time_s"] = r.result.wall_time_s;
  j["feasibility_max_violation"] = r.result.feasibility.max_violation;

  ordered_json outer = ordered_json::array();
  for (const auto& rec : r.result.outer) {
    ordered_json o;
    o["alpha"] = rec.alpha;
    o["completed_bits"] = rec.completed_bits;
    o["energy_j"] = rec.energy_j;
    o["residual_bits"] = rec.residual_bits;
    o["wall_time_s"] = rec.wall_time_s;
    o["pass_values"] = rec.pass_values;
    outer.push_back(std::move(o));
  }
  j["outer"] = std::move(outer);
  if (r.result.demand_feasible) j["decision"] = decision_to_json(r.result.decision);
  return j.dump(2) + "\n";
}

void write_record(const RunRecord& r, const std::string& path) {
  const std::string text = serialize_record(r);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

RunRecord parse_record(const std::string& json_text) {
  const ordered_json j = ordered_json::parse(json_text);
  RunRecord r;
  r.scheme = j.at("scheme").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.scenario = parse_scenario(j.at("scenario").dump());
  r.result.converged = j.at("converged").get<bool>();
  r.result.demand_feasible = j.at("demand_feasible").get<bool>();
  r.result.energy_efficiency = j.at("energy_efficiency").get<double>();
  r.result.completed_bits = j.at("completed_bits").get<double>();
  r.result.total_energy_j = j.at("total_energy_j").get<double>();
  r.result.wall_time_s = j.at("wall_time_s").get<double>();
  r.result.feasibility.max_violation = j.at("feasibility_max_violation").get<double>();
  for (const auto& o : j.at("outer")) {
    optimizer::OuterRecord rec;
    rec.alpha = o.at("alpha").get<double>();
    rec.completed_bits = o.at("completed_bits").get<double>();
    rec.energy_j = o.at("energy_j").get<double>();
    rec.residual_bits = o.at("residual_bits").get<double>();
    rec.wall_time_s = o.at("wall_time_s").get<double>();
    rec.pass_values = doubles_from_json(o.at("pass_values"));
    r.result.outer.push_back(std::move(rec));
  }
  if (j.contains("decision")) r.result.decision = decision_from_json(j.at("decision"));
  return r;
}

RunRecord load_record(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_record(buf.str());
}

double total_offloaded_bits(const DecisionVariables& v) { return v.bits.uav.sum(); }

double mean_ris_distance(const Scenario& s, const Trajectory& path) {
  if (path.empty()) return 0.0;
  const int slots = s.time.slots;
  double sum = 0.0;
  for (int n = 0; n < slots; ++n) {
    sum += ris_uav_distance(s, path[static_cast<std::size_t>(n)]);
  }
  return sum / slots;
}

}  // namespace risuav::harness
