#include "risuav/csv.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>
#include <tuple>

namespace risuav::harness {

namespace {

constexpr const char* kHeader =
    "scheme,param,value,seed,energy_efficiency,offloaded_bits,mean_ris_distance,"
    "outer_iterations,status";

std::string sanitize(std::string text) {
  std::replace(text.begin(), text.end(), ',', ';');
  std::replace(text.begin(), text.end(), '\n', ' ');
  return text;
}

double parse_double(const std::string& field) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw std::invalid_argument("bad numeric field: " + field);
  }
  return v;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

}  // namespace

std::string format_sig9(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 9);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf, ptr);
}

void sort_rows(ResultTable& table) {
  std::sort(table.rows.begin(), table.rows.end(), [](const ResultRow& a, const ResultRow& b) {
    return std::tie(a.scheme, a.param, a.value, a.seed) <
           std::tie(b.scheme, b.param, b.value, b.seed);
  });
}

std::string to_csv(const ResultTable& table) {
  if (table.rows.empty()) throw std::invalid_argument("refusing to emit an empty result table");
  std::ostringstream out;
  out << kHeader << '\n';
  for (const ResultRow& r : table.rows) {
    out << sanitize(r.scheme) << ',' << sanitize(r.param) << ',' << format_sig9(r.value) << ','
        << r.seed << ',' << format_sig9(r.energy_efficiency) << ','
        << format_sig9(r.offloaded_bits) << ',' << format_sig9(r.mean_ris_distance) << ','
        << r.outer_iterations << ',' << sanitize(r.status) << '\n';
  }
  return out.str();
}

void write_csv(const ResultTable& table, const std::string& path) {
  const std::string text = to_csv(table);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

ResultTable parse_csv(const std::string& text) {
  ResultTable table;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("empty CSV input");
  if (line != kHeader) throw std::invalid_argument("unexpected CSV header: " + line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_line(line);
    if (fields.size() != 9) throw std::invalid_argument("bad CSV row: " + line);
    ResultRow r;
    r.scheme = fields[0];
    r.param = fields[1];
    r.value = parse_double(fields[2]);
    r.seed = static_cast<std::uint64_t>(std::stoull(fields[3]));
    r.energy_efficiency = parse_double(fields[4]);
    r.offloaded_bits = parse_double(fields[5]);
    r.mean_ris_distance = parse_double(fields[6]);
    r.outer_iterations = std::stoi(fields[7]);
    r.status = fields[8];
    table.rows.push_back(std::move(r));
  }
  return table;
}

ResultTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

}  // namespace risuav::harness
