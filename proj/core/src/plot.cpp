#include "risuav/plot.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace risuav::harness {

namespace {

constexpr double kWidth = 860.0;
constexpr double kHeight = 540.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 820.0;
constexpr double kTop = 60.0;
constexpr double kBottom = 480.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
constexpr int kPaletteSize = 6;

std::string num(double v) {
  char buf[48];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 6);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf, ptr);
}

std::string tick(double v) {
  char buf[48];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 4);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf, ptr);
}

struct Range {
  double lo = 0.0;
  double hi = 1.0;
  void widen(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (hi <= lo) {
      const double pad = std::max(1.0, std::abs(lo)) * 0.05;
      lo -= pad;
      hi += pad;
    } else {
      const double pad = (hi - lo) * 0.05;
      lo -= pad;
      hi += pad;
    }
  }
  double frac(double v) const { return (v - lo) / (hi - lo); }
};

double map_x(const Range& r, double v) { return kLeft + r.frac(v) * (kRight - kLeft); }
double map_y(const Range& r, double v) { return kBottom - r.frac(v) * (kBottom - kTop); }

void open_svg(std::ostringstream& out, const std::string& title) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth) << "\" height=\""
      << num(kHeight) << "\" viewBox=\"0 0 " << num(kWidth) << ' ' << num(kHeight) << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << num(kWidth / 2) << "\" y=\"30\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"18\">"
      << title << "</text>\n";
}

void axes(std::ostringstream& out, const Range& xr, const Range& yr, const std::string& x_label,
          const std::string& y_label) {
  out << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kBottom) << "\" x2=\"" << num(kRight)
      << "\" y2=\"" << num(kBottom) << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(kLeft)
      << "\" y2=\"" << num(kBottom) << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = xr.lo + (xr.hi - xr.lo) * i / 4.0;
    const double fy = yr.lo + (yr.hi - yr.lo) * i / 4.0;
    const double px = map_x(xr, fx);
    const double py = map_y(yr, fy);
    out << "<line x1=\"" << num(px) << "\" y1=\"" << num(kBottom) << "\" x2=\"" << num(px)
        << "\" y2=\"" << num(kBottom + 6) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << num(px) << "\" y=\"" << num(kBottom + 22)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << tick(fx)
        << "</text>\n";
    out << "<line x1=\"" << num(kLeft - 6) << "\" y1=\"" << num(py) << "\" x2=\"" << num(kLeft)
        << "\" y2=\"" << num(py) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << num(kLeft - 10) << "\" y=\"" << num(py + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">" << tick(fy)
        << "</text>\n";
  }
  out << "<text x=\"" << num((kLeft + kRight) / 2) << "\" y=\"" << num(kBottom + 44)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" << x_label
      << "</text>\n";
  out << "<text x=\"20\" y=\"" << num((kTop + kBottom) / 2)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\" "
         "transform=\"rotate(-90 20 "
      << num((kTop + kBottom) / 2) << ")\">" << y_label << "</text>\n";
}

void legend_entry(std::ostringstream& out, int index, const std::string& name,
                  const char* color) {
  const double y = kTop + 16.0 * index;
  out << "<line x1=\"" << num(kRight - 150) << "\" y1=\"" << num(y) << "\" x2=\""
      << num(kRight - 120) << "\" y2=\"" << num(y) << "\" stroke=\"" << color
      << "\" stroke-width=\"2\"/>\n";
  out << "<text x=\"" << num(kRight - 114) << "\" y=\"" << num(y + 4)
      << "\" font-family=\"sans-serif\" font-size=\"12\">" << name << "</text>\n";
}

void polyline(std::ostringstream& out, const std::vector<std::pair<double, double>>& pts,
              const char* color) {
  out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i > 0) out << ' ';
    out << num(pts[i].first) << ',' << num(pts[i].second);
  }
  out << "\"/>\n";
}

double column_value(const ResultRow& r, const std::string& column) {
  if (column == "energy_efficiency") return r.energy_efficiency;
  if (column == "offloaded_bits") return r.offloaded_bits;
  if (column == "mean_ris_distance") return r.mean_ris_distance;
  if (column == "outer_iterations") return r.outer_iterations;
  throw std::invalid_argument("unknown plot column: " + column);
}

}  // namespace

std::string render_series_svg(const ResultTable& table, const SeriesPlotSpec& spec) {
  column_value(ResultRow{}, spec.y_column);  // reject unknown columns up front

  // scheme -> value -> (sum, count) with deterministic map ordering
  std::map<std::string, std::map<double, std::pair<double, int>>> series;
  for (const ResultRow& r : table.rows) {
    if (r.status != "ok" && r.status != "iteration-limit") continue;
    auto& cell = series[r.scheme][r.value];
    cell.first += column_value(r, spec.y_column);
    cell.second += 1;
  }
  if (series.empty()) throw std::invalid_argument("no usable rows to plot");

  Range xr, yr;
  bool first = true;
  for (const auto& [scheme, pts] : series) {
    for (const auto& [x, cell] : pts) {
      const double y = cell.first / cell.second;
      if (first) {
        xr.lo = xr.hi = x;
        yr.lo = yr.hi = y;
        first = false;
      }
      xr.widen(x);
      yr.widen(y);
    }
  }
  xr.finish();
  yr.finish();

  std::ostringstream out;
  open_svg(out, spec.title);
  axes(out, xr, yr, spec.x_label, spec.y_label);
  int idx = 0;
  for (const auto& [scheme, pts] : series) {
    const char* color = kPalette[idx % kPaletteSize];
    std::vector<std::pair<double, double>> mapped;
    mapped.reserve(pts.size());
    for (const auto& [x, cell] : pts) {
      mapped.emplace_back(map_x(xr, x), map_y(yr, cell.first / cell.second));
    }
    polyline(out, mapped, color);
    for (const auto& p : mapped) {
      out << "<circle cx=\"" << num(p.first) << "\" cy=\"" << num(p.second)
          << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    legend_entry(out, idx, scheme, color);
    ++idx;
  }
  out << "</svg>\n";
  return out.str();
}

std::string render_convergence_svg(const std::vector<optimizer::OuterRecord>& outer,
                                   const std::string& title) {
  if (outer.empty()) throw std::invalid_argument("no outer iterations to plot");
  Range xr, fr, ar;
  xr.lo = 1.0;
  xr.hi = static_cast<double>(outer.size());
  fr.lo = fr.hi = outer.front().residual_bits;
  ar.lo = ar.hi = outer.front().alpha;
  for (const auto& rec : outer) {
    fr.widen(rec.residual_bits);
    ar.widen(rec.alpha);
  }
  if (outer.size() == 1) xr.hi = 2.0;
  fr.finish();
  ar.finish();

  std::ostringstream out;
  open_svg(out, title);
  axes(out, xr, fr, "outer iteration", "parametric residual, bits");
  std::vector<std::pair<double, double>> fpts, apts;
  for (std::size_t k = 0; k < outer.size(); ++k) {
    const double x = map_x(xr, static_cast<double>(k + 1));
    fpts.emplace_back(x, map_y(fr, outer[k].residual_bits));
    apts.emplace_back(x, map_y(ar, outer[k].alpha));
  }
  polyline(out, fpts, kPalette[0]);
  polyline(out, apts, kPalette[1]);
  legend_entry(out, 0, "residual", kPalette[0]);
  legend_entry(out, 1, "price (own scale)", kPalette[1]);
  for (int i = 0; i <= 4; ++i) {
    const double fa = ar.lo + (ar.hi - ar.lo) * i / 4.0;
    const double py = map_y(ar, fa);
    out << "<text x=\"" << num(kRight + 8) << "\" y=\"" << num(py + 4)
        << "\" text-anchor=\"start\" font-family=\"sans-serif\" font-size=\"11\" fill=\""
        << kPalette[1] << "\">" << tick(fa) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string render_trajectory_svg(const Scenario& s,
                                  const std::vector<std::pair<std::string, Trajectory>>& paths,
                                  const std::string& title) {
  Range xr, yr;
  xr.lo = xr.hi = s.geometry.uav_start.x();
  yr.lo = yr.hi = s.geometry.uav_start.y();
  auto widen_pt = [&](const Eigen::Vector2d& p) {
    xr.widen(p.x());
    yr.widen(p.y());
  };
  widen_pt(s.geometry.uav_goal);
  widen_pt(s.geometry.ris_position);
  for (const auto& d : s.geometry.devices) widen_pt(d);
  for (const auto& [name, path] : paths) {
    for (const auto& q : path) widen_pt(q);
  }
  xr.finish();
  yr.finish();

  std::ostringstream out;
  open_svg(out, title);
  axes(out, xr, yr, "x, m", "y, m");

  for (std::size_t i = 0; i < s.geometry.devices.size(); ++i) {
    const auto& d = s.geometry.devices[i];
    out << "<circle cx=\"" << num(map_x(xr, d.x())) << "\" cy=\"" << num(map_y(yr, d.y()))
        << "\" r=\"5\" fill=\"none\" stroke=\"black\"/>\n";
    out << "<text x=\"" << num(map_x(xr, d.x()) + 8) << "\" y=\"" << num(map_y(yr, d.y()) - 8)
        << "\" font-family=\"sans-serif\" font-size=\"11\">dev " << i << "</text>\n";
  }
  const double rx = map_x(xr, s.geometry.ris_position.x());
  const double ry = map_y(yr, s.geometry.ris_position.y());
  out << "<rect x=\"" << num(rx - 6) << "\" y=\"" << num(ry - 6)
      << "\" width=\"12\" height=\"12\" fill=\"black\"/>\n";
  out << "<text x=\"" << num(rx + 10) << "\" y=\"" << num(ry + 4)
      << "\" font-family=\"sans-serif\" font-size=\"11\">RIS</text>\n";

  auto marker = [&](const Eigen::Vector2d& p, const char* label) {
    const double px = map_x(xr, p.x());
    const double py = map_y(yr, p.y());
    out << "<circle cx=\"" << num(px) << "\" cy=\"" << num(py)
        << "\" r=\"4\" fill=\"black\"/>\n";
    out << "<text x=\"" << num(px + 8) << "\" y=\"" << num(py + 12)
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << label << "</text>\n";
  };
  marker(s.geometry.uav_start, "start");
  marker(s.geometry.uav_goal, "goal");

  int idx = 0;
  for (const auto& [name, path] : paths) {
    const char* color = kPalette[idx % kPaletteSize];
    std::vector<std::pair<double, double>> pts;
    pts.reserve(path.size());
    for (const auto& q : path) pts.emplace_back(map_x(xr, q.x()), map_y(yr, q.y()));
    if (!pts.empty()) polyline(out, pts, color);
    legend_entry(out, idx, name, color);
    ++idx;
  }
  out << "</svg>\n";
  return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace risuav::harness
