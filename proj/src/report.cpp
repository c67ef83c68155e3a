#include "tsp/report.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "tsp/binio.hpp"
#include "tsp/error.hpp"

namespace tsp {

const char* kSnrDefinitionNote =
    "# snr definition: 10*log10(total signal photons / total background "
    "photons) per sample";

namespace {

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

std::string fmt_coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string fmt_tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  return parts;
}

}  // namespace

std::string table_to_csv(const ResultTable& table) {
  std::ostringstream out;
  out << kSnrDefinitionNote << '\n';
  out << "method," << table.x_name << ",accuracy,n,config_hash\n";
  for (const auto& r : table.rows) {
    if (r.method.find(',') != std::string::npos)
      throw StateError("method name must not contain commas");
    out << r.method << ',' << fmt(r.x) << ',' << fmt(r.accuracy) << ',' << r.n
        << ',' << r.config_hash << '\n';
  }
  return out.str();
}

ResultTable table_from_csv(const std::string& text, const std::string& name) {
  std::istringstream in(text);
  std::string line;
  ResultTable table;
  bool header_seen = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const std::vector<std::string> parts = split_line(line);
    if (parts.size() != 5)
      throw FormatError(name + ":" + std::to_string(line_no) +
                        ": expected 5 columns, got " +
                        std::to_string(parts.size()));
    if (!header_seen) {
      if (parts[0] != "method" || parts[2] != "accuracy" || parts[3] != "n" ||
          parts[4] != "config_hash")
        throw FormatError(name + ":" + std::to_string(line_no) +
                          ": unexpected header");
      table.x_name = parts[1];
      header_seen = true;
      continue;
    }
    ResultRow row;
    row.method = parts[0];
    try {
      row.x = std::stod(parts[1]);
      row.accuracy = std::stod(parts[2]);
      row.n = std::stoull(parts[3]);
    } catch (const std::exception&) {
      throw FormatError(name + ":" + std::to_string(line_no) +
                        ": malformed numeric field");
    }
    row.config_hash = parts[4];
    table.rows.push_back(std::move(row));
  }
  if (!header_seen) throw FormatError(name + ": missing header row");
  return table;
}

std::string render_svg(const ResultTable& table, const std::string& title) {
  if (table.rows.empty()) return {};

  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                   "#ff7f0e", "#9467bd", "#8c564b",
                                   "#17becf", "#7f7f7f"};
  constexpr double W = 760, H = 460;
  constexpr double L = 70, R = 560, T = 56, B = 400;  // plot box

  double x_min = table.rows.front().x, x_max = x_min;
  for (const auto& r : table.rows) {
    x_min = std::min(x_min, r.x);
    x_max = std::max(x_max, r.x);
  }
  if (x_min == x_max) {
    x_min -= 0.5;
    x_max += 0.5;
  }
  auto px = [&](double x) {
    return L + (x - x_min) / (x_max - x_min) * (R - L);
  };
  auto py = [&](double acc) { return B - acc * (B - T); };

  std::map<std::string, std::vector<std::pair<double, double>>> series;
  for (const auto& r : table.rows) series[r.method].push_back({r.x, r.accuracy});
  for (auto& [_, pts] : series) std::sort(pts.begin(), pts.end());

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
      << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << " " << H
      << "\">\n";
  svg << "<rect width=\"" << W << "\" height=\"" << H
      << "\" fill=\"white\"/>\n";
  svg << "<text x=\"" << (L + R) / 2 << "\" y=\"28\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"16\">"
      << title << "</text>\n";

  // axes
  svg << "<line x1=\"" << L << "\" y1=\"" << B << "\" x2=\"" << R
      << "\" y2=\"" << B << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L
      << "\" y2=\"" << B << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x_min + (x_max - x_min) * i / 4.0;
    const double yv = i / 4.0;
    svg << "<line x1=\"" << fmt_coord(px(xv)) << "\" y1=\"" << B << "\" x2=\""
        << fmt_coord(px(xv)) << "\" y2=\"" << B + 5
        << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << fmt_coord(px(xv)) << "\" y=\"" << B + 20
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << fmt_tick(xv) << "</text>\n";
    svg << "<line x1=\"" << L - 5 << "\" y1=\"" << fmt_coord(py(yv))
        << "\" x2=\"" << L << "\" y2=\"" << fmt_coord(py(yv))
        << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << L - 10 << "\" y=\"" << fmt_coord(py(yv) + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << fmt_tick(yv) << "</text>\n";
  }
  svg << "<text x=\"" << (L + R) / 2 << "\" y=\"" << B + 40
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\">"
      << table.x_name << "</text>\n";
  svg << "<text x=\"20\" y=\"" << (T + B) / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\" transform=\"rotate(-90 20 "
      << (T + B) / 2 << ")\">accuracy</text>\n";

  std::size_t color = 0;
  double legend_y = T + 10;
  for (const auto& [method, pts] : series) {
    const char* c = kPalette[color % (sizeof(kPalette) / sizeof(*kPalette))];
    svg << "<polyline fill=\"none\" stroke=\"" << c
        << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, acc] : pts)
      svg << fmt_coord(px(x)) << ',' << fmt_coord(py(acc)) << ' ';
    svg << "\"/>\n";
    for (const auto& [x, acc] : pts)
      svg << "<circle cx=\"" << fmt_coord(px(x)) << "\" cy=\""
          << fmt_coord(py(acc)) << "\" r=\"2.5\" fill=\"" << c << "\"/>\n";
    svg << "<line x1=\"" << R + 14 << "\" y1=\"" << fmt_coord(legend_y)
        << "\" x2=\"" << R + 34 << "\" y2=\"" << fmt_coord(legend_y)
        << "\" stroke=\"" << c << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << R + 40 << "\" y=\"" << fmt_coord(legend_y + 4)
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << method
        << "</text>\n";
    legend_y += 18;
    ++color;
  }
  svg << "</svg>\n";
  return svg.str();
}

std::vector<std::filesystem::path> emit_report(
    const ResultTable& table, const std::filesystem::path& out_dir,
    const std::string& stem, const std::string& title) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  const auto csv_path = out_dir / (stem + ".csv");
  write_file_atomic(csv_path, table_to_csv(table));
  written.push_back(csv_path);
  if (table.rows.empty()) {
    std::cerr << "warning: table \"" << stem
              << "\" is empty; no plot emitted\n";
    return written;
  }
  const auto svg_path = out_dir / (stem + ".svg");
  write_file_atomic(svg_path, render_svg(table, title));
  written.push_back(svg_path);
  return written;
}

}  // namespace tsp
