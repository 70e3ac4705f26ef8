// Copyright 2026 The LOGAN Lab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "logan/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "logan/errors.hpp"

namespace logan {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Frame {
  double x0, x1, y0, y1;
  static constexpr double kW = 480, kH = 360, kPad = 48;
  double px(double x) const { return kPad + (x - x0) / (x1 - x0) * (kW - 2 * kPad); }
  double py(double y) const { return kH - kPad - (y - y0) / (y1 - y0) * (kH - 2 * kPad); }
};

Frame frame_for(std::vector<double> xs, std::vector<double> ys) {
  auto range = [](const std::vector<double>& v, double& lo, double& hi) {
    lo = 0.0;
    hi = 1.0;
    bool any = false;
    for (double x : v) {
      if (!std::isfinite(x)) continue;
      if (!any) lo = hi = x;
      lo = std::min(lo, x);
      hi = std::max(hi, x);
      any = true;
    }
    if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    }
    const double m = 0.05 * (hi - lo);
    lo -= m;
    hi += m;
  };
  Frame f{};
  range(xs, f.x0, f.x1);
  range(ys, f.y0, f.y1);
  return f;
}

std::string header(const std::string& title, const Frame& f, const std::string& xl, const std::string& yl) {
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << Frame::kW << "\" height=\"" << Frame::kH
     << "\" viewBox=\"0 0 " << Frame::kW << ' ' << Frame::kH << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << Frame::kW / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
     << "</text>\n"
     << "<rect x=\"" << Frame::kPad << "\" y=\"" << Frame::kPad << "\" width=\"" << Frame::kW - 2 * Frame::kPad
     << "\" height=\"" << Frame::kH - 2 * Frame::kPad << "\" fill=\"none\" stroke=\"black\"/>\n"
     << "<text x=\"" << Frame::kW / 2 << "\" y=\"" << Frame::kH - 12 << "\" text-anchor=\"middle\" font-size=\"11\">"
     << escape(xl) << " [" << format_real(f.x0) << ", " << format_real(f.x1) << "]</text>\n"
     << "<text x=\"14\" y=\"" << Frame::kH / 2 << "\" font-size=\"11\" transform=\"rotate(-90 14 " << Frame::kH / 2
     << ")\" text-anchor=\"middle\">" << escape(yl) << " [" << format_real(f.y0) << ", " << format_real(f.y1)
     << "]</text>\n";
  return os.str();
}

constexpr const char* kColours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace

std::string format_real(double v) {
  if (!std::isfinite(v)) throw Error("refusing to format a non-finite number");
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string format_optional(const std::optional<double>& v) { return v ? format_real(*v) : ""; }

std::string csv_line(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += cells[i];
  }
  return out + "\n";
}

std::string metrics_row(const MetricsRecord& r) {
  return csv_line({std::to_string(r.step), format_real(r.l_d), format_real(r.l_g), format_real(r.r_z),
                   format_real(r.dz_norm), format_real(r.df_abs), format_real(r.dtheta_d),
                   format_real(r.dtheta_g), format_real(r.dtheta_diff), format_optional(r.curvature_mean),
                   format_optional(r.proxy_fid),
                   r.mode_coverage ? std::to_string(*r.mode_coverage) : std::string(),
                   format_optional(r.hq_fraction)});
}

std::vector<std::vector<std::optional<double>>> read_numeric_csv(const std::string& text,
                                                                 const std::string& expected_header) {
  if (text.find('\r') != std::string::npos) throw Error("csv: CR characters are not allowed");
  if (!text.empty() && text.back() != '\n') throw Error("csv: missing final LF");
  std::vector<std::vector<std::optional<double>>> rows;
  std::size_t start = 0, line_no = 0, width = 0;
  while (start < text.size()) {
    const auto end = text.find('\n', start);
    const std::string line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    const auto cells = split(line);
    if (line_no == 1) {
      if (line != expected_header) throw Error("csv: unexpected header '" + line + "'");
      width = cells.size();
      continue;
    }
    if (cells.size() != width) throw Error("csv line " + std::to_string(line_no) + ": wrong number of cells");
    std::vector<std::optional<double>> row;
    for (const auto& c : cells) {
      if (c.empty()) {
        row.emplace_back();
        continue;
      }
      double v = 0.0;
      const auto r = std::from_chars(c.data(), c.data() + c.size(), v);
      if (r.ec != std::errc() || r.ptr != c.data() + c.size() || !std::isfinite(v)) {
        throw Error("csv line " + std::to_string(line_no) + ": bad number '" + c + "'");
      }
      row.emplace_back(v);
    }
    rows.push_back(std::move(row));
  }
  if (line_no == 0) throw Error("csv: missing header");
  return rows;
}

std::vector<MetricsRecord> read_metrics(const std::string& text) {
  std::vector<MetricsRecord> out;
  for (const auto& row : read_numeric_csv(text, kMetricsHeader)) {
    for (std::size_t i = 0; i < 9; ++i) {
      if (!row[i]) throw Error("metrics: required cell is empty");
    }
    MetricsRecord r;
    r.step = static_cast<std::uint64_t>(*row[0]);
    r.l_d = *row[1];
    r.l_g = *row[2];
    r.r_z = *row[3];
    r.dz_norm = *row[4];
    r.df_abs = *row[5];
    r.dtheta_d = *row[6];
    r.dtheta_g = *row[7];
    r.dtheta_diff = *row[8];
    r.curvature_mean = row[9];
    r.proxy_fid = row[10];
    if (row[11]) r.mode_coverage = static_cast<int>(*row[11]);
    r.hq_fraction = row[12];
    out.push_back(r);
  }
  return out;
}

std::string scatter_svg(const Tensor& samples, const std::vector<std::vector<double>>& centers,
                        const std::string& title) {
  if (samples.rank() != 2 || samples.cols() < 2) throw ShapeError("scatter_svg: need [n x 2+] samples");
  std::vector<double> xs, ys;
  for (std::size_t r = 0; r < samples.rows(); ++r) {
    xs.push_back(samples.at(r, 0));
    ys.push_back(samples.at(r, 1));
  }
  for (const auto& c : centers) {
    if (c.size() >= 2) {
      xs.push_back(c[0]);
      ys.push_back(c[1]);
    }
  }
  const Frame f = frame_for(xs, ys);
  std::ostringstream os;
  os << header(title, f, "x0", "x1");
  for (std::size_t r = 0; r < samples.rows(); ++r) {
    if (!std::isfinite(xs[r]) || !std::isfinite(ys[r])) continue;
    os << "<circle cx=\"" << f.px(xs[r]) << "\" cy=\"" << f.py(ys[r]) << "\" r=\"1.5\" fill=\"" << kColours[0]
       << "\" fill-opacity=\"0.5\"/>\n";
  }
  for (const auto& c : centers) {
    if (c.size() < 2) continue;
    os << "<circle cx=\"" << f.px(c[0]) << "\" cy=\"" << f.py(c[1])
       << "\" r=\"4\" fill=\"none\" stroke=\"" << kColours[1] << "\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string curves_svg(const std::vector<Curve>& curves, const std::string& title,
                       const std::string& x_label, const std::string& y_label) {
  std::vector<double> xs, ys;
  for (const auto& c : curves) {
    if (c.x.size() != c.y.size()) throw ShapeError("curves_svg: x and y lengths differ");
    xs.insert(xs.end(), c.x.begin(), c.x.end());
    ys.insert(ys.end(), c.y.begin(), c.y.end());
  }
  const Frame f = frame_for(xs, ys);
  std::ostringstream os;
  os << header(title, f, x_label, y_label);
  for (std::size_t k = 0; k < curves.size(); ++k) {
    const auto& c = curves[k];
    const char* colour = kColours[k % std::size(kColours)];
    os << "<polyline fill=\"none\" stroke=\"" << colour << "\" points=\"";
    for (std::size_t i = 0; i < c.x.size(); ++i) {
      if (!std::isfinite(c.x[i]) || !std::isfinite(c.y[i])) continue;
      os << f.px(c.x[i]) << ',' << f.py(c.y[i]) << ' ';
    }
    os << "\"/>\n";
    os << "<text x=\"" << Frame::kPad + 6 << "\" y=\"" << Frame::kPad + 14 + 14 * static_cast<double>(k)
       << "\" font-size=\"11\" fill=\"" << colour << "\">" << escape(c.name) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
  if (!out) throw Error("write failed for '" + path + "'");
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace logan
