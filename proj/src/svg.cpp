/*
 * Copyright 2026 The tabreg Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "tabreg/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "tabreg/common.hpp"

namespace tabreg::svg {

namespace {

constexpr int kLeft = 70;
constexpr int kRight = 20;
constexpr int kTop = 40;
constexpr int kBottom = 55;
const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
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

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

struct Frame {
  const PlotOptions& opt;
  double x0, x1, y0, y1;

  double px(double x) const {
    return kLeft + (x - x0) / (x1 - x0) * (opt.width - kLeft - kRight);
  }
  double py(double y) const {
    return opt.height - kBottom - (y - y0) / (y1 - y0) * (opt.height - kTop - kBottom);
  }
};

void pad(double& lo, double& hi) {
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
    return;
  }
  const double m = 0.04 * (hi - lo);
  lo -= m;
  hi += m;
}

void open_doc(std::ostringstream& out, const PlotOptions& opt) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width << "\" height=\""
      << opt.height << "\" viewBox=\"0 0 " << opt.width << ' ' << opt.height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << opt.width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"15\">"
      << escape(opt.title) << "</text>\n";
}

void axes(std::ostringstream& out, const Frame& f) {
  const PlotOptions& opt = f.opt;
  const int bottom = opt.height - kBottom;
  out << "<g stroke=\"#333\" stroke-width=\"1\">\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << bottom << "\" x2=\"" << opt.width - kRight
      << "\" y2=\"" << bottom << "\"/>\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
      << bottom << "\"/>\n</g>\n";
  out << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = f.x0 + (f.x1 - f.x0) * i / 4.0;
    const double yv = f.y0 + (f.y1 - f.y0) * i / 4.0;
    out << "<text x=\"" << num(f.px(xv)) << "\" y=\"" << bottom + 16
        << "\" text-anchor=\"middle\">" << tick_label(xv) << "</text>\n";
    out << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(f.py(yv) + 4)
        << "\" text-anchor=\"end\">" << tick_label(yv) << "</text>\n";
  }
  out << "<text x=\"" << (kLeft + opt.width - kRight) / 2 << "\" y=\"" << opt.height - 12
      << "\" text-anchor=\"middle\">" << escape(opt.x_label) << "</text>\n";
  out << "<text x=\"16\" y=\"" << (kTop + bottom) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << (kTop + bottom) / 2 << ")\">" << escape(opt.y_label) << "</text>\n</g>\n";
}

void draw_series(std::ostringstream& out, const Frame& f, const Series& s, const char* color) {
  if (s.markers) {
    out << "<g fill=\"" << color << "\" fill-opacity=\"0.6\">\n";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      out << "<circle cx=\"" << num(f.px(s.x[i])) << "\" cy=\"" << num(f.py(s.y[i]))
          << "\" r=\"2\"/>\n";
    }
    out << "</g>\n";
    return;
  }
  out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\" points=\"";
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    out << (i ? " " : "") << num(f.px(s.x[i])) << ',' << num(f.py(s.y[i]));
  }
  out << "\"/>\n";
}

void legend(std::ostringstream& out, const PlotOptions& opt, const std::vector<Series>& series) {
  int y = kTop + 6;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series[i].label.empty()) continue;
    const char* color = kPalette[i % std::size(kPalette)];
    out << "<rect x=\"" << opt.width - kRight - 150 << "\" y=\"" << y << "\" width=\"10\" height=\"10\" fill=\""
        << color << "\"/>\n";
    out << "<text x=\"" << opt.width - kRight - 135 << "\" y=\"" << y + 9
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape(series[i].label)
        << "</text>\n";
    y += 16;
  }
}

}  // namespace

std::string line_plot(const std::vector<Series>& series, const PlotOptions& opt) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw ValidationError("svg: series x/y length mismatch");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (!std::isfinite(x0)) x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  pad(x0, x1);
  pad(y0, y1);
  const Frame f{opt, x0, x1, y0, y1};
  std::ostringstream out;
  open_doc(out, opt);
  axes(out, f);
  if (opt.reference_line) {
    out << "<line stroke=\"#888\" stroke-dasharray=\"4 3\" x1=\"" << num(f.px(x0)) << "\" y1=\""
        << num(f.py(opt.reference_intercept + opt.reference_slope * x0)) << "\" x2=\""
        << num(f.px(x1)) << "\" y2=\"" << num(f.py(opt.reference_intercept + opt.reference_slope * x1))
        << "\"/>\n";
  }
  for (std::size_t i = 0; i < series.size(); ++i) {
    draw_series(out, f, series[i], kPalette[i % std::size(kPalette)]);
  }
  legend(out, opt, series);
  out << "</svg>\n";
  return out.str();
}

std::string histogram_plot(const Histogram& h, const PlotOptions& opt,
                           const Series* density_overlay) {
  if (h.counts.empty()) throw ValidationError("svg: empty histogram");
  double total = 0.0;
  for (auto c : h.counts) total += static_cast<double>(c);
  // Bars as densities so a KDE overlay shares the axis.
  std::vector<double> dens(h.counts.size());
  double ymax = 0.0;
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    const double w = h.edges[i + 1] - h.edges[i];
    dens[i] = total > 0.0 && w > 0.0 ? static_cast<double>(h.counts[i]) / (total * w) : 0.0;
    ymax = std::max(ymax, dens[i]);
  }
  double x0 = h.edges.front(), x1 = h.edges.back();
  if (density_overlay) {
    for (std::size_t i = 0; i < density_overlay->x.size(); ++i) {
      x0 = std::min(x0, density_overlay->x[i]);
      x1 = std::max(x1, density_overlay->x[i]);
      ymax = std::max(ymax, density_overlay->y[i]);
    }
  }
  double y0 = 0.0;
  pad(x0, x1);
  if (!(ymax > 0.0)) ymax = 1.0;
  const Frame f{opt, x0, x1, y0, ymax * 1.05};
  std::ostringstream out;
  open_doc(out, opt);
  axes(out, f);
  out << "<g fill=\"#9ecae1\" stroke=\"#3182bd\" stroke-width=\"0.5\">\n";
  for (std::size_t i = 0; i < dens.size(); ++i) {
    const double left = f.px(h.edges[i]);
    const double right = f.px(h.edges[i + 1]);
    const double top = f.py(dens[i]);
    out << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\""
        << num(std::max(right - left, 0.0)) << "\" height=\"" << num(f.py(0.0) - top) << "\"/>\n";
  }
  out << "</g>\n";
  if (density_overlay) draw_series(out, f, *density_overlay, kPalette[1]);
  out << "</svg>\n";
  return out.str();
}

std::string bar_plot(const std::vector<std::string>& labels, std::span<const double> values,
                     const PlotOptions& opt) {
  if (labels.size() != values.size()) throw ValidationError("svg: label/value count mismatch");
  PlotOptions o = opt;
  const int row = 18;
  o.height = std::max(opt.height, kTop + kBottom + row * static_cast<int>(labels.size()));
  const int left = 190;
  double vmax = 0.0;
  for (double v : values) vmax = std::max(vmax, v);
  if (!(vmax > 0.0)) vmax = 1.0;
  std::ostringstream out;
  open_doc(out, o);
  out << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  const double span = o.width - left - kRight - 50;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = kTop + row * static_cast<int>(i);
    const double w = values[i] / vmax * span;
    out << "<text x=\"" << left - 6 << "\" y=\"" << y + 12 << "\" text-anchor=\"end\">"
        << escape(labels[i]) << "</text>\n";
    out << "<rect x=\"" << left << "\" y=\"" << y + 2 << "\" width=\"" << num(std::max(w, 0.0))
        << "\" height=\"" << row - 4 << "\" fill=\"" << kPalette[0] << "\"/>\n";
    out << "<text x=\"" << num(left + std::max(w, 0.0) + 4) << "\" y=\"" << y + 12 << "\">"
        << tick_label(values[i]) << "</text>\n";
  }
  out << "<text x=\"" << (left + o.width - kRight) / 2 << "\" y=\"" << o.height - 12
      << "\" text-anchor=\"middle\">" << escape(o.x_label) << "</text>\n";
  out << "</g>\n</svg>\n";
  return out.str();
}

void write(const std::filesystem::path& path, const std::string& document) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArtifactError("cannot write " + path.string());
  out << document;
}

}  // namespace tabreg::svg
