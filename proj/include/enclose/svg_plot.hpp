// Copyright 2026 The enclose Authors
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

// Static line plots as standalone SVG, plus the standard set of run plots.

#ifndef ENCLOSE_SVG_PLOT_HPP
#define ENCLOSE_SVG_PLOT_HPP

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "enclose/errors.hpp"
#include "enclose/sim.hpp"

namespace enclose {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  double width = 1.5;
  std::string dash;  ///< SVG stroke-dasharray, empty for solid
};

struct Marker {
  double x = 0.0;
  double y = 0.0;
  std::string color = "#000000";
  bool square = false;
};

struct Plot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  std::vector<Marker> markers;
  bool equal_aspect = false;
  int width = 720;
  int height = 480;
};

namespace detail {

inline double nice_step(double span, int target_ticks) {
  const double raw = span / std::max(1, target_ticks);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double f : {1.0, 2.0, 2.5, 5.0, 10.0}) {
    if (raw <= f * mag) return f * mag;
  }
  return 10.0 * mag;
}

inline std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace detail

inline std::string render_svg(const Plot& plot) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  auto grow = [&](double x, double y) {
    if (!std::isfinite(x) || !std::isfinite(y)) return;
    x0 = std::min(x0, x);
    x1 = std::max(x1, x);
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  };
  for (const Series& s : plot.series) {
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) grow(s.x[i], s.y[i]);
  }
  for (const Marker& m : plot.markers) grow(m.x, m.y);
  if (!std::isfinite(x0)) x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-12) y0 -= 0.5, y1 += 0.5;
  const double pad_y = 0.05 * (y1 - y0);
  y0 -= pad_y;
  y1 += pad_y;

  const double left = 70, right = 160, top = 40, bottom = 55;
  const double pw = plot.width - left - right;
  const double ph = plot.height - top - bottom;
  if (plot.equal_aspect) {
    const double scale = std::max((x1 - x0) / pw, (y1 - y0) / ph);
    const double cx = 0.5 * (x0 + x1), cy = 0.5 * (y0 + y1);
    x0 = cx - 0.5 * scale * pw;
    x1 = cx + 0.5 * scale * pw;
    y0 = cy - 0.5 * scale * ph;
    y1 = cy + 0.5 * scale * ph;
  }
  auto sx = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto sy = [&](double y) { return top + (y1 - y) / (y1 - y0) * ph; };

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" "
      "viewBox=\"0 0 {0} {1}\" font-family=\"sans-serif\" font-size=\"12\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
      plot.width, plot.height);
  svg += fmt::format("<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
                     left + pw / 2, detail::escape_xml(plot.title));

  const double xs = detail::nice_step(x1 - x0, 8);
  for (double x = std::ceil(x0 / xs) * xs; x <= x1 + 1e-9 * xs; x += xs) {
    svg += fmt::format(
        "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" stroke=\"#e0e0e0\"/>\n"
        "<text x=\"{0:.2f}\" y=\"{3:.2f}\" text-anchor=\"middle\">{4:g}</text>\n",
        sx(x), top, top + ph, top + ph + 16, std::abs(x) < 1e-12 * xs ? 0.0 : x);
  }
  const double ys = detail::nice_step(y1 - y0, 6);
  for (double y = std::ceil(y0 / ys) * ys; y <= y1 + 1e-9 * ys; y += ys) {
    svg += fmt::format(
        "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{2:.2f}\" y2=\"{1:.2f}\" stroke=\"#e0e0e0\"/>\n"
        "<text x=\"{3:.2f}\" y=\"{4:.2f}\" text-anchor=\"end\">{5:g}</text>\n",
        left, sy(y), left + pw, left - 6, sy(y) + 4, std::abs(y) < 1e-12 * ys ? 0.0 : y);
  }
  svg += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
                     left, top, pw, ph);
  svg += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", left + pw / 2,
                     plot.height - 12, detail::escape_xml(plot.x_label));
  svg += fmt::format(
      "<text x=\"16\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {0})\">{1}</text>\n",
      top + ph / 2, detail::escape_xml(plot.y_label));

  int legend_row = 0;
  for (const Series& s : plot.series) {
    std::string points;
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      points += fmt::format("{:.2f},{:.2f} ", sx(s.x[i]), sy(s.y[i]));
    }
    const std::string dash = s.dash.empty() ? "" : fmt::format(" stroke-dasharray=\"{}\"", s.dash);
    svg += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"{}\"{} points=\"{}\"/>\n",
                       s.color, s.width, dash, points);
    if (s.label.empty()) continue;
    const double ly = top + 10 + 18 * legend_row++;
    svg += fmt::format(
        "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"{3}\" stroke-width=\"2\"{4}/>\n"
        "<text x=\"{5}\" y=\"{6}\">{7}</text>\n",
        left + pw + 10, ly, left + pw + 34, s.color, dash, left + pw + 40, ly + 4,
        detail::escape_xml(s.label));
  }
  for (const Marker& m : plot.markers) {
    if (m.square) {
      svg += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"8\" height=\"8\" fill=\"{}\"/>\n",
                         sx(m.x) - 4, sy(m.y) - 4, m.color);
    } else {
      svg += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"4\" fill=\"{}\"/>\n", sx(m.x),
                         sy(m.y), m.color);
    }
  }
  svg += "</svg>\n";
  return svg;
}

inline void write_svg(const std::filesystem::path& path, const Plot& plot) {
  std::ofstream out(path);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
  out << render_svg(plot);
}

inline const std::string& palette(std::size_t i) {
  static const std::vector<std::string> colors{"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                               "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                               "#bcbd22", "#17becf"};
  return colors[i % colors.size()];
}

/// Writes trajectories, heading errors, velocity components and one plot
/// per edge error into `dir`. Returns the file names written.
inline std::vector<std::string> write_run_plots(const std::filesystem::path& dir,
                                                const ClosedLoop& loop, const SimTrace& trace) {
  std::filesystem::create_directories(dir);
  const auto& recs = trace.records;
  const int n = trace.n_agents;
  const SensingGraph& graph = loop.graph();
  std::vector<std::string> written;
  std::vector<double> t;
  for (const TraceRecord& r : recs) t.push_back(r.world.t);

  {
    Plot p{"Trajectories", "x [m]", "y [m]"};
    p.equal_aspect = true;
    Series target{"target", {}, {}, "#000000", 2.0};
    for (const TraceRecord& r : recs) {
      target.x.push_back(r.world.target.x());
      target.y.push_back(r.world.target.y());
    }
    // Formation snapshots at a few instants, drawn under the paths.
    if (!recs.empty()) {
      const double tf = recs.back().world.t;
      for (double frac : {0.0, 0.02, 0.32, 0.6, 1.0}) {
        const double ts = frac * tf;
        const auto it = std::lower_bound(t.begin(), t.end(), ts - 1e-12);
        const TraceRecord& r = recs[std::min<std::size_t>(it - t.begin(), recs.size() - 1)];
        const std::vector<Vec2> c = r.world.coordinates();
        for (const Edge& e : graph.edges()) {
          p.series.push_back({"", {c[e.i].x(), c[e.j].x()}, {c[e.i].y(), c[e.j].y()}, "#b0b0b0", 0.8});
        }
      }
    }
    p.series.push_back(target);
    for (int i = 0; i < n; ++i) {
      Series s{fmt::format("agent {}", i + 1), {}, {}, palette(i), 1.2, "4 3"};
      for (const TraceRecord& r : recs) {
        s.x.push_back(r.world.agents[i].x);
        s.y.push_back(r.world.agents[i].y);
      }
      if (!s.x.empty()) {
        p.markers.push_back({s.x.front(), s.y.front(), palette(i), true});
        p.markers.push_back({s.x.back(), s.y.back(), palette(i), false});
      }
      p.series.push_back(std::move(s));
    }
    write_svg(dir / "trajectories.svg", p);
    written.push_back("trajectories.svg");
  }

  {
    Plot p{"Heading errors", "t [s]", "e_theta [deg]"};
    for (int i = 0; i < n; ++i) {
      Series s{fmt::format("agent {}", i + 1), t, {}, palette(i)};
      for (const TraceRecord& r : recs) s.y.push_back(rad_to_deg(r.e_theta[i]));
      p.series.push_back(std::move(s));
    }
    const double bound = *std::max_element(loop.scenario().heading_bound_deg.begin(),
                                           loop.scenario().heading_bound_deg.end());
    if (!t.empty()) {
      p.series.push_back({"bound", {t.front(), t.back()}, {bound, bound}, "#d62728", 1.5, "6 4"});
      p.series.push_back({"", {t.front(), t.back()}, {-bound, -bound}, "#d62728", 1.5, "6 4"});
    }
    write_svg(dir / "heading_errors.svg", p);
    written.push_back("heading_errors.svg");
  }

  for (int axis = 0; axis < 2; ++axis) {
    const char* name = axis == 0 ? "x" : "y";
    Plot p{fmt::format("Velocity {} component", name), "t [s]", fmt::format("v_{} [m/s]", name)};
    Series target{"target", t, {}, "#000000", 2.0};
    for (const TraceRecord& r : recs) target.y.push_back(r.v0(axis));
    for (int i = 0; i < n; ++i) {
      Series s{fmt::format("agent {}", i + 1), t, {}, palette(i), 1.2};
      for (const TraceRecord& r : recs) s.y.push_back(r.velocity[i](axis));
      p.series.push_back(std::move(s));
    }
    p.series.push_back(target);
    const std::string file = fmt::format("velocity_{}.svg", name);
    write_svg(dir / file, p);
    written.push_back(file);
  }

  for (int k = 0; k < graph.n_edges(); ++k) {
    const std::string label = graph.edge_label(k);
    Plot p{fmt::format("Edge {} distance error", label), "t [s]", "e [m]"};
    Series e{"e", t, {}, "#000000", 1.5};
    Series up{"upper bound", t, {}, "#d62728", 1.2, "6 4"};
    Series lo{"lower bound", t, {}, "#2ca02c", 1.2, "6 4"};
    for (const TraceRecord& r : recs) {
      e.y.push_back(r.error[k]);
      up.y.push_back(r.e_upper_t[k]);
      lo.y.push_back(-r.e_lower_t[k]);
    }
    p.series = {up, lo, e};
    const std::string file = fmt::format("edge_error_{}.svg", label);
    write_svg(dir / file, p);
    written.push_back(file);
  }
  return written;
}

}  // namespace enclose

#endif  // ENCLOSE_SVG_PLOT_HPP
