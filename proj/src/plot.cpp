#include "mwcons/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fmt_util.hpp"

namespace mwcons {

namespace {

using detail::fmtg;

constexpr double kWidth = 960.0;
constexpr double kMarginLeft = 72.0;
constexpr double kMarginRight = 24.0;
constexpr double kMarginTop = 48.0;
constexpr double kMarginBottom = 48.0;
constexpr double kPanelHeight = 200.0;
constexpr double kPanelGap = 36.0;

const char* kPalette[10] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                            "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                            "#bcbd22", "#17becf"};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  void pad() {
    if (hi - lo < 1e-300) {
      lo -= 0.5;
      hi += 0.5;
      return;
    }
    const double margin = 0.05 * (hi - lo);
    lo -= margin;
    hi += margin;
  }
};

struct Panel {
  double x0, y0, w, h;
  Axis tx, ty;
  double map_t(double t) const {
    return x0 + (t - tx.lo) / (tx.hi - tx.lo) * w;
  }
  double map_v(double v) const {
    return y0 + h - (v - ty.lo) / (ty.hi - ty.lo) * h;
  }
};

class SvgDoc {
 public:
  SvgDoc(double width, double height) : width_(width), height_(height) {
    os_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
        << height << "\">\n";
    os_ << "<rect width=\"" << width << "\" height=\"" << height
        << "\" fill=\"white\"/>\n";
  }

  void line(double x1, double y1, double x2, double y2,
            const std::string& stroke, double width = 1.0,
            const std::string& dash = "") {
    os_ << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\""
        << num(x2) << "\" y2=\"" << num(y2) << "\" stroke=\"" << stroke
        << "\" stroke-width=\"" << width << "\"";
    if (!dash.empty()) os_ << " stroke-dasharray=\"" << dash << "\"";
    os_ << "/>\n";
  }

  void polyline(const std::string& points, const std::string& stroke) {
    os_ << "<polyline fill=\"none\" stroke=\"" << stroke
        << "\" stroke-width=\"1.3\" points=\"" << points << "\"/>\n";
  }

  void rect(double x, double y, double w, double h) {
    os_ << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\""
        << num(w) << "\" height=\"" << num(h)
        << "\" fill=\"none\" stroke=\"#999\" stroke-width=\"1\"/>\n";
  }

  void text(double x, double y, const std::string& s, double size,
            const std::string& anchor = "start",
            const std::string& fill = "#222") {
    os_ << "<text x=\"" << num(x) << "\" y=\"" << num(y)
        << "\" font-family=\"sans-serif\" font-size=\"" << size
        << "\" text-anchor=\"" << anchor << "\" fill=\"" << fill << "\">" << s
        << "</text>\n";
  }

  std::string finish() {
    os_ << "</svg>\n";
    return os_.str();
  }

 private:
  double width_;
  double height_;
  std::ostringstream os_;
};

void draw_frame(SvgDoc& svg, const Panel& panel, const std::string& title,
                bool numeric_y = true) {
  svg.rect(panel.x0, panel.y0, panel.w, panel.h);
  svg.text(panel.x0, panel.y0 - 6.0, title, 13.0);
  for (int k = 0; k < 5; ++k) {
    const double tv =
        panel.tx.lo + (panel.tx.hi - panel.tx.lo) * k / 4.0;
    const double px = panel.map_t(tv);
    svg.line(px, panel.y0, px, panel.y0 + panel.h, "#eee");
    svg.text(px, panel.y0 + panel.h + 16.0, fmtg(tv, 4), 11.0, "middle");
    if (numeric_y) {
      const double vv =
          panel.ty.lo + (panel.ty.hi - panel.ty.lo) * k / 4.0;
      const double py = panel.map_v(vv);
      svg.line(panel.x0, py, panel.x0 + panel.w, py, "#eee");
      svg.text(panel.x0 - 6.0, py + 4.0, fmtg(vv, 4), 11.0, "end");
    }
  }
  svg.text(panel.x0 + panel.w / 2.0, panel.y0 + panel.h + 32.0, "t", 12.0,
           "middle");
}

void draw_legend(SvgDoc& svg, const Panel& panel, int n) {
  double x = panel.x0 + 8.0;
  for (int i = 0; i < n; ++i) {
    svg.text(x, panel.y0 + 14.0, "agent " + std::to_string(i + 1), 11.0,
             "start", kPalette[i % 10]);
    x += 62.0;
  }
}

void draw_series_panels(SvgDoc& svg, const SimulationRecord& record,
                        const std::vector<std::vector<Eigen::VectorXd>>& data,
                        const std::string& label, int n, int d,
                        bool mark_t_sf) {
  for (int comp = 0; comp < d; ++comp) {
    Panel panel;
    panel.x0 = kMarginLeft;
    panel.y0 = kMarginTop + comp * (kPanelHeight + kPanelGap);
    panel.w = kWidth - kMarginLeft - kMarginRight;
    panel.h = kPanelHeight;
    panel.tx = {record.time.front(), record.time.back()};
    if (panel.tx.hi <= panel.tx.lo) panel.tx.hi = panel.tx.lo + 1.0;
    Axis vy{data[0][0](comp), data[0][0](comp)};
    for (const auto& sample : data) {
      for (const Eigen::VectorXd& v : sample) {
        vy.lo = std::min(vy.lo, v(comp));
        vy.hi = std::max(vy.hi, v(comp));
      }
    }
    vy.pad();
    panel.ty = vy;
    draw_frame(svg, panel,
               label + " component " + std::to_string(comp + 1));
    if (comp == 0) draw_legend(svg, panel, n);
    for (int i = 0; i < n; ++i) {
      std::string points;
      points.reserve(record.time.size() * 14);
      for (std::size_t s = 0; s < record.time.size(); ++s) {
        points += num(panel.map_t(record.time[s]));
        points += ",";
        points += num(panel.map_v(data[s][i](comp)));
        points += " ";
      }
      svg.polyline(points, kPalette[i % 10]);
    }
    if (mark_t_sf && record.t_sf) {
      const double px = panel.map_t(*record.t_sf);
      svg.line(px, panel.y0, px, panel.y0 + panel.h, "#333", 1.2, "5,4");
      if (comp == 0) {
        svg.text(px + 4.0, panel.y0 + 28.0, "end of saturation", 11.0,
                 "start", "#333");
      }
    }
  }
}

void write_file(const std::filesystem::path& path, const std::string& body) {
  if (!path.parent_path().empty()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) {
    throw std::runtime_error("cannot write " + path.string());
  }
  file << body;
}

}  // namespace

void render_plot(const SimulationRecord& record, PlotKind kind,
                 const std::filesystem::path& path) {
  if (kind == PlotKind::Events) {
    if (record.events.empty()) {
      throw EmptySeriesError("record has no events to plot");
    }
  } else if (record.time.empty()) {
    throw EmptySeriesError("record has no samples to plot");
  }

  const int n = record.time.empty()
                    ? 1 + std::max_element(record.events.begin(),
                                           record.events.end(),
                                           [](const auto& a, const auto& b) {
                                             return a.agent < b.agent;
                                           })
                              ->agent
                    : static_cast<int>(record.states.front().size());
  const int d =
      record.time.empty() ? 1 : static_cast<int>(record.states[0][0].size());

  if (kind == PlotKind::States || kind == PlotKind::Controls) {
    const double height =
        kMarginTop + d * kPanelHeight + (d - 1) * kPanelGap + kMarginBottom;
    SvgDoc svg(kWidth, height);
    const bool states = kind == PlotKind::States;
    draw_series_panels(svg, record,
                       states ? record.states : record.controls,
                       states ? "state" : "applied control", n, d, true);
    write_file(path, svg.finish());
    return;
  }

  if (kind == PlotKind::Psi) {
    const double height = kMarginTop + kPanelHeight + kMarginBottom;
    SvgDoc svg(kWidth, height);
    Panel panel{kMarginLeft, kMarginTop,
                kWidth - kMarginLeft - kMarginRight, kPanelHeight};
    panel.tx = {record.time.front(), record.time.back()};
    if (panel.tx.hi <= panel.tx.lo) panel.tx.hi = panel.tx.lo + 1.0;
    Axis vy{record.psi[0][0], record.psi[0][0]};
    for (const auto& sample : record.psi) {
      for (double p : sample) {
        vy.lo = std::min(vy.lo, p);
        vy.hi = std::max(vy.hi, p);
      }
    }
    vy.pad();
    panel.ty = vy;
    draw_frame(svg, panel, "auxiliary trigger state");
    draw_legend(svg, panel, n);
    for (int i = 0; i < n; ++i) {
      std::string points;
      for (std::size_t s = 0; s < record.time.size(); ++s) {
        points += num(panel.map_t(record.time[s]));
        points += ",";
        points += num(panel.map_v(record.psi[s][i]));
        points += " ";
      }
      svg.polyline(points, kPalette[i % 10]);
    }
    write_file(path, svg.finish());
    return;
  }

  // Events: one row per agent, a tick per broadcast.
  const double height = kMarginTop + kPanelHeight + kMarginBottom;
  SvgDoc svg(kWidth, height);
  Panel panel{kMarginLeft, kMarginTop, kWidth - kMarginLeft - kMarginRight,
              kPanelHeight};
  double t_hi = record.time.empty() ? 0.0 : record.time.back();
  for (const EventRecord& ev : record.events) {
    t_hi = std::max(t_hi, ev.time);
  }
  panel.tx = {0.0, t_hi > 0.0 ? t_hi : 1.0};
  panel.ty = {0.5, n + 0.5};
  draw_frame(svg, panel, "broadcast events", /*numeric_y=*/false);
  for (int i = 0; i < n; ++i) {
    const double py = panel.map_v(static_cast<double>(i + 1));
    svg.line(panel.x0, py, panel.x0 + panel.w, py, "#eee");
    svg.text(panel.x0 - 6.0, py + 4.0, "agent " + std::to_string(i + 1),
             11.0, "end");
  }
  for (const EventRecord& ev : record.events) {
    const double px = panel.map_t(ev.time);
    const double py = panel.map_v(static_cast<double>(ev.agent + 1));
    svg.line(px, py - 7.0, px, py + 7.0, kPalette[ev.agent % 10], 1.2);
  }
  write_file(path, svg.finish());
}

}  // namespace mwcons
