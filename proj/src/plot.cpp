#include "agc/plot.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "agc/error.h"

namespace agc {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
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

// Step of roughly `target` ticks over span, from {1, 2, 5} x 10^k.
double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0}) {
    if (m * mag >= raw) return m * mag;
  }
  return 10.0 * mag;
}

void check(const LinePlot& plot) {
  if (plot.x.size() < 2) throw InvalidArgument("plot: need at least two points");
  for (const PlotSeries& s : plot.series) {
    if (s.y.size() != plot.x.size()) {
      throw InvalidArgument("plot: series '" + s.label + "' length differs from x");
    }
  }
}

}  // namespace

std::string render_svg(const LinePlot& plot, int width, int height) {
  check(plot);
  const double left = 90, right = 20, top = 40, bottom = 60;
  const double pw = width - left - right;
  const double ph = height - top - bottom;

  const auto [xmin_it, xmax_it] = std::minmax_element(plot.x.begin(), plot.x.end());
  const double x0 = *xmin_it, x1 = *xmax_it;
  double y0 = INFINITY, y1 = -INFINITY;
  for (const PlotSeries& s : plot.series) {
    for (double v : s.y) {
      if (!std::isfinite(v)) continue;
      y0 = std::min(y0, v);
      y1 = std::max(y1, v);
    }
  }
  if (!std::isfinite(y0)) y0 = y1 = 0.0;
  if (y1 - y0 < 1e-12) {
    const double pad = std::max(std::abs(y0) * 0.1, 1e-6);
    y0 -= pad;
    y1 += pad;
  } else {
    const double pad = (y1 - y0) * 0.05;
    y0 -= pad;
    y1 += pad;
  }
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return top + (y1 - y) / (y1 - y0) * ph; };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << " " << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << num(width / 2.0) << "\" y=\"22\" text-anchor=\"middle\" "
      << "font-size=\"15\">" << escape(plot.title) << "</text>\n";

  out << "<g stroke=\"#dddddd\" stroke-width=\"1\">\n";
  const double xs = nice_step(x1 - x0, 8);
  const double ys = nice_step(y1 - y0, 6);
  std::ostringstream labels;
  for (double x = std::ceil(x0 / xs) * xs; x <= x1 + 1e-9 * xs; x += xs) {
    out << "<line x1=\"" << num(px(x)) << "\" y1=\"" << num(top) << "\" x2=\"" << num(px(x))
        << "\" y2=\"" << num(top + ph) << "\"/>\n";
    labels << "<text x=\"" << num(px(x)) << "\" y=\"" << num(top + ph + 16)
           << "\" text-anchor=\"middle\">" << tick(std::abs(x) < 1e-12 * xs ? 0.0 : x)
           << "</text>\n";
  }
  for (double y = std::ceil(y0 / ys) * ys; y <= y1 + 1e-9 * ys; y += ys) {
    out << "<line x1=\"" << num(left) << "\" y1=\"" << num(py(y)) << "\" x2=\""
        << num(left + pw) << "\" y2=\"" << num(py(y)) << "\"/>\n";
    labels << "<text x=\"" << num(left - 6) << "\" y=\"" << num(py(y) + 4)
           << "\" text-anchor=\"end\">" << tick(std::abs(y) < 1e-9 * ys ? 0.0 : y)
           << "</text>\n";
  }
  out << "</g>\n" << labels.str();
  out << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(pw)
      << "\" height=\"" << num(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
  out << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(height - 18.0)
      << "\" text-anchor=\"middle\">" << escape(plot.x_label) << "</text>\n";
  out << "<text transform=\"translate(18 " << num(top + ph / 2)
      << ") rotate(-90)\" text-anchor=\"middle\">" << escape(plot.y_label) << "</text>\n";

  for (const PlotSeries& s : plot.series) {
    out << "<polyline class=\"series\" data-label=\"" << escape(s.label)
        << "\" fill=\"none\" stroke=\"" << escape(s.color) << "\" stroke-width=\"1.6\"";
    if (s.dashed) out << " stroke-dasharray=\"6 4\"";
    out << " points=\"";
    for (std::size_t i = 0; i < plot.x.size(); ++i) {
      const double y = std::isfinite(s.y[i]) ? s.y[i] : 0.0;
      out << (i ? " " : "") << num(px(plot.x[i])) << "," << num(py(y));
    }
    out << "\"/>\n";
  }

  if (plot.marker_x) {
    const double mx = px(*plot.marker_x);
    out << "<line class=\"marker\" data-x=\"" << tick(*plot.marker_x) << "\" x1=\""
        << num(mx) << "\" y1=\"" << num(top) << "\" x2=\"" << num(mx) << "\" y2=\""
        << num(top + ph) << "\" stroke=\"#444444\" stroke-width=\"1.2\" "
        << "stroke-dasharray=\"3 3\"/>\n"
        << "<text x=\"" << num(mx + 4) << "\" y=\"" << num(top + 14) << "\" fill=\"#444444\">"
        << escape(plot.marker_label) << "</text>\n";
  }

  double ly = top + 12;
  for (const PlotSeries& s : plot.series) {
    const double lx = left + pw - 170;
    out << "<line x1=\"" << num(lx) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(lx + 24)
        << "\" y2=\"" << num(ly) << "\" stroke=\"" << escape(s.color)
        << "\" stroke-width=\"2\"" << (s.dashed ? " stroke-dasharray=\"6 4\"" : "")
        << "/>\n<text x=\"" << num(lx + 30) << "\" y=\"" << num(ly + 4) << "\">"
        << escape(s.label) << "</text>\n";
    ly += 16;
  }
  out << "</svg>\n";
  return out.str();
}

std::string render_plot_csv(const LinePlot& plot) {
  check(plot);
  std::ostringstream out;
  auto field = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  };
  out << field(plot.x_label);
  for (const PlotSeries& s : plot.series) out << "," << field(s.label);
  out << "\n";
  char buf[32];
  for (std::size_t i = 0; i < plot.x.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", plot.x[i]);
    out << buf;
    for (const PlotSeries& s : plot.series) {
      std::snprintf(buf, sizeof buf, "%.17g", s.y[i]);
      out << "," << buf;
    }
    out << "\n";
  }
  return out.str();
}

LinePlot attack_overlay(const Sample& attacked, const SignalTrace& twin, Signal signal) {
  if (!attacked.attack) {
    throw InvalidArgument("attack_overlay: sample " + std::to_string(attacked.id) +
                          " is not attacked");
  }
  if (twin.t != attacked.trace.t) {
    throw InvalidArgument("attack_overlay: twin and sample time grids differ");
  }
  LinePlot p;
  p.title = "Sample " + std::to_string(attacked.id) + ": " +
            std::string(signal_name(signal)) + " without and with attack";
  p.y_label = std::string(signal_name(signal)) + " (pu)";
  p.x = attacked.trace.t;
  p.series.push_back({"Normal", "#1f77b4", twin.series(signal), false});
  p.series.push_back({"Attack", "#d62728", attacked.trace.series(signal), true});
  p.marker_x = attacked.attack->t_start;
  char buf[64];
  std::snprintf(buf, sizeof buf, "attack start %.4g s", attacked.attack->t_start);
  p.marker_label = buf;
  return p;
}

LinePlot trace_plot(const SignalTrace& trace, const std::string& title) {
  LinePlot p;
  p.title = title;
  p.y_label = "Deviation (pu)";
  p.x = trace.t;
  p.series.push_back({"delta_f1", "#1f77b4", trace.delta_f1, false});
  p.series.push_back({"delta_f2", "#2ca02c", trace.delta_f2, false});
  p.series.push_back({"delta_p_tie", "#d62728", trace.delta_p_tie, false});
  return p;
}

}  // namespace agc
