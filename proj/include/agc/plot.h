#pragma once

// Self-contained SVG line plots and their CSV series.

#include <optional>
#include <string>
#include <vector>

#include "agc/datagen.h"

namespace agc {

struct PlotSeries {
  std::string label;
  std::string color;  // any SVG colour
  std::vector<double> y;
  bool dashed = false;
};

struct LinePlot {
  std::string title;
  std::string x_label = "Time (s)";
  std::string y_label;
  std::vector<double> x;
  std::vector<PlotSeries> series;  // each the same length as x
  std::optional<double> marker_x;  // vertical line
  std::string marker_label;
};

std::string render_svg(const LinePlot& plot, int width = 800, int height = 450);
// Header "x_label,label1,label2,...", one row per x, %.17g.
std::string render_plot_csv(const LinePlot& plot);

// Attack-free twin against the attacked recording of one signal, with the
// onset marked.
LinePlot attack_overlay(const Sample& attacked, const SignalTrace& twin, Signal signal);
// All three recorded signals of one run.
LinePlot trace_plot(const SignalTrace& trace, const std::string& title);

}  // namespace agc
