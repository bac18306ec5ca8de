#pragma once

#include <span>
#include <string>
#include <vector>

#include "slrl/curves.hpp"

namespace slrl {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotOptions {
  std::string title = "Learning curve";
  std::string x_label = "episode";
  std::string y_label = "cumulative reward (moving average)";
  int width = 800;
  int height = 480;
};

/// Standalone SVG document, one polyline per series plus a legend.
/// Output depends only on the input values.
std::string render_svg(std::span<const PlotSeries> series, const PlotOptions& options = {});

/// Averages a (possibly multi-seed) curve per episode, then smooths it.
PlotSeries curve_series(std::span<const CurveRecord> curve, const std::string& label, int window);

/// Reads each curve file as one condition labelled by its file stem and
/// writes the SVG to `output_path`. Throws std::runtime_error naming the
/// offending file when one is unreadable or empty.
void plot_emit(std::span<const std::string> curve_files, const std::string& output_path,
               int window = 100, const PlotOptions& options = {});

}  // namespace slrl
