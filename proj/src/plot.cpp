#include "slrl/plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace slrl {

namespace {

constexpr std::array<const char*, 6> kPalette = {"#1f77b4", "#d62728", "#2ca02c",
                                                 "#ff7f0e", "#9467bd", "#8c564b"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
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

/// Roughly `target` round-valued ticks spanning [lo, hi].
std::vector<double> nice_ticks(double lo, double hi, int target = 6) {
  const double span = hi - lo;
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (step >= raw) break;
  }
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step) {
    ticks.push_back(std::abs(t) < 1e-12 * span ? 0.0 : t);
  }
  return ticks;
}

std::string tick_label(double v) {
  char buf[32];
  if (v == std::round(v) && std::abs(v) < 1e9) {
    std::snprintf(buf, sizeof(buf), "%.0f", v);
  } else {
    std::snprintf(buf, sizeof(buf), "%g", v);
  }
  return buf;
}

}  // namespace

std::string render_svg(std::span<const PlotSeries> series, const PlotOptions& o) {
  if (series.empty()) throw std::runtime_error("nothing to plot");
  double x_lo = 0, x_hi = 0, y_lo = 0, y_hi = 0;
  bool first = true;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (first) {
        x_lo = x_hi = s.x[i];
        y_lo = y_hi = s.y[i];
        first = false;
      }
      x_lo = std::min(x_lo, s.x[i]);
      x_hi = std::max(x_hi, s.x[i]);
      y_lo = std::min(y_lo, s.y[i]);
      y_hi = std::max(y_hi, s.y[i]);
    }
  }
  if (first) throw std::runtime_error("all series are empty");
  if (x_hi == x_lo) x_hi = x_lo + 1.0;
  if (y_hi == y_lo) {
    y_lo -= 1.0;
    y_hi += 1.0;
  }
  const double pad = 0.05 * (y_hi - y_lo);
  y_lo -= pad;
  y_hi += pad;

  const double left = 80, right = 170, top = 40, bottom = 60;
  const double pw = o.width - left - right;
  const double ph = o.height - top - bottom;
  auto sx = [&](double x) { return left + (x - x_lo) / (x_hi - x_lo) * pw; };
  auto sy = [&](double y) { return top + (1.0 - (y - y_lo) / (y_hi - y_lo)) * ph; };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << o.width << "\" height=\""
      << o.height << "\" viewBox=\"0 0 " << o.width << ' ' << o.height << "\">\n"
      << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "  <text x=\"" << fmt(left + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"16\">" << escape(o.title) << "</text>\n";

  svg << "  <g font-family=\"sans-serif\" font-size=\"11\" stroke=\"none\" fill=\"black\">\n";
  for (double t : nice_ticks(x_lo, x_hi)) {
    svg << "    <line x1=\"" << fmt(sx(t)) << "\" y1=\"" << fmt(top + ph) << "\" x2=\""
        << fmt(sx(t)) << "\" y2=\"" << fmt(top + ph + 5) << "\" stroke=\"black\"/>\n"
        << "    <text x=\"" << fmt(sx(t)) << "\" y=\"" << fmt(top + ph + 18)
        << "\" text-anchor=\"middle\">" << tick_label(t) << "</text>\n";
  }
  for (double t : nice_ticks(y_lo, y_hi)) {
    svg << "    <line x1=\"" << fmt(left - 5) << "\" y1=\"" << fmt(sy(t)) << "\" x2=\""
        << fmt(left + pw) << "\" y2=\"" << fmt(sy(t)) << "\" stroke=\"#dddddd\"/>\n"
        << "    <text x=\"" << fmt(left - 8) << "\" y=\"" << fmt(sy(t) + 4)
        << "\" text-anchor=\"end\">" << tick_label(t) << "</text>\n";
  }
  svg << "    <text x=\"" << fmt(left + pw / 2) << "\" y=\"" << fmt(o.height - 15.0)
      << "\" text-anchor=\"middle\">" << escape(o.x_label) << "</text>\n"
      << "    <text transform=\"translate(18," << fmt(top + ph / 2)
      << ") rotate(-90)\" text-anchor=\"middle\">" << escape(o.y_label) << "</text>\n"
      << "  </g>\n";
  svg << "  <rect x=\"" << fmt(left) << "\" y=\"" << fmt(top) << "\" width=\"" << fmt(pw)
      << "\" height=\"" << fmt(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const char* color = kPalette[i % kPalette.size()];
    svg << "  <polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t j = 0; j < s.x.size(); ++j) {
      if (j) svg << ' ';
      svg << fmt(sx(s.x[j])) << ',' << fmt(sy(s.y[j]));
    }
    svg << "\"/>\n";
  }

  svg << "  <g class=\"legend\" font-family=\"sans-serif\" font-size=\"12\">\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double ly = top + 10 + 20.0 * static_cast<double>(i);
    const double lx = left + pw + 15;
    svg << "    <line x1=\"" << fmt(lx) << "\" y1=\"" << fmt(ly) << "\" x2=\"" << fmt(lx + 20)
        << "\" y2=\"" << fmt(ly) << "\" stroke=\"" << kPalette[i % kPalette.size()]
        << "\" stroke-width=\"3\"/>\n"
        << "    <text x=\"" << fmt(lx + 26) << "\" y=\"" << fmt(ly + 4) << "\">"
        << escape(series[i].label) << "</text>\n";
  }
  svg << "  </g>\n</svg>\n";
  return svg.str();
}

PlotSeries curve_series(std::span<const CurveRecord> curve, const std::string& label, int window) {
  std::map<int, std::pair<double, int>> by_episode;
  for (const auto& r : curve) {
    auto& [sum, n] = by_episode[r.episode];
    sum += r.cum_reward;
    ++n;
  }
  PlotSeries s;
  s.label = label;
  std::vector<double> avg;
  for (const auto& [ep, acc] : by_episode) {
    s.x.push_back(ep);
    avg.push_back(acc.first / acc.second);
  }
  s.y = moving_average(avg, window);
  return s;
}

void plot_emit(std::span<const std::string> curve_files, const std::string& output_path,
               int window, const PlotOptions& options) {
  if (curve_files.empty()) throw std::runtime_error("plot needs at least one curve file");
  std::vector<PlotSeries> series;
  for (const auto& path : curve_files) {
    const Curve curve = read_curve_file(path);
    if (curve.empty()) throw std::runtime_error(path + ": curve file has no records");
    series.push_back(curve_series(curve, std::filesystem::path(path).stem().string(), window));
  }
  const std::string doc = render_svg(series, options);
  std::ofstream out(output_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + output_path + " for writing");
  out << doc;
}

}  // namespace slrl
