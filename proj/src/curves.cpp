#include "slrl/curves.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "slrl/core.hpp"
#include "slrl/csv.hpp"

namespace slrl {

void write_curve(std::ostream& out, std::span<const CurveRecord> records) {
  out << kCurveHeader << '\n';
  for (const auto& r : records) {
    out << r.episode << ',' << r.task_id << ',' << r.seed << ','
        << csv::format(r.cum_reward) << ',' << r.steps << '\n';
  }
}

void write_curve_file(const std::string& path, std::span<const CurveRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_curve(out, records);
}

Curve read_curve(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(source + ": empty curve file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCurveHeader) throw std::runtime_error(source + ": unexpected header '" + line + "'");
  Curve out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != 5) {
      throw std::runtime_error(source + ":" + std::to_string(lineno) + ": expected 5 fields");
    }
    try {
      CurveRecord r;
      r.episode = static_cast<int>(csv::parse_int(f[0], "episode"));
      r.task_id = static_cast<int>(csv::parse_int(f[1], "task_id"));
      r.seed = static_cast<std::uint64_t>(std::stoull(f[2]));
      r.cum_reward = csv::parse_double(f[3], "cum_reward");
      r.steps = static_cast<int>(csv::parse_int(f[4], "steps"));
      out.push_back(r);
    } catch (const std::exception& e) {
      throw std::runtime_error(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

Curve read_curve_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read curve file " + path);
  return read_curve(in, path);
}

std::vector<double> moving_average(std::span<const double> values, int window) {
  if (window < 1) throw ContractViolation("moving_average window must be >= 1");
  std::vector<double> out(values.size());
  double sum = 0.0;
  const auto w = static_cast<std::size_t>(window);
  for (std::size_t i = 0; i < values.size(); ++i) {
    sum += values[i];
    if (i >= w) sum -= values[i - w];
    out[i] = sum / static_cast<double>(std::min(i + 1, w));
  }
  return out;
}

std::vector<double> moving_average(std::span<const CurveRecord> curve, int window) {
  const auto r = rewards_of(curve);
  return moving_average(r, window);
}

std::vector<double> rewards_of(std::span<const CurveRecord> curve) {
  std::vector<double> out;
  out.reserve(curve.size());
  for (const auto& r : curve) out.push_back(r.cum_reward);
  return out;
}

std::vector<double> steps_of(std::span<const CurveRecord> curve) {
  std::vector<double> out;
  out.reserve(curve.size());
  for (const auto& r : curve) out.push_back(r.steps);
  return out;
}

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double variance(std::span<const double> values) {
  if (values.empty()) return 0.0;
  const double m = mean(values);
  double acc = 0.0;
  for (double v : values) acc += (v - m) * (v - m);
  return acc / static_cast<double>(values.size());
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double slope(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) return 0.0;
  const double xm = 0.5 * static_cast<double>(n - 1);
  const double ym = mean(values);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = static_cast<double>(i) - xm;
    sxy += dx * (values[i] - ym);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

}  // namespace slrl
