#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace slrl {

/// One episode of a learning run.
struct CurveRecord {
  int episode = 0;
  int task_id = 0;
  std::uint64_t seed = 0;
  double cum_reward = 0.0;
  int steps = 0;

  friend bool operator==(const CurveRecord&, const CurveRecord&) = default;
};

using Curve = std::vector<CurveRecord>;

inline constexpr const char* kCurveHeader = "episode,task_id,seed,cum_reward,steps";

void write_curve(std::ostream& out, std::span<const CurveRecord> records);
void write_curve_file(const std::string& path, std::span<const CurveRecord> records);
/// Throws std::runtime_error naming `source` on malformed input.
Curve read_curve(std::istream& in, const std::string& source = "<stream>");
Curve read_curve_file(const std::string& path);

/// Trailing mean; the first window-1 points average the available prefix.
std::vector<double> moving_average(std::span<const double> values, int window);
std::vector<double> moving_average(std::span<const CurveRecord> curve, int window);

std::vector<double> rewards_of(std::span<const CurveRecord> curve);
std::vector<double> steps_of(std::span<const CurveRecord> curve);

double mean(std::span<const double> values);
/// Population variance.
double variance(std::span<const double> values);
double median(std::vector<double> values);
/// Least-squares slope of values against their index.
double slope(std::span<const double> values);

}  // namespace slrl
