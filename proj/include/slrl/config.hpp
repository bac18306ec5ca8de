#pragma once

#include <iosfwd>
#include <string>

#include "slrl/pgella.hpp"
#include "slrl/policy_gradient.hpp"
#include "slrl/qlearning.hpp"

namespace slrl {

/// Demonstration collection settings.
struct DemoConfig {
  double noise_prob = kDefaultDemoNoise;
  int demo_count = kDefaultDemoCount;
};

/// Everything a `key = value` config file can set. Keys are the field names
/// of QConfig, PGConfig, EllaConfig and DemoConfig; `gamma` and `episodes`
/// apply to both the Q and PG learners.
struct RunConfig {
  QConfig q;
  PGConfig pg;
  EllaConfig ella;
  DemoConfig demo;
  /// Whether any key set the PG learning rates explicitly.
  bool pg_rates_set = false;

  /// Throws ConfigError for unknown keys or unparsable values.
  void set(const std::string& key, const std::string& value);
  void validate() const;
};

/// Parses `key = value` lines; '#' starts a comment. Throws ConfigError
/// naming the source and line.
RunConfig parse_config(std::istream& in, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

}  // namespace slrl
