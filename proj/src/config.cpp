#include "slrl/config.hpp"

#include <fstream>
#include <functional>
#include <istream>
#include <map>

#include "slrl/csv.hpp"

namespace slrl {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_real(const std::string& key, const std::string& v) {
  try {
    return csv::parse_double(v, key);
  } catch (const std::exception&) {
    throw ConfigError("value of '" + key + "' is not a number: '" + v + "'");
  }
}

int to_int(const std::string& key, const std::string& v) {
  try {
    return static_cast<int>(csv::parse_int(v, key));
  } catch (const std::exception&) {
    throw ConfigError("value of '" + key + "' is not an integer: '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("value of '" + key + "' is not a boolean: '" + v + "'");
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  using Setter = std::function<void(RunConfig&, const std::string&)>;
  static const std::map<std::string, Setter> setters = {
      {"alpha", [](RunConfig& c, const std::string& v) { c.q.alpha = to_real("alpha", v); }},
      {"gamma", [](RunConfig& c, const std::string& v) { c.q.gamma = c.pg.gamma = to_real("gamma", v); }},
      {"p0", [](RunConfig& c, const std::string& v) { c.q.p0 = to_real("p0", v); }},
      {"q0", [](RunConfig& c, const std::string& v) { c.q.q0 = to_real("q0", v); }},
      {"decay_period", [](RunConfig& c, const std::string& v) { c.q.decay_period = to_int("decay_period", v); }},
      {"decay_ratio", [](RunConfig& c, const std::string& v) { c.q.decay_ratio = to_real("decay_ratio", v); }},
      {"episodes", [](RunConfig& c, const std::string& v) { c.q.episodes = c.pg.episodes = to_int("episodes", v); }},
      {"state_dim", [](RunConfig& c, const std::string& v) { c.q.state_dim = to_int("state_dim", v); }},
      {"alpha_lin", [](RunConfig& c, const std::string& v) { c.pg.alpha_lin = to_real("alpha_lin", v); c.pg_rates_set = true; }},
      {"alpha_ang", [](RunConfig& c, const std::string& v) { c.pg.alpha_ang = to_real("alpha_ang", v); c.pg_rates_set = true; }},
      {"batch_size", [](RunConfig& c, const std::string& v) { c.pg.batch_size = to_int("batch_size", v); }},
      {"sigma0", [](RunConfig& c, const std::string& v) { c.pg.sigma0 = to_real("sigma0", v); }},
      {"sigma_min", [](RunConfig& c, const std::string& v) { c.pg.sigma_min = to_real("sigma_min", v); }},
      {"k", [](RunConfig& c, const std::string& v) { c.ella.k = to_int("k", v); }},
      {"mu", [](RunConfig& c, const std::string& v) { c.ella.mu = to_real("mu", v); }},
      {"lambda", [](RunConfig& c, const std::string& v) { c.ella.lambda = to_real("lambda", v); }},
      {"trajectories_per_task", [](RunConfig& c, const std::string& v) { c.ella.trajectories_per_task = to_int("trajectories_per_task", v); }},
      {"hessian_ridge", [](RunConfig& c, const std::string& v) { c.ella.hessian_ridge = to_real("hessian_ridge", v); }},
      {"eval_sigma", [](RunConfig& c, const std::string& v) { c.ella.eval_sigma = to_real("eval_sigma", v); }},
      {"warm_start", [](RunConfig& c, const std::string& v) { c.ella.warm_start = to_bool("warm_start", v); }},
      {"noise_prob", [](RunConfig& c, const std::string& v) { c.demo.noise_prob = to_real("noise_prob", v); }},
      {"demo_count", [](RunConfig& c, const std::string& v) { c.demo.demo_count = to_int("demo_count", v); }},
  };
  const auto it = setters.find(key);
  if (it == setters.end()) throw ConfigError("unknown config key '" + key + "'");
  it->second(*this, value);
}

void RunConfig::validate() const {
  q.validate();
  pg.validate();
  ella.validate();
  if (!(demo.noise_prob >= 0.0 && demo.noise_prob < 0.5)) throw ConfigError("noise_prob must be in [0, 0.5)");
  if (demo.demo_count < 1) throw ConfigError("demo_count must be >= 1");
}

RunConfig parse_config(std::istream& in, const std::string& source) {
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    try {
      cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  return parse_config(in, path);
}

}  // namespace slrl
