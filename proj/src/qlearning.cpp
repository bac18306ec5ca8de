#include "slrl/qlearning.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include "slrl/csv.hpp"

namespace slrl {

namespace {
constexpr std::uint64_t kQActionStream = 0x71616374ULL;
}  // namespace

void QConfig::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must be in (0, 1]");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma must be in [0, 1]");
  if (!(p0 >= 0.0 && p0 <= 1.0) || !(q0 >= 0.0 && q0 <= 1.0)) {
    throw ConfigError("p0 and q0 must be in [0, 1]");
  }
  if (p0 + q0 > 1.0) throw ConfigError("p0 + q0 must not exceed 1");
  if (decay_period < 1) throw ConfigError("decay_period must be >= 1");
  if (!(decay_ratio >= 0.0 && decay_ratio <= 1.0)) throw ConfigError("decay_ratio must be in [0, 1]");
  if (episodes < 0) throw ConfigError("episodes must be >= 0");
  if (state_dim != 2 && state_dim != 3) throw ConfigError("state_dim must be 2 or 3");
}

double QTable::value(const StateKey& s, ActionDiscrete a) const {
  return row(s)[static_cast<std::size_t>(a)];
}

QTable::Row QTable::row(const StateKey& s) const {
  const auto it = values_.find(s);
  return it == values_.end() ? default_row() : it->second;
}

double QTable::max_value(const StateKey& s) const {
  const Row r = row(s);
  return *std::max_element(r.begin(), r.end());
}

void QTable::set(const StateKey& s, ActionDiscrete a, double v) {
  auto [it, inserted] = values_.try_emplace(s, default_row());
  it->second[static_cast<std::size_t>(a)] = v;
}

void QTable::write(std::ostream& out) const {
  out << "state_key,action,value\n";
  for (const auto& [key, row] : values_) {
    for (auto a : kAllDiscreteActions) {
      out << key.to_string() << ',' << to_string(a) << ','
          << csv::format(row[static_cast<std::size_t>(a)]) << '\n';
    }
  }
}

QTable QTable::read(std::istream& in, double default_value, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(source + ": empty Q-table file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "state_key,action,value") throw std::runtime_error(source + ": unexpected header");
  QTable table(default_value);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != 3) throw std::runtime_error(source + ": expected 3 fields in '" + line + "'");
    table.set(StateKey::parse(f[0]), parse_action(f[1]), csv::parse_double(f[2], "value"));
  }
  return table;
}

void q_update(QTable& table, const StateKey& s, ActionDiscrete a, double r,
              const StateKey& s_next, bool terminal, const QConfig& cfg) {
  const double bootstrap = terminal ? 0.0 : table.max_value(s_next);
  const double old = table.value(s, a);
  table.set(s, a, (1.0 - cfg.alpha) * old + cfg.alpha * (r + cfg.gamma * bootstrap));
}

ActionDiscrete greedy(const QTable& table, const StateKey& s) {
  const auto r = table.row(s);
  std::size_t best = 0;
  for (std::size_t i = 1; i < r.size(); ++i) {
    if (r[i] > r[best]) best = i;
  }
  return kAllDiscreteActions[best];
}

ActionDiscrete select_action(const QTable& table, const StateKey& s, double p, double q,
                             const UserPolicy* user, Rng& rng) {
  if (q > 0.0 && (user == nullptr || user->empty())) {
    throw MissingDemonstrations("user-policy probability q > 0 but no demonstrations were given");
  }
  const double u = rng.uniform();
  if (u < p) {
    return kAllDiscreteActions[static_cast<std::size_t>(rng.uniform_int(kNumDiscreteActions))];
  }
  if (u < p + q) return user_action(*user, s);
  return greedy(table, s);
}

std::pair<double, double> decay_mixing(double p, double q, int episode, const QConfig& cfg) {
  if (episode > 0 && episode % cfg.decay_period == 0) {
    const double keep = 1.0 - cfg.decay_ratio;
    return {p * keep, q * keep};
  }
  return {p, q};
}

QTrainResult train_q(const Task& task, const QConfig& cfg, const UserPolicy* user,
                     std::uint64_t seed) {
  cfg.validate();
  QTrainResult out;
  out.curve.reserve(static_cast<std::size_t>(cfg.episodes));
  Rng rng(derive_seed(seed, kQActionStream));
  double p = cfg.p0;
  double q = cfg.q0;
  for (int e = 1; e <= cfg.episodes; ++e) {
    WorldState world = reset(task, episode_seed(seed, e));
    StateKey s = state_key(discretize(world.pose, task.goal, cfg.state_dim));
    double cum = 0.0;
    bool success = false;
    while (!world.finished) {
      const ActionDiscrete a = select_action(out.table, s, p, q, user, rng);
      const auto res = step_discrete(world, a, cfg.state_dim);
      const StateKey s_next = res.key();
      success = res.reward == 100.0;
      q_update(out.table, s, a, res.reward, s_next, success, cfg);
      cum += res.reward;
      s = s_next;
    }
    out.curve.push_back({e, task.task_id, seed, cum, success ? world.step_count : task.max_steps});
    std::tie(p, q) = decay_mixing(p, q, e, cfg);
  }
  return out;
}

}  // namespace slrl
