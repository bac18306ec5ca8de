#pragma once

// Tabular Q-learning over discretised observations with random / user-policy
// / greedy action mixing.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>

#include "slrl/curves.hpp"
#include "slrl/demonstrator.hpp"
#include "slrl/env.hpp"

namespace slrl {

struct QConfig {
  double alpha = 0.1;
  double gamma = 0.9;
  double p0 = 0.2;  // random-action probability
  double q0 = 0.0;  // user-policy probability
  int decay_period = 1000;
  double decay_ratio = 0.01;
  int episodes = 4000;
  int state_dim = 2;

  /// Throws ConfigError.
  void validate() const;
};

class QTable {
 public:
  using Row = std::array<double, kNumDiscreteActions>;

  explicit QTable(double default_value = 0.0) : default_value_(default_value) {}

  double value(const StateKey& s, ActionDiscrete a) const;
  Row row(const StateKey& s) const;
  double max_value(const StateKey& s) const;
  void set(const StateKey& s, ActionDiscrete a, double v);

  double default_value() const { return default_value_; }
  std::size_t size() const { return values_.size(); }
  const std::map<StateKey, Row>& rows() const { return values_; }

  /// CSV `state_key,action,value`.
  void write(std::ostream& out) const;
  static QTable read(std::istream& in, double default_value = 0.0,
                     const std::string& source = "<stream>");

  friend bool operator==(const QTable&, const QTable&) = default;

 private:
  Row default_row() const { return {default_value_, default_value_, default_value_}; }

  std::map<StateKey, Row> values_;
  double default_value_;
};

/// Q(s,a) <- (1-alpha) Q(s,a) + alpha [r + gamma max_a' Q(s',a')], with no
/// bootstrap on terminal transitions.
void q_update(QTable& table, const StateKey& s, ActionDiscrete a, double r,
              const StateKey& s_next, bool terminal, const QConfig& cfg);

ActionDiscrete greedy(const QTable& table, const StateKey& s);

/// Random with probability p, user policy with probability q, else greedy.
/// Throws MissingDemonstrations when q > 0 and `user` is null or empty.
ActionDiscrete select_action(const QTable& table, const StateKey& s, double p, double q,
                             const UserPolicy* user, Rng& rng);

/// Multiplies p and q by (1 - decay_ratio) every decay_period episodes.
std::pair<double, double> decay_mixing(double p, double q, int episode, const QConfig& cfg);

struct QTrainResult {
  QTable table;
  Curve curve;
};

/// Episode e starts from reset(task, episode_seed(seed, e)), so arms run with
/// the same seed see the same start states.
QTrainResult train_q(const Task& task, const QConfig& cfg, const UserPolicy* user,
                     std::uint64_t seed);

}  // namespace slrl
