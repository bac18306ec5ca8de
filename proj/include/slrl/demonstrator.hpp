#pragma once

// Scripted go-to-goal demonstrator standing in for keyboard teleoperation,
// the frequency-based user policy built from its trajectories, and the
// proportional controller used to warm-start policy gradient.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "slrl/env.hpp"
#include "slrl/policy.hpp"

namespace slrl {

/// No successful demonstration after the retry limit.
class InfeasibleTask : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// select_action asked for the user policy but none was recorded.
class MissingDemonstrations : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DemoStep {
  StateKey state;
  ActionDiscrete action = ActionDiscrete::Forward;
  friend bool operator==(const DemoStep&, const DemoStep&) = default;
};

using DemoTrajectory = std::vector<DemoStep>;

inline constexpr double kDefaultDemoNoise = 0.1;
inline constexpr int kDefaultDemoCount = 50;
inline constexpr int kMaxDemoAttempts = 100;

/// Proportional gains of the continuous demonstrator, in 1/s.
inline constexpr double kDemoGainDistance = 0.6;
inline constexpr double kDemoGainAngle = 1.2;

/// Successful demonstrations only.
class UserTrajectoryStore {
 public:
  /// Throws ContractViolation for an empty trajectory.
  void add(DemoTrajectory trajectory);

  const std::vector<DemoTrajectory>& trajectories() const { return trajectories_; }
  bool empty() const { return trajectories_.empty(); }
  std::size_t size() const { return trajectories_.size(); }

 private:
  std::vector<DemoTrajectory> trajectories_;
};

/// Noise-free controller: Forward while the goal sits in the rewarded cone
/// (omega bucket < 2), otherwise turn toward it.
ActionDiscrete demo_controller(const ContinuousObs& obs);

/// One episode from `world`. Returns nullopt when the step budget runs out.
std::optional<DemoTrajectory> run_demo_episode(WorldState world, double noise_prob,
                                               Rng& rng, int state_dim = 2);

/// A successful demonstration; retries from fresh derived starts and throws
/// InfeasibleTask after kMaxDemoAttempts failures.
DemoTrajectory scripted_demo(const Task& task, double noise_prob, std::uint64_t seed,
                             int state_dim = 2);

UserTrajectoryStore collect_demonstrations(const Task& task, int count, double noise_prob,
                                           std::uint64_t seed, int state_dim = 2);

/// Nearest-state metric: Euclidean over buckets, angular buckets compared on
/// the 31-cycle.
double bucket_distance(const StateKey& a, const StateKey& b);

class UserPolicy {
 public:
  using Counts = std::array<double, kNumDiscreteActions>;

  void record(const StateKey& s, ActionDiscrete a, double count = 1.0);

  bool empty() const { return counts_.empty(); }
  const std::map<StateKey, Counts>& counts() const { return counts_; }

  /// pi_u(s, .) for a visited state; throws std::out_of_range otherwise.
  Counts probabilities(const StateKey& s) const;

  /// Visited state closest to `s`; ties go to the smaller bucket tuple.
  const StateKey& nearest_state(const StateKey& s) const;

 private:
  std::map<StateKey, Counts> counts_;
};

UserPolicy estimate_user_policy(const UserTrajectoryStore& store);

/// argmax pi_u at the nearest visited state, ties Forward < Left < Right.
ActionDiscrete user_action(const UserPolicy& policy, const StateKey& s);

/// theta_u: v_lin = k_d * d, v_ang = k_omega * omega_rad, in the PG feature basis.
GaussianPolicy warm_start_params(const Task& task, double sigma = 0.3);

/// CSV `traj_id,step,state_key,action`.
void write_demonstrations(std::ostream& out, const UserTrajectoryStore& store);
UserTrajectoryStore read_demonstrations(std::istream& in, const std::string& source = "<stream>");

}  // namespace slrl
