#pragma once

// Kinematic navigation world: unicycle pose integration under friction slip,
// goal-relative observations, discretisations, rewards and the task suite.

#include <array>
#include <compare>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "slrl/core.hpp"

namespace slrl {

inline constexpr double kActionLimit = 1.5;
inline constexpr double kSuccessDistance = 0.55;
/// |omega| threshold of the continuous success test, in radians.
inline constexpr double kSuccessAngleRad = 0.2;
inline constexpr int kOmegaBucketWidth = 12;
inline constexpr int kOmegaBuckets = 31;  // round(w)/12 for w in [0, 360)

struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // radians, (-pi, pi]

  Eigen::Vector2d position() const { return {x, y}; }
  friend bool operator==(const Pose2D&, const Pose2D&) = default;
};

/// Ground friction (mu1, mu2). mu1 scales linear, mu2 angular velocity.
struct Friction {
  double linear = 1.0;
  double angular = 1.0;
  friend bool operator==(const Friction&, const Friction&) = default;
};

struct StartRegion {
  double x_min = -5.0;
  double x_max = 5.0;
  double y_min = -5.0;
  double y_max = 5.0;
  /// Starts closer than this to the goal are rejected.
  double goal_clearance = 1.0;
  double heading_min = -kPi;
  double heading_max = kPi;
  friend bool operator==(const StartRegion&, const StartRegion&) = default;
};

struct Task {
  int task_id = 1;
  Friction friction;
  Eigen::Vector2d goal = Eigen::Vector2d::Zero();
  StartRegion start;
  int max_steps = 150;
  double dt = 0.1;

  /// Throws ContractViolation when an invariant does not hold.
  void validate() const;

  friend bool operator==(const Task& a, const Task& b) {
    return a.task_id == b.task_id && a.friction == b.friction &&
           a.goal == b.goal && a.start == b.start &&
           a.max_steps == b.max_steps && a.dt == b.dt;
  }
};

struct ContinuousObs {
  double d = 0.0;      // metres
  double omega = 0.0;  // degrees, (-180, 180]
  friend bool operator==(const ContinuousObs&, const ContinuousObs&) = default;
};

struct DiscreteObs2 {
  int d_bucket = 0;
  int omega_bucket = 0;
  friend bool operator==(const DiscreteObs2&, const DiscreteObs2&) = default;
};

struct DiscreteObs3 {
  int d_bucket = 0;
  int beta_bucket = 0;
  int zeta_bucket = 0;
  /// Bucket of the continuous (beta - zeta) angle. Used by the reward only,
  /// never part of the state key.
  int omega_bucket = 0;
  friend bool operator==(const DiscreteObs3&, const DiscreteObs3&) = default;
};

struct ActionContinuous {
  double v_lin = 0.0;  // m/s
  double v_ang = 0.0;  // rad/s

  ActionContinuous clamped() const;
  friend bool operator==(const ActionContinuous&, const ActionContinuous&) = default;
};

enum class ActionDiscrete : int { Forward = 0, Left = 1, Right = 2 };
inline constexpr int kNumDiscreteActions = 3;
inline constexpr std::array<ActionDiscrete, 3> kAllDiscreteActions = {
    ActionDiscrete::Forward, ActionDiscrete::Left, ActionDiscrete::Right};

std::string to_string(ActionDiscrete a);
ActionDiscrete parse_action(const std::string& name);
/// Fixed velocity command of a discrete action.
ActionContinuous to_command(ActionDiscrete a);

/// Bucket tuple of a discrete observation, ordered lexicographically.
/// 2D keys use (d, omega); 3D keys use (d, beta, zeta).
struct StateKey {
  std::array<int, 3> buckets{};
  int dim = 2;

  auto operator<=>(const StateKey&) const = default;

  std::string to_string() const;  // buckets joined by ':'
  static StateKey parse(const std::string& text);
};

StateKey state_key(const DiscreteObs2& obs);
StateKey state_key(const DiscreteObs3& obs);

using DiscreteObs = std::variant<DiscreteObs2, DiscreteObs3>;
StateKey state_key(const DiscreteObs& obs);

/// Mutable simulation state of one episode.
struct WorldState {
  Pose2D pose;
  Task task;
  int step_count = 0;
  bool finished = false;
  Rng rng;

  friend bool operator==(const WorldState&, const WorldState&) = default;
};

struct StepResult {
  ContinuousObs obs;
  double reward = 0.0;
  bool done = false;
};

struct DiscreteStepResult {
  DiscreteObs obs;
  double reward = 0.0;
  bool done = false;

  StateKey key() const { return state_key(obs); }
};

ContinuousObs observe_continuous(const Pose2D& pose, const Eigen::Vector2d& goal);

/// Round half away from zero, as an integer.
int round_bucket(double x);
/// floor(round(angle mapped to [0,360)) / 12), in {0..30}.
int angle_bucket(double degrees);

DiscreteObs2 discretize2(const ContinuousObs& obs);
DiscreteObs3 discretize3(const Pose2D& pose, const Eigen::Vector2d& goal);
/// Discretises the world's current pose for a 2- or 3-dimensional state.
DiscreteObs discretize(const Pose2D& pose, const Eigen::Vector2d& goal, int state_dim);

/// Fraction of commanded velocity achieved on ground with friction mu.
double slip_factor(double mu);

double reward_q(const DiscreteObs2& next);
double reward_q(const DiscreteObs3& next);
double reward_q(const DiscreteObs& next);
/// `a` is the executed (clamped) command.
double reward_pg(const ContinuousObs& next, const ActionContinuous& a);

bool is_success(const ContinuousObs& obs);

/// Advances one dt under the clamped command. Throws ContractViolation on a
/// finished episode.
StepResult step(WorldState& world, const ActionContinuous& a);

/// Discrete-action step: Forward (1, 0), Left (0, +1), Right (0, -1), then
/// rewarded with reward_q on the `state_dim` discretisation.
DiscreteStepResult step_discrete(WorldState& world, ActionDiscrete a, int state_dim);

/// The five-task friction suite, ids 1..5.
std::vector<Task> make_task_suite();
/// Task by 1-based id; throws ConfigError outside 1..5.
Task task_by_id(int task_id);

WorldState reset(const Task& task, std::uint64_t seed);

/// Seed of the start state of episode `episode` (1-based) of a run. Learners
/// sharing a run seed therefore share their start states.
std::uint64_t episode_seed(std::uint64_t run_seed, int episode);

struct StepLog {
  int step = 0;
  Pose2D pose;
  ContinuousObs obs;
  ActionContinuous action;
  double reward = 0.0;
};

/// CSV `step,x,y,heading,d,omega,v_lin,v_ang,reward`.
void write_trajectory_log(std::ostream& out, std::span<const StepLog> rows);

}  // namespace slrl
