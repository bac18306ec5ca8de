#include "slrl/env.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "slrl/csv.hpp"

namespace slrl {

namespace {

constexpr double kForwardSpeed = 1.0;  // m/s
constexpr double kTurnRate = 1.0;      // rad/s
constexpr std::uint64_t kResetStream = 0x7265736574ULL;
constexpr std::uint64_t kEpisodeStream = 0x657069736f6465ULL;

}  // namespace

void Task::validate() const {
  if (task_id < 1) throw ContractViolation("task_id must be positive");
  if (!(friction.linear >= 0.0) || !(friction.angular >= 0.0)) {
    throw ContractViolation("friction coefficients must be nonnegative");
  }
  if (max_steps < 1) throw ContractViolation("max_steps must be >= 1");
  if (!(dt > 0.0)) throw ContractViolation("dt must be positive");
  if (start.x_min > start.x_max || start.y_min > start.y_max) {
    throw ContractViolation("empty start region");
  }
  if (!(start.goal_clearance > 0.0)) {
    throw ContractViolation("goal must lie outside the start region");
  }
}

ActionContinuous ActionContinuous::clamped() const {
  return {std::clamp(v_lin, -kActionLimit, kActionLimit),
          std::clamp(v_ang, -kActionLimit, kActionLimit)};
}

std::string to_string(ActionDiscrete a) {
  switch (a) {
    case ActionDiscrete::Forward: return "Forward";
    case ActionDiscrete::Left: return "Left";
    case ActionDiscrete::Right: return "Right";
  }
  return "?";
}

ActionDiscrete parse_action(const std::string& name) {
  for (auto a : kAllDiscreteActions) {
    if (to_string(a) == name) return a;
  }
  throw std::runtime_error("unknown action '" + name + "'");
}

ActionContinuous to_command(ActionDiscrete a) {
  switch (a) {
    case ActionDiscrete::Forward: return {kForwardSpeed, 0.0};
    case ActionDiscrete::Left: return {0.0, kTurnRate};
    case ActionDiscrete::Right: return {0.0, -kTurnRate};
  }
  return {};
}

std::string StateKey::to_string() const {
  std::string out = std::to_string(buckets[0]);
  for (int i = 1; i < dim; ++i) out += ":" + std::to_string(buckets[i]);
  return out;
}

StateKey StateKey::parse(const std::string& text) {
  const auto parts = csv::split(text, ':');
  if (parts.size() != 2 && parts.size() != 3) {
    throw std::runtime_error("bad state key '" + text + "'");
  }
  StateKey key;
  key.dim = static_cast<int>(parts.size());
  for (std::size_t i = 0; i < parts.size(); ++i) {
    key.buckets[i] = static_cast<int>(csv::parse_int(parts[i], "state bucket"));
  }
  return key;
}

StateKey state_key(const DiscreteObs2& obs) {
  return {{obs.d_bucket, obs.omega_bucket, 0}, 2};
}

StateKey state_key(const DiscreteObs3& obs) {
  return {{obs.d_bucket, obs.beta_bucket, obs.zeta_bucket}, 3};
}

StateKey state_key(const DiscreteObs& obs) {
  return std::visit([](const auto& o) { return state_key(o); }, obs);
}

ContinuousObs observe_continuous(const Pose2D& pose, const Eigen::Vector2d& goal) {
  const Eigen::Vector2d v = goal - pose.position();
  const double d = v.norm();
  if (d == 0.0) return {0.0, 0.0};
  const Eigen::Vector2d u(std::cos(pose.heading), std::sin(pose.heading));
  const double cross = u.x() * v.y() - u.y() * v.x();
  const double omega = rad_to_deg(std::atan2(cross, u.dot(v)));
  return {d, wrap_180(omega)};
}

int round_bucket(double x) { return static_cast<int>(std::round(x)); }

int angle_bucket(double degrees) {
  return round_bucket(wrap_360(degrees)) / kOmegaBucketWidth;
}

DiscreteObs2 discretize2(const ContinuousObs& obs) {
  return {round_bucket(obs.d), angle_bucket(obs.omega)};
}

DiscreteObs3 discretize3(const Pose2D& pose, const Eigen::Vector2d& goal) {
  const Eigen::Vector2d v = goal - pose.position();
  const double d = v.norm();
  const double zeta = rad_to_deg(pose.heading);
  // Coincident with the goal: take beta along the heading so omega is 0.
  const double beta = d == 0.0 ? zeta : rad_to_deg(std::atan2(v.y(), v.x()));
  DiscreteObs3 obs;
  obs.d_bucket = round_bucket(d);
  obs.beta_bucket = angle_bucket(beta);
  obs.zeta_bucket = angle_bucket(zeta);
  obs.omega_bucket = angle_bucket(beta - zeta);
  return obs;
}

DiscreteObs discretize(const Pose2D& pose, const Eigen::Vector2d& goal, int state_dim) {
  if (state_dim == 2) return discretize2(observe_continuous(pose, goal));
  if (state_dim == 3) return discretize3(pose, goal);
  throw ContractViolation("state_dim must be 2 or 3");
}

double slip_factor(double mu) {
  if (!(mu >= 0.0)) throw ContractViolation("friction must be nonnegative");
  return mu / (mu + 1.0);
}

double reward_q(const DiscreteObs2& next) {
  return (next.d_bucket < 1 && next.omega_bucket < 2) ? 100.0 : -1.0;
}

double reward_q(const DiscreteObs3& next) {
  return (next.d_bucket < 1 && next.omega_bucket < 2) ? 100.0 : -1.0;
}

double reward_q(const DiscreteObs& next) {
  return std::visit([](const auto& o) { return reward_q(o); }, next);
}

bool is_success(const ContinuousObs& obs) {
  return obs.d < kSuccessDistance && std::abs(deg_to_rad(obs.omega)) < kSuccessAngleRad;
}

double reward_pg(const ContinuousObs& next, const ActionContinuous& a) {
  return is_success(next) ? 100.0 : -0.5 * std::abs(a.v_lin);
}

namespace {

void integrate(WorldState& world, const ActionContinuous& command) {
  const Task& task = world.task;
  const double v = command.v_lin * slip_factor(task.friction.linear);
  const double w = command.v_ang * slip_factor(task.friction.angular);
  Pose2D& p = world.pose;
  p.x += v * std::cos(p.heading) * task.dt;
  p.y += v * std::sin(p.heading) * task.dt;
  p.heading = wrap_pi(p.heading + w * task.dt);
  ++world.step_count;
}

void require_running(const WorldState& world) {
  if (world.finished || world.step_count >= world.task.max_steps) {
    throw ContractViolation("step called on a finished episode");
  }
}

}  // namespace

StepResult step(WorldState& world, const ActionContinuous& a) {
  require_running(world);
  const ActionContinuous command = a.clamped();
  integrate(world, command);
  StepResult out;
  out.obs = observe_continuous(world.pose, world.task.goal);
  out.reward = reward_pg(out.obs, command);
  out.done = out.reward == 100.0 || world.step_count >= world.task.max_steps;
  world.finished = out.done;
  return out;
}

DiscreteStepResult step_discrete(WorldState& world, ActionDiscrete a, int state_dim) {
  require_running(world);
  integrate(world, to_command(a));
  DiscreteStepResult out;
  out.obs = discretize(world.pose, world.task.goal, state_dim);
  out.reward = reward_q(out.obs);
  out.done = out.reward == 100.0 || world.step_count >= world.task.max_steps;
  world.finished = out.done;
  return out;
}

std::vector<Task> make_task_suite() {
  const std::array<Friction, 5> frictions = {
      Friction{100.0, 50.0}, Friction{5.0, 5.0}, Friction{10.0, 0.1},
      Friction{0.1, 50.0}, Friction{0.2, 0.2}};
  std::vector<Task> suite;
  for (std::size_t i = 0; i < frictions.size(); ++i) {
    Task t;
    t.task_id = static_cast<int>(i) + 1;
    t.friction = frictions[i];
    suite.push_back(t);
  }
  return suite;
}

Task task_by_id(int task_id) {
  const auto suite = make_task_suite();
  if (task_id < 1 || task_id > static_cast<int>(suite.size())) {
    throw ConfigError("task id must be in 1..5, got " + std::to_string(task_id));
  }
  return suite[static_cast<std::size_t>(task_id - 1)];
}

WorldState reset(const Task& task, std::uint64_t seed) {
  task.validate();
  WorldState world;
  world.task = task;
  world.rng = Rng(derive_seed(seed, kResetStream));
  const StartRegion& r = task.start;
  while (true) {
    const double x = world.rng.uniform(r.x_min, r.x_max);
    const double y = world.rng.uniform(r.y_min, r.y_max);
    if ((Eigen::Vector2d(x, y) - task.goal).norm() >= r.goal_clearance) {
      world.pose.x = x;
      world.pose.y = y;
      break;
    }
  }
  world.pose.heading = wrap_pi(world.rng.uniform(r.heading_min, r.heading_max));
  return world;
}

std::uint64_t episode_seed(std::uint64_t run_seed, int episode) {
  return derive_seed(run_seed, kEpisodeStream, static_cast<std::uint64_t>(episode));
}

void write_trajectory_log(std::ostream& out, std::span<const StepLog> rows) {
  out << "step,x,y,heading,d,omega,v_lin,v_ang,reward\n";
  for (const auto& r : rows) {
    out << r.step << ',' << csv::format(r.pose.x) << ',' << csv::format(r.pose.y)
        << ',' << csv::format(r.pose.heading) << ',' << csv::format(r.obs.d) << ','
        << csv::format(r.obs.omega) << ',' << csv::format(r.action.v_lin) << ','
        << csv::format(r.action.v_ang) << ',' << csv::format(r.reward) << '\n';
  }
}

}  // namespace slrl
