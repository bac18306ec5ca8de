#include "slrl/demonstrator.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "slrl/csv.hpp"

namespace slrl {

namespace {
constexpr std::uint64_t kDemoStream = 0x64656d6fULL;
}

void UserTrajectoryStore::add(DemoTrajectory trajectory) {
  if (trajectory.empty()) throw ContractViolation("demonstration trajectory is empty");
  trajectories_.push_back(std::move(trajectory));
}

ActionDiscrete demo_controller(const ContinuousObs& obs) {
  if (angle_bucket(obs.omega) < 2) return ActionDiscrete::Forward;
  return obs.omega > 0.0 ? ActionDiscrete::Left : ActionDiscrete::Right;
}

std::optional<DemoTrajectory> run_demo_episode(WorldState world, double noise_prob, Rng& rng,
                                               int state_dim) {
  DemoTrajectory out;
  while (!world.finished && world.step_count < world.task.max_steps) {
    const ContinuousObs obs = observe_continuous(world.pose, world.task.goal);
    ActionDiscrete a = demo_controller(obs);
    if (noise_prob > 0.0 && rng.uniform() < noise_prob) {
      a = kAllDiscreteActions[static_cast<std::size_t>(rng.uniform_int(kNumDiscreteActions))];
    }
    out.push_back({state_key(discretize(world.pose, world.task.goal, state_dim)), a});
    const auto res = step_discrete(world, a, state_dim);
    if (res.reward == 100.0) return out;
  }
  return std::nullopt;
}

DemoTrajectory scripted_demo(const Task& task, double noise_prob, std::uint64_t seed,
                             int state_dim) {
  if (!(noise_prob >= 0.0 && noise_prob < 0.5)) {
    throw ContractViolation("noise_prob must be in [0, 0.5)");
  }
  for (int attempt = 0; attempt < kMaxDemoAttempts; ++attempt) {
    const std::uint64_t attempt_seed = derive_seed(seed, kDemoStream, attempt);
    Rng rng(derive_seed(attempt_seed, kDemoStream, 1));
    auto traj = run_demo_episode(reset(task, attempt_seed), noise_prob, rng, state_dim);
    if (traj) return std::move(*traj);
  }
  throw InfeasibleTask("demonstrator failed " + std::to_string(kMaxDemoAttempts) +
                       " consecutive attempts on task " + std::to_string(task.task_id));
}

UserTrajectoryStore collect_demonstrations(const Task& task, int count, double noise_prob,
                                           std::uint64_t seed, int state_dim) {
  UserTrajectoryStore store;
  for (int i = 0; i < count; ++i) {
    store.add(scripted_demo(task, noise_prob, derive_seed(seed, kDemoStream + 1, i), state_dim));
  }
  return store;
}

double bucket_distance(const StateKey& a, const StateKey& b) {
  if (a.dim != b.dim) throw ContractViolation("state keys of different dimension");
  const double dd = a.buckets[0] - b.buckets[0];
  double sum = dd * dd;
  for (int i = 1; i < a.dim; ++i) {
    const int diff = std::abs(a.buckets[i] - b.buckets[i]) % kOmegaBuckets;
    const double cyc = std::min(diff, kOmegaBuckets - diff);
    sum += cyc * cyc;
  }
  return std::sqrt(sum);
}

void UserPolicy::record(const StateKey& s, ActionDiscrete a, double count) {
  auto& c = counts_[s];
  c[static_cast<std::size_t>(a)] += count;
}

UserPolicy::Counts UserPolicy::probabilities(const StateKey& s) const {
  Counts c = counts_.at(s);
  const double total = c[0] + c[1] + c[2];
  for (double& v : c) v /= total;
  return c;
}

const StateKey& UserPolicy::nearest_state(const StateKey& s) const {
  if (counts_.empty()) throw MissingDemonstrations("user policy is empty");
  if (auto it = counts_.find(s); it != counts_.end()) return it->first;
  const StateKey* best = nullptr;
  double best_dist = 0.0;
  // Map order is lexicographic, so strict < keeps the smallest tuple on ties.
  for (const auto& [key, counts] : counts_) {
    if (key.dim != s.dim) continue;
    const double dist = bucket_distance(key, s);
    if (best == nullptr || dist < best_dist) {
      best = &key;
      best_dist = dist;
    }
  }
  if (best == nullptr) throw MissingDemonstrations("no demonstrations of matching state dimension");
  return *best;
}

UserPolicy estimate_user_policy(const UserTrajectoryStore& store) {
  if (store.empty()) throw MissingDemonstrations("cannot estimate a user policy from no trajectories");
  UserPolicy policy;
  for (const auto& traj : store.trajectories()) {
    for (const auto& step : traj) policy.record(step.state, step.action);
  }
  return policy;
}

ActionDiscrete user_action(const UserPolicy& policy, const StateKey& s) {
  const auto& counts = policy.counts().at(policy.nearest_state(s));
  std::size_t best = 0;
  for (std::size_t i = 1; i < counts.size(); ++i) {
    if (counts[i] > counts[best]) best = i;
  }
  return kAllDiscreteActions[best];
}

GaussianPolicy warm_start_params(const Task& /*task*/, double sigma) {
  // Features are (d/10, omega_rad/pi, 1), so the gains are rescaled by the
  // feature normalisation.
  GaussianPolicy p;
  p.theta_lin << kDemoGainDistance * 10.0, 0.0, 0.0;
  p.theta_ang << 0.0, kDemoGainAngle * kPi, 0.0;
  p.sigma_lin = sigma;
  p.sigma_ang = sigma;
  return p;
}

void write_demonstrations(std::ostream& out, const UserTrajectoryStore& store) {
  out << "traj_id,step,state_key,action\n";
  const auto& trajs = store.trajectories();
  for (std::size_t t = 0; t < trajs.size(); ++t) {
    for (std::size_t i = 0; i < trajs[t].size(); ++i) {
      out << t << ',' << i << ',' << trajs[t][i].state.to_string() << ','
          << to_string(trajs[t][i].action) << '\n';
    }
  }
}

UserTrajectoryStore read_demonstrations(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(source + ": empty demonstration file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "traj_id,step,state_key,action") {
    throw std::runtime_error(source + ": unexpected header '" + line + "'");
  }
  UserTrajectoryStore store;
  DemoTrajectory current;
  long long current_id = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != 4) throw std::runtime_error(source + ": expected 4 fields in '" + line + "'");
    const long long id = csv::parse_int(f[0], "traj_id");
    if (id != current_id && !current.empty()) {
      store.add(std::move(current));
      current.clear();
    }
    current_id = id;
    current.push_back({StateKey::parse(f[2]), parse_action(f[3])});
  }
  if (!current.empty()) store.add(std::move(current));
  return store;
}

}  // namespace slrl
