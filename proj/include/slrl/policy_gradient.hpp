#pragma once

// Episodic REINFORCE on linear-Gaussian policies with a per-component
// optimal baseline.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "slrl/curves.hpp"
#include "slrl/env.hpp"
#include "slrl/policy.hpp"

namespace slrl {

class NonFiniteGradient : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrajectoryStep {
  ContinuousObs obs;        // state the action was taken in
  ActionContinuous raw;     // pre-clamp sample
  double reward = 0.0;
};

struct Trajectory {
  std::vector<TrajectoryStep> steps;

  int horizon() const { return static_cast<int>(steps.size()); }
};

struct PGConfig {
  double alpha_lin = 1e-6;
  double alpha_ang = 1e-6;
  double gamma = 0.9;  // kept for parity with the Q-learner; returns are undiscounted
  int batch_size = 10;
  int episodes = 400;
  double sigma0 = 0.3;
  double sigma_min = 0.01;

  void validate() const;

  /// Defaults with the per-task learning rates of task `task_id`.
  static PGConfig for_task(int task_id);
};

/// Default (alpha_lin, alpha_ang) of each task.
std::array<double, 2> default_learning_rates(int task_id);

struct SampledAction {
  ActionContinuous executed;  // clamped to [-1.5, 1.5]
  ActionContinuous raw;
};

SampledAction sample_action(const GaussianPolicy& policy, const ContinuousObs& obs, Rng& rng);

/// (1/H) sum of rewards; throws ContractViolation on an empty trajectory.
double avg_return(const Trajectory& traj);

/// Gradient with respect to (theta_lin, theta_ang, sigma_lin, sigma_ang).
struct PolicyGradient {
  FeatureVec theta_lin = FeatureVec::Zero();
  FeatureVec theta_ang = FeatureVec::Zero();
  double sigma_lin = 0.0;
  double sigma_ang = 0.0;

  static constexpr int kSize = 2 * kFeatureDim + 2;

  Eigen::Matrix<double, kSize, 1> flat() const;
  static PolicyGradient from_flat(const Eigen::Matrix<double, kSize, 1>& v);
  bool all_finite() const { return flat().allFinite(); }
};

using ScoreVec = Eigen::Matrix<double, PolicyGradient::kSize, 1>;

/// Sum over the trajectory of grad log pi(raw_t | s_t), flattened as in
/// PolicyGradient::flat().
ScoreVec trajectory_score(const Trajectory& traj, const GaussianPolicy& policy);

/// Log-density of the raw actions of `traj` under `policy`.
double trajectory_log_prob(const Trajectory& traj, const GaussianPolicy& policy);

/// Per-component optimal baseline b_j = sum psi_j^2 R / sum psi_j^2.
ScoreVec optimal_baseline(std::span<const Trajectory> batch, const GaussianPolicy& policy);

/// (1/N) sum_tau psi_tau (R(tau) - b). Components whose scores are all zero
/// get a zero gradient. Throws ContractViolation on an empty batch.
PolicyGradient reinforce_gradient(std::span<const Trajectory> batch, const GaussianPolicy& policy);

/// theta += alpha g_theta; sigma += alpha sigma g_sigma, floored at sigma_min.
/// Throws NonFiniteGradient without touching the policy.
GaussianPolicy pg_update(const GaussianPolicy& policy, const PolicyGradient& g, const PGConfig& cfg);

struct PgEpisode {
  Trajectory trajectory;
  double cum_reward = 0.0;
  int steps = 0;
  bool success = false;
};

/// Runs one episode from `world` under `policy`. Optionally logs each step.
PgEpisode run_pg_episode(WorldState world, const GaussianPolicy& policy, Rng& rng,
                         std::vector<StepLog>* log = nullptr);

struct PgTrainResult {
  GaussianPolicy policy;
  Curve curve;
  /// Episodes acted by the demonstrator before the learned policy took over.
  int demo_episodes = 0;
  /// Trajectories of the last phase, kept when requested.
  std::vector<Trajectory> trajectories;
};

struct PgTrainOptions {
  /// Number of most recent trajectories to return.
  int keep_trajectories = 0;
};

/// Without a warm start: theta = 0, sigma = sigma0, cfg.episodes on-policy
/// episodes. With a warm start: theta starts at theta_u; cfg.episodes are
/// acted by N(theta_u' phi, sigma0) while theta is updated from those
/// rollouts, then cfg.episodes more are acted by the learned policy.
PgTrainResult train_pg(const Task& task, const PGConfig& cfg, const GaussianPolicy* warm_start,
                       std::uint64_t seed, const PgTrainOptions& options = {});

/// Runs `episodes` evaluation episodes without learning. Start states are
/// drawn from a stream independent of training.
Curve evaluate_policy(const Task& task, const GaussianPolicy& policy, int episodes,
                      std::uint64_t seed);

inline constexpr int kEvalEpisodes = 25;

struct GridSearchOptions {
  /// Per-phase training episodes of each candidate.
  int budget_episodes = 50;
  int eval_episodes = kEvalEpisodes;
  bool warm_start = true;
};

struct GridCandidate {
  double alpha_lin = 0.0;
  double alpha_ang = 0.0;
  double avg_reward = 0.0;
};

struct GridSearchResult {
  double alpha_lin = 0.0;
  double alpha_ang = 0.0;
  std::vector<GridCandidate> candidates;
};

/// {1e-3, ..., 1e-8}.
std::vector<double> learning_rate_grid();

/// Best (alpha_lin, alpha_ang) by average evaluation reward over the 36-pair
/// grid; ties go to the lexicographically largest pair.
GridSearchResult grid_search(const Task& task, std::uint64_t seed,
                             const GridSearchOptions& options = {},
                             const PGConfig& base = PGConfig{});

/// CSV `param,index,value` for theta_lin, theta_ang, sigma_lin, sigma_ang.
void write_policy(std::ostream& out, const GaussianPolicy& policy);
GaussianPolicy read_policy(std::istream& in, const std::string& source = "<stream>");

}  // namespace slrl
