#pragma once

// Online multi-task policy gradient: each arriving task is fit by single-task
// REINFORCE, then encoded as theta_t = L s_t in a shared latent basis.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "slrl/curves.hpp"
#include "slrl/env.hpp"
#include "slrl/latent_basis.hpp"
#include "slrl/policy_gradient.hpp"

namespace slrl {

struct EllaConfig {
  int k = 3;
  double mu = 0.1;       // sparsity weight
  double lambda = 0.01;  // basis weight
  int trajectories_per_task = 100;
  double hessian_ridge = 1e-3;
  /// Exploration noise used when evaluating reconstructed policies.
  double eval_sigma = 0.3;
  bool warm_start = true;

  void validate() const;
};

/// Stacked parameter dimension (theta_lin ; theta_ang).
inline constexpr int kStackedDim = 2 * kFeatureDim;

/// (1/N) sum_tau psi_tau psi_tau' + ridge I over the theta-part of each
/// trajectory's score at `policy`.
MatXd gauss_newton_hessian(std::span<const Trajectory> trajectories, const GaussianPolicy& policy,
                           double ridge);

struct TaskSolution {
  TaskStats stats;
  /// The single-task policy the stats were taken from.
  GaussianPolicy policy;
  Curve curve;
};

/// Single-task PG on `task` with trajectories_per_task episodes per phase;
/// Gamma from the last phase's trajectories. Throws NonFiniteGradient when
/// the fitted parameters are not finite.
TaskSolution task_solver(const Task& task, const PGConfig& pg_cfg, const EllaConfig& cfg,
                         std::uint64_t seed);

/// theta = L s, split into linear / angular blocks, with both sigmas = sigma.
GaussianPolicy reconstruct_policy(const MatXd& L, const TaskCoefficients& s, double sigma);

/// Objective values around one task arrival: with the task's coefficients
/// still zero, after its s-step, and after the L-step.
struct ArrivalTrace {
  int task_id = 0;
  double before = 0.0;
  double after_s = 0.0;
  double after_l = 0.0;
};

/// Sequential learner state: the basis plus the per-task statistics and codes
/// seen so far. Tasks are consumed one at a time with no look-ahead.
class PgEllaLearner {
 public:
  PgEllaLearner(const EllaConfig& cfg, std::uint64_t seed);

  /// Adds (or replaces, for a known task id) a task's statistics, solves its
  /// coefficients against the current basis, then refits the basis.
  ArrivalTrace observe(const TaskStats& stats);

  /// Alternates full s- and L-steps until the objective stops decreasing.
  /// Returns the objective after each half-step.
  std::vector<double> refresh(int max_passes = 1000, double tol = 1e-12);

  double objective() const;

  const MatXd& basis() const { return L_; }
  const std::vector<TaskStats>& stats() const { return stats_; }
  const std::vector<TaskCoefficients>& coefficients() const { return coeffs_; }
  const TaskCoefficients& coefficients(int task_id) const;
  GaussianPolicy policy(int task_id, double sigma) const;

 private:
  std::size_t index_of(int task_id) const;
  void refit_basis();

  EllaConfig cfg_;
  MatXd L_;
  std::vector<TaskStats> stats_;
  std::vector<TaskCoefficients> coeffs_;
};

struct TaskReport {
  int task_id = 0;
  int arrival = 0;  // 0-based position in the stream
  GaussianPolicy single_task;
  GaussianPolicy reconstructed;
  double single_task_reward = 0.0;
  double reconstructed_reward = 0.0;
  Curve training_curve;
  Curve reconstructed_eval;
  Curve single_task_eval;
};

struct PgEllaResult {
  MatXd basis;
  std::map<int, TaskCoefficients> coefficients;
  std::vector<TaskReport> tasks;  // in arrival order
  std::vector<ArrivalTrace> trace;
};

using PgConfigFor = std::function<PGConfig(const Task&)>;

/// Consumes `stream` in order. Each task is solved, coded and the basis
/// refit before the next task is looked at; reconstructed and single-task
/// policies are then evaluated on kEvalEpisodes paired episodes.
PgEllaResult pgella_train(std::span<const Task> stream, const EllaConfig& cfg,
                          const PgConfigFor& pg_cfg, std::uint64_t seed,
                          int eval_episodes = kEvalEpisodes);

/// CSV blocks `L,row,col,value` and `s,task_id,index,value`.
void write_model(std::ostream& out, const MatXd& L, const std::map<int, TaskCoefficients>& coeffs);

}  // namespace slrl
