#include "slrl/pgella.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "slrl/csv.hpp"
#include "slrl/demonstrator.hpp"

namespace slrl {

namespace {
constexpr std::uint64_t kBasisInitStream = 0x6261736973ULL;
constexpr std::uint64_t kTaskStream = 0x7461736bULL;
}  // namespace

void EllaConfig::validate() const {
  if (k < 1 || k > kStackedDim) throw ConfigError("k must be in 1..6");
  if (!(mu >= 0.0)) throw ConfigError("mu must be >= 0");
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
  if (trajectories_per_task < 1) throw ConfigError("trajectories_per_task must be >= 1");
  if (!(hessian_ridge > 0.0)) throw ConfigError("hessian_ridge must be > 0");
  if (!(eval_sigma > 0.0)) throw ConfigError("eval_sigma must be > 0");
}

MatXd gauss_newton_hessian(std::span<const Trajectory> trajectories, const GaussianPolicy& policy,
                           double ridge) {
  MatXd G = MatXd::Zero(kStackedDim, kStackedDim);
  for (const auto& traj : trajectories) {
    const VecXd psi = trajectory_score(traj, policy).head<kStackedDim>();
    G.noalias() += psi * psi.transpose();
  }
  if (!trajectories.empty()) G /= static_cast<double>(trajectories.size());
  G = 0.5 * (G + G.transpose());
  G.diagonal().array() += ridge;
  return G;
}

TaskSolution task_solver(const Task& task, const PGConfig& pg_cfg, const EllaConfig& cfg,
                         std::uint64_t seed) {
  PGConfig run_cfg = pg_cfg;
  run_cfg.episodes = cfg.trajectories_per_task;
  const GaussianPolicy theta_u = warm_start_params(task, run_cfg.sigma0);
  PgTrainOptions options;
  options.keep_trajectories = cfg.trajectories_per_task;
  PgTrainResult run = train_pg(task, run_cfg, cfg.warm_start ? &theta_u : nullptr, seed, options);

  TaskSolution out;
  out.policy = run.policy;
  out.curve = std::move(run.curve);
  out.stats.task_id = task.task_id;
  out.stats.alpha_star = run.policy.stacked();
  if (!out.stats.alpha_star.allFinite()) {
    throw NonFiniteGradient("policy gradient diverged on task " + std::to_string(task.task_id));
  }
  out.stats.hessian = gauss_newton_hessian(run.trajectories, run.policy, cfg.hessian_ridge);
  out.stats.trajectory_count = static_cast<int>(run.trajectories.size());
  return out;
}

GaussianPolicy reconstruct_policy(const MatXd& L, const TaskCoefficients& s, double sigma) {
  if (L.cols() != s.s.size() || L.rows() != kStackedDim) {
    throw ContractViolation("reconstruct_policy: shape mismatch");
  }
  return GaussianPolicy::from_stacked(L * s.s, sigma, sigma);
}

PgEllaLearner::PgEllaLearner(const EllaConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  cfg_.validate();
  Rng rng(derive_seed(seed, kBasisInitStream));
  L_.resize(kStackedDim, cfg_.k);
  // Column-major fill keeps the draw order independent of Eigen internals.
  for (Eigen::Index c = 0; c < L_.cols(); ++c) {
    for (Eigen::Index r = 0; r < L_.rows(); ++r) L_(r, c) = rng.uniform(-0.1, 0.1);
  }
}

std::size_t PgEllaLearner::index_of(int task_id) const {
  for (std::size_t i = 0; i < stats_.size(); ++i) {
    if (stats_[i].task_id == task_id) return i;
  }
  return stats_.size();
}

const TaskCoefficients& PgEllaLearner::coefficients(int task_id) const {
  const std::size_t i = index_of(task_id);
  if (i == stats_.size()) throw std::out_of_range("unknown task id " + std::to_string(task_id));
  return coeffs_[i];
}

GaussianPolicy PgEllaLearner::policy(int task_id, double sigma) const {
  return reconstruct_policy(L_, coefficients(task_id), sigma);
}

double PgEllaLearner::objective() const {
  return slrl::objective<double>(L_, coeffs_, stats_, cfg_.mu, cfg_.lambda);
}

void PgEllaLearner::refit_basis() {
  L_ = update_basis<double>(coeffs_, stats_, cfg_.lambda, kStackedDim, cfg_.k);
}

ArrivalTrace PgEllaLearner::observe(const TaskStats& stats) {
  if (stats.alpha_star.size() != kStackedDim || stats.hessian.rows() != kStackedDim ||
      stats.hessian.cols() != kStackedDim) {
    throw ContractViolation("task statistics have the wrong shape");
  }
  const std::size_t i = index_of(stats.task_id);
  if (i == stats_.size()) {
    stats_.push_back(stats);
    coeffs_.push_back({stats.task_id, VecXd::Zero(cfg_.k)});
  } else {
    stats_[i] = stats;
    coeffs_[i].s.setZero();
  }
  const std::size_t idx = std::min(i, stats_.size() - 1);
  ArrivalTrace trace;
  trace.task_id = stats.task_id;
  trace.before = objective();
  coeffs_[idx].s = solve_coefficients<double>(L_, stats_[idx], cfg_.mu);
  trace.after_s = objective();
  refit_basis();
  trace.after_l = objective();
  return trace;
}

std::vector<double> PgEllaLearner::refresh(int max_passes, double tol) {
  std::vector<double> values;
  if (stats_.empty()) return values;
  double prev = objective();
  for (int pass = 0; pass < max_passes; ++pass) {
    for (std::size_t t = 0; t < stats_.size(); ++t) {
      coeffs_[t].s = solve_coefficients<double>(L_, stats_[t], cfg_.mu, &coeffs_[t].s);
    }
    values.push_back(objective());
    refit_basis();
    const double now = objective();
    values.push_back(now);
    if (prev - now <= tol * std::max(1.0, std::abs(prev))) break;
    prev = now;
  }
  return values;
}

PgEllaResult pgella_train(std::span<const Task> stream, const EllaConfig& cfg,
                          const PgConfigFor& pg_cfg, std::uint64_t seed, int eval_episodes) {
  cfg.validate();
  PgEllaLearner learner(cfg, seed);
  PgEllaResult out;
  std::vector<TaskSolution> solutions;
  for (std::size_t n = 0; n < stream.size(); ++n) {
    const Task& task = stream[n];
    const std::uint64_t task_seed = derive_seed(seed, kTaskStream, static_cast<std::uint64_t>(task.task_id));
    TaskSolution sol = task_solver(task, pg_cfg(task), cfg, task_seed);
    out.trace.push_back(learner.observe(sol.stats));
    solutions.push_back(std::move(sol));
  }
  out.basis = learner.basis();
  for (const auto& c : learner.coefficients()) out.coefficients[c.task_id] = c;

  for (std::size_t n = 0; n < stream.size(); ++n) {
    const Task& task = stream[n];
    const std::uint64_t task_seed = derive_seed(seed, kTaskStream, static_cast<std::uint64_t>(task.task_id));
    TaskReport report;
    report.task_id = task.task_id;
    report.arrival = static_cast<int>(n);
    report.single_task = solutions[n].policy;
    report.single_task.sigma_lin = cfg.eval_sigma;
    report.single_task.sigma_ang = cfg.eval_sigma;
    report.reconstructed = learner.policy(task.task_id, cfg.eval_sigma);
    report.training_curve = solutions[n].curve;
    // Both arms see the same evaluation starts and noise stream.
    report.single_task_eval = evaluate_policy(task, report.single_task, eval_episodes, task_seed);
    report.reconstructed_eval = evaluate_policy(task, report.reconstructed, eval_episodes, task_seed);
    report.single_task_reward = mean(rewards_of(report.single_task_eval));
    report.reconstructed_reward = mean(rewards_of(report.reconstructed_eval));
    out.tasks.push_back(std::move(report));
  }
  return out;
}

void write_model(std::ostream& out, const MatXd& L, const std::map<int, TaskCoefficients>& coeffs) {
  out << "L,row,col,value\n";
  for (Eigen::Index r = 0; r < L.rows(); ++r) {
    for (Eigen::Index c = 0; c < L.cols(); ++c) {
      out << "L," << r << ',' << c << ',' << csv::format(L(r, c)) << '\n';
    }
  }
  out << "s,task_id,index,value\n";
  for (const auto& [id, coef] : coeffs) {
    for (Eigen::Index i = 0; i < coef.s.size(); ++i) {
      out << "s," << id << ',' << i << ',' << csv::format(coef.s(i)) << '\n';
    }
  }
}

}  // namespace slrl
