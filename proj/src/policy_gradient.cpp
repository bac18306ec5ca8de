#include "slrl/policy_gradient.hpp"

#include <cmath>
#include <istream>
#include <ostream>

#include "slrl/csv.hpp"
#include "slrl/demonstrator.hpp"
#include "slrl/qlearning.hpp"

namespace slrl {

namespace {

constexpr std::uint64_t kPgActionStream = 0x7067616374ULL;
constexpr std::uint64_t kEvalStream = 0x6576616cULL;

}  // namespace

void PGConfig::validate() const {
  if (!(alpha_lin > 0.0) || !(alpha_ang > 0.0)) throw ConfigError("learning rates must be positive");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma must be in [0, 1]");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (episodes < 0) throw ConfigError("episodes must be >= 0");
  if (!(sigma_min > 0.0)) throw ConfigError("sigma_min must be positive");
  if (!(sigma0 >= sigma_min)) throw ConfigError("sigma0 must be >= sigma_min");
}

std::array<double, 2> default_learning_rates(int task_id) {
  switch (task_id) {
    case 1: return {1e-6, 1e-7};
    case 2: return {1e-6, 1e-6};
    case 3: return {1e-7, 1e-5};
    case 4: return {1e-7, 1e-6};
    case 5: return {1e-7, 1e-5};
    default: throw ConfigError("task id must be in 1..5, got " + std::to_string(task_id));
  }
}

PGConfig PGConfig::for_task(int task_id) {
  PGConfig cfg;
  const auto rates = default_learning_rates(task_id);
  cfg.alpha_lin = rates[0];
  cfg.alpha_ang = rates[1];
  return cfg;
}

SampledAction sample_action(const GaussianPolicy& policy, const ContinuousObs& obs, Rng& rng) {
  const ActionContinuous mean = policy.mean_action(obs);
  SampledAction out;
  out.raw.v_lin = rng.normal(mean.v_lin, policy.sigma_lin);
  out.raw.v_ang = rng.normal(mean.v_ang, policy.sigma_ang);
  out.executed = out.raw.clamped();
  return out;
}

double avg_return(const Trajectory& traj) {
  if (traj.steps.empty()) throw ContractViolation("average return of an empty trajectory");
  double sum = 0.0;
  for (const auto& s : traj.steps) sum += s.reward;
  return sum / static_cast<double>(traj.steps.size());
}

Eigen::Matrix<double, PolicyGradient::kSize, 1> PolicyGradient::flat() const {
  Eigen::Matrix<double, kSize, 1> v;
  v << theta_lin, theta_ang, sigma_lin, sigma_ang;
  return v;
}

PolicyGradient PolicyGradient::from_flat(const Eigen::Matrix<double, kSize, 1>& v) {
  PolicyGradient g;
  g.theta_lin = v.segment<kFeatureDim>(0);
  g.theta_ang = v.segment<kFeatureDim>(kFeatureDim);
  g.sigma_lin = v(2 * kFeatureDim);
  g.sigma_ang = v(2 * kFeatureDim + 1);
  return g;
}

ScoreVec trajectory_score(const Trajectory& traj, const GaussianPolicy& policy) {
  ScoreVec psi = ScoreVec::Zero();
  const double vl = policy.sigma_lin * policy.sigma_lin;
  const double va = policy.sigma_ang * policy.sigma_ang;
  for (const auto& s : traj.steps) {
    const FeatureVec phi = features(s.obs);
    const double el = s.raw.v_lin - policy.theta_lin.dot(phi);
    const double ea = s.raw.v_ang - policy.theta_ang.dot(phi);
    psi.segment<kFeatureDim>(0) += (el / vl) * phi;
    psi.segment<kFeatureDim>(kFeatureDim) += (ea / va) * phi;
    psi(2 * kFeatureDim) += (el * el - vl) / (vl * policy.sigma_lin);
    psi(2 * kFeatureDim + 1) += (ea * ea - va) / (va * policy.sigma_ang);
  }
  return psi;
}

double trajectory_log_prob(const Trajectory& traj, const GaussianPolicy& policy) {
  const double log_norm = 0.5 * std::log(2.0 * kPi);
  double lp = 0.0;
  for (const auto& s : traj.steps) {
    const FeatureVec phi = features(s.obs);
    const double zl = (s.raw.v_lin - policy.theta_lin.dot(phi)) / policy.sigma_lin;
    const double za = (s.raw.v_ang - policy.theta_ang.dot(phi)) / policy.sigma_ang;
    lp -= 2.0 * log_norm + std::log(policy.sigma_lin) + std::log(policy.sigma_ang) +
          0.5 * (zl * zl + za * za);
  }
  return lp;
}

namespace {

struct BatchScores {
  Eigen::Matrix<double, Eigen::Dynamic, PolicyGradient::kSize> psi;
  VecXd returns;
};

BatchScores batch_scores(std::span<const Trajectory> batch, const GaussianPolicy& policy) {
  if (batch.empty()) throw ContractViolation("policy gradient of an empty batch");
  BatchScores out;
  const auto n = static_cast<Eigen::Index>(batch.size());
  out.psi.resize(n, PolicyGradient::kSize);
  out.returns.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& traj = batch[static_cast<std::size_t>(i)];
    out.psi.row(i) = trajectory_score(traj, policy).transpose();
    out.returns(i) = avg_return(traj);
  }
  return out;
}

ScoreVec baseline_of(const BatchScores& s) {
  const auto sq = s.psi.array().square();
  const ScoreVec den = sq.colwise().sum().transpose();
  const ScoreVec num = (sq.colwise() * s.returns.array()).colwise().sum().transpose();
  ScoreVec b;
  for (int j = 0; j < PolicyGradient::kSize; ++j) b(j) = den(j) > 0.0 ? num(j) / den(j) : 0.0;
  return b;
}

}  // namespace

ScoreVec optimal_baseline(std::span<const Trajectory> batch, const GaussianPolicy& policy) {
  return baseline_of(batch_scores(batch, policy));
}

PolicyGradient reinforce_gradient(std::span<const Trajectory> batch, const GaussianPolicy& policy) {
  const BatchScores s = batch_scores(batch, policy);
  const ScoreVec b = baseline_of(s);
  ScoreVec g = ScoreVec::Zero();
  for (Eigen::Index i = 0; i < s.psi.rows(); ++i) {
    g.array() += s.psi.row(i).transpose().array() * (s.returns(i) - b.array());
  }
  g /= static_cast<double>(s.psi.rows());
  return PolicyGradient::from_flat(g);
}

GaussianPolicy pg_update(const GaussianPolicy& policy, const PolicyGradient& g, const PGConfig& cfg) {
  if (!g.all_finite()) throw NonFiniteGradient("refusing policy update with a non-finite gradient");
  GaussianPolicy next = policy;
  next.theta_lin += cfg.alpha_lin * g.theta_lin;
  next.theta_ang += cfg.alpha_ang * g.theta_ang;
  next.sigma_lin = std::max(policy.sigma_lin + cfg.alpha_lin * policy.sigma_lin * g.sigma_lin, cfg.sigma_min);
  next.sigma_ang = std::max(policy.sigma_ang + cfg.alpha_ang * policy.sigma_ang * g.sigma_ang, cfg.sigma_min);
  return next;
}

PgEpisode run_pg_episode(WorldState world, const GaussianPolicy& policy, Rng& rng,
                         std::vector<StepLog>* log) {
  PgEpisode ep;
  ContinuousObs obs = observe_continuous(world.pose, world.task.goal);
  while (!world.finished) {
    const SampledAction a = sample_action(policy, obs, rng);
    const StepResult res = step(world, a.executed);
    ep.trajectory.steps.push_back({obs, a.raw, res.reward});
    ep.cum_reward += res.reward;
    if (log) log->push_back({world.step_count, world.pose, res.obs, a.executed, res.reward});
    if (res.reward == 100.0) ep.success = true;
    obs = res.obs;
  }
  ep.steps = ep.success ? world.step_count : world.task.max_steps;
  return ep;
}

PgTrainResult train_pg(const Task& task, const PGConfig& cfg, const GaussianPolicy* warm_start,
                       std::uint64_t seed, const PgTrainOptions& options) {
  cfg.validate();
  PgTrainResult out;
  out.policy.sigma_lin = cfg.sigma0;
  out.policy.sigma_ang = cfg.sigma0;
  GaussianPolicy behaviour;
  if (warm_start) {
    out.policy.theta_lin = warm_start->theta_lin;
    out.policy.theta_ang = warm_start->theta_ang;
    behaviour = out.policy;
    out.demo_episodes = cfg.episodes;
  }
  const int phases = warm_start ? 2 : 1;
  Rng rng(derive_seed(seed, kPgActionStream));
  std::vector<Trajectory> batch;
  int episode = 0;
  for (int phase = 0; phase < phases; ++phase) {
    const bool demo_phase = warm_start && phase == 0;
    const bool last_phase = phase == phases - 1;
    for (int e = 0; e < cfg.episodes; ++e) {
      ++episode;
      const GaussianPolicy& actor = demo_phase ? behaviour : out.policy;
      PgEpisode ep = run_pg_episode(reset(task, episode_seed(seed, episode)), actor, rng);
      out.curve.push_back({episode, task.task_id, seed, ep.cum_reward, ep.steps});
      if (last_phase && options.keep_trajectories > 0) {
        out.trajectories.push_back(ep.trajectory);
        if (static_cast<int>(out.trajectories.size()) > options.keep_trajectories) {
          out.trajectories.erase(out.trajectories.begin());
        }
      }
      batch.push_back(std::move(ep.trajectory));
      if (static_cast<int>(batch.size()) == cfg.batch_size || e + 1 == cfg.episodes) {
        out.policy = pg_update(out.policy, reinforce_gradient(batch, out.policy), cfg);
        batch.clear();
      }
    }
  }
  return out;
}

Curve evaluate_policy(const Task& task, const GaussianPolicy& policy, int episodes,
                      std::uint64_t seed) {
  Curve out;
  const std::uint64_t eval_seed = derive_seed(seed, kEvalStream);
  Rng rng(derive_seed(eval_seed, kPgActionStream));
  for (int e = 1; e <= episodes; ++e) {
    const PgEpisode ep = run_pg_episode(reset(task, episode_seed(eval_seed, e)), policy, rng);
    out.push_back({e, task.task_id, seed, ep.cum_reward, ep.steps});
  }
  return out;
}

std::vector<double> learning_rate_grid() {
  std::vector<double> grid;
  for (int j = 3; j <= 8; ++j) grid.push_back(std::pow(10.0, -j));
  return grid;
}

GridSearchResult grid_search(const Task& task, std::uint64_t seed,
                             const GridSearchOptions& options, const PGConfig& base) {
  GridSearchResult out;
  const auto grid = learning_rate_grid();
  const GaussianPolicy theta_u = warm_start_params(task, base.sigma0);
  bool have_best = false;
  double best = 0.0;
  for (double a_lin : grid) {
    for (double a_ang : grid) {
      PGConfig cfg = base;
      cfg.alpha_lin = a_lin;
      cfg.alpha_ang = a_ang;
      cfg.episodes = options.budget_episodes;
      const auto run = train_pg(task, cfg, options.warm_start ? &theta_u : nullptr, seed);
      const Curve eval = evaluate_policy(task, run.policy, options.eval_episodes, seed);
      const double score = mean(rewards_of(eval));
      out.candidates.push_back({a_lin, a_ang, score});
      const bool larger_pair = !have_best || std::make_pair(a_lin, a_ang) >
                                                 std::make_pair(out.alpha_lin, out.alpha_ang);
      if (!have_best || score > best || (score == best && larger_pair)) {
        have_best = true;
        best = score;
        out.alpha_lin = a_lin;
        out.alpha_ang = a_ang;
      }
    }
  }
  return out;
}

void write_policy(std::ostream& out, const GaussianPolicy& policy) {
  out << "param,index,value\n";
  for (int i = 0; i < kFeatureDim; ++i) out << "theta_lin," << i << ',' << csv::format(policy.theta_lin(i)) << '\n';
  for (int i = 0; i < kFeatureDim; ++i) out << "theta_ang," << i << ',' << csv::format(policy.theta_ang(i)) << '\n';
  out << "sigma_lin,0," << csv::format(policy.sigma_lin) << '\n';
  out << "sigma_ang,0," << csv::format(policy.sigma_ang) << '\n';
}

GaussianPolicy read_policy(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(source + ": empty policy file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "param,index,value") throw std::runtime_error(source + ": unexpected header");
  GaussianPolicy p;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != 3) throw std::runtime_error(source + ": expected 3 fields in '" + line + "'");
    const auto idx = csv::parse_int(f[1], "index");
    const double v = csv::parse_double(f[2], "value");
    const bool in_range = idx >= 0 && idx < kFeatureDim;
    if (f[0] == "theta_lin" && in_range) {
      p.theta_lin(idx) = v;
    } else if (f[0] == "theta_ang" && in_range) {
      p.theta_ang(idx) = v;
    } else if (f[0] == "sigma_lin" && idx == 0) {
      p.sigma_lin = v;
    } else if (f[0] == "sigma_ang" && idx == 0) {
      p.sigma_ang = v;
    } else {
      throw std::runtime_error(source + ": unknown parameter '" + f[0] + "," + f[1] + "'");
    }
  }
  return p;
}

}  // namespace slrl
