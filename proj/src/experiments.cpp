#include "slrl/experiments.hpp"

#include <filesystem>
#include <fstream>

#include "slrl/csv.hpp"
#include "slrl/demonstrator.hpp"
#include "slrl/qlearning.hpp"

namespace slrl {

namespace {

constexpr std::uint64_t kDemoSeedStream = 0x75736572ULL;
constexpr std::uint64_t kOrderStream = 0x6f72646572ULL;
constexpr int kQEpisodes = 4000;
constexpr int kPgPhaseEpisodes = 400;
constexpr int kDefaultTask = 2;

int single_task(const ExperimentSpec& spec) {
  return spec.task_ids.empty() ? kDefaultTask : spec.task_ids.front();
}

QConfig q_config(const ExperimentSpec& spec) {
  QConfig cfg = spec.config.q;
  cfg.episodes = spec.episode_budget > 0 ? spec.episode_budget : kQEpisodes;
  return cfg;
}

PGConfig pg_config(const ExperimentSpec& spec, int task_id) {
  PGConfig cfg = spec.config.pg;
  if (!spec.config.pg_rates_set) {
    const auto rates = default_learning_rates(task_id);
    cfg.alpha_lin = rates[0];
    cfg.alpha_ang = rates[1];
  }
  return cfg;
}

std::vector<int> suite_ids(const ExperimentSpec& spec) {
  if (!spec.task_ids.empty()) return spec.task_ids;
  return {1, 2, 3, 4, 5};
}

}  // namespace

std::string to_string(ExperimentName name) {
  switch (name) {
    case ExperimentName::UserPolicyCompare: return "user-policy-compare";
    case ExperimentName::StateSizeCompare: return "state-size-compare";
    case ExperimentName::PgVsUser: return "pg-vs-user";
    case ExperimentName::PgellaSuite: return "pgella-suite";
    case ExperimentName::Gridsearch: return "gridsearch";
  }
  return "?";
}

ExperimentName parse_experiment_name(const std::string& name) {
  for (auto n : {ExperimentName::UserPolicyCompare, ExperimentName::StateSizeCompare,
                 ExperimentName::PgVsUser, ExperimentName::PgellaSuite, ExperimentName::Gridsearch}) {
    if (to_string(n) == name) return n;
  }
  throw ConfigError("unknown experiment '" + name +
                    "' (expected user-policy-compare, state-size-compare, pg-vs-user, "
                    "pgella-suite or gridsearch)");
}

void ExperimentSpec::validate() const {
  if (seeds.empty()) throw ConfigError("an experiment needs at least one seed");
  if (episode_budget < 0) throw ConfigError("episode budget must be >= 0");
  for (int id : task_ids) task_by_id(id);
  config.validate();
}

Curve Condition::pooled() const {
  Curve out;
  for (const auto& [seed, curve] : runs) out.insert(out.end(), curve.begin(), curve.end());
  return out;
}

ComparisonResult run_user_policy_compare(const ExperimentSpec& spec) {
  spec.validate();
  const Task task = task_by_id(single_task(spec));
  QConfig with_user = q_config(spec);
  with_user.p0 = 0.2;
  with_user.q0 = 0.65;
  with_user.state_dim = 2;
  QConfig without_user = with_user;
  without_user.q0 = 0.0;

  ComparisonResult out;
  out.first.label = "I (p=0.2, q=0.65)";
  out.second.label = "II (p=0.2, q=0)";
  for (std::uint64_t seed : spec.seeds) {
    const auto store = collect_demonstrations(task, spec.config.demo.demo_count,
                                              spec.config.demo.noise_prob,
                                              derive_seed(seed, kDemoSeedStream), 2);
    const UserPolicy user = estimate_user_policy(store);
    out.first.runs[seed] = train_q(task, with_user, &user, seed).curve;
    out.second.runs[seed] = train_q(task, without_user, nullptr, seed).curve;
  }
  return out;
}

ComparisonResult run_state_size_compare(const ExperimentSpec& spec) {
  spec.validate();
  const Task task = task_by_id(single_task(spec));
  QConfig two = q_config(spec);
  two.p0 = 0.2;
  two.q0 = 0.0;
  two.state_dim = 2;
  QConfig three = two;
  three.state_dim = 3;

  ComparisonResult out;
  out.first.label = "2D state";
  out.second.label = "3D state";
  for (std::uint64_t seed : spec.seeds) {
    out.first.runs[seed] = train_q(task, two, nullptr, seed).curve;
    out.second.runs[seed] = train_q(task, three, nullptr, seed).curve;
  }
  return out;
}

PgVsUserResult run_pg_vs_user(const ExperimentSpec& spec) {
  spec.validate();
  const Task task = task_by_id(single_task(spec));
  PGConfig cfg = pg_config(spec, task.task_id);
  cfg.episodes = spec.episode_budget > 0 ? spec.episode_budget : kPgPhaseEpisodes;
  const GaussianPolicy theta_u = warm_start_params(task, cfg.sigma0);

  PgVsUserResult out;
  out.curves.label = "pg-vs-user";
  std::vector<double> demo_r, demo_s, learned_r, learned_s;
  for (std::uint64_t seed : spec.seeds) {
    auto run = train_pg(task, cfg, &theta_u, seed);
    const auto rewards = rewards_of(run.curve);
    const auto steps = steps_of(run.curve);
    const auto split = static_cast<std::ptrdiff_t>(run.demo_episodes);
    demo_r.insert(demo_r.end(), rewards.begin(), rewards.begin() + split);
    demo_s.insert(demo_s.end(), steps.begin(), steps.begin() + split);
    learned_r.insert(learned_r.end(), rewards.begin() + split, rewards.end());
    learned_s.insert(learned_s.end(), steps.begin() + split, steps.end());
    const std::span<const double> r(rewards), s(steps);
    out.per_seed[seed] = {
        {mean(r.first(run.demo_episodes)), mean(s.first(run.demo_episodes))},
        {mean(r.subspan(run.demo_episodes)), mean(s.subspan(run.demo_episodes))}};
    out.curves.runs[seed] = std::move(run.curve);
  }
  out.demonstrator = {mean(demo_r), mean(demo_s)};
  out.learned = {mean(learned_r), mean(learned_s)};
  return out;
}

std::vector<int> shuffled_task_order(std::vector<int> task_ids, std::uint64_t seed) {
  Rng rng(derive_seed(seed, kOrderStream));
  for (std::size_t i = task_ids.size(); i > 1; --i) {
    std::swap(task_ids[i - 1], task_ids[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(i)))]);
  }
  return task_ids;
}

PgellaSuiteResult run_pgella_suite(const ExperimentSpec& spec) {
  spec.validate();
  PgellaSuiteResult out;
  const auto ids = suite_ids(spec);
  EllaConfig ella = spec.config.ella;
  if (spec.episode_budget > 0) ella.trajectories_per_task = spec.episode_budget;
  for (std::uint64_t seed : spec.seeds) {
    const auto order = shuffled_task_order(ids, seed);
    std::vector<Task> stream;
    for (int id : order) stream.push_back(task_by_id(id));
    auto run = pgella_train(stream, ella,
                            [&](const Task& t) { return pg_config(spec, t.task_id); }, seed);
    for (const auto& t : run.tasks) {
      out.rows.push_back({seed, t.task_id, t.arrival, t.single_task_reward, t.reconstructed_reward});
    }
    out.task_orders[seed] = order;
    out.runs[seed] = std::move(run);
  }
  return out;
}

std::vector<GridsearchRow> run_gridsearch(const ExperimentSpec& spec) {
  spec.validate();
  std::vector<GridsearchRow> out;
  GridSearchOptions options;
  if (spec.episode_budget > 0) options.budget_episodes = spec.episode_budget;
  const std::vector<int> ids = spec.task_ids.empty() ? std::vector<int>{kDefaultTask} : spec.task_ids;
  for (int id : ids) {
    for (std::uint64_t seed : spec.seeds) {
      out.push_back({id, seed, grid_search(task_by_id(id), seed, options, spec.config.pg)});
    }
  }
  return out;
}

namespace {

class OutputDir {
 public:
  explicit OutputDir(const std::string& path) : dir_(path) {
    if (!dir_.empty()) std::filesystem::create_directories(dir_);
  }

  std::ofstream open(const std::string& name) {
    const auto path = (dir_ / name).string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    written_.push_back(path);
    return out;
  }

  std::vector<std::string> written() const { return written_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> written_;
};

void write_condition(OutputDir& dir, const std::string& stem, const Condition& c) {
  {
    auto out = dir.open(stem + ".csv");
    write_curve(out, c.pooled());
  }
  // Pooled (seed-averaged) moving average.
  std::map<int, std::pair<double, int>> by_episode;
  for (const auto& [seed, curve] : c.runs) {
    for (const auto& r : curve) {
      auto& acc = by_episode[r.episode];
      acc.first += r.cum_reward;
      ++acc.second;
    }
  }
  std::vector<int> episodes;
  std::vector<double> avg;
  for (const auto& [ep, acc] : by_episode) {
    episodes.push_back(ep);
    avg.push_back(acc.first / acc.second);
  }
  const auto ma = moving_average(avg, kDefaultSmoothingWindow);
  auto out = dir.open(stem + "_ma.csv");
  out << "episode,moving_avg\n";
  for (std::size_t i = 0; i < ma.size(); ++i) out << episodes[i] << ',' << csv::format(ma[i]) << '\n';
}

}  // namespace

std::vector<std::string> run_experiment(const ExperimentSpec& spec) {
  OutputDir dir(spec.output_path);
  switch (spec.name) {
    case ExperimentName::UserPolicyCompare: {
      const auto res = run_user_policy_compare(spec);
      write_condition(dir, "user_policy_I", res.first);
      write_condition(dir, "user_policy_II", res.second);
      break;
    }
    case ExperimentName::StateSizeCompare: {
      const auto res = run_state_size_compare(spec);
      write_condition(dir, "state_2d", res.first);
      write_condition(dir, "state_3d", res.second);
      break;
    }
    case ExperimentName::PgVsUser: {
      const auto res = run_pg_vs_user(spec);
      {
        auto out = dir.open("pg_vs_user_curves.csv");
        write_curve(out, res.curves.pooled());
      }
      auto out = dir.open("pg_vs_user_summary.csv");
      out << "policy,avg_cum_reward,avg_steps\n"
          << "pi_u," << csv::format(res.demonstrator.avg_cum_reward) << ','
          << csv::format(res.demonstrator.avg_steps) << '\n'
          << "pi," << csv::format(res.learned.avg_cum_reward) << ','
          << csv::format(res.learned.avg_steps) << '\n';
      break;
    }
    case ExperimentName::PgellaSuite: {
      const auto res = run_pgella_suite(spec);
      {
        auto out = dir.open("pgella_comparison.csv");
        out << "seed,task_id,arrival,single_task_reward,reconstructed_reward\n";
        for (const auto& r : res.rows) {
          out << r.seed << ',' << r.task_id << ',' << r.arrival << ','
              << csv::format(r.single_task_reward) << ',' << csv::format(r.reconstructed_reward) << '\n';
        }
      }
      {
        Curve all;
        for (const auto& [seed, run] : res.runs) {
          for (const auto& t : run.tasks) all.insert(all.end(), t.training_curve.begin(), t.training_curve.end());
        }
        auto out = dir.open("pgella_curves.csv");
        write_curve(out, all);
      }
      for (const auto& [seed, run] : res.runs) {
        auto out = dir.open("pgella_model_seed" + std::to_string(seed) + ".csv");
        write_model(out, run.basis, run.coefficients);
      }
      break;
    }
    case ExperimentName::Gridsearch: {
      const auto rows = run_gridsearch(spec);
      auto out = dir.open("gridsearch.csv");
      out << "task_id,seed,alpha_lin,alpha_ang,avg_reward,chosen\n";
      for (const auto& row : rows) {
        for (const auto& c : row.result.candidates) {
          const bool chosen = c.alpha_lin == row.result.alpha_lin && c.alpha_ang == row.result.alpha_ang;
          out << row.task_id << ',' << row.seed << ',' << csv::format(c.alpha_lin) << ','
              << csv::format(c.alpha_ang) << ',' << csv::format(c.avg_reward) << ','
              << (chosen ? 1 : 0) << '\n';
        }
      }
      break;
    }
  }
  return dir.written();
}

}  // namespace slrl
