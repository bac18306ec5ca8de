#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "slrl/config.hpp"
#include "slrl/csv.hpp"
#include "slrl/demonstrator.hpp"
#include "slrl/experiments.hpp"
#include "slrl/plot.hpp"

using namespace slrl;

namespace {

constexpr int kExitBadArgs = 2;
constexpr int kExitRuntime = 3;
constexpr std::uint64_t kCliDemoStream = 0x75736572ULL;
constexpr std::uint64_t kRolloutStream = 0x726f6c6cULL;

struct CommonArgs {
  int task = 2;
  std::uint64_t seed = 1;
  std::optional<int> episodes;
  std::string config_path;
  std::string out = "out";
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--task", args.task, "task id (1..5)")->check(CLI::Range(1, 5));
  cmd->add_option("--seed", args.seed, "run seed");
  cmd->add_option("--episodes", args.episodes, "episode budget")->check(CLI::PositiveNumber);
  cmd->add_option("--config", args.config_path, "key = value config file");
  cmd->add_option("--out", args.out, "output directory");
}

RunConfig resolve_config(const CommonArgs& args) {
  RunConfig cfg = args.config_path.empty() ? RunConfig{} : load_config(args.config_path);
  if (args.episodes) cfg.set("episodes", std::to_string(*args.episodes));
  cfg.validate();
  return cfg;
}

PGConfig pg_config_for(const RunConfig& cfg, int task_id) {
  PGConfig pg = cfg.pg;
  if (!cfg.pg_rates_set) {
    const auto rates = default_learning_rates(task_id);
    pg.alpha_lin = rates[0];
    pg.alpha_ang = rates[1];
  }
  return pg;
}

std::string out_file(const std::string& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  return (std::filesystem::path(dir) / name).string();
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  std::cout << path << "\n";
  return out;
}

// One greedy episode under a learned Q-table, for the trajectory log.
std::vector<StepLog> greedy_rollout(const Task& task, const QTable& table, int state_dim,
                                    std::uint64_t seed) {
  WorldState world = reset(task, derive_seed(seed, kRolloutStream));
  std::vector<StepLog> log;
  StateKey s = state_key(discretize(world.pose, task.goal, state_dim));
  while (!world.finished) {
    const ActionDiscrete a = greedy(table, s);
    const auto res = step_discrete(world, a, state_dim);
    log.push_back({world.step_count, world.pose, observe_continuous(world.pose, task.goal),
                   to_command(a), res.reward});
    s = res.key();
  }
  return log;
}

int cmd_q_train(const CommonArgs& args, const std::string& demos_path) {
  const RunConfig cfg = resolve_config(args);
  const Task task = task_by_id(args.task);
  std::optional<UserPolicy> user;
  if (cfg.q.q0 > 0.0) {
    UserTrajectoryStore store;
    if (!demos_path.empty()) {
      std::ifstream in(demos_path);
      if (!in) throw std::runtime_error("cannot read demonstrations " + demos_path);
      store = read_demonstrations(in, demos_path);
    } else {
      store = collect_demonstrations(task, cfg.demo.demo_count, cfg.demo.noise_prob,
                                     derive_seed(args.seed, kCliDemoStream), cfg.q.state_dim);
      auto out = open_out(out_file(args.out, "demonstrations.csv"));
      write_demonstrations(out, store);
    }
    user = estimate_user_policy(store);
  }
  const auto res = train_q(task, cfg.q, user ? &*user : nullptr, args.seed);
  {
    auto out = open_out(out_file(args.out, "curve.csv"));
    write_curve(out, res.curve);
  }
  {
    auto out = open_out(out_file(args.out, "qtable.csv"));
    res.table.write(out);
  }
  const auto log = greedy_rollout(task, res.table, cfg.q.state_dim, args.seed);
  auto out = open_out(out_file(args.out, "trajectory.csv"));
  write_trajectory_log(out, log);
  return 0;
}

int cmd_pg_train(const CommonArgs& args, bool warm) {
  const RunConfig cfg = resolve_config(args);
  const Task task = task_by_id(args.task);
  const PGConfig pg = pg_config_for(cfg, task.task_id);
  const GaussianPolicy theta_u = warm_start_params(task, pg.sigma0);
  const auto res = train_pg(task, pg, warm ? &theta_u : nullptr, args.seed);
  {
    auto out = open_out(out_file(args.out, "curve.csv"));
    write_curve(out, res.curve);
  }
  {
    auto out = open_out(out_file(args.out, "policy.csv"));
    write_policy(out, res.policy);
  }
  std::vector<StepLog> log;
  Rng rng(derive_seed(args.seed, kRolloutStream, 1));
  run_pg_episode(reset(task, derive_seed(args.seed, kRolloutStream)), res.policy, rng, &log);
  auto out = open_out(out_file(args.out, "trajectory.csv"));
  write_trajectory_log(out, log);
  return 0;
}

int cmd_pgella_train(const CommonArgs& args, std::vector<int> tasks, bool shuffle) {
  RunConfig cfg = resolve_config(args);
  if (args.episodes) cfg.ella.trajectories_per_task = *args.episodes;
  cfg.validate();
  if (tasks.empty()) tasks = {1, 2, 3, 4, 5};
  if (shuffle) tasks = shuffled_task_order(tasks, args.seed);
  std::vector<Task> stream;
  for (int id : tasks) stream.push_back(task_by_id(id));
  const auto res = pgella_train(stream, cfg.ella,
                                [&](const Task& t) { return pg_config_for(cfg, t.task_id); }, args.seed);
  {
    auto out = open_out(out_file(args.out, "model.csv"));
    write_model(out, res.basis, res.coefficients);
  }
  {
    auto out = open_out(out_file(args.out, "comparison.csv"));
    out << "task_id,arrival,single_task_reward,reconstructed_reward\n";
    for (const auto& t : res.tasks) {
      out << t.task_id << ',' << t.arrival << ',' << csv::format(t.single_task_reward) << ','
          << csv::format(t.reconstructed_reward) << '\n';
    }
  }
  Curve all;
  for (const auto& t : res.tasks) all.insert(all.end(), t.training_curve.begin(), t.training_curve.end());
  auto out = open_out(out_file(args.out, "curves.csv"));
  write_curve(out, all);
  return 0;
}

int cmd_gridsearch(const CommonArgs& args, bool cold) {
  const RunConfig cfg = resolve_config(args);
  GridSearchOptions options;
  if (args.episodes) options.budget_episodes = *args.episodes;
  options.warm_start = !cold;
  const auto res = grid_search(task_by_id(args.task), args.seed, options, cfg.pg);
  auto out = open_out(out_file(args.out, "gridsearch.csv"));
  out << "task_id,seed,alpha_lin,alpha_ang,avg_reward,chosen\n";
  for (const auto& c : res.candidates) {
    const bool chosen = c.alpha_lin == res.alpha_lin && c.alpha_ang == res.alpha_ang;
    out << args.task << ',' << args.seed << ',' << csv::format(c.alpha_lin) << ','
        << csv::format(c.alpha_ang) << ',' << csv::format(c.avg_reward) << ',' << (chosen ? 1 : 0)
        << '\n';
  }
  return 0;
}

int cmd_demo_gen(const CommonArgs& args, std::optional<int> count, int state_dim) {
  const RunConfig cfg = resolve_config(args);
  const auto store = collect_demonstrations(task_by_id(args.task), count.value_or(cfg.demo.demo_count),
                                            cfg.demo.noise_prob, derive_seed(args.seed, kCliDemoStream),
                                            state_dim);
  auto out = open_out(out_file(args.out, "demonstrations.csv"));
  write_demonstrations(out, store);
  return 0;
}

int cmd_experiment(const CommonArgs& args, const std::string& name, bool task_given,
                   const std::vector<std::uint64_t>& seeds) {
  ExperimentSpec spec;
  spec.name = parse_experiment_name(name);
  spec.config = args.config_path.empty() ? RunConfig{} : load_config(args.config_path);
  if (task_given) spec.task_ids = {args.task};
  if (!seeds.empty()) spec.seeds = seeds;
  if (args.episodes) spec.episode_budget = *args.episodes;
  spec.output_path = args.out;
  for (const auto& f : run_experiment(spec)) std::cout << f << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"slrl: learning-from-demonstration and lifelong policy-gradient experiments"};
  app.require_subcommand(1);

  CommonArgs common;
  std::string demos_path;
  bool warm = false;
  std::vector<int> tasks;
  bool shuffle = false;
  bool cold = false;
  std::optional<int> demo_count;
  int demo_dim = 2;
  std::string experiment_name;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> plot_inputs;
  std::string plot_out;
  int window = kDefaultSmoothingWindow;

  auto* q = app.add_subcommand("q-train", "tabular Q-learning on one task");
  add_common(q, common);
  q->add_option("--demos", demos_path, "demonstrations CSV for the user policy (q0 > 0)");

  auto* pg = app.add_subcommand("pg-train", "REINFORCE on one task");
  add_common(pg, common);
  pg->add_flag("--warm-start", warm, "demonstrator phase before the learned phase");

  auto* ella = app.add_subcommand("pgella-train", "PG-ELLA over a task stream");
  add_common(ella, common);
  ella->add_option("--tasks", tasks, "task ids in arrival order (default 1..5)")
      ->check(CLI::Range(1, 5))
      ->delimiter(',');
  ella->add_flag("--shuffle", shuffle, "seeded shuffle of the task order");

  auto* grid = app.add_subcommand("gridsearch", "learning-rate grid search");
  add_common(grid, common);
  grid->add_flag("--cold", cold, "no demonstrator warm start");

  auto* demo = app.add_subcommand("demo-gen", "scripted demonstrations");
  add_common(demo, common);
  demo->add_option("--count", demo_count, "number of trajectories")->check(CLI::PositiveNumber);
  demo->add_option("--state-dim", demo_dim, "2 or 3")->check(CLI::IsMember({2, 3}));

  auto* exp = app.add_subcommand("experiment", "run a named experiment");
  add_common(exp, common);
  exp->add_option("name", experiment_name,
                  "user-policy-compare | state-size-compare | pg-vs-user | pgella-suite | gridsearch")
      ->required();
  exp->add_option("--seeds", seeds, "seeds (default 1..5)")->delimiter(',');

  auto* plot = app.add_subcommand("plot", "render curve CSVs to SVG");
  plot->add_option("csv", plot_inputs, "curve files")->required();
  plot->add_option("-o,--out", plot_out, "output SVG")->required();
  plot->add_option("--window", window, "moving-average window")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitBadArgs;
  }

  try {
    if (*q) return cmd_q_train(common, demos_path);
    if (*pg) return cmd_pg_train(common, warm);
    if (*ella) return cmd_pgella_train(common, tasks, shuffle);
    if (*grid) return cmd_gridsearch(common, cold);
    if (*demo) return cmd_demo_gen(common, demo_count, demo_dim);
    if (*exp) return cmd_experiment(common, experiment_name, exp->count("--task") > 0, seeds);
    if (*plot) {
      plot_emit(plot_inputs, plot_out, window);
      std::cout << plot_out << "\n";
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "slrl: " << e.what() << "\n";
    return kExitBadArgs;
  } catch (const std::exception& e) {
    std::cerr << "slrl: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitBadArgs;
}
