#pragma once

// Seeded experiment runners. The run_* functions only compute; run_experiment
// also writes the CSVs into the spec's output directory.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "slrl/config.hpp"
#include "slrl/curves.hpp"
#include "slrl/pgella.hpp"

namespace slrl {

enum class ExperimentName { UserPolicyCompare, StateSizeCompare, PgVsUser, PgellaSuite, Gridsearch };

std::string to_string(ExperimentName name);
/// Throws ConfigError for names outside the closed set.
ExperimentName parse_experiment_name(const std::string& name);

inline constexpr int kDefaultSmoothingWindow = 100;

struct ExperimentSpec {
  ExperimentName name = ExperimentName::UserPolicyCompare;
  std::vector<int> task_ids;  // empty: the experiment's default
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  int episode_budget = 0;     // 0: the experiment's default
  std::string output_path;    // directory; empty: write nothing
  RunConfig config;

  void validate() const;
};

/// Per-seed curves of one experimental condition.
struct Condition {
  std::string label;
  std::map<std::uint64_t, Curve> runs;

  Curve pooled() const;
};

struct ComparisonResult {
  Condition first;
  Condition second;
};

/// Q-learning on task 2, 2D state, alpha 0.1: I (p, q) = (0.2, 0.65) with the
/// demonstrator's user policy vs II (0.2, 0). 4000 episodes by default.
ComparisonResult run_user_policy_compare(const ExperimentSpec& spec);

/// Same Q configuration (experiment II) on the 2D vs 3D discretisation.
ComparisonResult run_state_size_compare(const ExperimentSpec& spec);

struct PhaseSummary {
  double avg_cum_reward = 0.0;
  double avg_steps = 0.0;
};

struct PgVsUserResult {
  PhaseSummary demonstrator;  // pi_u phase
  PhaseSummary learned;       // pi phase
  std::map<std::uint64_t, std::pair<PhaseSummary, PhaseSummary>> per_seed;
  Condition curves;
};

/// 400 demonstrator-driven episodes then 400 learned-policy episodes.
PgVsUserResult run_pg_vs_user(const ExperimentSpec& spec);

struct SuiteRow {
  std::uint64_t seed = 0;
  int task_id = 0;
  int arrival = 0;
  double single_task_reward = 0.0;
  double reconstructed_reward = 0.0;
};

struct PgellaSuiteResult {
  std::vector<SuiteRow> rows;
  std::map<std::uint64_t, std::vector<int>> task_orders;
  std::map<std::uint64_t, PgEllaResult> runs;
};

/// Seeded shuffle of the task ids, the stream order for one seed.
std::vector<int> shuffled_task_order(std::vector<int> task_ids, std::uint64_t seed);

PgellaSuiteResult run_pgella_suite(const ExperimentSpec& spec);

struct GridsearchRow {
  int task_id = 0;
  std::uint64_t seed = 0;
  GridSearchResult result;
};

std::vector<GridsearchRow> run_gridsearch(const ExperimentSpec& spec);

/// Dispatches on spec.name. Returns the files written.
std::vector<std::string> run_experiment(const ExperimentSpec& spec);

}  // namespace slrl
