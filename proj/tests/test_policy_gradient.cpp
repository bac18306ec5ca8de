#include <doctest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "slrl/demonstrator.hpp"
#include "slrl/policy_gradient.hpp"

using namespace slrl;
using doctest::Approx;

TEST_CASE("features") {
  CHECK(features(ContinuousObs{0, 0}) == FeatureVec(0, 0, 1));
  const FeatureVec f = features(ContinuousObs{10, 180});
  CHECK(f(0) == Approx(1));
  CHECK(f(1) == Approx(1));
  CHECK(f(2) == 1);
  const FeatureVec g = features(ContinuousObs{5, -90});
  CHECK(g(0) == Approx(0.5));
  CHECK(g(1) == Approx(-0.5));
  CHECK(g(2) == 1);
}

TEST_CASE("sample_action: mean, clamping and raw sample") {
  GaussianPolicy p;
  p.sigma_lin = p.sigma_ang = 1e-6;
  Rng rng(3);
  auto a = sample_action(p, {3, 20}, rng);
  CHECK(std::abs(a.executed.v_lin) < 1e-4);

  p.theta_lin = FeatureVec(0, 0, 2.0);
  a = sample_action(p, {3, 20}, rng);
  CHECK(a.executed.v_lin == 1.5);
  CHECK(a.raw.v_lin == Approx(2.0).epsilon(1e-4));

  GaussianPolicy q;
  q.theta_lin = FeatureVec(0.3, -0.2, 0.1);
  q.theta_ang = FeatureVec(-0.4, 0.5, 0.2);
  q.sigma_lin = 0.7;
  q.sigma_ang = 0.4;
  const ContinuousObs obs{4, -30};
  const auto mean_cmd = q.mean_action(obs);
  const int n = 100000;
  double sl = 0, sa = 0;
  for (int i = 0; i < n; ++i) {
    const auto s = sample_action(q, obs, rng);
    sl += s.raw.v_lin;
    sa += s.raw.v_ang;
  }
  CHECK(std::abs(sl / n - mean_cmd.v_lin) < 3 * q.sigma_lin / std::sqrt(n));
  CHECK(std::abs(sa / n - mean_cmd.v_ang) < 3 * q.sigma_ang / std::sqrt(n));
}

TEST_CASE("avg_return") {
  Trajectory t;
  for (double r : {-1.0, -1.0, 100.0}) t.steps.push_back({{}, {}, r});
  CHECK(avg_return(t) == Approx(98.0 / 3.0));
  Trajectory z;
  for (int i = 0; i < 4; ++i) z.steps.push_back({{}, {}, 0.0});
  CHECK(avg_return(z) == 0.0);
  Trajectory one;
  one.steps.push_back({{}, {}, 100.0});
  CHECK(avg_return(one) == 100.0);
  CHECK_THROWS_AS(avg_return(Trajectory{}), ContractViolation);
}

TEST_CASE("score-function identity: E[grad log pi] = 0") {
  GaussianPolicy p;
  p.theta_lin = FeatureVec(0.2, 0.1, -0.3);
  p.theta_ang = FeatureVec(0.5, -0.4, 0.0);
  p.sigma_lin = 0.5;
  p.sigma_ang = 0.8;
  const ContinuousObs obs{3, 45};
  Rng rng(9);
  const int n = 100000;
  ScoreVec sum = ScoreVec::Zero(), sq = ScoreVec::Zero();
  for (int i = 0; i < n; ++i) {
    Trajectory t;
    t.steps.push_back({obs, sample_action(p, obs, rng).raw, 0.0});
    const ScoreVec s = trajectory_score(t, p);
    sum += s;
    sq += s.cwiseProduct(s);
  }
  const ScoreVec m = sum / n;
  for (int j = 0; j < ScoreVec::SizeAtCompileTime; ++j) {
    const double var = sq(j) / n - m(j) * m(j);
    const double se = std::sqrt(std::max(var, 0.0) / n);
    if (var == 0.0) {
      CHECK(m(j) == 0.0);
    } else {
      CHECK(std::abs(m(j)) <= 3.0 * se);
    }
  }
}

TEST_CASE("trajectory_score matches finite differences of the log-density") {
  Rng rng(10);
  for (int i = 0; i < 5; ++i) {
    const auto inst = oracle::random_pg_instance(rng);
    const auto& traj = inst.batch.front();
    const Eigen::VectorXd got = trajectory_score(traj, inst.policy);
    const Eigen::VectorXd want = oracle::fd_score(traj, inst.policy);
    CHECK(oracle::relative_error(got, want) < 1e-6);
    CHECK(trajectory_log_prob(traj, inst.policy) == Approx(oracle::log_prob(traj, inst.policy)));
  }
}

TEST_CASE("reinforce_gradient: centred returns give zero gradient") {
  GaussianPolicy p;
  p.theta_lin = FeatureVec(0.3, 0.0, 0.2);
  Rng rng(4);
  std::vector<Trajectory> batch(4);
  for (auto& t : batch) {
    for (int s = 0; s < 3; ++s) {
      const ContinuousObs obs{rng.uniform(0, 5), rng.uniform(-180, 180)};
      t.steps.push_back({obs, sample_action(p, obs, rng).raw, -1.0});
    }
  }
  const PolicyGradient g = reinforce_gradient(batch, p);
  CHECK(g.flat().norm() < 1e-12);
}

TEST_CASE("reinforce_gradient: single step at the mean") {
  GaussianPolicy p;
  p.theta_lin = FeatureVec(0.3, 0.1, 0.2);
  p.theta_ang = FeatureVec(-0.1, 0.4, 0.0);
  p.sigma_lin = 0.5;
  p.sigma_ang = 0.25;
  const ContinuousObs obs{2, 30};
  Trajectory t;
  t.steps.push_back({obs, p.mean_action(obs), 7.0});
  const std::vector<Trajectory> batch{t};
  const ScoreVec b = optimal_baseline(batch, p);
  const PolicyGradient g = reinforce_gradient(batch, p);
  CHECK(g.theta_lin.norm() == 0.0);
  CHECK(g.theta_ang.norm() == 0.0);
  CHECK(g.sigma_lin == Approx(-(1.0 / p.sigma_lin) * (7.0 - b(6))));
  CHECK(g.sigma_ang == Approx(-(1.0 / p.sigma_ang) * (7.0 - b(7))));
  // with one trajectory the optimal baseline is its own return
  CHECK(b(6) == Approx(7.0));
  CHECK_THROWS_AS(reinforce_gradient(std::vector<Trajectory>{}, p), ContractViolation);
}

TEST_CASE("reinforce_gradient matches the finite-difference oracle") {
  Rng rng(77);
  for (int i = 0; i < 5; ++i) {
    const auto inst = oracle::random_pg_instance(rng);
    const Eigen::VectorXd got = reinforce_gradient(inst.batch, inst.policy).flat();
    const Eigen::VectorXd want = oracle::fd_reinforce_gradient(inst.batch, inst.policy);
    CHECK(oracle::relative_error(got, want) < 1e-4);
  }
}

TEST_CASE("optimal baseline never increases the empirical second moment") {
  Rng rng(31);
  for (int i = 0; i < 20; ++i) {
    const auto inst = oracle::random_pg_instance(rng);
    const ScoreVec b = optimal_baseline(inst.batch, inst.policy);
    for (int j = 0; j < ScoreVec::SizeAtCompileTime; ++j) {
      double with_b = 0, without = 0;
      for (const auto& t : inst.batch) {
        const double psi = trajectory_score(t, inst.policy)(j);
        const double R = avg_return(t);
        with_b += psi * psi * (R - b(j)) * (R - b(j));
        without += psi * psi * R * R;
      }
      CHECK(with_b <= without * (1 + 1e-12) + 1e-12);
    }
  }
}

TEST_CASE("pg_update") {
  PGConfig cfg;
  GaussianPolicy p;
  p.theta_lin = FeatureVec(1, 2, 3);
  CHECK(pg_update(p, PolicyGradient{}, cfg) == p);

  GaussianPolicy z;
  PolicyGradient g;
  g.theta_lin = FeatureVec(1, 1, 1);
  const auto u = pg_update(z, g, cfg);
  CHECK(u.theta_lin(0) == Approx(1e-6));
  CHECK(u.theta_lin(2) == Approx(1e-6));
  CHECK(u.theta_ang.norm() == 0.0);

  PGConfig fast;
  fast.alpha_lin = fast.alpha_ang = 0.1;
  GaussianPolicy s;
  s.sigma_lin = s.sigma_ang = 0.5;
  PolicyGradient gs;
  gs.sigma_lin = gs.sigma_ang = -0.2;
  const auto v = pg_update(s, gs, fast);
  CHECK(v.sigma_lin == Approx(0.49));
  CHECK(v.sigma_ang == Approx(0.49));

  PolicyGradient crush;
  crush.sigma_lin = -1e6;
  crush.sigma_ang = -1e6;
  const auto w = pg_update(s, crush, fast);
  CHECK(w.sigma_lin == fast.sigma_min);
  CHECK(w.sigma_ang == fast.sigma_min);

  PolicyGradient bad;
  bad.theta_ang(1) = std::nan("");
  CHECK_THROWS_AS(pg_update(s, bad, fast), NonFiniteGradient);
}

TEST_CASE("PGConfig and per-task learning rates") {
  CHECK(default_learning_rates(1) == std::array<double, 2>{1e-6, 1e-7});
  CHECK(default_learning_rates(2) == std::array<double, 2>{1e-6, 1e-6});
  CHECK(default_learning_rates(3) == std::array<double, 2>{1e-7, 1e-5});
  CHECK(default_learning_rates(4) == std::array<double, 2>{1e-7, 1e-6});
  CHECK(default_learning_rates(5) == std::array<double, 2>{1e-7, 1e-5});
  CHECK(PGConfig::for_task(3).alpha_ang == 1e-5);
  PGConfig cfg;
  CHECK(cfg.gamma == 0.9);
  CHECK(cfg.batch_size == 10);
  cfg.sigma_min = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("train_pg: zero episodes, determinism, sigma floor") {
  const Task task = task_by_id(2);
  PGConfig cfg = PGConfig::for_task(2);
  cfg.episodes = 0;
  const auto none = train_pg(task, cfg, nullptr, 1);
  CHECK(none.curve.empty());
  CHECK(none.policy == GaussianPolicy{});

  cfg.episodes = 30;
  const auto a = train_pg(task, cfg, nullptr, 5);
  const auto b = train_pg(task, cfg, nullptr, 5);
  CHECK(a.curve == b.curve);
  CHECK(a.policy == b.policy);

  PGConfig wild = cfg;
  wild.alpha_lin = wild.alpha_ang = 1e-2;
  const auto c = train_pg(task, wild, nullptr, 5);
  CHECK(c.policy.sigma_lin >= wild.sigma_min);
  CHECK(c.policy.sigma_ang >= wild.sigma_min);
}

TEST_CASE("train_pg: 400 + 400 protocol keeps the learned phase within 10% of theta_u") {
  const Task task = task_by_id(2);
  const GaussianPolicy u = warm_start_params(task);
  const auto run = train_pg(task, PGConfig::for_task(2), &u, 1);
  REQUIRE(run.curve.size() == 800);
  CHECK(run.demo_episodes == 400);
  const auto r = rewards_of(run.curve);
  const std::span<const double> all(r);
  const double demo = mean(all.first(400));
  const double learned = mean(all.last(400));
  CHECK(std::abs(learned - demo) <= 0.1 * std::abs(demo));
}

TEST_CASE("grid_search: 36 candidates, deterministic") {
  const Task task = task_by_id(2);
  GridSearchOptions opt;
  opt.budget_episodes = 10;
  opt.eval_episodes = 5;
  CHECK(learning_rate_grid().size() == 6);
  CHECK(learning_rate_grid().front() == 1e-3);
  CHECK(learning_rate_grid().back() == 1e-8);
  const auto a = grid_search(task, 3, opt);
  const auto b = grid_search(task, 3, opt);
  CHECK(a.candidates.size() == 36);
  CHECK(a.alpha_lin == b.alpha_lin);
  CHECK(a.alpha_ang == b.alpha_ang);
  double best = -1e300;
  for (const auto& c : a.candidates) best = std::max(best, c.avg_reward);
  int winners = 0;
  for (const auto& c : a.candidates) {
    if (c.alpha_lin == a.alpha_lin && c.alpha_ang == a.alpha_ang) {
      CHECK(c.avg_reward == best);
      ++winners;
    }
  }
  CHECK(winners == 1);
  CHECK(kEvalEpisodes == 25);
  CHECK(GridSearchOptions{}.eval_episodes == 25);
}

TEST_CASE("policy CSV round-trip") {
  GaussianPolicy p;
  p.theta_lin = FeatureVec(0.1, -2.5e-7, 3);
  p.theta_ang = FeatureVec(1.0 / 3.0, 0, -1);
  p.sigma_lin = 0.123;
  p.sigma_ang = 0.01;
  std::stringstream buf;
  write_policy(buf, p);
  CHECK(buf.str().rfind("param,index,value\n", 0) == 0);
  CHECK(read_policy(buf) == p);
  std::istringstream bad("param,index,value\ntheta_lin,7,1\n");
  CHECK_THROWS(read_policy(bad));
}
