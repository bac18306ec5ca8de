#pragma once

// Reference computations that do not go through the library's own solvers.

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "slrl/core.hpp"
#include "slrl/latent_basis.hpp"
#include "slrl/policy_gradient.hpp"

namespace oracle {

using slrl::GaussianPolicy;
using slrl::MatXd;
using slrl::Rng;
using slrl::Trajectory;
using slrl::VecXd;

inline double gaussian_logpdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * slrl::kPi);
}

inline double mean_of(const Eigen::Vector3d& theta, const slrl::ContinuousObs& obs) {
  const double omega_rad = obs.omega * slrl::kPi / 180.0;
  return theta(0) * (obs.d / 10.0) + theta(1) * (omega_rad / slrl::kPi) + theta(2);
}

/// Parameters flattened as (theta_lin, theta_ang, sigma_lin, sigma_ang).
inline Eigen::Matrix<double, 8, 1> flatten(const GaussianPolicy& p) {
  Eigen::Matrix<double, 8, 1> v;
  v << p.theta_lin, p.theta_ang, p.sigma_lin, p.sigma_ang;
  return v;
}

inline GaussianPolicy unflatten(const Eigen::Matrix<double, 8, 1>& v) {
  GaussianPolicy p;
  p.theta_lin = v.segment<3>(0);
  p.theta_ang = v.segment<3>(3);
  p.sigma_lin = v(6);
  p.sigma_ang = v(7);
  return p;
}

inline double log_prob(const Trajectory& traj, const GaussianPolicy& p) {
  double lp = 0.0;
  for (const auto& st : traj.steps) {
    lp += gaussian_logpdf(st.raw.v_lin, mean_of(p.theta_lin, st.obs), p.sigma_lin);
    lp += gaussian_logpdf(st.raw.v_ang, mean_of(p.theta_ang, st.obs), p.sigma_ang);
  }
  return lp;
}

inline double per_step_return(const Trajectory& traj) {
  double sum = 0.0;
  for (const auto& st : traj.steps) sum += st.reward;
  return sum / static_cast<double>(traj.steps.size());
}

/// d log p(traj) / d param by central differences.
inline Eigen::Matrix<double, 8, 1> fd_score(const Trajectory& traj, const GaussianPolicy& p,
                                            double h = 1e-6) {
  const auto x = flatten(p);
  Eigen::Matrix<double, 8, 1> g;
  for (int j = 0; j < 8; ++j) {
    auto up = x, down = x;
    up(j) += h;
    down(j) -= h;
    g(j) = (log_prob(traj, unflatten(up)) - log_prob(traj, unflatten(down))) / (2.0 * h);
  }
  return g;
}

/// Finite-difference gradient of the frozen-noise importance-weighted return
///   f_j(x) = (1/N) sum_tau exp(log p_x(tau) - log p_x0(tau)) (R(tau) - b_j)
/// with the per-component variance-minimising baseline b_j held fixed.
inline Eigen::Matrix<double, 8, 1> fd_reinforce_gradient(const std::vector<Trajectory>& batch,
                                                         const GaussianPolicy& p, double h = 1e-5) {
  const auto x0 = flatten(p);
  const int n = static_cast<int>(batch.size());
  std::vector<double> R(n), lp0(n);
  Eigen::Matrix<double, 8, 1> num = Eigen::Matrix<double, 8, 1>::Zero();
  Eigen::Matrix<double, 8, 1> den = Eigen::Matrix<double, 8, 1>::Zero();
  for (int i = 0; i < n; ++i) {
    R[i] = per_step_return(batch[i]);
    lp0[i] = log_prob(batch[i], p);
    const auto psi = fd_score(batch[i], p);
    num += (psi.array().square() * R[i]).matrix();
    den += psi.array().square().matrix();
  }
  Eigen::Matrix<double, 8, 1> b;
  for (int j = 0; j < 8; ++j) b(j) = den(j) > 0 ? num(j) / den(j) : 0.0;

  Eigen::Matrix<double, 8, 1> g;
  for (int j = 0; j < 8; ++j) {
    const double step = h * std::max(1.0, std::abs(x0(j)));
    auto up = x0, down = x0;
    up(j) += step;
    down(j) -= step;
    double f_up = 0.0, f_down = 0.0;
    for (int i = 0; i < n; ++i) {
      f_up += std::exp(log_prob(batch[i], unflatten(up)) - lp0[i]) * (R[i] - b(j));
      f_down += std::exp(log_prob(batch[i], unflatten(down)) - lp0[i]) * (R[i] - b(j));
    }
    g(j) = (f_up - f_down) / (2.0 * step * n);
  }
  return g;
}

/// Random policy plus a batch of short trajectories with raw actions drawn
/// from it (the "frozen noise").
struct PgInstance {
  GaussianPolicy policy;
  std::vector<Trajectory> batch;
};

inline PgInstance random_pg_instance(Rng& rng) {
  PgInstance inst;
  for (int j = 0; j < 3; ++j) {
    inst.policy.theta_lin(j) = rng.uniform(-1.0, 1.0);
    inst.policy.theta_ang(j) = rng.uniform(-1.0, 1.0);
  }
  inst.policy.sigma_lin = rng.uniform(0.2, 0.8);
  inst.policy.sigma_ang = rng.uniform(0.2, 0.8);
  const int n = 3 + rng.uniform_int(8);
  for (int i = 0; i < n; ++i) {
    Trajectory t;
    const int H = 1 + rng.uniform_int(12);
    for (int s = 0; s < H; ++s) {
      slrl::TrajectoryStep st;
      st.obs.d = rng.uniform(0.0, 7.0);
      st.obs.omega = rng.uniform(-180.0, 180.0);
      st.raw.v_lin = rng.normal(mean_of(inst.policy.theta_lin, st.obs), inst.policy.sigma_lin);
      st.raw.v_ang = rng.normal(mean_of(inst.policy.theta_ang, st.obs), inst.policy.sigma_ang);
      st.reward = rng.uniform() < 0.1 ? 100.0 : -0.5 * std::min(std::abs(st.raw.v_lin), 1.5);
      t.steps.push_back(st);
    }
    inst.batch.push_back(std::move(t));
  }
  return inst;
}

inline double relative_error(const Eigen::VectorXd& got, const Eigen::VectorXd& want) {
  return (got - want).norm() / std::max(want.norm(), 1e-12);
}

// ---------------------------------------------------------------------------
// Gamma-weighted lasso.

inline double lasso_objective(const MatXd& L, const VecXd& s, const VecXd& alpha, const MatXd& G,
                              double mu) {
  const VecXd r = alpha - L * s;
  return r.dot(G * r) + mu * s.cwiseAbs().sum();
}

/// Exact minimiser by enumerating every support/sign pattern: on a fixed
/// pattern the objective is a quadratic whose stationary point solves
///   A_SS s_S = c_S - (mu/2) sign_S,   A = L'GL, c = L'G alpha.
/// The global minimum is attained at one of these points (or s = 0).
inline VecXd lasso_bruteforce(const MatXd& L, const VecXd& alpha, const MatXd& G, double mu) {
  const int k = static_cast<int>(L.cols());
  const MatXd A = L.transpose() * G * L;
  const VecXd c = L.transpose() * G * alpha;
  VecXd best = VecXd::Zero(k);
  double best_obj = lasso_objective(L, best, alpha, G, mu);
  int patterns = 1;
  for (int j = 0; j < k; ++j) patterns *= 3;
  for (int code = 1; code < patterns; ++code) {
    std::vector<int> idx;
    std::vector<double> sign;
    int rest = code;
    for (int j = 0; j < k; ++j) {
      const int digit = rest % 3;
      rest /= 3;
      if (digit == 0) continue;
      idx.push_back(j);
      sign.push_back(digit == 1 ? 1.0 : -1.0);
    }
    const int m = static_cast<int>(idx.size());
    MatXd Ass(m, m);
    VecXd rhs(m);
    for (int a = 0; a < m; ++a) {
      rhs(a) = c(idx[a]) - 0.5 * mu * sign[a];
      for (int b = 0; b < m; ++b) Ass(a, b) = A(idx[a], idx[b]);
    }
    const VecXd sol = Ass.fullPivLu().solve(rhs);
    VecXd s = VecXd::Zero(k);
    for (int a = 0; a < m; ++a) s(idx[a]) = sol(a);
    const double obj = lasso_objective(L, s, alpha, G, mu);
    if (obj < best_obj) {
      best_obj = obj;
      best = s;
    }
  }
  return best;
}

/// Random PSD matrix B B' + ridge I.
inline MatXd random_psd(Rng& rng, int p, double ridge = 0.1) {
  MatXd B(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) B(i, j) = rng.normal();
  return B * B.transpose() / p + ridge * MatXd::Identity(p, p);
}

inline MatXd random_matrix(Rng& rng, int rows, int cols) {
  MatXd M(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) M(i, j) = rng.normal();
  return M;
}

inline VecXd random_vector(Rng& rng, int n) {
  VecXd v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

// ---------------------------------------------------------------------------
// Basis objective.

/// Gradient of (1/T) sum_t (a_t - L s_t)' G_t (a_t - L s_t) + lambda |L|_F^2,
/// entry by entry.
inline MatXd basis_objective_gradient(const MatXd& L, const std::vector<slrl::TaskCoefficients>& coeffs,
                                      const std::vector<slrl::TaskStats>& stats, double lambda) {
  const auto p = L.rows(), k = L.cols();
  const double T = static_cast<double>(coeffs.size());
  MatXd grad(p, k);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      double g = 2.0 * lambda * L(i, j);
      for (std::size_t t = 0; t < coeffs.size(); ++t) {
        const VecXd r = stats[t].alpha_star - L * coeffs[t].s;
        double Gr_i = 0.0;
        for (Eigen::Index m = 0; m < p; ++m) Gr_i += stats[t].hessian(i, m) * r(m);
        g -= 2.0 * Gr_i * coeffs[t].s(j) / T;
      }
      grad(i, j) = g;
    }
  }
  return grad;
}

}  // namespace oracle
