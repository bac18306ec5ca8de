#pragma once

// Convex subproblems of the shared-basis multi-task objective
//
//   (1/T) sum_t [ (a_t - L s_t)' G_t (a_t - L s_t) + mu |s_t|_1 ] + lambda |L|_F^2
//
// where a_t is a task's single-task parameter vector and G_t its PSD
// curvature surrogate. Fixing L gives a Gamma-weighted lasso in s_t; fixing
// every s_t gives a ridge problem in L with a closed-form solution.

#include <cmath>
#include <span>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/LU>

#include "slrl/core.hpp"

namespace slrl {

template <typename Scalar>
struct TaskStatsT {
  int task_id = 0;
  Vec<Scalar> alpha_star;  // single-task solution, length p
  Mat<Scalar> hessian;     // p x p, symmetric PSD
  int trajectory_count = 0;
};

template <typename Scalar>
struct TaskCoefficientsT {
  int task_id = 0;
  Vec<Scalar> s;  // length k
};

using TaskStats = TaskStatsT<double>;
using TaskCoefficients = TaskCoefficientsT<double>;

/// Raised by update_basis when lambda = 0 leaves the system rank-deficient.
class SingularBasisSystem : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename Scalar>
Scalar soft_threshold(Scalar x, Scalar t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return Scalar(0);
}

/// (a - L s)' G (a - L s).
template <typename Scalar>
Scalar weighted_residual(const Mat<Scalar>& L, const Vec<Scalar>& s, const TaskStatsT<Scalar>& stats) {
  const Vec<Scalar> r = stats.alpha_star - L * s;
  return r.dot(stats.hessian * r);
}

/// Task-level lasso objective (a - L s)' G (a - L s) + mu |s|_1.
template <typename Scalar>
Scalar coefficient_objective(const Mat<Scalar>& L, const Vec<Scalar>& s,
                             const TaskStatsT<Scalar>& stats, Scalar mu) {
  return weighted_residual(L, s, stats) + mu * s.template lpNorm<1>();
}

struct LassoOptions {
  double tolerance = 1e-8;  // on the largest coordinate step of a sweep
  int max_sweeps = 100000;
};

/// argmin_s (a - L s)' G (a - L s) + mu |s|_1 by cyclic coordinate descent
/// with soft-thresholding, warm-started from `init` when given.
template <typename Scalar>
Vec<Scalar> solve_coefficients(const Mat<Scalar>& L, const TaskStatsT<Scalar>& stats, Scalar mu,
                               const Vec<Scalar>* init = nullptr, const LassoOptions& opt = {}) {
  if (L.rows() != stats.alpha_star.size() || stats.hessian.rows() != L.rows() ||
      stats.hessian.cols() != L.rows()) {
    throw ContractViolation("solve_coefficients: shape mismatch");
  }
  const Mat<Scalar> GL = stats.hessian * L;
  const Mat<Scalar> A = L.transpose() * GL;                       // k x k
  const Vec<Scalar> c = GL.transpose() * stats.alpha_star;        // L' G a
  const auto k = L.cols();
  Vec<Scalar> s = init && init->size() == k ? *init : Vec<Scalar>::Zero(k);
  // Gradient of the smooth part is 2 (A s - c); grad tracks A s.
  Vec<Scalar> As = A * s;
  const Scalar half_mu = mu / Scalar(2);
  for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
    Scalar max_step(0);
    Scalar max_coef(0);
    for (Eigen::Index j = 0; j < k; ++j) {
      const Scalar ajj = A(j, j);
      Scalar next(0);
      if (ajj > Scalar(0)) {
        const Scalar rho = c(j) - (As(j) - ajj * s(j));
        next = soft_threshold(rho, half_mu) / ajj;
      }
      const Scalar delta = next - s(j);
      if (delta != Scalar(0)) {
        As += delta * A.col(j);
        s(j) = next;
      }
      max_step = std::max(max_step, std::abs(delta));
      max_coef = std::max(max_coef, std::abs(next));
    }
    if (max_step <= Scalar(opt.tolerance) * std::max(Scalar(1), max_coef)) break;
  }
  return s;
}

/// argmin_L (1/T) sum_t (a_t - L s_t)' G_t (a_t - L s_t) + lambda |L|_F^2 via
///   [ (1/T) sum_t (s_t s_t' kron G_t) + lambda I ] vec(L) = (1/T) sum_t vec(G_t a_t s_t'),
/// vec() stacking columns.
template <typename Scalar>
Mat<Scalar> update_basis(std::span<const TaskCoefficientsT<Scalar>> coeffs,
                         std::span<const TaskStatsT<Scalar>> stats, Scalar lambda,
                         Eigen::Index p, Eigen::Index k) {
  if (coeffs.size() != stats.size()) throw ContractViolation("update_basis: history size mismatch");
  const Eigen::Index n = p * k;
  Mat<Scalar> system = lambda * Mat<Scalar>::Identity(n, n);
  Vec<Scalar> rhs = Vec<Scalar>::Zero(n);
  const std::size_t T = coeffs.size();
  if (T > 0) {
    const Scalar inv_t = Scalar(1) / static_cast<Scalar>(T);
    for (std::size_t t = 0; t < T; ++t) {
      const Vec<Scalar>& s = coeffs[t].s;
      const Mat<Scalar>& G = stats[t].hessian;
      if (s.size() != k || G.rows() != p || stats[t].alpha_star.size() != p) {
        throw ContractViolation("update_basis: shape mismatch");
      }
      // Block (i, j) of s s' kron G is s_i s_j G.
      for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = 0; j < k; ++j) {
          system.block(i * p, j * p, p, p) += inv_t * s(i) * s(j) * G;
        }
      }
      const Vec<Scalar> Ga = G * stats[t].alpha_star;
      for (Eigen::Index j = 0; j < k; ++j) rhs.segment(j * p, p) += inv_t * s(j) * Ga;
    }
  }
  Vec<Scalar> vecL;
  if (lambda > Scalar(0)) {
    vecL = system.ldlt().solve(rhs);
  } else {
    Eigen::FullPivLU<Mat<Scalar>> lu(system);
    if (lu.rank() < n) throw SingularBasisSystem("basis update is rank-deficient with lambda = 0");
    vecL = lu.solve(rhs);
  }
  return Eigen::Map<const Mat<Scalar>>(vecL.data(), p, k);
}

/// Gradient of the smooth basis objective with respect to L.
template <typename Scalar>
Mat<Scalar> basis_gradient(const Mat<Scalar>& L, std::span<const TaskCoefficientsT<Scalar>> coeffs,
                           std::span<const TaskStatsT<Scalar>> stats, Scalar lambda) {
  Mat<Scalar> grad = Scalar(2) * lambda * L;
  const Scalar inv_t = Scalar(1) / static_cast<Scalar>(coeffs.size());
  for (std::size_t t = 0; t < coeffs.size(); ++t) {
    const Vec<Scalar> r = stats[t].alpha_star - L * coeffs[t].s;
    grad -= Scalar(2) * inv_t * (stats[t].hessian * r) * coeffs[t].s.transpose();
  }
  return grad;
}

/// Full multi-task objective; throws ContractViolation for an empty history.
template <typename Scalar>
Scalar objective(const Mat<Scalar>& L, std::span<const TaskCoefficientsT<Scalar>> coeffs,
                 std::span<const TaskStatsT<Scalar>> stats, Scalar mu, Scalar lambda) {
  if (coeffs.empty() || coeffs.size() != stats.size()) {
    throw ContractViolation("objective needs a nonempty, matching history");
  }
  Scalar sum(0);
  for (std::size_t t = 0; t < coeffs.size(); ++t) {
    sum += coefficient_objective(L, coeffs[t].s, stats[t], mu);
  }
  return sum / static_cast<Scalar>(coeffs.size()) + lambda * L.squaredNorm();
}

}  // namespace slrl
