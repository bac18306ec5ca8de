#pragma once

// Linear-Gaussian policy over the continuous (d, omega) observation.

#include <array>

#include <Eigen/Core>

#include "slrl/core.hpp"
#include "slrl/env.hpp"

namespace slrl {

inline constexpr int kFeatureDim = 3;

/// phi(s) = (d/10, omega_rad/pi, 1).
template <typename Scalar = double>
Eigen::Matrix<Scalar, kFeatureDim, 1> features(const ContinuousObs& obs) {
  Eigen::Matrix<Scalar, kFeatureDim, 1> phi;
  phi << Scalar(obs.d / 10.0), Scalar(deg_to_rad(obs.omega) / kPi), Scalar(1);
  return phi;
}

using FeatureVec = Eigen::Matrix<double, kFeatureDim, 1>;

struct GaussianPolicy {
  FeatureVec theta_lin = FeatureVec::Zero();
  FeatureVec theta_ang = FeatureVec::Zero();
  double sigma_lin = 0.3;
  double sigma_ang = 0.3;

  /// Mean command (theta_lin' phi, theta_ang' phi), unclamped.
  ActionContinuous mean_action(const ContinuousObs& obs) const {
    const FeatureVec phi = features(obs);
    return {theta_lin.dot(phi), theta_ang.dot(phi)};
  }

  /// Stacked parameter vector (theta_lin ; theta_ang), length 2*kFeatureDim.
  VecXd stacked() const {
    VecXd out(2 * kFeatureDim);
    out << theta_lin, theta_ang;
    return out;
  }

  static GaussianPolicy from_stacked(const VecXd& theta, double sigma_lin, double sigma_ang);

  friend bool operator==(const GaussianPolicy& a, const GaussianPolicy& b) {
    return a.theta_lin == b.theta_lin && a.theta_ang == b.theta_ang &&
           a.sigma_lin == b.sigma_lin && a.sigma_ang == b.sigma_ang;
  }
};

inline GaussianPolicy GaussianPolicy::from_stacked(const VecXd& theta, double sigma_lin,
                                                   double sigma_ang) {
  if (theta.size() != 2 * kFeatureDim) {
    throw ContractViolation("stacked policy vector must have length 6");
  }
  GaussianPolicy p;
  p.theta_lin = theta.head<kFeatureDim>();
  p.theta_ang = theta.tail<kFeatureDim>();
  p.sigma_lin = sigma_lin;
  p.sigma_ang = sigma_ang;
  return p;
}

}  // namespace slrl
