#pragma once

// Reference two-link dynamics assembled numerically from body kinematics
// (centroid positions, body angles, rod inertias) and Lagrange's equations.
// It shares no formulas with the closed-form model and serves as ground truth.

#include <Eigen/Dense>

#include "stable_inv/two_link.hpp"

namespace stable_inv::oracle {

Eigen::Matrix2d lagrange_mass_matrix(const two_link::TwoLinkParams& p, const Eigen::Vector2d& q);
Eigen::Vector2d lagrange_coriolis(const two_link::TwoLinkParams& p, const Eigen::Vector2d& q,
                                  const Eigen::Vector2d& qdot);
double lagrange_energy(const two_link::TwoLinkParams& p, const Eigen::Vector2d& q,
                       const Eigen::Vector2d& qdot);

struct ConstrainedSolution {
  double alpha = 0.0;
  double alpha_dot = 0.0;
  double beta_ddot = 0.0;
  double u = 0.0;
};

/// Solves the full equations of motion under the output constraint
/// atan2(tip) = z with given z, z', z'' and internal state (beta, beta').
ConstrainedSolution constrained_dynamics(const two_link::TwoLinkParams& p, double z, double z_dot,
                                         double z_ddot, const Eigen::Vector2d& eta);

}  // namespace stable_inv::oracle
