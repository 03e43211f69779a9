#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "stable_inv/dae.hpp"
#include "stable_inv/mbs_core.hpp"
#include "stable_inv/trajectory.hpp"

namespace stable_inv::two_link {

/// Planar two-link arm in the horizontal plane: torque on the first joint,
/// passive elbow with a linear spring-damper. Links are homogeneous rods.
struct TwoLinkParams {
  double L1 = 0.5;
  double L2 = 0.5;
  double m1 = 0.05;
  double m2 = 0.05;
  double k = 0.5;
  double d = 2.5e-5;

  void validate() const;
};

/// Internal state [beta, beta_dot] of the passive joint.
using InternalState = Eigen::Vector2d;

/// Closed-form M, k (Coriolis/centrifugal) and the elbow moment.
Eigen::Matrix2d mass_matrix(const TwoLinkParams& p, double beta);
Eigen::Vector2d coriolis(const TwoLinkParams& p, double beta, double alpha_dot, double beta_dot);
Eigen::Vector2d end_effector(const TwoLinkParams& p, double alpha, double beta);

/// Coordinates y = (alpha, beta), n = 2, n_c = 0, m = 1, output atan2 of the end effector.
SystemModel build_two_link_model(const TwoLinkParams& params);

/// Output angle contributed by the elbow: z = alpha + phi(beta).
double elbow_offset(const TwoLinkParams& p, double beta);
double elbow_offset_d1(const TwoLinkParams& p, double beta);
double elbow_offset_d2(const TwoLinkParams& p, double beta);

/// Internal dynamics driven by the output and its first two derivatives.
/// Returns [beta_dot, beta_ddot]. Throws SingularityError when the
/// passive-joint coupling vanishes or |beta| >= pi.
InternalState internal_dynamics_rhs(const TwoLinkParams& p, double z, double z_dot,
                                    double z_ddot, const InternalState& eta);

struct ZeroDynamicsEigen {
  double lambda_s = 0.0;
  double lambda_u = 0.0;
  Eigen::Vector2d v_s, v_u;  // right eigenvectors (unit length)
  Matrix B_s_ode;            // 1x2, annihilates v_u
  Matrix B_u_ode;            // 1x2, annihilates v_s
  Matrix jacobian;           // linearized zero dynamics at eta_eq = 0
};

/// Linearizes the zero dynamics at eta = 0 and splits the spectrum.
/// Throws HyperbolicityError unless it is a real saddle.
ZeroDynamicsEigen zero_dynamics_eigen(const TwoLinkParams& p);

struct ReconstructedInput {
  double u = 0.0;
  double alpha = 0.0;
  double alpha_dot = 0.0;
  double alpha_ddot = 0.0;
};

/// Algebraic recovery of the joint torque and the actuated angle.
ReconstructedInput reconstruct_input(const TwoLinkParams& p, double z, double z_dot,
                                     double z_ddot, const InternalState& eta);

/// Pointwise reconstruction over sampled output derivatives and internal states.
std::vector<ReconstructedInput> reconstruct_input(const TwoLinkParams& p,
                                                  const std::vector<double>& z,
                                                  const std::vector<double>& z_dot,
                                                  const std::vector<double>& z_ddot,
                                                  const std::vector<InternalState>& eta);

/// Internal dynamics driven by a desired trajectory, in collocation-ready form.
class InternalDynamicsOde final : public SemiExplicitDae {
 public:
  InternalDynamicsOde(TwoLinkParams params, SmoothTransition traj)
      : params_(params), traj_(traj) {}

  int state_dim() const override { return 2; }
  int algebraic_dim() const override { return 0; }
  Vector f(const Vector& x, const Vector& w, double t) const override;

  const TwoLinkParams& params() const { return params_; }
  const SmoothTransition& trajectory() const { return traj_; }

 private:
  TwoLinkParams params_;
  SmoothTransition traj_;
};

}  // namespace stable_inv::two_link
