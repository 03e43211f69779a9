#pragma once

#include <vector>

#include "stable_inv/dae.hpp"
#include "stable_inv/mbs_core.hpp"
#include "stable_inv/trajectory.hpp"

namespace stable_inv {

/// Inverse-model DAE: the equations of motion plus the servo constraint
/// h(y) - z_d(t) = 0, with the input u among the unknowns.
///
/// As a semi-explicit DAE: x = [y v], w = [lambda u],
///   ydot = Z v,  vdot = M^-1 (q - k + C^T lambda + B u),
///   0 = c(y, v, u, t),  0 = h(y) - z_d(t).
class ServoSystem final : public SemiExplicitDae {
 public:
  ServoSystem(SystemModel model, std::vector<SmoothTransition> trajectory);

  const SystemModel& model() const { return model_; }
  const std::vector<SmoothTransition>& trajectory() const { return traj_; }
  StackedLayout layout() const { return StackedLayout(model_.dims); }

  /// z_d(t) and its derivative of the given order, one entry per channel.
  Vector desired(double t, int order = 0) const;

  int state_dim() const override { return 2 * model_.dims.n; }
  int algebraic_dim() const override { return model_.dims.n_c + model_.dims.m; }
  Vector f(const Vector& x, const Vector& w, double t) const override;
  Vector g(const Vector& x, const Vector& w, double t) const override;
  DaeJacobians jacobians(const Vector& x, const Vector& w, double t) const override;

 private:
  Matrix mass(const Vector& y, double t) const;
  Vector solve_mass(const Vector& y, double t, const Vector& rhs) const;
  Matrix solve_mass(const Vector& y, double t, const Matrix& rhs) const;

  SystemModel model_;
  std::vector<SmoothTransition> traj_;
  Eigen::LDLT<Matrix> constant_mass_;
};

/// Stacked residual [ydot - Z v; M vdot + k - q - C^T lambda - B u; c; h(y) - z_d(t)]
/// for x = [y v lambda u].
Vector servo_residual(const ServoSystem& servo, const Vector& x, const Vector& ydot,
                      const Vector& vdot, double t);

/// Block view of a stacked unknown.
struct InverseUnknowns {
  Vector y, v, lambda, u;
};

StackedLayout unknown_layout(const ServoSystem& servo);
Vector gather(const StackedLayout& layout, const InverseUnknowns& parts);
InverseUnknowns scatter(const StackedLayout& layout, const Vector& x);

}  // namespace stable_inv
