#pragma once

#include "stable_inv/mbs_core.hpp"

namespace stable_inv {

struct DaeJacobians {
  Matrix f_x, f_w, g_x, g_w;
};

/// Semi-explicit DAE  xdot = f(x, w, t),  0 = g(x, w, t)
/// with differential states x and algebraic variables w (dim g == dim w).
/// This is the form consumed by the collocation solver; an ODE has no w.
class SemiExplicitDae {
 public:
  virtual ~SemiExplicitDae() = default;

  virtual int state_dim() const = 0;
  virtual int algebraic_dim() const = 0;
  virtual Vector f(const Vector& x, const Vector& w, double t) const = 0;
  virtual Vector g(const Vector& x, const Vector& w, double t) const;
  /// Finite differences unless overridden.
  virtual DaeJacobians jacobians(const Vector& x, const Vector& w, double t) const;
};

}  // namespace stable_inv
