#include "stable_inv/dae.hpp"

namespace stable_inv {

Vector SemiExplicitDae::g(const Vector&, const Vector&, double) const { return Vector(0); }

DaeJacobians SemiExplicitDae::jacobians(const Vector& x, const Vector& w, double t) const {
  DaeJacobians out;
  out.f_x = linearize([&](const Vector& xx) { return f(xx, w, t); }, x);
  out.g_x = linearize([&](const Vector& xx) { return g(xx, w, t); }, x);
  if (w.size() > 0) {
    out.f_w = linearize([&](const Vector& ww) { return f(x, ww, t); }, w);
    out.g_w = linearize([&](const Vector& ww) { return g(x, ww, t); }, w);
  } else {
    out.f_w = Matrix::Zero(state_dim(), 0);
    out.g_w = Matrix::Zero(0, 0);
  }
  return out;
}

}  // namespace stable_inv
