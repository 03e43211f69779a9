#include "stable_inv/inverse_dae.hpp"

#include "stable_inv/errors.hpp"

namespace stable_inv {

ServoSystem::ServoSystem(SystemModel model, std::vector<SmoothTransition> trajectory)
    : model_(std::move(model)), traj_(std::move(trajectory)) {
  model_.dims.validate();
  if (static_cast<int>(traj_.size()) != model_.dims.m) {
    throw ContractViolation("servo system needs one trajectory per output channel");
  }
  if (model_.constant_mass) {
    constant_mass_.compute(model_.M(Vector::Zero(model_.dims.n), 0.0));
  }
}

Vector ServoSystem::desired(double t, int order) const {
  Vector z(traj_.size());
  for (std::size_t i = 0; i < traj_.size(); ++i) z[i] = traj_[i].eval(t, order);
  return z;
}

Matrix ServoSystem::mass(const Vector& y, double t) const {
  Matrix m = model_.M(y, t);
  require_finite(m, "mass");
  return m;
}

Vector ServoSystem::solve_mass(const Vector& y, double t, const Vector& rhs) const {
  if (model_.constant_mass) return constant_mass_.solve(rhs);
  return mass(y, t).ldlt().solve(rhs);
}

Matrix ServoSystem::solve_mass(const Vector& y, double t, const Matrix& rhs) const {
  if (model_.constant_mass) return constant_mass_.solve(rhs);
  return mass(y, t).ldlt().solve(rhs);
}

Vector ServoSystem::f(const Vector& x, const Vector& w, double t) const {
  const int n = model_.dims.n;
  const int nc = model_.dims.n_c;
  const Vector y = x.head(n);
  const Vector v = x.tail(n);
  const Vector lambda = w.head(nc);
  const Vector u = w.tail(model_.dims.m);
  Vector out(2 * n);
  out.head(n) = model_.identity_kinematics ? v : Vector(model_.Z(y) * v);
  const Vector force = generalized_force(model_, y, v, lambda, u, t);
  require_finite(force, "force");
  out.tail(n) = solve_mass(y, t, force);
  return out;
}

Vector ServoSystem::g(const Vector& x, const Vector& w, double t) const {
  const int n = model_.dims.n;
  const int nc = model_.dims.n_c;
  const int m = model_.dims.m;
  const Vector y = x.head(n);
  Vector out(nc + m);
  if (nc > 0) {
    const Vector c = model_.c(y, x.tail(n), w.tail(m), t);
    require_finite(c, "constraint");
    out.head(nc) = c;
  }
  const Vector z = model_.h(y);
  require_finite(z, "servo");
  out.tail(m) = z - desired(t);
  return out;
}

DaeJacobians ServoSystem::jacobians(const Vector& x, const Vector& w, double t) const {
  const int n = model_.dims.n;
  const int nc = model_.dims.n_c;
  const int m = model_.dims.m;
  const Vector y = x.head(n);
  const Vector v = x.tail(n);
  const Vector lambda = w.head(nc);
  const Vector u = w.tail(m);

  DaeJacobians J;
  J.f_x = Matrix::Zero(2 * n, 2 * n);
  J.f_w = Matrix::Zero(2 * n, nc + m);
  J.g_x = Matrix::Zero(nc + m, 2 * n);
  J.g_w = Matrix::Zero(nc + m, nc + m);

  if (model_.identity_kinematics) {
    J.f_x.block(0, n, n, n).setIdentity();
  } else {
    J.f_x.block(0, 0, n, n) = kinematics_jacobian(model_, y, v);
    J.f_x.block(0, n, n, n) = model_.Z(y);
  }

  const Vector force = generalized_force(model_, y, v, lambda, u, t);
  const Vector accel = solve_mass(y, t, force);
  const ForceJacobians fj = force_jacobians(model_, y, v, lambda, u, t);
  Matrix dy = fj.f_y;
  if (!model_.constant_mass) dy -= mass_times_vector_jacobian(model_, y, accel, t);
  Matrix rhs(n, 2 * n + nc + m);
  rhs.leftCols(n) = dy;
  rhs.middleCols(n, n) = fj.f_v;
  if (nc > 0) rhs.middleCols(2 * n, nc) = model_.C(y, v, t).transpose();
  rhs.rightCols(m) = model_.B(y);
  const Matrix sol = solve_mass(y, t, rhs);
  J.f_x.bottomRows(n) = sol.leftCols(2 * n);
  J.f_w.bottomRows(n) = sol.rightCols(nc + m);

  if (nc > 0) {
    const ConstraintJacobians cj = constraint_jacobians(model_, y, v, u, t);
    J.g_x.block(0, 0, nc, n) = cj.c_y;
    J.g_x.block(0, n, nc, n) = cj.c_v;
    J.g_w.block(0, nc, nc, m) = cj.c_u;
  }
  J.g_x.block(nc, 0, m, n) = output_jacobian(model_, y);
  return J;
}

Vector servo_residual(const ServoSystem& servo, const Vector& x, const Vector& ydot,
                      const Vector& vdot, double t) {
  const SystemModel& model = servo.model();
  const StackedLayout L = servo.layout();
  if (x.size() != L.size()) throw ContractViolation("servo_residual: stacked size mismatch");
  const InverseUnknowns p = scatter(L, x);
  const Vector dyn = eval_dynamics_residual(model, {p.y, p.v, t}, {ydot, vdot}, p.lambda, p.u);
  Vector out(L.size());
  out.head(dyn.size()) = dyn;
  const Vector z = model.h(p.y);
  require_finite(z, "servo");
  out.tail(L.m) = z - servo.desired(t);
  return out;
}

StackedLayout unknown_layout(const ServoSystem& servo) { return servo.layout(); }

Vector gather(const StackedLayout& L, const InverseUnknowns& p) {
  if (p.y.size() != L.n || p.v.size() != L.n || p.lambda.size() != L.n_c || p.u.size() != L.m) {
    throw ContractViolation("gather: block sizes do not match the layout");
  }
  Vector x(L.size());
  x.segment(L.y(), L.n) = p.y;
  x.segment(L.v(), L.n) = p.v;
  x.segment(L.lambda(), L.n_c) = p.lambda;
  x.segment(L.u(), L.m) = p.u;
  return x;
}

InverseUnknowns scatter(const StackedLayout& L, const Vector& x) {
  if (x.size() != L.size()) throw ContractViolation("scatter: stacked size mismatch");
  return {x.segment(L.y(), L.n), x.segment(L.v(), L.n), x.segment(L.lambda(), L.n_c),
          x.segment(L.u(), L.m)};
}

}  // namespace stable_inv
