#include "stable_inv/mbs_core.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "stable_inv/errors.hpp"

namespace stable_inv {

namespace {

void require_size(const Vector& x, int n, const char* name) {
  if (x.size() != n) {
    throw ContractViolation(std::string(name) + " has size " + std::to_string(x.size()) +
                            ", expected " + std::to_string(n));
  }
}

double fd_step(double x) { return std::max(1e-7, 1e-7 * std::abs(x)); }

}  // namespace

void SystemDims::validate() const {
  if (n < 1 || n_c < 0 || m < 1 || n_c > n) {
    throw ContractViolation("invalid system dimensions n=" + std::to_string(n) +
                            " n_c=" + std::to_string(n_c) + " m=" + std::to_string(m));
  }
}

void require_finite(const Eigen::Ref<const Matrix>& values, const std::string& block) {
  if (!values.allFinite()) {
    throw NumericFailure(block, "non-finite evaluator output");
  }
}

Vector generalized_force(const SystemModel& model, const Vector& y, const Vector& v,
                         const Vector& lambda, const Vector& u, double t) {
  Vector force = model.q(y, v, t) - model.k(y, v, t);
  if (model.dims.n_c > 0) force += model.C(y, v, t).transpose() * lambda;
  force += model.B(y) * u;
  return force;
}

Vector eval_dynamics_residual(const SystemModel& model, const MbsState& state,
                              const StateRates& rates, const Vector& lambda, const Vector& u) {
  const auto& d = model.dims;
  require_size(state.y, d.n, "y");
  require_size(state.v, d.n, "v");
  require_size(rates.ydot, d.n, "ydot");
  require_size(rates.vdot, d.n, "vdot");
  require_size(lambda, d.n_c, "lambda");
  require_size(u, d.m, "u");

  const Vector& y = state.y;
  const Vector& v = state.v;
  const double t = state.t;

  Vector out(2 * d.n + d.n_c);

  Vector zv = model.identity_kinematics ? v : Vector(model.Z(y) * v);
  require_finite(zv, "kinematics");
  out.head(d.n) = rates.ydot - zv;

  Matrix mass = model.M(y, t);
  require_finite(mass, "mass");
  Vector k = model.k(y, v, t);
  require_finite(k, "coriolis");
  Vector q = model.q(y, v, t);
  require_finite(q, "applied forces");
  Vector bu = model.B(y) * u;
  require_finite(bu, "input distribution");
  Vector dyn = mass * rates.vdot + k - q - bu;
  if (d.n_c > 0) {
    Matrix cmat = model.C(y, v, t);
    require_finite(cmat, "constraint distribution");
    dyn -= cmat.transpose() * lambda;
  }
  out.segment(d.n, d.n) = dyn;

  if (d.n_c > 0) {
    Vector c = model.c(y, v, u, t);
    require_finite(c, "constraints");
    out.tail(d.n_c) = c;
  }
  return out;
}

Vector eval_output(const SystemModel& model, const Vector& y) {
  require_size(y, model.dims.n, "y");
  Vector z = model.h(y);
  require_finite(z, "output");
  return z;
}

Matrix linearize(const std::function<Vector(const Vector&)>& rhs, const Vector& point) {
  Vector f0 = rhs(point);
  require_finite(f0, "linearize");
  Matrix jac(f0.size(), point.size());
  Vector x = point;
  for (Eigen::Index i = 0; i < point.size(); ++i) {
    const double step = fd_step(point[i]);
    x[i] = point[i] + step;
    Vector fp = rhs(x);
    x[i] = point[i] - step;
    Vector fm = rhs(x);
    x[i] = point[i];
    jac.col(i) = (fp - fm) / (2.0 * step);
  }
  require_finite(jac, "linearize");
  return jac;
}

ForceJacobians force_jacobians(const SystemModel& model, const Vector& y, const Vector& v,
                               const Vector& lambda, const Vector& u, double t) {
  ForceJacobians out;
  if (model.applied_force_jacobian) {
    out = model.applied_force_jacobian(y, v, t);
    // The remaining terms C^T lambda + B u are cheap to difference.
    auto rest_y = [&](const Vector& yy) {
      Vector f = model.B(yy) * u;
      if (model.dims.n_c > 0) f += model.C(yy, v, t).transpose() * lambda;
      return f;
    };
    auto rest_v = [&](const Vector& vv) {
      Vector f = Vector::Zero(model.dims.n);
      if (model.dims.n_c > 0) f += model.C(y, vv, t).transpose() * lambda;
      return f;
    };
    out.f_y += linearize(rest_y, y);
    if (model.dims.n_c > 0) out.f_v += linearize(rest_v, v);
  } else {
    out.f_y = linearize([&](const Vector& yy) { return generalized_force(model, yy, v, lambda, u, t); }, y);
    out.f_v = linearize([&](const Vector& vv) { return generalized_force(model, y, vv, lambda, u, t); }, v);
  }
  return out;
}

ConstraintJacobians constraint_jacobians(const SystemModel& model, const Vector& y,
                                         const Vector& v, const Vector& u, double t) {
  const auto& d = model.dims;
  if (d.n_c == 0) {
    return {Matrix::Zero(0, d.n), Matrix::Zero(0, d.n), Matrix::Zero(0, d.m)};
  }
  if (model.constraint_jacobian) return model.constraint_jacobian(y, v, u, t);
  ConstraintJacobians out;
  out.c_y = linearize([&](const Vector& yy) { return model.c(yy, v, u, t); }, y);
  out.c_v = linearize([&](const Vector& vv) { return model.c(y, vv, u, t); }, v);
  out.c_u = linearize([&](const Vector& uu) { return model.c(y, v, uu, t); }, u);
  return out;
}

Matrix output_jacobian(const SystemModel& model, const Vector& y) {
  if (model.output_jacobian) return model.output_jacobian(y);
  return linearize([&](const Vector& yy) { return model.h(yy); }, y);
}

Matrix mass_times_vector_jacobian(const SystemModel& model, const Vector& y, const Vector& a,
                                  double t) {
  if (model.constant_mass) return Matrix::Zero(model.dims.n, model.dims.n);
  return linearize([&](const Vector& yy) { return Vector(model.M(yy, t) * a); }, y);
}

Matrix kinematics_jacobian(const SystemModel& model, const Vector& y, const Vector& v) {
  if (model.identity_kinematics) return Matrix::Zero(model.dims.n, model.dims.n);
  return linearize([&](const Vector& yy) { return Vector(model.Z(yy) * v); }, y);
}

EquilibriumPoint find_equilibrium(const SystemModel& model, const Vector& z_ref,
                                  const Vector& guess) {
  const auto& d = model.dims;
  d.validate();
  const StackedLayout lay(d);
  require_size(guess, lay.size(), "equilibrium guess");
  require_size(z_ref, d.m, "z_ref");

  auto residual = [&](const Vector& x) {
    MbsState st{x.segment(lay.y(), d.n), x.segment(lay.v(), d.n), 0.0};
    StateRates rates{Vector::Zero(d.n), Vector::Zero(d.n)};
    Vector r(lay.size());
    r.head(2 * d.n + d.n_c) =
        eval_dynamics_residual(model, st, rates, x.segment(lay.lambda(), d.n_c), x.tail(d.m));
    r.tail(d.m) = eval_output(model, st.y) - z_ref;
    return r;
  };

  constexpr double kTol = 1e-10;
  constexpr int kMaxIter = 50;
  Vector x = guess;
  std::vector<double> history;
  for (int it = 0; it <= kMaxIter; ++it) {
    Vector r = residual(x);
    const double norm = r.lpNorm<Eigen::Infinity>();
    history.push_back(norm);
    if (norm <= kTol) return {x, norm, it};
    if (it == kMaxIter) break;
    Matrix jac = linearize(residual, x);
    Eigen::FullPivLU<Matrix> lu(jac);
    if (!lu.isInvertible()) {
      throw RankDeficiency("equilibrium Jacobian is singular (rank " + std::to_string(lu.rank()) +
                           " of " + std::to_string(jac.rows()) + ")");
    }
    Vector dx = lu.solve(-r);
    const double dx_norm = dx.lpNorm<Eigen::Infinity>();
    // Roundoff floor of stiff models: the correction no longer moves x.
    if (dx_norm <= 1e-14 * (1.0 + x.lpNorm<Eigen::Infinity>())) return {x, norm, it};
    // Natural monotonicity test: the simplified correction from the trial
    // point, measured with the same Jacobian, must shrink. Unlike the raw
    // residual norm it is insensitive to the scaling of the rows.
    double step = 1.0;
    Vector trial = x + dx;
    while (step > 1.0 / 1024.0) {
      const Vector rt = residual(trial);
      if (rt.allFinite() &&
          lu.solve(-rt).lpNorm<Eigen::Infinity>() <= (1.0 - 0.25 * step) * dx_norm) {
        break;
      }
      step *= 0.5;
      trial = x + step * dx;
    }
    x = trial;
  }
  throw NoConvergence("equilibrium Newton did not converge in 50 iterations, last residual " +
                          std::to_string(history.back()),
                      history);
}

}  // namespace stable_inv
