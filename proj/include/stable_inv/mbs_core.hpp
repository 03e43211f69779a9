#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>

namespace stable_inv {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Dimensions of a multibody model: n coordinates, n_c constraints, m inputs/outputs.
struct SystemDims {
  int n = 0;
  int n_c = 0;
  int m = 1;

  int dof() const { return n - n_c; }
  /// Length of the stacked inverse-model unknown [y v lambda u].
  int unknowns() const { return 2 * n + n_c + m; }
  void validate() const;
};

struct MbsState {
  Vector y;
  Vector v;
  double t = 0.0;
};

/// Time derivatives of the coordinates used in residual evaluation.
struct StateRates {
  Vector ydot;
  Vector vdot;
};

struct ConstraintJacobians {
  Matrix c_y;  // n_c x n
  Matrix c_v;  // n_c x n
  Matrix c_u;  // n_c x m
};

struct ForceJacobians {
  Matrix f_y;  // n x n
  Matrix f_v;  // n x n
};

/// Evaluator bundle for
///   ydot = Z(y) v
///   M(y,t) vdot + k(y,v,t) = q(y,v,t) + C(y,v,t)^T lambda + B(y) u
///   c(y,v,u,t) = 0,   z = h(y).
///
/// The constraint function also receives u so that velocity-type actuator
/// constraints can be expressed. The first `holonomic_rows` rows of c must
/// depend on y only; the forward integrator adds their velocity-level form.
///
/// The optional analytic derivative evaluators replace finite differences
/// wherever they are set.
struct SystemModel {
  SystemDims dims;
  int holonomic_rows = 0;
  bool identity_kinematics = true;
  bool constant_mass = false;

  std::function<Matrix(const Vector& y)> Z;
  std::function<Matrix(const Vector& y, double t)> M;
  std::function<Vector(const Vector& y, const Vector& v, double t)> k;
  std::function<Vector(const Vector& y, const Vector& v, double t)> q;
  std::function<Matrix(const Vector& y, const Vector& v, double t)> C;
  std::function<Matrix(const Vector& y)> B;
  std::function<Vector(const Vector& y, const Vector& v, const Vector& u, double t)> c;
  std::function<Vector(const Vector& y)> h;

  /// d(q - k)/dy and d(q - k)/dv.
  std::function<ForceJacobians(const Vector& y, const Vector& v, double t)> applied_force_jacobian;
  std::function<ConstraintJacobians(const Vector& y, const Vector& v, const Vector& u, double t)>
      constraint_jacobian;
  std::function<Matrix(const Vector& y)> output_jacobian;
};

/// Stacked unknown [y v lambda u] at a static equilibrium.
struct EquilibriumPoint {
  Vector x_eq;
  double residual = 0.0;
  int iterations = 0;
};

/// Index helpers for the stacked vector [y v lambda u].
struct StackedLayout {
  int n, n_c, m;
  explicit StackedLayout(const SystemDims& d) : n(d.n), n_c(d.n_c), m(d.m) {}
  int y() const { return 0; }
  int v() const { return n; }
  int lambda() const { return 2 * n; }
  int u() const { return 2 * n + n_c; }
  int size() const { return 2 * n + n_c + m; }
};

/// Residual [ydot - Z v; M vdot + k - q - C^T lambda - B u; c], length 2n + n_c.
Vector eval_dynamics_residual(const SystemModel& model, const MbsState& state,
                              const StateRates& rates, const Vector& lambda, const Vector& u);

Vector eval_output(const SystemModel& model, const Vector& y);

/// Newton solve of the static equations with v = vdot = 0 and h(y) = z_ref.
/// Tolerance 1e-10 in max-norm (or a correction at roundoff level), at most
/// 50 iterations.
EquilibriumPoint find_equilibrium(const SystemModel& model, const Vector& z_ref,
                                  const Vector& guess);

/// Central finite-difference Jacobian, step max(1e-7, 1e-7 |x_i|).
Matrix linearize(const std::function<Vector(const Vector&)>& rhs, const Vector& point);

// Derivative helpers. Each uses the analytic evaluator of the model when
// present and central differences otherwise.

/// Jacobians of F = q - k + C^T lambda + B u with respect to y and v.
ForceJacobians force_jacobians(const SystemModel& model, const Vector& y, const Vector& v,
                               const Vector& lambda, const Vector& u, double t);
ConstraintJacobians constraint_jacobians(const SystemModel& model, const Vector& y,
                                         const Vector& v, const Vector& u, double t);
Matrix output_jacobian(const SystemModel& model, const Vector& y);
/// d(M(y,t) a)/dy for a fixed vector a; zero for constant-mass models.
Matrix mass_times_vector_jacobian(const SystemModel& model, const Vector& y, const Vector& a,
                                  double t);
/// d(Z(y) v)/dy; zero for identity kinematics.
Matrix kinematics_jacobian(const SystemModel& model, const Vector& y, const Vector& v);

/// Generalized force F = q - k + C^T lambda + B u.
Vector generalized_force(const SystemModel& model, const Vector& y, const Vector& v,
                         const Vector& lambda, const Vector& u, double t);

/// Throws NumericFailure naming `block` if any entry is not finite.
void require_finite(const Eigen::Ref<const Matrix>& values, const std::string& block);

}  // namespace stable_inv
