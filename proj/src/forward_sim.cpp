#include "stable_inv/forward_sim.hpp"

#include <cmath>
#include <limits>

#include "stable_inv/errors.hpp"

namespace stable_inv {

InputSignal InputSignal::from_samples(std::vector<double> t, std::vector<double> u) {
  InputSignal s;
  s.start_ = t.front();
  s.end_ = t.back();
  auto spline = std::make_shared<CubicSpline>(std::move(t), std::move(u));
  s.fn_ = [spline](double tt) { return (*spline)(tt); };
  return s;
}

InputSignal InputSignal::from_function(std::function<double(double)> u, double start, double end) {
  if (!(end >= start)) throw ContractViolation("input window must satisfy end >= start");
  InputSignal s;
  s.fn_ = std::move(u);
  s.start_ = start;
  s.end_ = end;
  return s;
}

Vector InputSignal::operator()(double t) const {
  Vector u(1);
  u[0] = fn_(t);
  return u;
}

InputSignal rigid_equivalent_input(const SmoothTransition& traj) {
  const double inf = std::numeric_limits<double>::infinity();
  return InputSignal::from_function([traj](double t) { return traj.eval(t, 1); }, -inf, inf);
}

MbsState beam_at_rest(const ancf::AncfAssembly& assembly, double theta, double t) {
  const Vector e = ancf::rotate_rigidly(assembly.undeformed(), theta);
  return {e, Vector::Zero(e.size()), t};
}

namespace {

struct StepSystem {
  const SystemModel& model;
  int n, nc, hr;
  Vector y0, v0;
  double t0, h;
  Vector u_mid, u_end;

  int size() const { return 2 * n + nc + hr; }

  Matrix pin_jacobian(const Vector& y, const Vector& v, const Vector& u, double t) const {
    return constraint_jacobians(model, y, v, u, t).c_y.topRows(hr);
  }

  Vector residual(const Vector& X) const {
    const Vector y1 = X.head(n), v1 = X.segment(n, n);
    const Vector Lam = X.segment(2 * n, nc), mu = X.tail(hr);
    const Vector ym = 0.5 * (y0 + y1), vm = 0.5 * (v0 + v1);
    const double tm = t0 + 0.5 * h, t1 = t0 + h;
    Vector R(size());
    Vector kin = model.identity_kinematics ? vm : Vector(model.Z(ym) * vm);
    R.head(n) = y1 - y0 - h * kin;
    if (hr > 0) R.head(n) -= pin_jacobian(y1, v1, u_end, t1).transpose() * mu;
    R.segment(n, n) =
        model.M(ym, tm) * (v1 - v0) - h * generalized_force(model, ym, vm, Lam, u_mid, tm);
    if (nc > 0) R.segment(2 * n, nc) = model.c(y1, v1, u_end, t1);
    if (hr > 0) R.tail(hr) = pin_jacobian(y1, v1, u_end, t1) * v1;
    return R;
  }

  Matrix jacobian(const Vector& X) const {
    const Vector y1 = X.head(n), v1 = X.segment(n, n);
    const Vector Lam = X.segment(2 * n, nc);
    const Vector ym = 0.5 * (y0 + y1), vm = 0.5 * (v0 + v1);
    const double tm = t0 + 0.5 * h, t1 = t0 + h;
    Matrix J = Matrix::Zero(size(), size());
    const Matrix I = Matrix::Identity(n, n);
    if (model.identity_kinematics) {
      J.block(0, 0, n, n) = I;
      J.block(0, n, n, n) = -0.5 * h * I;
    } else {
      J.block(0, 0, n, n) = I - 0.5 * h * kinematics_jacobian(model, ym, vm);
      J.block(0, n, n, n) = -0.5 * h * model.Z(ym);
    }
    const ForceJacobians fj = force_jacobians(model, ym, vm, Lam, u_mid, tm);
    Matrix dM = -0.5 * h * fj.f_y;
    if (!model.constant_mass) dM += 0.5 * mass_times_vector_jacobian(model, ym, v1 - v0, tm);
    J.block(n, 0, n, n) = dM;
    J.block(n, n, n, n) = model.M(ym, tm) - 0.5 * h * fj.f_v;
    if (nc > 0) {
      J.block(n, 2 * n, n, nc) = -h * model.C(ym, vm, tm).transpose();
      const ConstraintJacobians cj = constraint_jacobians(model, y1, v1, u_end, t1);
      J.block(2 * n, 0, nc, n) = cj.c_y;
      J.block(2 * n, n, nc, n) = cj.c_v;
    }
    if (hr > 0) {
      const Matrix P = pin_jacobian(y1, v1, u_end, t1);
      J.block(0, 2 * n + nc, n, hr) = -P.transpose();
      J.block(2 * n + nc, n, hr, n) = P;
      J.block(2 * n + nc, 0, hr, n) = linearize(
          [&](const Vector& yy) { return Vector(pin_jacobian(yy, v1, u_end, t1) * v1); }, y1);
    }
    return J;
  }
};

double constraint_drift(const SystemModel& model, const Vector& y, const Vector& v, const Vector& u,
                        double t) {
  const int nc = model.dims.n_c;
  const int hr = model.holonomic_rows;
  double drift = 0.0;
  if (nc > 0) drift = model.c(y, v, u, t).cwiseAbs().maxCoeff();
  if (hr > 0) {
    const Matrix P = constraint_jacobians(model, y, v, u, t).c_y.topRows(hr);
    drift = std::max(drift, (P * v).cwiseAbs().maxCoeff());
  }
  return drift;
}

}  // namespace

SimulationResult simulate_forward(const SystemModel& model, const InputSignal& input,
                                  const MbsState& x0, double t_end,
                                  const SimulationOptions& options) {
  const int n = model.dims.n;
  const int nc = model.dims.n_c;
  const int m = model.dims.m;
  const int hr = model.holonomic_rows;
  if (x0.y.size() != n || x0.v.size() != n) throw ContractViolation("initial state size mismatch");
  if (!(options.h > 0) || !(t_end > x0.t)) throw ContractViolation("invalid simulation window");
  if (input.start() > x0.t + 1e-12 || input.end() < t_end - 1e-12) {
    throw ContractViolation("input signal does not cover the simulation window");
  }
  const double steps_real = (t_end - x0.t) / options.h;
  const int steps = static_cast<int>(std::lround(steps_real));
  if (std::abs(steps_real - steps) > 1e-9 * std::max(1.0, steps_real)) {
    throw ContractViolation("simulation window must be a multiple of the step");
  }
  const double drift0 = constraint_drift(model, x0.y, x0.v, input(x0.t), x0.t);
  if (drift0 > options.consistency_tolerance) {
    throw InconsistentInitialConditions("initial constraint violation " + std::to_string(drift0));
  }

  SimulationResult out;
  out.t.resize(steps + 1);
  out.y.resize(steps + 1, n);
  out.v.resize(steps + 1, n);
  out.lambda = Matrix::Zero(steps + 1, nc);
  out.u.resize(steps + 1, m);
  out.z.resize(steps + 1, m);
  out.t[0] = x0.t;
  out.y.row(0) = x0.y.transpose();
  out.v.row(0) = x0.v.transpose();
  out.u.row(0) = input(x0.t).transpose();
  out.z.row(0) = model.h(x0.y).transpose();
  out.max_drift = drift0;

  StepSystem sys{model, n, nc, hr, x0.y, x0.v, x0.t, options.h, {}, {}};
  Vector lam = Vector::Zero(nc);
  for (int s = 0; s < steps; ++s) {
    const double t0 = x0.t + s * options.h;
    sys.t0 = t0;
    sys.u_mid = input(t0 + 0.5 * options.h);
    sys.u_end = input(t0 + options.h);
    Vector X(sys.size());
    X << sys.y0 + options.h * sys.v0, sys.v0, lam, Vector::Zero(hr);
    Vector R = sys.residual(X);
    int it = 0;
    while (R.cwiseAbs().maxCoeff() > options.tolerance) {
      if (++it > options.max_iterations || !R.allFinite()) {
        throw StepFailure(t0, "Newton residual " + std::to_string(R.cwiseAbs().maxCoeff()));
      }
      X -= sys.jacobian(X).partialPivLu().solve(R);
      R = sys.residual(X);
    }
    out.newton_iterations += it;
    sys.y0 = X.head(n);
    sys.v0 = X.segment(n, n);
    lam = X.segment(2 * n, nc);
    const double t1 = t0 + options.h;
    out.t[s + 1] = t1;
    out.y.row(s + 1) = sys.y0.transpose();
    out.v.row(s + 1) = sys.v0.transpose();
    out.lambda.row(s + 1) = lam.transpose();
    out.u.row(s + 1) = sys.u_end.transpose();
    out.z.row(s + 1) = model.h(sys.y0).transpose();
    out.max_drift = std::max(out.max_drift, constraint_drift(model, sys.y0, sys.v0, sys.u_end, t1));
  }
  if (steps > 0) out.lambda.row(0) = out.lambda.row(1);
  return out;
}

Vector initial_guess_stiff(const ancf::AncfMaterial& material, const ancf::AncfGeometry& geometry,
                           const SmoothTransition& traj, const HermiteSimpson& system,
                           double stiff_E, double h_sim) {
  ancf::AncfMaterial stiff = material;
  stiff.E = stiff_E;
  auto assembly = std::make_shared<const ancf::AncfAssembly>(stiff, geometry);
  const SystemModel model = ancf::assemble_system(assembly);
  const Mesh& mesh = system.mesh();
  const double ratio = 0.5 * mesh.h / h_sim;
  if (std::abs(ratio - std::round(ratio)) > 1e-9) {
    throw ContractViolation("h_sim must divide half the mesh step");
  }
  const int per_half = static_cast<int>(std::lround(ratio));
  const InputSignal u_rigid = rigid_equivalent_input(traj);
  SimulationOptions opt;
  opt.h = h_sim;
  const SimulationResult sim =
      simulate_forward(model, u_rigid, beam_at_rest(*assembly, traj.z0(), mesh.T0), mesh.Tf, opt);
  const int n = model.dims.n;
  const int nc = model.dims.n_c;
  if (system.node_size() != 2 * n + nc + 1) {
    throw ContractViolation("initial_guess_stiff: collocation system is not the beam servo DAE");
  }
  auto node_value = [&](int i) {
    Vector z(2 * n + nc + 1);
    z << sim.y.row(i).transpose(), sim.v.row(i).transpose(), sim.lambda.row(i).transpose(),
        sim.u.row(i).transpose();
    return z;
  };
  const int K = mesh.nodes();
  Matrix nodes(K, system.node_size());
  Matrix mids(K - 1, system.nw());
  for (int k = 0; k < K; ++k) {
    nodes.row(k) = node_value(2 * k * per_half).transpose();
    if (k + 1 < K) mids.row(k) = node_value((2 * k + 1) * per_half).tail(system.nw()).transpose();
  }
  return system.pack(nodes, mids);
}

}  // namespace stable_inv
