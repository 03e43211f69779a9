#include "stable_inv/two_link.hpp"

#include <cmath>
#include <numbers>

#include "stable_inv/errors.hpp"

namespace stable_inv::two_link {

void TwoLinkParams::validate() const {
  if (!(L1 > 0 && L2 > 0 && m1 > 0 && m2 > 0 && k > 0 && d >= 0)) {
    throw ContractViolation("two-link parameters must be positive (d >= 0)");
  }
}

Eigen::Matrix2d mass_matrix(const TwoLinkParams& p, double beta) {
  const double cb = std::cos(beta);
  const double c = 0.5 * p.m2 * p.L1 * p.L2;
  const double j2 = p.m2 * p.L2 * p.L2 / 3.0;
  Eigen::Matrix2d mass;
  mass(0, 0) = p.m1 * p.L1 * p.L1 / 3.0 + p.m2 * p.L1 * p.L1 + j2 + 2.0 * c * cb;
  mass(0, 1) = j2 + c * cb;
  mass(1, 0) = mass(0, 1);
  mass(1, 1) = j2;
  return mass;
}

Eigen::Vector2d coriolis(const TwoLinkParams& p, double beta, double alpha_dot,
                         double beta_dot) {
  const double cs = 0.5 * p.m2 * p.L1 * p.L2 * std::sin(beta);
  return {-cs * (2.0 * alpha_dot * beta_dot + beta_dot * beta_dot), cs * alpha_dot * alpha_dot};
}

Eigen::Vector2d end_effector(const TwoLinkParams& p, double alpha, double beta) {
  return {p.L1 * std::cos(alpha) + p.L2 * std::cos(alpha + beta),
          p.L1 * std::sin(alpha) + p.L2 * std::sin(alpha + beta)};
}

SystemModel build_two_link_model(const TwoLinkParams& params) {
  params.validate();
  const TwoLinkParams p = params;
  SystemModel model;
  model.dims = {2, 0, 1};
  model.Z = [](const Vector&) { return Matrix(Matrix::Identity(2, 2)); };
  model.M = [p](const Vector& y, double) { return Matrix(mass_matrix(p, y[1])); };
  model.k = [p](const Vector& y, const Vector& v, double) {
    return Vector(coriolis(p, y[1], v[0], v[1]));
  };
  model.q = [p](const Vector& y, const Vector& v, double) {
    Vector q(2);
    q << 0.0, -p.k * y[1] - p.d * v[1];
    return q;
  };
  model.C = [](const Vector&, const Vector&, double) { return Matrix(0, 2); };
  model.B = [](const Vector&) {
    Matrix b(2, 1);
    b << 1.0, 0.0;
    return b;
  };
  model.c = [](const Vector&, const Vector&, const Vector&, double) { return Vector(0); };
  model.h = [p](const Vector& y) {
    const Eigen::Vector2d tip = end_effector(p, y[0], y[1]);
    Vector z(1);
    z[0] = std::atan2(tip.y(), tip.x());
    return z;
  };
  return model;
}

double elbow_offset(const TwoLinkParams& p, double beta) {
  return std::atan2(p.L2 * std::sin(beta), p.L1 + p.L2 * std::cos(beta));
}

double elbow_offset_d1(const TwoLinkParams& p, double beta) {
  const double cb = std::cos(beta);
  const double den = p.L1 * p.L1 + p.L2 * p.L2 + 2.0 * p.L1 * p.L2 * cb;
  return (p.L2 * p.L2 + p.L1 * p.L2 * cb) / den;
}

double elbow_offset_d2(const TwoLinkParams& p, double beta) {
  const double den = p.L1 * p.L1 + p.L2 * p.L2 + 2.0 * p.L1 * p.L2 * std::cos(beta);
  return -p.L1 * p.L2 * std::sin(beta) * (p.L1 * p.L1 - p.L2 * p.L2) / (den * den);
}

namespace {

struct PassiveJoint {
  double beta_ddot;
  double alpha_dot;
  double phi1;
  double phi2;
};

PassiveJoint solve_passive_joint(const TwoLinkParams& p, double z_dot, double z_ddot,
                                 const InternalState& eta) {
  const double beta = eta[0];
  const double beta_dot = eta[1];
  if (!(std::abs(beta) < std::numbers::pi)) {
    throw SingularityError("output map is singular at |beta| >= pi");
  }
  const double phi1 = elbow_offset_d1(p, beta);
  const double phi2 = elbow_offset_d2(p, beta);
  const double alpha_dot = z_dot - phi1 * beta_dot;
  const Eigen::Matrix2d mass = mass_matrix(p, beta);
  const double k2 = coriolis(p, beta, alpha_dot, beta_dot)[1];
  const double coupling = mass(1, 1) - mass(1, 0) * phi1;
  if (std::abs(coupling) < 1e-12 * mass(1, 1)) {
    throw SingularityError("passive-joint coupling vanishes at beta = " + std::to_string(beta));
  }
  const double rhs =
      -(mass(1, 0) * (z_ddot - phi2 * beta_dot * beta_dot) + k2 + p.k * beta + p.d * beta_dot);
  return {rhs / coupling, alpha_dot, phi1, phi2};
}

}  // namespace

InternalState internal_dynamics_rhs(const TwoLinkParams& p, double, double z_dot,
                                    double z_ddot, const InternalState& eta) {
  const PassiveJoint pj = solve_passive_joint(p, z_dot, z_ddot, eta);
  return {eta[1], pj.beta_ddot};
}

ZeroDynamicsEigen zero_dynamics_eigen(const TwoLinkParams& p) {
  auto rhs = [&](const Vector& eta) {
    return Vector(internal_dynamics_rhs(p, 0.0, 0.0, 0.0, InternalState(eta[0], eta[1])));
  };
  ZeroDynamicsEigen out;
  out.jacobian = linearize(rhs, Vector::Zero(2));
  Eigen::EigenSolver<Matrix> es(out.jacobian);
  const Eigen::VectorXcd ev = es.eigenvalues();
  const double scale = ev.cwiseAbs().maxCoeff();
  for (int i = 0; i < 2; ++i) {
    if (std::abs(ev[i].real()) <= 1e-9 * std::max(scale, 1.0)) {
      throw HyperbolicityError("zero dynamics has an eigenvalue on the imaginary axis");
    }
  }
  if (std::abs(ev[0].imag()) > 0.0 || ev[0].real() * ev[1].real() > 0.0) {
    throw HyperbolicityError("zero dynamics equilibrium is not a saddle");
  }
  const int iu = ev[0].real() > 0.0 ? 0 : 1;
  const int is = 1 - iu;
  out.lambda_u = ev[iu].real();
  out.lambda_s = ev[is].real();
  out.v_u = es.eigenvectors().col(iu).real().normalized();
  out.v_s = es.eigenvectors().col(is).real().normalized();

  auto annihilator = [](const Eigen::Vector2d& kill, const Eigen::Vector2d& keep) {
    Eigen::Vector2d row(-kill.y(), kill.x());
    if (row.dot(keep) < 0.0) row = -row;
    Matrix out(1, 2);
    out.row(0) = row.normalized().transpose();
    return out;
  };
  out.B_u_ode = annihilator(out.v_s, out.v_u);
  out.B_s_ode = annihilator(out.v_u, out.v_s);
  return out;
}

ReconstructedInput reconstruct_input(const TwoLinkParams& p, double z, double z_dot,
                                     double z_ddot, const InternalState& eta) {
  const PassiveJoint pj = solve_passive_joint(p, z_dot, z_ddot, eta);
  const double beta = eta[0];
  const double beta_dot = eta[1];
  ReconstructedInput out;
  out.alpha = z - elbow_offset(p, beta);
  out.alpha_dot = pj.alpha_dot;
  out.alpha_ddot = z_ddot - pj.phi1 * pj.beta_ddot - pj.phi2 * beta_dot * beta_dot;
  const Eigen::Matrix2d mass = mass_matrix(p, beta);
  const double k1 = coriolis(p, beta, out.alpha_dot, beta_dot)[0];
  out.u = mass(0, 0) * out.alpha_ddot + mass(0, 1) * pj.beta_ddot + k1;
  return out;
}

std::vector<ReconstructedInput> reconstruct_input(const TwoLinkParams& p,
                                                  const std::vector<double>& z,
                                                  const std::vector<double>& z_dot,
                                                  const std::vector<double>& z_ddot,
                                                  const std::vector<InternalState>& eta) {
  if (z.size() != eta.size() || z_dot.size() != eta.size() || z_ddot.size() != eta.size()) {
    throw ContractViolation("reconstruct_input: sample counts differ");
  }
  std::vector<ReconstructedInput> out;
  out.reserve(eta.size());
  for (std::size_t i = 0; i < eta.size(); ++i) {
    out.push_back(reconstruct_input(p, z[i], z_dot[i], z_ddot[i], eta[i]));
  }
  return out;
}

Vector InternalDynamicsOde::f(const Vector& x, const Vector&, double t) const {
  return internal_dynamics_rhs(params_, traj_.eval(t, 0), traj_.eval(t, 1), traj_.eval(t, 2),
                               InternalState(x[0], x[1]));
}

}  // namespace stable_inv::two_link
