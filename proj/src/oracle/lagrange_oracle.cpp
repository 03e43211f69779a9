#include "stable_inv/oracle/lagrange_oracle.hpp"

#include <array>
#include <cmath>

namespace stable_inv::oracle {

namespace {

using two_link::TwoLinkParams;

struct Body {
  Eigen::Vector2d centroid;
  double angle;
};

std::array<Body, 2> bodies(const TwoLinkParams& p, const Eigen::Vector2d& q) {
  const Eigen::Vector2d dir1(std::cos(q[0]), std::sin(q[0]));
  const Eigen::Vector2d dir2(std::cos(q[0] + q[1]), std::sin(q[0] + q[1]));
  return {Body{0.5 * p.L1 * dir1, q[0]}, Body{p.L1 * dir1 + 0.5 * p.L2 * dir2, q[0] + q[1]}};
}

Eigen::Vector2d tip(const TwoLinkParams& p, const Eigen::Vector2d& q) {
  const auto b = bodies(p, q);
  const Eigen::Vector2d dir2(std::cos(b[1].angle), std::sin(b[1].angle));
  return b[1].centroid + 0.5 * p.L2 * dir2;
}

double tip_angle(const TwoLinkParams& p, const Eigen::Vector2d& q) {
  const Eigen::Vector2d t = tip(p, q);
  return std::atan2(t.y(), t.x());
}

constexpr double kStep = 1e-5;

// Jacobian of centroid position and body angle w.r.t. q by central differences.
void body_jacobians(const TwoLinkParams& p, const Eigen::Vector2d& q, int body,
                    Eigen::Matrix2d& jpos, Eigen::RowVector2d& jang) {
  for (int j = 0; j < 2; ++j) {
    Eigen::Vector2d qp = q, qm = q;
    qp[j] += kStep;
    qm[j] -= kStep;
    const auto bp = bodies(p, qp)[body];
    const auto bm = bodies(p, qm)[body];
    jpos.col(j) = (bp.centroid - bm.centroid) / (2 * kStep);
    jang[j] = (bp.angle - bm.angle) / (2 * kStep);
  }
}

}  // namespace

Eigen::Matrix2d lagrange_mass_matrix(const TwoLinkParams& p, const Eigen::Vector2d& q) {
  const double mass[2] = {p.m1, p.m2};
  const double inertia[2] = {p.m1 * p.L1 * p.L1 / 12.0, p.m2 * p.L2 * p.L2 / 12.0};
  Eigen::Matrix2d M = Eigen::Matrix2d::Zero();
  for (int b = 0; b < 2; ++b) {
    Eigen::Matrix2d jpos;
    Eigen::RowVector2d jang;
    body_jacobians(p, q, b, jpos, jang);
    M += mass[b] * jpos.transpose() * jpos + inertia[b] * jang.transpose() * jang;
  }
  return M;
}

double lagrange_energy(const TwoLinkParams& p, const Eigen::Vector2d& q,
                       const Eigen::Vector2d& qdot) {
  return 0.5 * qdot.dot(lagrange_mass_matrix(p, q) * qdot) + 0.5 * p.k * q[1] * q[1];
}

Eigen::Vector2d lagrange_coriolis(const TwoLinkParams& p, const Eigen::Vector2d& q,
                                  const Eigen::Vector2d& qdot) {
  // k = Mdot qdot - 1/2 d/dq (qdot^T M qdot)
  constexpr double h = 1e-4;
  Eigen::Matrix2d mdot = Eigen::Matrix2d::Zero();
  Eigen::Vector2d grad_t;
  for (int j = 0; j < 2; ++j) {
    Eigen::Vector2d qp = q, qm = q;
    qp[j] += h;
    qm[j] -= h;
    const Eigen::Matrix2d Mp = lagrange_mass_matrix(p, qp);
    const Eigen::Matrix2d Mm = lagrange_mass_matrix(p, qm);
    const Eigen::Matrix2d dM = (Mp - Mm) / (2 * h);
    mdot += dM * qdot[j];
    grad_t[j] = 0.5 * qdot.dot(dM * qdot);
  }
  return mdot * qdot - grad_t;
}

ConstrainedSolution constrained_dynamics(const TwoLinkParams& p, double z, double z_dot,
                                         double z_ddot, const Eigen::Vector2d& eta) {
  const double beta = eta[0];
  const double beta_dot = eta[1];
  // alpha from the output relation by scalar Newton.
  double alpha = z - 0.5 * beta;
  for (int it = 0; it < 50; ++it) {
    const double r = tip_angle(p, {alpha, beta}) - z;
    if (std::abs(r) < 1e-15) break;
    const double dr =
        (tip_angle(p, {alpha + kStep, beta}) - tip_angle(p, {alpha - kStep, beta})) / (2 * kStep);
    alpha -= r / dr;
  }
  const Eigen::Vector2d q(alpha, beta);
  // Output gradient and Hessian by central differences.
  constexpr double h = 1e-4;
  Eigen::RowVector2d grad;
  Eigen::Matrix2d hess;
  for (int i = 0; i < 2; ++i) {
    Eigen::Vector2d qp = q, qm = q;
    qp[i] += h;
    qm[i] -= h;
    grad[i] = (tip_angle(p, qp) - tip_angle(p, qm)) / (2 * h);
    for (int j = 0; j < 2; ++j) {
      Eigen::Vector2d a = q, b = q, c = q, d = q;
      a[i] += h; a[j] += h;
      b[i] += h; b[j] -= h;
      c[i] -= h; c[j] += h;
      d[i] -= h; d[j] -= h;
      hess(i, j) = (tip_angle(p, a) - tip_angle(p, b) - tip_angle(p, c) + tip_angle(p, d)) /
                   (4 * h * h);
    }
  }
  const double alpha_dot = (z_dot - grad[1] * beta_dot) / grad[0];
  const Eigen::Vector2d qdot(alpha_dot, beta_dot);

  // [M  -B; grad 0] [qddot; u] = [-k + Q; z'' - qdot^T H qdot]
  Eigen::Matrix3d A = Eigen::Matrix3d::Zero();
  A.topLeftCorner<2, 2>() = lagrange_mass_matrix(p, q);
  A(0, 2) = -1.0;
  A.block<1, 2>(2, 0) = grad;
  Eigen::Vector3d rhs;
  const Eigen::Vector2d k = lagrange_coriolis(p, q, qdot);
  rhs[0] = -k[0];
  rhs[1] = -k[1] - p.k * beta - p.d * beta_dot;
  rhs[2] = z_ddot - qdot.dot(hess * qdot);
  const Eigen::Vector3d sol = A.fullPivLu().solve(rhs);
  return {alpha, alpha_dot, sol[1], sol[2]};
}

}  // namespace stable_inv::oracle
