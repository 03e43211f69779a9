#include <doctest.h>

#include <cmath>

#include "stable_inv/ancf.hpp"
#include "stable_inv/errors.hpp"
#include "stable_inv/inverse_dae.hpp"
#include "stable_inv/two_link.hpp"

using namespace stable_inv;

namespace {

const SmoothTransition kTraj(0.0, deg_to_rad(30.0), 0.0, 1.0);

ServoSystem ancf_servo() { return ServoSystem(ancf::assemble_system({}, {}), {kTraj}); }

double rel_diff(const Matrix& a, const Matrix& b) {
  const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

}  // namespace

TEST_CASE("gather and scatter are inverse") {
  const ServoSystem servo = ancf_servo();
  const StackedLayout l = unknown_layout(servo);
  CHECK(l.size() == 64);
  Vector x(l.size());
  for (int i = 0; i < x.size(); ++i) x[i] = 0.5 * i - 3.0;
  const InverseUnknowns parts = scatter(l, x);
  CHECK(parts.y.size() == 30);
  CHECK(parts.lambda.size() == 3);
  CHECK(parts.u.size() == 1);
  CHECK(parts.lambda[0] == x[60]);
  CHECK(gather(l, parts) == x);
  InverseUnknowns bad = parts;
  bad.u.resize(2);
  CHECK_THROWS_AS(gather(l, bad), ContractViolation);
}

TEST_CASE("servo row is the output error") {
  const ServoSystem servo = ancf_servo();
  const ancf::AncfAssembly asmb({}, {});
  const int n = 30;
  Vector x = Vector::Zero(2 * n);
  x.head(n) = ancf::rotate_rigidly(asmb.undeformed(), 0.1);
  const Vector w = Vector::Zero(4);
  const double t = 0.5;
  const Vector g = servo.g(x, w, t);
  REQUIRE(g.size() == 4);
  CHECK(g[3] == doctest::Approx(0.1 - kTraj.eval(t)).epsilon(1e-12));
  CHECK(servo.desired(t, 1)[0] == kTraj.eval(t, 1));
}

TEST_CASE("analytic servo jacobians agree with finite differences") {
  const ServoSystem servo = ancf_servo();
  const ancf::AncfAssembly asmb({}, {});
  const int n = 30;
  Vector x(2 * n);
  x.head(n) = ancf::rotate_rigidly(asmb.undeformed(), 0.25);
  for (int i = 0; i < n; ++i) {
    x[i] += 1e-3 * std::sin(0.7 * i + 1.0);
    x[n + i] = 0.05 * std::cos(1.3 * i);
  }
  Vector w(4);
  w << 0.3, -0.2, 0.01, 0.4;
  const double t = 0.4;
  const DaeJacobians a = servo.jacobians(x, w, t);
  const DaeJacobians b = servo.SemiExplicitDae::jacobians(x, w, t);
  CHECK(rel_diff(a.f_x, b.f_x) < 1e-6);
  CHECK(rel_diff(a.f_w, b.f_w) < 1e-6);
  CHECK(rel_diff(a.g_x, b.g_x) < 1e-6);
  CHECK(rel_diff(a.g_w, b.g_w) < 1e-6);
}

TEST_CASE("two-link servo jacobians agree with finite differences") {
  const ServoSystem servo(two_link::build_two_link_model({}), {kTraj});
  Vector x(4), w(1);
  x << 0.2, -0.1, 0.4, 0.9;
  w << 0.03;
  const DaeJacobians a = servo.jacobians(x, w, 0.3);
  const DaeJacobians b = servo.SemiExplicitDae::jacobians(x, w, 0.3);
  CHECK(rel_diff(a.f_x, b.f_x) < 1e-6);
  CHECK(rel_diff(a.f_w, b.f_w) < 1e-6);
  CHECK(rel_diff(a.g_x, b.g_x) < 1e-6);
}

TEST_CASE("stacked residual vanishes on a consistent point") {
  const ServoSystem servo(two_link::build_two_link_model({}), {kTraj});
  const double t = 0.4;
  // State on the output manifold at rest with the matching torque.
  const auto rec = two_link::reconstruct_input({}, kTraj.eval(t), 0.0, 0.0, {0.0, 0.0});
  Vector xs(4), w(1);
  xs << rec.alpha, 0.0, 0.0, 0.0;
  w << rec.u;
  const Vector rates = servo.f(xs, w, t);
  Vector stacked(5);
  stacked << xs, w;
  const Vector r = servo_residual(servo, stacked, rates.head(2), rates.tail(2), t);
  REQUIRE(r.size() == 5);
  CHECK(r.head(4).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(std::abs(r[4]) < 1e-12);
}

TEST_CASE("trajectory channel count must match the outputs") {
  CHECK_THROWS_AS(ServoSystem(two_link::build_two_link_model({}), {}), ContractViolation);
  CHECK_THROWS_AS(ServoSystem(two_link::build_two_link_model({}), {kTraj, kTraj}),
                  ContractViolation);
}
