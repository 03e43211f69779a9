// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>

#include "stable_inv/bvp.hpp"
#include "stable_inv/experiments.hpp"
#include "stable_inv/forward_sim.hpp"
#include "stable_inv/oracle/selftest.hpp"
#include "stable_inv/two_link.hpp"

using namespace stable_inv;
namespace ex = stable_inv::experiments;

namespace {

int failures = 0;

void verdict(int id, bool ok, const std::string& detail) {
  std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

template <class... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// x1' = x2, x2' = 4 x1 with x1(0) = 1, x1(1) = 0.
class Harmonic final : public SemiExplicitDae {
 public:
  int state_dim() const override { return 2; }
  int algebraic_dim() const override { return 0; }
  Vector f(const Vector& x, const Vector&, double) const override {
    Vector r(2);
    r << x[1], 4.0 * x[0];
    return r;
  }
};

double hs_error(double h) {
  Harmonic dae;
  Mesh m;
  m.T0 = m.t0 = 0.0;
  m.Tf = m.tf = 1.0;
  m.h = h;
  Vector r0(2), r1(2);
  r0 << 1.0, 0.0;
  r1 << 0.0, 0.0;
  HermiteSimpson hs(dae, m, assemble_bc_approx({0}, {0}, r0, r1));
  const BvpSolution sol =
      solve_bvp(hs, guess_from(hs, [](double) { return Vector(Vector::Zero(2)); }), {1e-13});
  double err = 0.0;
  for (std::size_t k = 0; k < sol.t.size(); ++k) {
    const double exact = std::sinh(2.0 * (1.0 - sol.t[k])) / std::sinh(2.0);
    err = std::max(err, std::abs(sol.nodes(static_cast<Eigen::Index>(k), 0) - exact));
  }
  return err;
}

Vector midpoint_end(double h) {
  const SystemModel model = two_link::build_two_link_model({});
  const InputSignal u =
      InputSignal::from_function([](double t) { return 0.02 * std::sin(3.0 * t); }, 0.0, 1.0);
  SimulationOptions o;
  o.h = h;
  o.tolerance = 1e-13;
  const SimulationResult r =
      simulate_forward(model, u, {Vector::Zero(2), Vector::Zero(2), 0.0}, 0.5, o);
  Vector out(4);
  out << r.y.bottomRows(1).transpose(), r.v.bottomRows(1).transpose();
  return out;
}

}  // namespace

int main() {
  const ex::TwoLinkConfig tl;
  const ex::AncfConfig ac;

  // 1. Two-link recovery.
  const ex::TwoLinkStudy study = ex::solve_two_link_study(tl, 0.5);
  verdict(1, study.max_input_deviation <= 1e-3 && study.seconds <= 10.0,
          fmt("max |u_approx - u_orig| = %.3e N m (<= 1e-3), %.2f s (<= 10 s)",
              study.max_input_deviation, study.seconds));

  // 2. Convergence rates, and 3. monotone improvement, from the sweep.
  const ex::ConvergenceRun conv = ex::run_convergence(tl);
  const auto& eig = conv.eigen;
  const auto& widest = conv.sweep.back().comparison;
  const double dev_s = std::abs(widest.early_rate - eig.lambda_s) / std::abs(eig.lambda_s);
  const double dev_u = std::abs(widest.late_rate - eig.lambda_u) / std::abs(eig.lambda_u);
  verdict(2, dev_s <= 0.1 && dev_u <= 0.1 && conv.seconds <= 60.0,
          fmt("early slope %.3f vs lambda_s %.3f (%.2f%%), late slope %.3f vs lambda_u %.3f "
              "(%.2f%%), 4-point sweep %.2f s (<= 60 s)",
              widest.early_rate, eig.lambda_s, 100 * dev_s, widest.late_rate, eig.lambda_u,
              100 * dev_u, conv.seconds));

  bool decreasing = conv.sweep.size() == 4;
  std::ostringstream seq;
  for (std::size_t i = 0; i < conv.sweep.size(); ++i) {
    const auto& s = conv.sweep[i];
    seq << (i ? ", " : "") << fmt("dT=%.2f: %.3e", s.dT, s.comparison.max_error);
    if (i > 0 && !(s.comparison.max_error < conv.sweep[i - 1].comparison.max_error)) {
      decreasing = false;
    }
  }
  verdict(3, decreasing, "max e strictly decreasing: " + seq.str());

  // 4. ANCF tracking and 5. rigid-input inadequacy.
  const ex::AncfRun ancf = ex::run_ancf(ac);
  const double e_ffw = rad_to_deg(ancf.max_error_ffw);
  verdict(4, e_ffw <= 0.3 && ancf.unactuated == 27 && ancf.seconds <= 600.0,
          fmt("N=10 max |z - z_d| = %.4f deg (<= 0.3), unactuated coordinates %d (== 27), "
              "%.1f s (<= 600 s)",
              e_ffw, ancf.unactuated, ancf.seconds));
  const double e_rigid = rad_to_deg(ancf.post_error_rigid);
  verdict(5, e_rigid >= 2.0 && e_rigid >= 6.0 * e_ffw,
          fmt("rigid-input post-transition peak error %.3f deg (>= 2), ratio %.1f (>= 6)", e_rigid,
              e_rigid / e_ffw));

  // 6. Preactuation for both models.
  const ex::TwoLinkRun run = ex::run_two_link(tl);
  const auto& p2 = run.preactuation;
  const auto& pa = ancf.preactuation;
  verdict(6,
          p2.integral > 0 && p2.ratio() > 0.01 && pa.integral > 0 && pa.ratio() > 0.01 &&
              run.unstable_alignment_deg <= 2.0,
          fmt("two-link: integral %.3e, ratio %.2f%%; ANCF: integral %.3e, ratio %.2f%% (> 1%%); "
              "unstable-eigenline alignment %.2e deg (<= 2)",
              p2.integral, 100 * p2.ratio(), pa.integral, 100 * pa.ratio(),
              run.unstable_alignment_deg));

  // 7. Oracle suites.
  std::ostringstream sink;
  const auto checks = oracle::run_oracle_suite(sink);
  bool all = !checks.empty();
  std::ostringstream worst;
  for (const auto& c : checks) {
    all = all && c.passed;
    if (!c.passed) worst << " " << c.name;
  }
  verdict(7, all,
          fmt("%d oracle checks", static_cast<int>(checks.size())) +
              (all ? std::string(" passed") : " failed:" + worst.str()));

  // 8. Discretization order.
  const double h1 = hs_error(0.1), h2 = hs_error(0.05), h3 = hs_error(0.025);
  const double p_hs = std::min(std::log2(h1 / h2), std::log2(h2 / h3));
  const Vector ref = midpoint_end(1.25e-4);
  const double m1 = (midpoint_end(4e-3) - ref).norm();
  const double m2 = (midpoint_end(2e-3) - ref).norm();
  const double m3 = (midpoint_end(1e-3) - ref).norm();
  const double p_mid = std::min(std::log2(m1 / m2), std::log2(m2 / m3));
  verdict(8, p_hs >= 3.8 && p_mid >= 1.9,
          fmt("Hermite-Simpson rate %.3f (>= 3.8), implicit midpoint rate %.3f (>= 1.9)", p_hs,
              p_mid));

  // 9. Constraint and servo exactness.
  const SystemModel arm = two_link::build_two_link_model(tl.params);
  const SmoothTransition traj = tl.trajectory.make();
  double servo_arm = 0.0;
  for (Eigen::Index k = 0; k < run.dae.nodes.rows(); ++k) {
    const Vector y = run.dae.nodes.row(k).head(2).transpose();
    servo_arm = std::max(servo_arm, std::abs(arm.h(y)[0] - traj.eval(run.dae.t[k])));
  }
  const double drift = std::max({ancf.sim_ffw.max_drift, ancf.sim_rigid.max_drift,
                                 run.closure.max_drift});
  verdict(9,
          ancf.constraint_residual <= 1e-8 && ancf.servo_residual <= 1e-8 && servo_arm <= 1e-8 &&
              drift <= 1e-8,
          fmt("BVP nodes: ANCF |c| %.2e, ANCF servo %.2e, two-link servo %.2e; forward drift "
              "%.2e (all <= 1e-8)",
              ancf.constraint_residual, ancf.servo_residual, servo_arm, drift));

  return failures == 0 ? 0 : 1;
}
