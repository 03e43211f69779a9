#include <doctest.h>

#include <cmath>

#include "stable_inv/ancf.hpp"
#include "stable_inv/errors.hpp"
#include "stable_inv/forward_sim.hpp"
#include "stable_inv/two_link.hpp"

using namespace stable_inv;

namespace {

const SmoothTransition kTraj(0.0, deg_to_rad(30.0), 0.0, 1.0);

InputSignal torque_pulse() {
  return InputSignal::from_function([](double t) { return 0.02 * std::sin(3.0 * t); }, 0.0, 1.0);
}

Vector two_link_end(double h) {
  const SystemModel model = two_link::build_two_link_model({});
  MbsState x0{Vector::Zero(2), Vector::Zero(2), 0.0};
  SimulationOptions o;
  o.h = h;
  o.tolerance = 1e-13;
  const SimulationResult r = simulate_forward(model, torque_pulse(), x0, 0.5, o);
  Vector out(4);
  out << r.y.bottomRows(1).transpose(), r.v.bottomRows(1).transpose();
  return out;
}

// Beam at rest in the straight shape, tip moving transversally; the left
// node and its slopes are still, so pin and actuator rows hold for u = 0.
MbsState vibrating_beam(const ancf::AncfAssembly& a) {
  MbsState s{a.undeformed(), Vector::Zero(a.coordinates()), 0.0};
  const int N = a.geometry().elements;
  for (int j = 1; j <= N; ++j) s.v[6 * j + 1] = 0.2 * std::pow(double(j) / N, 2);
  return s;
}

}  // namespace

TEST_CASE("input signals") {
  const InputSignal s = InputSignal::from_samples({0.0, 1.0, 2.0}, {0.0, 1.0, 0.0});
  CHECK(s(1.0)[0] == doctest::Approx(1.0));
  CHECK(s(-5.0)[0] == 0.0);
  CHECK(s(9.0)[0] == doctest::Approx(0.0));
  const InputSignal r = rigid_equivalent_input(kTraj);
  CHECK(r(0.5)[0] == kTraj.eval(0.5, 1));
  CHECK(r(2.0)[0] == 0.0);
}

TEST_CASE("implicit midpoint converges at second order") {
  const Vector ref = two_link_end(1.25e-4);
  const double e1 = (two_link_end(4e-3) - ref).norm();
  const double e2 = (two_link_end(2e-3) - ref).norm();
  const double e3 = (two_link_end(1e-3) - ref).norm();
  const double p1 = std::log2(e1 / e2), p2 = std::log2(e2 / e3);
  MESSAGE("errors " << e1 << " " << e2 << " " << e3 << ", orders " << p1 << " " << p2);
  CHECK(p1 >= 1.9);
  CHECK(p2 >= 1.9);
}

TEST_CASE("equilibrium is preserved without input") {
  const SystemModel model = two_link::build_two_link_model({});
  MbsState x0{Vector::Constant(2, 0.0), Vector::Zero(2), 0.0};
  x0.y[0] = 0.4;
  const InputSignal zero = InputSignal::from_function([](double) { return 0.0; }, 0.0, 1.0);
  const SimulationResult r = simulate_forward(model, zero, x0, 1.0);
  CHECK((r.y.rowwise() - x0.y.transpose()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(r.v.cwiseAbs().maxCoeff() < 1e-14);
  CHECK(r.z.col(0).array().maxCoeff() == doctest::Approx(0.4));
  CHECK(r.t.size() == 1001);
  CHECK(r.t.back() == doctest::Approx(1.0));
}

TEST_CASE("beam constraints hold along the rigid manoeuvre") {
  const ancf::AncfAssembly a({}, {});
  const SystemModel model = ancf::assemble_system({}, {});
  const MbsState x0 = beam_at_rest(a, 0.0, -0.2);
  const SimulationResult r = simulate_forward(model, rigid_equivalent_input(kTraj), x0, 1.3);
  CHECK(r.max_drift <= 1e-8);
  // Cross-section angle follows the integrated input.
  for (Eigen::Index k = 0; k < r.y.rows(); k += 100) {
    const double gamma = ancf::cross_section_angle(r.y.row(k).transpose());
    CHECK(std::abs(gamma - 0.5 * M_PI - kTraj.eval(r.t[k])) < 1e-6);
  }
}

TEST_CASE("energy of the held beam is conserved") {
  const ancf::AncfAssembly a({}, {});
  const SystemModel model = ancf::assemble_system({}, {});
  const MbsState x0 = vibrating_beam(a);
  const InputSignal zero = InputSignal::from_function([](double) { return 0.0; }, 0.0, 0.5);
  SimulationOptions o;
  o.h = 1e-4;
  const SimulationResult r = simulate_forward(model, zero, x0, 0.5, o);
  auto energy = [&](Eigen::Index k) {
    return a.kinetic_energy(r.v.row(k).transpose()) + a.strain_energy(r.y.row(k).transpose());
  };
  const double E0 = energy(0);
  double worst = 0.0;
  for (Eigen::Index k = 0; k < r.y.rows(); ++k) worst = std::max(worst, std::abs(energy(k) - E0));
  MESSAGE("relative energy error " << worst / E0);
  CHECK(worst / E0 <= 1e-6);
  CHECK(r.max_drift <= 1e-8);
}

TEST_CASE("inconsistent initial conditions are rejected") {
  const ancf::AncfAssembly a({}, {});
  const SystemModel model = ancf::assemble_system({}, {});
  MbsState x0 = beam_at_rest(a, 0.0, 0.0);
  x0.y[0] = 1e-3;  // left node off the pin
  CHECK_THROWS_AS(simulate_forward(model, rigid_equivalent_input(kTraj), x0, 0.1),
                  InconsistentInitialConditions);
  MbsState x1 = beam_at_rest(a, 0.0, 0.0);
  x1.v[1] = 0.5;  // pin velocity violated
  CHECK_THROWS_AS(simulate_forward(model, rigid_equivalent_input(kTraj), x1, 0.1),
                  InconsistentInitialConditions);
}

TEST_CASE("simulation is deterministic") {
  const ancf::AncfAssembly a({}, {});
  const SystemModel model = ancf::assemble_system({}, {});
  const MbsState x0 = beam_at_rest(a, 0.0, 0.0);
  const auto r1 = simulate_forward(model, rigid_equivalent_input(kTraj), x0, 0.3);
  const auto r2 = simulate_forward(model, rigid_equivalent_input(kTraj), x0, 0.3);
  CHECK(r1.y == r2.y);
  CHECK(r1.lambda == r2.lambda);
  CHECK(r1.newton_iterations == r2.newton_iterations);
}
