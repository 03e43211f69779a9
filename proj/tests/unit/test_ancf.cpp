#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "stable_inv/ancf.hpp"
#include "stable_inv/errors.hpp"
#include "stable_inv/oracle/ancf_oracle.hpp"

using namespace stable_inv;
using namespace stable_inv::ancf;

TEST_CASE("coordinate count and validation") {
  for (int N : {1, 4, 10}) {
    AncfGeometry g;
    g.elements = N;
    CHECK(g.coordinates() == 6 * (N + 1));
    CHECK(assemble_system({}, g).dims.n == 6 * (N + 1));
    CHECK(assemble_system({}, g).dims.n_c == 3);
  }
  AncfGeometry bad;
  bad.elements = 0;
  CHECK_THROWS_AS(bad.validate(), ContractViolation);
  AncfMaterial m;
  m.nu = 0.5;
  CHECK_THROWS_AS(m.validate(), ContractViolation);
}

TEST_CASE("shape functions interpolate the nodal vectors") {
  const double L = 0.25;
  const ShapeValues a = shape_functions(0.0, 0.0, L);
  const ShapeValues b = shape_functions(1.0, 0.0, L);
  const double left[6] = {1, 0, 0, 0, 0, 0};
  const double right[6] = {0, 0, 0, 1, 0, 0};
  for (int i = 0; i < 6; ++i) {
    CHECK(a.s[i] == doctest::Approx(left[i]));
    CHECK(b.s[i] == doctest::Approx(right[i]));
  }
  // Gradients reproduce the position gradient of the straight configuration.
  Vector12 e = Vector12::Zero();
  e << 0, 0, 1, 0, 0, 1, L, 0, 1, 0, 0, 1;
  const ShapeGradients g = shape_gradients(0.37, 0.1, L);
  Eigen::Vector2d rx = Eigen::Vector2d::Zero(), ry = Eigen::Vector2d::Zero();
  for (int i = 0; i < 6; ++i) {
    rx += g.dx[i] * e.segment<2>(2 * i);
    ry += g.dy[i] * e.segment<2>(2 * i);
  }
  CHECK((rx - Eigen::Vector2d(1, 0)).norm() < 1e-13);
  CHECK((ry - Eigen::Vector2d(0, 1)).norm() < 1e-13);
}

TEST_CASE("mass matrix is symmetric positive definite and matches quadrature") {
  const AncfMaterial mat;
  const AncfGeometry geo;
  const Matrix12 M = element_mass_matrix(mat, geo);
  CHECK((M - M.transpose()).norm() < 1e-14 * M.norm());
  CHECK(M.llt().info() == Eigen::Success);
  const Matrix12 ref = oracle::brute_force_mass(mat, geo, 20);
  CHECK((M - ref).cwiseAbs().maxCoeff() < 1e-8 * ref.cwiseAbs().maxCoeff());

  const AncfAssembly asmb(mat, geo);
  const Matrix& Mg = asmb.mass_matrix();
  CHECK(Matrix(Mg).llt().info() == Eigen::Success);
  // Rigid translation carries the total mass.
  Vector tx = Vector::Zero(asmb.coordinates());
  for (int k = 0; k <= geo.elements; ++k) tx[6 * k] = 1.0;
  const double total = mat.rho * geo.area * geo.length;
  CHECK(tx.dot(Mg * tx) == doctest::Approx(total).epsilon(1e-12));
  CHECK(asmb.kinetic_energy(tx) == doctest::Approx(0.5 * total).epsilon(1e-12));
}

TEST_CASE("elastic energy against the quadrature oracle") {
  const AncfMaterial mat;
  const AncfGeometry geo;
  const auto inv = elastic_invariants(mat, geo);
  std::mt19937 rng(5);
  std::normal_distribution<double> n01;
  const double L = geo.element_length();
  for (int trial = 0; trial < 10; ++trial) {
    Vector12 e;
    e << 0, 0, 1, 0, 0, 1, L, 0, 1, 0, 0, 1;
    for (int i = 0; i < 12; ++i) e[i] += 0.02 * n01(rng) * (i % 6 < 2 ? L : 1.0);
    const double ref = oracle::quadrature_strain_energy(mat, geo, e);
    const auto el = element_elastic(inv, e, false);
    CHECK(el.energy == doctest::Approx(ref).epsilon(1e-10));
    const Vector12 f = oracle::finite_difference_force(mat, geo, e);
    CHECK((-el.gradient - f).norm() <= 1e-6 * f.norm());
  }
}

TEST_CASE("rigid motions are stress free") {
  const AncfAssembly asmb({}, {});
  for (double theta : {0.0, 0.5, 2.0, -1.2}) {
    const Vector e = rotate_rigidly(asmb.undeformed(), theta);
    CHECK(std::abs(asmb.strain_energy(e)) < 1e-9);
    // The angle is measured on the transverse slope vector.
    CHECK(cross_section_angle(e) ==
          doctest::Approx(std::remainder(theta + 0.5 * std::numbers::pi, 2 * std::numbers::pi)));
    CHECK(output_angle(e, 4) == doctest::Approx(std::remainder(theta, 2 * std::numbers::pi)));
    CHECK(pin_constraint(e).norm() < 1e-15);
  }
  // Stiffness form q = -K(e) e.
  Vector e = rotate_rigidly(asmb.undeformed(), 0.3);
  for (int i = 0; i < e.size(); ++i) e[i] += 1e-3 * std::cos(i);
  const Vector q = elastic_forces(asmb, e, false).q;
  CHECK((q + stiffness_matrix(asmb, e) * e).norm() < 1e-8 * q.norm());
}

TEST_CASE("actuator constraint is u minus the cross-section rate") {
  const AncfAssembly asmb({}, {});
  const Vector e = rotate_rigidly(asmb.undeformed(), 0.2);
  Vector edot = Vector::Zero(e.size());
  // Rotation rate w: d/dt of rotated slope vectors.
  const double w = 1.5;
  for (int k = 0; k < e.size() / 2; ++k) {
    edot[2 * k] = -w * e[2 * k + 1];
    edot[2 * k + 1] = w * e[2 * k];
  }
  CHECK(std::abs(actuator_constraint(e, edot, w)) < 1e-12);
  CHECK(actuator_constraint(e, edot, 0.0) == doctest::Approx(-w));
}

TEST_CASE("natural frequencies converge under refinement") {
  const AncfMaterial mat;
  AncfGeometry g8, g10;
  g8.elements = 8;
  g10.elements = 10;
  const auto w8 = pinned_natural_frequencies(AncfAssembly(mat, g8), 3);
  const auto w10 = pinned_natural_frequencies(AncfAssembly(mat, g10), 3);
  REQUIRE(w8.size() == 3);
  REQUIRE(w10.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(w10[i] > 0.0);
    CHECK(std::abs(w8[i] - w10[i]) / w10[i] < 0.01);
  }
  CHECK(w10[0] < w10[1]);
  // Hinged-free Euler-Bernoulli beam: beta L = 3.9266 for the first flexible mode.
  const double a = std::sqrt(g10.area);
  const double EI = mat.E * a * a * a * a / 12.0;
  const double bl = 3.92660231;
  const double w_eb = bl * bl / (g10.length * g10.length) * std::sqrt(EI / (mat.rho * g10.area));
  MESSAGE("first frequency " << w10[0] << " rad/s, Euler-Bernoulli " << w_eb);
  CHECK(std::abs(w10[0] - w_eb) / w_eb < 0.1);
}

TEST_CASE("node positions and centerline") {
  const AncfAssembly asmb({}, {});
  const Vector e = asmb.undeformed();
  const auto nodes = node_positions(e);
  CHECK(nodes.size() == 5);
  CHECK(nodes.back().x() == doctest::Approx(1.0));
  const auto line = centerline(e, 4, 0.25, 5);
  CHECK(line.size() == 21);
  for (const auto& p : line) CHECK(std::abs(p.y()) < 1e-15);
}

TEST_CASE("Gauss-Legendre integrates polynomials exactly") {
  std::vector<double> x, w;
  gauss_legendre(4, x, w);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * std::pow(x[i], 6);
  CHECK(s == doctest::Approx(2.0 / 7.0).epsilon(1e-14));
}
