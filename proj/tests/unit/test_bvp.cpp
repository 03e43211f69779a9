#include <doctest.h>

#include <cmath>
#include <set>

#include "stable_inv/bvp.hpp"
#include "stable_inv/errors.hpp"

using namespace stable_inv;

namespace {

// x' = J x + b(t) with a saddle J: eigenvalues -2 (v_s = (1, 1)) and 3
// (v_u = (1, -1)).
class LinearSaddle final : public SemiExplicitDae {
 public:
  LinearSaddle() {
    Matrix V(2, 2);
    V << 1.0, 1.0, 1.0, -1.0;  // columns v_s, v_u
    Matrix D = Matrix::Zero(2, 2);
    D(0, 0) = -2.0;
    D(1, 1) = 3.0;
    J = V * D * V.inverse();
  }
  int state_dim() const override { return 2; }
  int algebraic_dim() const override { return 0; }
  Vector f(const Vector& x, const Vector&, double t) const override {
    Vector b = Vector::Zero(2);
    if (t > 0.0 && t < 1.0) b[0] = std::pow(std::sin(M_PI * t), 4);
    return J * x + b;
  }
  Matrix J;
};

// x1' = x2, x2' = 4 x1: solution with x1(0) = 1, x1(1) = 0 in closed form.
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

double harmonic_exact(double t) { return std::sinh(2.0 * (1.0 - t)) / std::sinh(2.0); }

// x1' = x2, x2' = -x1 + w,  0 = w - sin(t) - x1^2 / 10: semi-explicit index one.
class IndexOne final : public SemiExplicitDae {
 public:
  int state_dim() const override { return 2; }
  int algebraic_dim() const override { return 1; }
  Vector f(const Vector& x, const Vector& w, double) const override {
    Vector r(2);
    r << x[1], -x[0] + w[0];
    return r;
  }
  Vector g(const Vector& x, const Vector& w, double t) const override {
    Vector r(1);
    r << w[0] - std::sin(t) - 0.1 * x[0] * x[0];
    return r;
  }
};

Mesh unit_mesh(double h) {
  Mesh m;
  m.T0 = m.t0 = 0.0;
  m.Tf = m.tf = 1.0;
  m.h = h;
  return m;
}

double harmonic_error(double h) {
  Harmonic dae;
  Vector r0(2), r1(2);
  r0 << 1.0, 0.0;
  r1 << 0.0, 0.0;
  const auto bc = assemble_bc_approx({0}, {0}, r0, r1);
  HermiteSimpson hs(dae, unit_mesh(h), bc);
  const BvpSolution sol = solve_bvp(hs, guess_from(hs, [](double) { return Vector(Vector::Zero(2)); }));
  double err = 0.0;
  for (std::size_t k = 0; k < sol.t.size(); ++k) {
    err = std::max(err, std::abs(sol.nodes(static_cast<Eigen::Index>(k), 0) - harmonic_exact(sol.t[k])));
  }
  return err;
}

BvpSolution synthetic(const std::function<double(double)>& node_w,
                      const std::function<double(double)>& mid_w, double h) {
  BvpSolution s;
  s.mesh = unit_mesh(h);
  const int K = s.mesh.nodes();
  s.nodes = Matrix::Zero(K, 2);
  s.midpoints = Matrix::Zero(K - 1, 1);
  s.rates = Matrix::Zero(K, 1);
  for (int k = 0; k < K; ++k) {
    const double t = s.mesh.time(k);
    s.t.push_back(t);
    s.nodes(k, 0) = std::sin(t);
    s.rates(k, 0) = std::cos(t);
    s.nodes(k, 1) = node_w(t);
    if (k + 1 < K) s.midpoints(k, 0) = mid_w(t + 0.5 * h);
  }
  return s;
}

}  // namespace

TEST_CASE("mesh construction and validation") {
  const Mesh m = Mesh::symmetric(0.0, 1.0, 0.5, 0.01);
  CHECK(m.T0 == -0.5);
  CHECK(m.Tf == 1.5);
  CHECK(m.intervals() == 200);
  CHECK(m.nodes() == 201);
  CHECK(m.time(200) == doctest::Approx(1.5));
  CHECK_THROWS_AS(Mesh::symmetric(0.0, 1.0, 0.5, 0.03), ContractViolation);
  CHECK_THROWS_AS(Mesh::symmetric(0.0, 1.0, -0.1, 0.01), ContractViolation);
  CHECK_THROWS_AS(Mesh::symmetric(0.0, 1.0, 0.5, 0.0), ContractViolation);
}

TEST_CASE("squareness is enforced") {
  Harmonic dae;
  const Vector r = Vector::Zero(2);
  try {
    HermiteSimpson hs(dae, unit_mesh(0.1), assemble_bc_approx({0, 1}, {0}, r, r));
    FAIL("expected SquarenessError");
  } catch (const SquarenessError& e) {
    CHECK(e.expected() == 2);
    CHECK(e.provided() == 3);
  }
  CHECK_THROWS_AS(assemble_bc_approx({}, {0}, r, r), ContractViolation);
  CHECK_THROWS_AS(assemble_bc_approx({2}, {0}, r, r), ContractViolation);
  CHECK_THROWS_AS(assemble_bc_original(Matrix(0, 2), Matrix::Ones(1, 2), r, r),
                  HyperbolicityError);
}

TEST_CASE("Hermite-Simpson converges at fourth order at the nodes") {
  const double e1 = harmonic_error(0.1), e2 = harmonic_error(0.05), e3 = harmonic_error(0.025);
  const double p1 = std::log2(e1 / e2), p2 = std::log2(e2 / e3);
  MESSAGE("errors " << e1 << " " << e2 << " " << e3 << ", orders " << p1 << " " << p2);
  CHECK(p1 >= 3.8);
  CHECK(p2 >= 3.8);
}

TEST_CASE("jacobian matches finite differences and is banded") {
  IndexOne dae;
  Vector r0(3), r1(3);
  r0 << 0.3, 0.0, 0.0;
  r1 << 0.0, 0.0, 0.0;
  HermiteSimpson hs(dae, unit_mesh(0.1), assemble_bc_approx({0}, {0}, r0, r1));
  Vector Z(hs.size());
  for (int i = 0; i < Z.size(); ++i) Z[i] = 0.1 * std::sin(1.3 * i);
  const Eigen::SparseMatrix<double> J = hs.jacobian(Z);
  CHECK(J.rows() == hs.size());
  CHECK(J.cols() == hs.size());
  const Matrix Jd(J);
  Matrix fd(hs.size(), hs.size());
  for (int j = 0; j < Z.size(); ++j) {
    Vector zp = Z, zm = Z;
    zp[j] += 1e-6;
    zm[j] -= 1e-6;
    fd.col(j) = (hs.residual(zp) - hs.residual(zm)) / 2e-6;
  }
  CHECK((Jd - fd).cwiseAbs().maxCoeff() < 1e-6);
  // Every nonzero couples unknowns at most one interval apart.
  const int block = hs.node_offset(1);
  for (int k = 0; k < J.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(J, k); it; ++it) {
      if (it.value() == 0.0) continue;
      CHECK(std::abs(it.row() / block - static_cast<int>(it.col()) / block) <= 2);
    }
  }
  CHECK(J.nonZeros() < hs.size() * 3 * block);
}

TEST_CASE("algebraic rows and boundary conditions hold after the solve") {
  IndexOne dae;
  Vector r0(3), r1(3);
  r0 << 0.3, 0.0, 0.0;
  r1 << 0.0, 0.0, 0.0;
  HermiteSimpson hs(dae, unit_mesh(0.05), assemble_bc_approx({0}, {0}, r0, r1));
  const BvpSolution sol =
      solve_bvp(hs, guess_from(hs, [](double) { return Vector(Vector::Zero(3)); }), {1e-12});
  CHECK(sol.bc_residual <= 1e-10);
  CHECK(std::abs(sol.nodes(0, 0) - 0.3) <= 1e-10);
  for (int k = 0; k < sol.nodes.rows(); ++k) {
    const double x = sol.nodes(k, 0), w = sol.nodes(k, 2);
    CHECK(std::abs(w - std::sin(sol.t[k]) - 0.1 * x * x) <= 1e-10);
  }
  // Newton log: residuals recorded before each step, final below tolerance.
  REQUIRE(!sol.log.empty());
  CHECK(sol.residual <= 1e-12);
  CHECK(sol.iterations == static_cast<int>(sol.log.size()));
}

TEST_CASE("original eigenspace conditions against pinned conditions") {
  LinearSaddle dae;
  // B_s annihilates v_u = (1, -1), B_u annihilates v_s = (1, 1).
  Matrix Bs(1, 2), Bu(1, 2);
  Bs << 1.0, 1.0;
  Bu << 1.0, -1.0;
  const Vector zero = Vector::Zero(2);
  std::vector<double> errors;
  for (double dT : {0.5, 1.0, 2.0}) {
    Mesh m = Mesh::symmetric(0.0, 1.0, dT, 0.01);
    HermiteSimpson ho(dae, m, assemble_bc_original(Bs, Bu, zero, zero));
    HermiteSimpson ha(dae, m, assemble_bc_approx({0}, {0}, zero, zero));
    auto g = [](double) { return Vector(Vector::Zero(2)); };
    const BvpSolution so = solve_bvp(ho, guess_from(ho, g));
    const BvpSolution sa = solve_bvp(ha, guess_from(ha, g));
    // The original solution starts in the unstable and ends in the stable eigenspace.
    CHECK(std::abs(so.nodes(0, 0) + so.nodes(0, 1)) < 1e-10);
    const auto last = so.nodes.rows() - 1;
    CHECK(std::abs(so.nodes(last, 0) - so.nodes(last, 1)) < 1e-10);
    const SolutionComparison c = compare_solutions(sa, so, 2, {0, 1});
    errors.push_back(c.max_error);
    if (dT == 2.0) {
      // The T0 error rides the stable mode forward, the Tf error the unstable one.
      CHECK(c.early_rate == doctest::Approx(-2.0).epsilon(0.1));
      CHECK(c.late_rate == doctest::Approx(3.0).epsilon(0.1));
    }
  }
  CHECK(errors[0] > errors[1]);
  CHECK(errors[1] > errors[2]);
}

TEST_CASE("log-linear slope of an exponential") {
  std::vector<double> t, v;
  for (int i = 0; i <= 100; ++i) {
    t.push_back(0.01 * i);
    v.push_back(2.0 * std::exp(-1.7 * t.back()));
  }
  v[3] = 0.0;  // skipped
  CHECK(log_linear_slope(t, v, 0.0, 1.0) == doctest::Approx(-1.7).epsilon(1e-12));
  CHECK(log_linear_slope(t, v, 0.5, 1.0) == doctest::Approx(-1.7).epsilon(1e-12));
}

TEST_CASE("Simpson extraction is blind to the node/midpoint mode") {
  const double L = 3.7;
  auto smooth = [](double t) { return 1.0 + t * t; };
  const BvpSolution s = synthetic([&](double t) { return smooth(t) + L; },
                                  [&](double t) { return smooth(t) - 0.5 * L; }, 0.01);
  const Feedforward raw = extract_feedforward(s, 1);
  CHECK(std::abs(raw.u[10] - smooth(raw.t[10])) == doctest::Approx(L));
  const Feedforward ff = extract_feedforward_simpson(s, 1, 0);
  REQUIRE(ff.t.size() == s.t.size() + 1);
  CHECK(ff.t.front() == 0.0);
  CHECK(ff.t.back() == doctest::Approx(1.0));
  for (std::size_t i = 1; i + 1 < ff.t.size(); ++i) {
    // Simpson average of a quadratic: exact up to h^2 / 12 from the midpoint value.
    CHECK(std::abs(ff.u[i] - smooth(ff.t[i])) < 1e-4);
  }
  CHECK_THROWS_AS(extract_feedforward_simpson(s, 1, 1), ContractViolation);
}

TEST_CASE("rate extraction differentiates a node coordinate") {
  const BvpSolution s = synthetic([](double) { return 0.0; }, [](double) { return 0.0; }, 0.01);
  const Feedforward ff = extract_feedforward_rate(s, [](const Vector& z) { return z[0]; });
  REQUIRE(ff.t.size() == s.t.size());
  for (std::size_t i = 5; i + 5 < ff.t.size(); ++i) {
    CHECK(std::abs(ff.u[i] - std::cos(ff.t[i])) < 1e-5);
  }
}

TEST_CASE("sample reproduces nodes and interpolates between them") {
  const BvpSolution s = synthetic([](double t) { return t; }, [](double t) { return t; }, 0.1);
  CHECK(sample(s, 1, 0.3)[0] == doctest::Approx(std::sin(0.3)).epsilon(1e-14));
  CHECK(std::abs(sample(s, 1, 0.35)[0] - std::sin(0.35)) < 1e-6);
  CHECK(sample(s, 1, 0.35)[1] == doctest::Approx(0.35));
}
