#include <doctest.h>

#include <cmath>

#include "stable_inv/errors.hpp"
#include "stable_inv/trajectory.hpp"

using namespace stable_inv;

namespace {
const SmoothTransition kSwing(0.0, deg_to_rad(30.0), 0.0, 1.0);
}

TEST_CASE("end values and midpoint") {
  CHECK(kSwing.eval(0.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(rad_to_deg(kSwing.eval(1.0)) == doctest::Approx(30.0).epsilon(1e-14));
  CHECK(rad_to_deg(kSwing.eval(0.5)) == doctest::Approx(15.0).epsilon(1e-14));
}

TEST_CASE("constant extensions") {
  for (double t : {-3.0, -0.1, 1.1, 7.0}) {
    CHECK(kSwing.eval(t) == (t < 0 ? 0.0 : kSwing.zf()));
    for (int k = 1; k <= 4; ++k) CHECK(kSwing.eval(t, k) == 0.0);
  }
}

TEST_CASE("first four derivatives vanish at both ends") {
  for (int k = 1; k <= 4; ++k) {
    CHECK(std::abs(kSwing.eval(1e-12, k)) < 1e-7);
    CHECK(std::abs(kSwing.eval(1.0 - 1e-12, k)) < 1e-7);
  }
  // Fifth-order contact: z - z0 ~ c s^5 near t0.
  const double s = 1e-3;
  CHECK(kSwing.eval(s) / std::pow(s, 5) == doctest::Approx(126.0 * kSwing.zf()).epsilon(1e-2));
}

TEST_CASE("derivatives are consistent with finite differences") {
  const double h = 1e-5;
  for (double t : {0.1, 0.37, 0.5, 0.83}) {
    for (int k = 0; k < 4; ++k) {
      const double fd = (kSwing.eval(t + h, k) - kSwing.eval(t - h, k)) / (2 * h);
      CHECK(kSwing.eval(t, k + 1) == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
    }
  }
}

TEST_CASE("monotone on the transition window") {
  double prev = kSwing.eval(0.0);
  for (int i = 1; i <= 1000; ++i) {
    const double z = kSwing.eval(i / 1000.0);
    CHECK(z >= prev);
    prev = z;
  }
  const SmoothTransition down(1.0, -2.0, 2.0, 5.0);
  for (int i = 1; i < 100; ++i) CHECK(down.eval(2.0 + 0.03 * i, 1) <= 0.0);
}

TEST_CASE("odd symmetry about the midpoint") {
  const SmoothTransition tr(0.2, 1.4, -1.0, 3.0);
  const double mid = 0.5 * (tr.z0() + tr.zf());
  for (double d : {0.1, 0.7, 1.9}) {
    CHECK(tr.eval(1.0 + d) - mid == doctest::Approx(mid - tr.eval(1.0 - d)).epsilon(1e-13));
  }
}

TEST_CASE("integral of the rate equals the transition size") {
  const int n = 2000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += kSwing.eval((i + 0.5) / n, 1) / n;
  CHECK(rad_to_deg(sum) == doctest::Approx(30.0).epsilon(1e-6));
}

TEST_CASE("contract violations") {
  CHECK_THROWS_AS(SmoothTransition(0, 1, 1.0, 1.0), ContractViolation);
  CHECK_THROWS_AS(kSwing.eval(0.5, 5), ContractViolation);
  CHECK_THROWS_AS(kSwing.eval(0.5, -1), ContractViolation);
}
