#include "stable_inv/trajectory.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "stable_inv/errors.hpp"

namespace stable_inv {

namespace {

// p(s) = 126 s^5 - 420 s^6 + 540 s^7 - 315 s^8 + 70 s^9 on s in [0, 1].
constexpr std::array<double, 10> kCoeffs = {0, 0, 0, 0, 0, 126, -420, 540, -315, 70};

double poly_derivative(double s, int order) {
  double value = 0.0;
  for (int p = static_cast<int>(kCoeffs.size()) - 1; p >= order; --p) {
    double factor = kCoeffs[p];
    for (int j = 0; j < order; ++j) factor *= (p - j);
    value = value * s + factor;
  }
  // Horner above accumulates in descending powers of s starting at p = order.
  return value;
}

}  // namespace

SmoothTransition::SmoothTransition(double z0, double zf, double t0, double tf)
    : z0_(z0), zf_(zf), t0_(t0), tf_(tf) {
  if (!(tf > t0)) throw ContractViolation("transition requires tf > t0");
}

double SmoothTransition::eval(double t, int deriv_order) const {
  if (deriv_order < 0 || deriv_order > 4) {
    throw ContractViolation("unsupported derivative order " + std::to_string(deriv_order));
  }
  if (t <= t0_) return deriv_order == 0 ? z0_ : 0.0;
  if (t >= tf_) return deriv_order == 0 ? zf_ : 0.0;
  const double duration = tf_ - t0_;
  const double s = (t - t0_) / duration;
  const double scale = (zf_ - z0_) / std::pow(duration, deriv_order);
  const double p = poly_derivative(s, deriv_order);
  return deriv_order == 0 ? z0_ + (zf_ - z0_) * p : scale * p;
}

double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

}  // namespace stable_inv
