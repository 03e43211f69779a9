#pragma once

namespace stable_inv {

/// Rest-to-rest transition from z0 at t0 to zf at tf.
///
/// Uses the degree-9 polynomial whose first four derivatives vanish at both
/// ends, so the profile is C^4 across the constant extensions.
class SmoothTransition {
 public:
  SmoothTransition(double z0, double zf, double t0, double tf);

  /// Derivative of order 0..4 at time t. Throws ContractViolation for higher orders.
  double eval(double t, int deriv_order = 0) const;

  double z0() const { return z0_; }
  double zf() const { return zf_; }
  double t0() const { return t0_; }
  double tf() const { return tf_; }

 private:
  double z0_, zf_, t0_, tf_;
};

double deg_to_rad(double deg);
double rad_to_deg(double rad);

}  // namespace stable_inv
