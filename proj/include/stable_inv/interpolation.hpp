#pragma once

#include <vector>

namespace stable_inv {

/// Natural cubic spline through (t_i, y_i) with strictly increasing t.
/// Evaluation clamps to the end values outside [t_0, t_last].
class CubicSpline {
 public:
  CubicSpline() = default;
  CubicSpline(std::vector<double> t, std::vector<double> y);

  double operator()(double t) const;
  double derivative(double t) const;
  bool empty() const { return t_.empty(); }
  double front() const { return t_.front(); }
  double back() const { return t_.back(); }

 private:
  std::size_t segment(double t) const;
  std::vector<double> t_, y_, m_;  // m_: second derivatives at the knots
};

/// Cubic Hermite interpolant on [t0, t1] from values and slopes at both ends.
double hermite(double t0, double t1, double y0, double y1, double dy0, double dy1, double t);

}  // namespace stable_inv
