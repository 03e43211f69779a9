#pragma once

#include <functional>
#include <vector>

#include "stable_inv/ancf.hpp"
#include "stable_inv/bvp.hpp"
#include "stable_inv/interpolation.hpp"
#include "stable_inv/mbs_core.hpp"
#include "stable_inv/trajectory.hpp"

namespace stable_inv {

/// Scalar input signal u(t) over a time window.
class InputSignal {
 public:
  /// Natural cubic spline through the samples, held constant outside them.
  static InputSignal from_samples(std::vector<double> t, std::vector<double> u);
  static InputSignal from_function(std::function<double(double)> u, double start, double end);

  Vector operator()(double t) const;
  double start() const { return start_; }
  double end() const { return end_; }

 private:
  std::function<double(double)> fn_;
  double start_ = 0.0, end_ = 0.0;
};

struct SimulationOptions {
  double h = 1e-3;
  double tolerance = 1e-10;
  int max_iterations = 25;
  double consistency_tolerance = 1e-8;
};

struct SimulationResult {
  std::vector<double> t;
  Matrix y, v;        // (steps + 1) x n
  Matrix lambda;      // (steps + 1) x n_c, step-averaged multipliers (row 0 repeats row 1)
  Matrix u;           // (steps + 1) x m
  Matrix z;           // (steps + 1) x m
  double max_drift = 0.0;  // max |c| over all steps, including the velocity-level pin rows
  int newton_iterations = 0;
};

/// Implicit midpoint steps of the constrained equations of motion. The
/// holonomic rows are enforced on positions and velocities at every step end
/// (their position-level multiplier enters the kinematic equation); the
/// remaining rows are enforced with the input at the step end.
SimulationResult simulate_forward(const SystemModel& model, const InputSignal& input,
                                  const MbsState& x0, double t_end,
                                  const SimulationOptions& options = {});

/// Velocity-actuated rigid beam: z = gamma, hence u = dz_d/dt.
InputSignal rigid_equivalent_input(const SmoothTransition& traj);

/// Straight beam rotated to angle theta and at rest.
MbsState beam_at_rest(const ancf::AncfAssembly& assembly, double theta, double t);

/// BVP initial guess for the servo DAE of the beam: forward-simulates the beam
/// with Young's modulus `stiff_E` under u_rigid on the mesh window and samples
/// [y v lambda u] at the nodes and midpoints. `h_sim` must divide h/2.
Vector initial_guess_stiff(const ancf::AncfMaterial& material, const ancf::AncfGeometry& geometry,
                           const SmoothTransition& traj, const HermiteSimpson& system,
                           double stiff_E = 1.2e9, double h_sim = 1e-3);

}  // namespace stable_inv
