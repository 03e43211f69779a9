#pragma once

#include <Eigen/Sparse>
#include <functional>
#include <string>
#include <vector>

#include "stable_inv/dae.hpp"
#include "stable_inv/mbs_core.hpp"

namespace stable_inv {

/// Uniform mesh over the simulation window [T0, Tf] that contains the
/// trajectory window [t0, tf].
struct Mesh {
  double T0 = 0.0, Tf = 1.0;
  double t0 = 0.0, tf = 1.0;
  double h = 0.01;

  /// Builds a mesh with the window widened by dT on both sides.
  static Mesh symmetric(double t0, double tf, double dT, double h);

  void validate() const;
  int intervals() const;
  int nodes() const { return intervals() + 1; }
  double time(int k) const { return T0 + k * h; }
};

enum class BcMode { original, approximated };

/// Boundary rows acting on the node vector z = [x; w]:
///   at_T0 (z(T0) - ref_T0) = 0,   at_Tf (z(Tf) - ref_Tf) = 0,
/// with the equilibria of the initial and final output values as references.
struct BoundaryConditions {
  BcMode mode = BcMode::approximated;
  Matrix at_T0;
  Matrix at_Tf;
  Vector ref_T0;
  Vector ref_Tf;

  int rows() const { return static_cast<int>(at_T0.rows() + at_Tf.rows()); }
};

/// Eigenspace conditions. `B_s` annihilates the unstable eigenvectors and is
/// imposed at T0 (initial deviation in the unstable eigenspace); `B_u`
/// annihilates the stable eigenvectors and is imposed at Tf. The rows act on
/// the components listed in `internal` (all components when empty). `pin_T0`
/// and `pin_Tf` add unit rows for further components.
BoundaryConditions assemble_bc_original(const Matrix& B_s, const Matrix& B_u, const Vector& ref_T0,
                                        const Vector& ref_Tf,
                                        const std::vector<int>& internal = {},
                                        const std::vector<int>& pin_T0 = {},
                                        const std::vector<int>& pin_Tf = {});

/// Binary selectors pinning the listed components to the references at T0 and Tf.
BoundaryConditions assemble_bc_approx(const std::vector<int>& at_T0, const std::vector<int>& at_Tf,
                                      const Vector& ref_T0, const Vector& ref_Tf);

/// Throws SquarenessError unless the boundary rows match the differential
/// dimension of the discretized system.
void check_squareness(const BoundaryConditions& bc, int state_dim);

/// Hermite-Simpson collocation of xdot = f(x, w, t), 0 = g(x, w, t).
///
/// Unknown layout: for every node k the vector z_k = [x_k; w_k], followed for
/// k < K-1 by the midpoint algebraic variables wm_k. Rows per interval: the
/// nx Simpson defects and the algebraic rows at the midpoint; rows per node:
/// the algebraic rows. The T0 boundary rows come first and the Tf rows last.
class HermiteSimpson {
 public:
  HermiteSimpson(const SemiExplicitDae& dae, Mesh mesh, BoundaryConditions bc);

  int nx() const { return nx_; }
  int nw() const { return nw_; }
  int node_size() const { return nx_ + nw_; }
  int size() const { return size_; }
  const Mesh& mesh() const { return mesh_; }
  const BoundaryConditions& bc() const { return bc_; }
  const SemiExplicitDae& dae() const { return dae_; }

  int node_offset(int k) const { return k * (nx_ + 2 * nw_); }
  int midpoint_offset(int k) const { return node_offset(k) + nx_ + nw_; }

  /// Stacks node values (K x node_size) and midpoint algebraic values
  /// ((K-1) x nw) into the global unknown.
  Vector pack(const Matrix& nodes, const Matrix& midpoints) const;
  void unpack(const Vector& Z, Matrix& nodes, Matrix& midpoints) const;

  Vector residual(const Vector& Z) const;
  Eigen::SparseMatrix<double> jacobian(const Vector& Z) const;

 private:
  const SemiExplicitDae& dae_;
  Mesh mesh_;
  BoundaryConditions bc_;
  int nx_, nw_, size_;
};

struct NewtonOptions {
  double tolerance = 1e-8;
  int max_iterations = 100;
  double min_step = 1.0 / (1 << 20);
};

struct NewtonRecord {
  int iteration = 0;
  double residual = 0.0;  // max-norm before the step
  double step = 0.0;      // accepted damping factor
};

struct BvpSolution {
  Mesh mesh;
  std::vector<double> t;  // node times
  Matrix nodes;           // K x (nx + nw)
  Matrix midpoints;       // (K-1) x nw
  Matrix rates;           // K x nx, f at the nodes
  std::vector<NewtonRecord> log;
  double residual = 0.0;
  double bc_residual = 0.0;
  int iterations = 0;
};

/// Damped Newton on the collocation system starting from `guess` (global
/// unknown). Throws NoConvergence with the residual history, or
/// RankDeficiency when the Jacobian cannot be factorized.
BvpSolution solve_bvp(const HermiteSimpson& system, const Vector& guess,
                      const NewtonOptions& options = {});

/// Guess built from a function of time returning the node vector [x; w].
Vector guess_from(const HermiteSimpson& system, const std::function<Vector(double)>& node_value);

/// Node vector of a solution at time t: cubic Hermite in x using the stored
/// rates, linear in w.
Vector sample(const BvpSolution& sol, int nx, double t);

struct SolutionComparison {
  std::vector<double> t;
  std::vector<double> error;
  double early_rate = 0.0;  // log-linear slope over [T0, t0]
  double late_rate = 0.0;   // log-linear slope over [tf, Tf]
  double max_error = 0.0;
};

/// e(t) = || P (z_a(t) - z_b(t)) || on the nodes of `a`, where P selects the
/// listed components; `b` is interpolated when the meshes differ.
SolutionComparison compare_solutions(const BvpSolution& a, const BvpSolution& b, int nx,
                                     const std::vector<int>& projection);

/// Least-squares slope of log(values) against t over [lo, hi]; non-positive
/// values are skipped.
double log_linear_slope(const std::vector<double>& t, const std::vector<double>& values,
                        double lo, double hi);

struct Feedforward {
  std::vector<double> t;
  std::vector<double> u;
};

/// u-component `index` of the node vector over the whole mesh.
Feedforward extract_feedforward(const BvpSolution& sol, int index);

/// Simpson-weighted interval averages (w_k + 4 wm_k + w_{k+1}) / 6 of the
/// algebraic component `index` (offset within w), placed at the interval
/// midpoints and extrapolated linearly to T0 and Tf. The average is blind to the node/midpoint mode w_k = L,
/// wm_k = -L/2 that collocation of high-index rows leaves undetermined.
Feedforward extract_feedforward_simpson(const BvpSolution& sol, int nx, int index);

/// Time derivative of a scalar function of the node vector, taken through a
/// natural cubic spline of its node values. Used when the input is defined
/// kinematically (u = d gamma/dt): the collocated positions are smooth while
/// the nodal algebraic values can carry a node/midpoint oscillation.
Feedforward extract_feedforward_rate(const BvpSolution& sol,
                                     const std::function<double(const Vector&)>& coordinate);

}  // namespace stable_inv
