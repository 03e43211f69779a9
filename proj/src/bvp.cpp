#include "stable_inv/bvp.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>

#include "stable_inv/errors.hpp"
#include "stable_inv/interpolation.hpp"

namespace stable_inv {

Mesh Mesh::symmetric(double t0, double tf, double dT, double h) {
  Mesh m;
  m.t0 = t0;
  m.tf = tf;
  m.T0 = t0 - dT;
  m.Tf = tf + dT;
  m.h = h;
  m.validate();
  return m;
}

void Mesh::validate() const {
  if (!(T0 <= t0 && t0 < tf && tf <= Tf)) {
    throw ContractViolation("mesh requires T0 <= t0 < tf <= Tf");
  }
  if (!(h > 0)) throw ContractViolation("mesh step must be positive");
  const double steps = (Tf - T0) / h;
  if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps)) {
    throw ContractViolation("(Tf - T0) / h must be an integer");
  }
}

int Mesh::intervals() const { return static_cast<int>(std::lround((Tf - T0) / h)); }

namespace {

Matrix unit_rows(const std::vector<int>& idx, int dim) {
  Matrix rows = Matrix::Zero(static_cast<Eigen::Index>(idx.size()), dim);
  for (std::size_t r = 0; r < idx.size(); ++r) {
    if (idx[r] < 0 || idx[r] >= dim) {
      throw ContractViolation("boundary selection index " + std::to_string(idx[r]) +
                              " outside [0, " + std::to_string(dim) + ")");
    }
    rows(static_cast<Eigen::Index>(r), idx[r]) = 1.0;
  }
  return rows;
}

Matrix embed(const Matrix& rows, const std::vector<int>& internal, int dim) {
  if (internal.empty()) {
    if (rows.cols() != dim) throw ContractViolation("eigenspace rows do not match node size");
    return rows;
  }
  if (rows.cols() != static_cast<Eigen::Index>(internal.size())) {
    throw ContractViolation("eigenspace rows do not match the internal coordinates");
  }
  Matrix out = Matrix::Zero(rows.rows(), dim);
  for (std::size_t j = 0; j < internal.size(); ++j) out.col(internal[j]) = rows.col(j);
  return out;
}

Matrix stack(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() + b.rows(), std::max(a.cols(), b.cols()));
  out << a, b;
  return out;
}

}  // namespace

BoundaryConditions assemble_bc_original(const Matrix& B_s, const Matrix& B_u, const Vector& ref_T0,
                                        const Vector& ref_Tf,
                                        const std::vector<int>& internal,
                                        const std::vector<int>& pin_T0,
                                        const std::vector<int>& pin_Tf) {
  if (B_s.rows() == 0 || B_u.rows() == 0) {
    throw HyperbolicityError("original boundary conditions need stable and unstable eigenvalues");
  }
  const int dim = static_cast<int>(ref_T0.size());
  if (ref_Tf.size() != dim) throw ContractViolation("boundary references differ in size");
  BoundaryConditions bc;
  bc.mode = BcMode::original;
  bc.ref_T0 = ref_T0;
  bc.ref_Tf = ref_Tf;
  bc.at_T0 = stack(embed(B_s, internal, dim), unit_rows(pin_T0, dim));
  bc.at_Tf = stack(embed(B_u, internal, dim), unit_rows(pin_Tf, dim));
  return bc;
}

BoundaryConditions assemble_bc_approx(const std::vector<int>& at_T0, const std::vector<int>& at_Tf,
                                      const Vector& ref_T0, const Vector& ref_Tf) {
  if (at_T0.empty() || at_Tf.empty()) {
    throw ContractViolation("approximated boundary conditions need rows at both ends");
  }
  const int dim = static_cast<int>(ref_T0.size());
  if (ref_Tf.size() != dim) throw ContractViolation("boundary references differ in size");
  BoundaryConditions bc;
  bc.mode = BcMode::approximated;
  bc.ref_T0 = ref_T0;
  bc.ref_Tf = ref_Tf;
  bc.at_T0 = unit_rows(at_T0, dim);
  bc.at_Tf = unit_rows(at_Tf, dim);
  return bc;
}

void check_squareness(const BoundaryConditions& bc, int state_dim) {
  if (bc.rows() != state_dim) {
    throw SquarenessError(state_dim, bc.rows());
  }
}

HermiteSimpson::HermiteSimpson(const SemiExplicitDae& dae, Mesh mesh, BoundaryConditions bc)
    : dae_(dae), mesh_(mesh), bc_(std::move(bc)), nx_(dae.state_dim()), nw_(dae.algebraic_dim()) {
  mesh_.validate();
  check_squareness(bc_, nx_);
  if (bc_.ref_T0.size() != nx_ + nw_ || bc_.ref_Tf.size() != nx_ + nw_ || bc_.at_T0.cols() != nx_ + nw_ ||
      bc_.at_Tf.cols() != nx_ + nw_) {
    throw ContractViolation("boundary rows must act on the node vector [x; w]");
  }
  const int K = mesh_.nodes();
  size_ = K * (nx_ + nw_) + (K - 1) * nw_;
}

Vector HermiteSimpson::pack(const Matrix& nodes, const Matrix& midpoints) const {
  const int K = mesh_.nodes();
  if (nodes.rows() != K || nodes.cols() != node_size() || midpoints.rows() != K - 1 ||
      midpoints.cols() != nw_) {
    throw ContractViolation("pack: node or midpoint table has the wrong shape");
  }
  Vector Z(size_);
  for (int k = 0; k < K; ++k) {
    Z.segment(node_offset(k), node_size()) = nodes.row(k).transpose();
    if (k + 1 < K && nw_ > 0) Z.segment(midpoint_offset(k), nw_) = midpoints.row(k).transpose();
  }
  return Z;
}

void HermiteSimpson::unpack(const Vector& Z, Matrix& nodes, Matrix& midpoints) const {
  const int K = mesh_.nodes();
  nodes.resize(K, node_size());
  midpoints.resize(K - 1, nw_);
  for (int k = 0; k < K; ++k) {
    nodes.row(k) = Z.segment(node_offset(k), node_size()).transpose();
    if (k + 1 < K && nw_ > 0) midpoints.row(k) = Z.segment(midpoint_offset(k), nw_).transpose();
  }
}

namespace {

struct Point {
  Vector x, w, f, g;
  DaeJacobians J;
};

Point evaluate(const SemiExplicitDae& dae, const Vector& x, const Vector& w, double t,
               bool with_jacobian) {
  Point p{x, w, dae.f(x, w, t), dae.g(x, w, t), {}};
  if (with_jacobian) p.J = dae.jacobians(x, w, t);
  return p;
}

void add_block(std::vector<Eigen::Triplet<double>>& trip, int row, int col, const Matrix& block) {
  for (Eigen::Index j = 0; j < block.cols(); ++j) {
    for (Eigen::Index i = 0; i < block.rows(); ++i) {
      trip.emplace_back(row + static_cast<int>(i), col + static_cast<int>(j), block(i, j));
    }
  }
}

}  // namespace

Vector HermiteSimpson::residual(const Vector& Z) const {
  if (Z.size() != size_) throw ContractViolation("residual: unknown vector has the wrong size");
  const int K = mesh_.nodes();
  const double h = mesh_.h;
  const int r0 = static_cast<int>(bc_.at_T0.rows());
  const int stride = nx_ + 2 * nw_;
  Vector R(size_);
  R.head(r0) = bc_.at_T0 * (Z.segment(node_offset(0), node_size()) - bc_.ref_T0);
  R.tail(bc_.at_Tf.rows()) =
      bc_.at_Tf * (Z.segment(node_offset(K - 1), node_size()) - bc_.ref_Tf);

  auto node = [&](int k) {
    const Vector x = Z.segment(node_offset(k), nx_);
    const Vector w = Z.segment(node_offset(k) + nx_, nw_);
    return evaluate(dae_, x, w, mesh_.time(k), false);
  };
  Point left = node(0);
  for (int k = 0; k < K; ++k) {
    const int row = r0 + k * stride;
    if (nw_ > 0) R.segment(row, nw_) = left.g;
    if (k + 1 == K) break;
    Point right = node(k + 1);
    const Vector xm = 0.5 * (left.x + right.x) + h / 8.0 * (left.f - right.f);
    const Vector wm = Z.segment(midpoint_offset(k), nw_);
    const Point mid = evaluate(dae_, xm, wm, mesh_.time(k) + 0.5 * h, false);
    R.segment(row + nw_, nx_) = right.x - left.x - h / 6.0 * (left.f + 4.0 * mid.f + right.f);
    if (nw_ > 0) R.segment(row + nw_ + nx_, nw_) = mid.g;
    left = std::move(right);
  }
  return R;
}

Eigen::SparseMatrix<double> HermiteSimpson::jacobian(const Vector& Z) const {
  const int K = mesh_.nodes();
  const double h = mesh_.h;
  const int r0 = static_cast<int>(bc_.at_T0.rows());
  const int rf = static_cast<int>(bc_.at_Tf.rows());
  const int stride = nx_ + 2 * nw_;
  const Matrix I = Matrix::Identity(nx_, nx_);
  std::vector<Eigen::Triplet<double>> trip;

  add_block(trip, 0, node_offset(0), bc_.at_T0);
  add_block(trip, size_ - rf, node_offset(K - 1), bc_.at_Tf);

  auto node = [&](int k) {
    const Vector x = Z.segment(node_offset(k), nx_);
    const Vector w = Z.segment(node_offset(k) + nx_, nw_);
    return evaluate(dae_, x, w, mesh_.time(k), true);
  };
  Point left = node(0);
  for (int k = 0; k < K; ++k) {
    const int row = r0 + k * stride;
    const int cl = node_offset(k);
    if (nw_ > 0) {
      add_block(trip, row, cl, left.J.g_x);
      add_block(trip, row, cl + nx_, left.J.g_w);
    }
    if (k + 1 == K) break;
    Point right = node(k + 1);
    const int cr = node_offset(k + 1);
    const int cm = midpoint_offset(k);
    const Vector xm = 0.5 * (left.x + right.x) + h / 8.0 * (left.f - right.f);
    const Vector wm = Z.segment(cm, nw_);
    const Point mid = evaluate(dae_, xm, wm, mesh_.time(k) + 0.5 * h, true);

    // Sensitivities of the midpoint state.
    const Matrix dxm_dxl = 0.5 * I + h / 8.0 * left.J.f_x;
    const Matrix dxm_dxr = 0.5 * I - h / 8.0 * right.J.f_x;
    const Matrix dxm_dwl = h / 8.0 * left.J.f_w;
    const Matrix dxm_dwr = -h / 8.0 * right.J.f_w;

    const int rd = row + nw_;
    const Matrix Fm = 4.0 * mid.J.f_x;
    add_block(trip, rd, cl, -I - h / 6.0 * (left.J.f_x + Fm * dxm_dxl));
    add_block(trip, rd, cr, I - h / 6.0 * (right.J.f_x + Fm * dxm_dxr));
    if (nw_ > 0) {
      add_block(trip, rd, cl + nx_, -h / 6.0 * (left.J.f_w + Fm * dxm_dwl));
      add_block(trip, rd, cr + nx_, -h / 6.0 * (right.J.f_w + Fm * dxm_dwr));
      add_block(trip, rd, cm, -h / 6.0 * 4.0 * mid.J.f_w);

      const int ra = rd + nx_;
      add_block(trip, ra, cl, mid.J.g_x * dxm_dxl);
      add_block(trip, ra, cr, mid.J.g_x * dxm_dxr);
      add_block(trip, ra, cl + nx_, mid.J.g_x * dxm_dwl);
      add_block(trip, ra, cr + nx_, mid.J.g_x * dxm_dwr);
      add_block(trip, ra, cm, mid.J.g_w);
    }
    left = std::move(right);
  }
  Eigen::SparseMatrix<double> J(size_, size_);
  J.setFromTriplets(trip.begin(), trip.end());
  return J;
}

BvpSolution solve_bvp(const HermiteSimpson& system, const Vector& guess,
                      const NewtonOptions& options) {
  if (guess.size() != system.size()) {
    throw ContractViolation("initial guess has size " + std::to_string(guess.size()) +
                            ", expected " + std::to_string(system.size()));
  }
  Vector Z = guess;
  Vector R = system.residual(Z);
  double merit = R.squaredNorm();
  std::vector<NewtonRecord> log;
  std::vector<double> history;
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  bool analyzed = false;
  int it = 0;
  for (;; ++it) {
    const double rmax = R.cwiseAbs().maxCoeff();
    history.push_back(rmax);
    if (!std::isfinite(rmax)) throw NoConvergence("residual became non-finite", history);
    if (rmax <= options.tolerance) break;
    if (it >= options.max_iterations) {
      throw NoConvergence("Newton did not converge in " + std::to_string(options.max_iterations) +
                              " iterations",
                          history);
    }
    Eigen::SparseMatrix<double> J = system.jacobian(Z);
    J.makeCompressed();
    if (!analyzed) {
      lu.analyzePattern(J);
      analyzed = true;
    }
    lu.factorize(J);
    if (lu.info() != Eigen::Success) {
      throw RankDeficiency("collocation Jacobian is singular: " + lu.lastErrorMessage());
    }
    const Vector dZ = lu.solve(-R);
    if (!dZ.allFinite()) throw RankDeficiency("collocation Jacobian is numerically singular");
    double step = 1.0;
    for (;;) {
      const Vector trial = Z + step * dZ;
      Vector Rt;
      bool ok = true;
      try {
        Rt = system.residual(trial);
        ok = Rt.allFinite();
      } catch (const Error&) {
        ok = false;
      }
      if (ok && Rt.squaredNorm() < merit) {
        Z = trial;
        R = std::move(Rt);
        merit = R.squaredNorm();
        break;
      }
      step *= 0.5;
      if (step < options.min_step) {
        throw NoConvergence("line search failed below the minimum step", history);
      }
    }
    log.push_back({it, rmax, step});
  }

  BvpSolution sol;
  sol.mesh = system.mesh();
  system.unpack(Z, sol.nodes, sol.midpoints);
  const int K = system.mesh().nodes();
  const int nx = system.nx();
  sol.t.resize(K);
  sol.rates.resize(K, nx);
  for (int k = 0; k < K; ++k) {
    sol.t[k] = system.mesh().time(k);
    const Vector x = sol.nodes.row(k).head(nx).transpose();
    const Vector w = sol.nodes.row(k).tail(system.nw()).transpose();
    sol.rates.row(k) = system.dae().f(x, w, sol.t[k]).transpose();
  }
  sol.log = std::move(log);
  sol.residual = R.cwiseAbs().maxCoeff();
  const auto& bc = system.bc();
  const Vector b0 = bc.at_T0 * (sol.nodes.row(0).transpose() - bc.ref_T0);
  const Vector bf = bc.at_Tf * (sol.nodes.row(K - 1).transpose() - bc.ref_Tf);
  sol.bc_residual = std::max(b0.size() ? b0.cwiseAbs().maxCoeff() : 0.0,
                             bf.size() ? bf.cwiseAbs().maxCoeff() : 0.0);
  sol.iterations = it;
  return sol;
}

Vector guess_from(const HermiteSimpson& system, const std::function<Vector(double)>& node_value) {
  const int K = system.mesh().nodes();
  const int nx = system.nx();
  const int nw = system.nw();
  Matrix nodes(K, system.node_size());
  Matrix mids(K - 1, nw);
  for (int k = 0; k < K; ++k) {
    const Vector z = node_value(system.mesh().time(k));
    if (z.size() != system.node_size()) throw ContractViolation("guess node has the wrong size");
    nodes.row(k) = z.transpose();
    if (k + 1 < K && nw > 0) {
      mids.row(k) = node_value(system.mesh().time(k) + 0.5 * system.mesh().h).tail(nw).transpose();
    }
  }
  (void)nx;
  return system.pack(nodes, mids);
}

Vector sample(const BvpSolution& sol, int nx, double t) {
  const int K = static_cast<int>(sol.t.size());
  if (t <= sol.t.front()) return sol.nodes.row(0).transpose();
  if (t >= sol.t.back()) return sol.nodes.row(K - 1).transpose();
  int k = static_cast<int>(std::floor((t - sol.t.front()) / sol.mesh.h));
  k = std::clamp(k, 0, K - 2);
  const double ta = sol.t[k], tb = sol.t[k + 1];
  const double s = (t - ta) / (tb - ta);
  Vector z(sol.nodes.cols());
  for (int i = 0; i < z.size(); ++i) {
    if (i < nx) {
      z[i] = hermite(ta, tb, sol.nodes(k, i), sol.nodes(k + 1, i), sol.rates(k, i),
                     sol.rates(k + 1, i), t);
    } else {
      z[i] = (1 - s) * sol.nodes(k, i) + s * sol.nodes(k + 1, i);
    }
  }
  return z;
}

double log_linear_slope(const std::vector<double>& t, const std::vector<double>& values,
                        double lo, double hi) {
  double n = 0, st = 0, sl = 0, stt = 0, stl = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < lo || t[i] > hi || !(values[i] > 0.0)) continue;
    const double l = std::log(values[i]);
    n += 1;
    st += t[i];
    sl += l;
    stt += t[i] * t[i];
    stl += t[i] * l;
  }
  const double den = n * stt - st * st;
  if (n < 2 || den <= 0.0) return 0.0;
  return (n * stl - st * sl) / den;
}

SolutionComparison compare_solutions(const BvpSolution& a, const BvpSolution& b, int nx,
                                     const std::vector<int>& projection) {
  const double lo = std::max(a.t.front(), b.t.front());
  const double hi = std::min(a.t.back(), b.t.back());
  if (!(hi > lo)) throw ContractViolation("compare_solutions: solutions do not overlap in time");
  const bool same_mesh = a.t.size() == b.t.size() && a.t.front() == b.t.front() &&
                         a.mesh.h == b.mesh.h;
  SolutionComparison out;
  for (std::size_t k = 0; k < a.t.size(); ++k) {
    const double t = a.t[k];
    if (t < lo || t > hi) continue;
    const Vector zb = same_mesh ? Vector(b.nodes.row(k).transpose()) : sample(b, nx, t);
    double e2 = 0.0;
    for (int i : projection) {
      const double d = a.nodes(k, i) - zb[i];
      e2 += d * d;
    }
    out.t.push_back(t);
    out.error.push_back(std::sqrt(e2));
    out.max_error = std::max(out.max_error, out.error.back());
  }
  out.early_rate = log_linear_slope(out.t, out.error, a.mesh.T0, a.mesh.t0);
  out.late_rate = log_linear_slope(out.t, out.error, a.mesh.tf, a.mesh.Tf);
  return out;
}

Feedforward extract_feedforward(const BvpSolution& sol, int index) {
  if (index < 0 || index >= sol.nodes.cols()) {
    throw ContractViolation("extract_feedforward: input index outside the node vector");
  }
  Feedforward ff;
  ff.t = sol.t;
  ff.u.resize(sol.t.size());
  for (std::size_t k = 0; k < sol.t.size(); ++k) ff.u[k] = sol.nodes(static_cast<int>(k), index);
  return ff;
}

Feedforward extract_feedforward_simpson(const BvpSolution& sol, int nx, int index) {
  if (sol.t.size() < 2) throw ContractViolation("extract_feedforward_simpson: needs two nodes");
  const int nw = static_cast<int>(sol.midpoints.cols());
  if (index < 0 || index >= nw || nx + nw != sol.nodes.cols()) {
    throw ContractViolation("extract_feedforward_simpson: index outside the algebraic block");
  }
  Feedforward ff;
  for (int k = 0; k + 1 < static_cast<int>(sol.t.size()); ++k) {
    ff.t.push_back(0.5 * (sol.t[k] + sol.t[k + 1]));
    ff.u.push_back((sol.nodes(k, nx + index) + 4.0 * sol.midpoints(k, index) +
                    sol.nodes(k + 1, nx + index)) / 6.0);
  }
  // Linear extrapolation to the window ends so the trace covers [T0, Tf].
  const std::size_t m = ff.t.size();
  if (m >= 2) {
    const double first = 1.5 * ff.u[0] - 0.5 * ff.u[1];
    const double last = 1.5 * ff.u[m - 1] - 0.5 * ff.u[m - 2];
    ff.t.insert(ff.t.begin(), sol.t.front());
    ff.u.insert(ff.u.begin(), first);
    ff.t.push_back(sol.t.back());
    ff.u.push_back(last);
  }
  return ff;
}

Feedforward extract_feedforward_rate(const BvpSolution& sol,
                                     const std::function<double(const Vector&)>& coordinate) {
  if (sol.t.size() < 3) throw ContractViolation("extract_feedforward_rate: needs at least 3 nodes");
  std::vector<double> values(sol.t.size());
  for (std::size_t k = 0; k < sol.t.size(); ++k) {
    values[k] = coordinate(sol.nodes.row(static_cast<int>(k)).transpose());
  }
  const CubicSpline spline(sol.t, values);
  Feedforward ff;
  ff.t = sol.t;
  ff.u.resize(sol.t.size());
  for (std::size_t k = 0; k < sol.t.size(); ++k) ff.u[k] = spline.derivative(sol.t[k]);
  return ff;
}

}  // namespace stable_inv
