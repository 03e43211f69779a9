#include "stable_inv/ancf.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "stable_inv/errors.hpp"

namespace stable_inv::ancf {

void AncfMaterial::validate() const {
  if (!(rho > 0 && E > 0 && nu >= 0 && nu < 0.5)) {
    throw ContractViolation("ANCF material requires rho > 0, E > 0, 0 <= nu < 0.5");
  }
}

double AncfMaterial::lame_lambda() const { return E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)); }
double AncfMaterial::lame_mu() const { return E / (2.0 * (1.0 + nu)); }

void AncfGeometry::validate() const {
  if (!(length > 0 && area > 0 && elements >= 1)) {
    throw ContractViolation("ANCF geometry requires L > 0, A > 0, N >= 1");
  }
}

double AncfGeometry::side() const { return std::sqrt(area); }

void gauss_legendre(int points, std::vector<double>& nodes, std::vector<double>& weights) {
  // Golub-Welsch on the Jacobi matrix of the Legendre recurrence.
  Matrix jacobi = Matrix::Zero(points, points);
  for (int k = 1; k < points; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k, k - 1) = b;
    jacobi(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(jacobi);
  nodes.resize(points);
  weights.resize(points);
  for (int i = 0; i < points; ++i) {
    nodes[i] = es.eigenvalues()[i];
    const double v0 = es.eigenvectors()(0, i);
    weights[i] = 2.0 * v0 * v0;
  }
}

ShapeValues shape_functions(double xi, double eta_hat, double L) {
  ShapeValues out;
  const double xi2 = xi * xi;
  const double xi3 = xi2 * xi;
  out.s = {1.0 - 3.0 * xi2 + 2.0 * xi3,
           L * (xi - 2.0 * xi2 + xi3),
           L * (eta_hat - xi * eta_hat),
           3.0 * xi2 - 2.0 * xi3,
           L * (-xi2 + xi3),
           L * xi * eta_hat};
  out.S.setZero();
  for (int j = 0; j < 6; ++j) {
    out.S(0, 2 * j) = out.s[j];
    out.S(1, 2 * j + 1) = out.s[j];
  }
  return out;
}

ShapeGradients shape_gradients(double xi, double eta_hat, double L) {
  ShapeGradients g;
  const double xi2 = xi * xi;
  g.dx << (-6.0 * xi + 6.0 * xi2) / L, 1.0 - 4.0 * xi + 3.0 * xi2, -eta_hat,
      (6.0 * xi - 6.0 * xi2) / L, -2.0 * xi + 3.0 * xi2, eta_hat;
  g.dy << 0.0, 0.0, 1.0 - xi, 0.0, 0.0, xi;
  return g;
}

namespace {

// Tensor-product Gauss rule over the element volume; calls fn(xi, eta_hat, weight).
template <typename Fn>
void integrate_element(const AncfGeometry& geometry, int nx, int ny, Fn&& fn) {
  std::vector<double> gx, wx, gy, wy;
  gauss_legendre(nx, gx, wx);
  gauss_legendre(ny, gy, wy);
  const double L = geometry.element_length();
  const double a = geometry.side();
  for (int i = 0; i < nx; ++i) {
    const double xi = 0.5 * (gx[i] + 1.0);
    for (int j = 0; j < ny; ++j) {
      const double y = 0.5 * a * gy[j];
      // dx = L/2 dxi', dy = a/2 deta', thickness a.
      const double w = wx[i] * wy[j] * 0.5 * L * 0.5 * a * a;
      fn(xi, y / L, w);
    }
  }
}

Eigen::Matrix<double, 2, 6> nodal_vectors(const Vector12& e) {
  Eigen::Matrix<double, 2, 6> E;
  for (int j = 0; j < 6; ++j) {
    E(0, j) = e[2 * j];
    E(1, j) = e[2 * j + 1];
  }
  return E;
}

Eigen::Map<const Vector36> as_vec(const Eigen::Matrix<double, 6, 6>& m) {
  return Eigen::Map<const Vector36>(m.data());
}

}  // namespace

Matrix12 element_mass_matrix(const AncfMaterial& material, const AncfGeometry& geometry) {
  material.validate();
  geometry.validate();
  Eigen::Matrix<double, 6, 6> scalar = Eigen::Matrix<double, 6, 6>::Zero();
  const double L = geometry.element_length();
  integrate_element(geometry, 6, 4, [&](double xi, double eta_hat, double w) {
    const ShapeValues sv = shape_functions(xi, eta_hat, L);
    Eigen::Map<const Eigen::Matrix<double, 6, 1>> s(sv.s.data());
    scalar += material.rho * w * s * s.transpose();
  });
  Matrix12 mass = Matrix12::Zero();
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      mass(2 * i, 2 * j) = scalar(i, j);
      mass(2 * i + 1, 2 * j + 1) = scalar(i, j);
    }
  }
  return mass;
}

ElasticInvariants elastic_invariants(const AncfMaterial& material, const AncfGeometry& geometry) {
  material.validate();
  geometry.validate();
  const double lam = material.lame_lambda();
  const double mu = material.lame_mu();
  const double L = geometry.element_length();
  ElasticInvariants inv;
  inv.A.setZero();
  inv.s0.setZero();
  inv.U0 = 0.0;
  // The energy integrand is of degree 8 in xi and 4 in eta_hat.
  integrate_element(geometry, 6, 4, [&](double xi, double eta_hat, double w) {
    const ShapeGradients g = shape_gradients(xi, eta_hat, L);
    const Eigen::Matrix<double, 6, 6> X = g.dx * g.dx.transpose();
    const Eigen::Matrix<double, 6, 6> Y = g.dy * g.dy.transpose();
    const Eigen::Matrix<double, 6, 6> Z =
        0.5 * (g.dx * g.dy.transpose() + g.dy * g.dx.transpose());
    const Vector36 x = as_vec(X);
    const Vector36 y = as_vec(Y);
    const Vector36 z = as_vec(Z);
    inv.A += w * ((0.5 * mu + 0.25 * lam) * (x * x.transpose() + y * y.transpose()) +
                  mu * z * z.transpose() + 0.25 * lam * (x * y.transpose() + y * x.transpose()));
    inv.s0 += w * (-0.5 * (mu + lam)) * (x + y);
    inv.U0 += w * 0.5 * (mu + lam);
  });
  return inv;
}

ElementElastic element_elastic(const ElasticInvariants& inv, const Vector12& e,
                               bool with_hessian) {
  const Eigen::Matrix<double, 2, 6> E = nodal_vectors(e);
  const Eigen::Matrix<double, 6, 6> P = E.transpose() * E;
  const Vector36 p = as_vec(P);
  const Vector36 Ap = inv.A * p;
  const Vector36 sv = Ap + inv.s0;
  const Eigen::Map<const Eigen::Matrix<double, 6, 6>> stress(sv.data());

  ElementElastic out;
  out.energy = 0.5 * p.dot(Ap) + inv.s0.dot(p) + inv.U0;
  const Eigen::Matrix<double, 2, 6> grad = 2.0 * E * stress;
  for (int j = 0; j < 6; ++j) {
    out.gradient[2 * j] = grad(0, j);
    out.gradient[2 * j + 1] = grad(1, j);
  }
  if (!with_hessian) {
    out.hessian.setZero();
    return out;
  }
  // G = d vec(P) / de.
  Eigen::Matrix<double, 36, 12> G = Eigen::Matrix<double, 36, 12>::Zero();
  for (int a = 0; a < 6; ++a) {
    for (int b = 0; b < 6; ++b) {
      for (int c = 0; c < 2; ++c) {
        G(a + 6 * b, 2 * a + c) += E(c, b);
        G(a + 6 * b, 2 * b + c) += E(c, a);
      }
    }
  }
  out.hessian = G.transpose() * inv.A * G;
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      out.hessian(2 * i, 2 * j) += 2.0 * stress(i, j);
      out.hessian(2 * i + 1, 2 * j + 1) += 2.0 * stress(i, j);
    }
  }
  return out;
}

AncfAssembly::AncfAssembly(AncfMaterial material, AncfGeometry geometry)
    : material_(material), geometry_(geometry) {
  material_.validate();
  geometry_.validate();
  element_mass_ = element_mass_matrix(material_, geometry_);
  invariants_ = elastic_invariants(material_, geometry_);
  const int n = coordinates();
  mass_ = Matrix::Zero(n, n);
  for (int el = 0; el < geometry_.elements; ++el) {
    mass_.block<12, 12>(element_offset(el), element_offset(el)) += element_mass_;
  }
}

Vector AncfAssembly::undeformed() const {
  const int nodes = geometry_.elements + 1;
  Vector e = Vector::Zero(6 * nodes);
  for (int j = 0; j < nodes; ++j) {
    e[6 * j] = j * geometry_.element_length();
    e[6 * j + 2] = 1.0;
    e[6 * j + 5] = 1.0;
  }
  return e;
}

double AncfAssembly::strain_energy(const Vector& e) const {
  double energy = 0.0;
  for (int el = 0; el < geometry_.elements; ++el) {
    const Vector12 ee = e.segment<12>(element_offset(el));
    energy += element_elastic(invariants_, ee, false).energy;
  }
  return energy;
}

double AncfAssembly::kinetic_energy(const Vector& edot) const {
  return 0.5 * edot.dot(mass_ * edot);
}

ElasticForces elastic_forces(const AncfAssembly& assembly, const Vector& e, bool with_tangent) {
  const int n = assembly.coordinates();
  if (e.size() != n) throw ContractViolation("ANCF coordinate vector has wrong size");
  ElasticForces out;
  out.q = Vector::Zero(n);
  if (with_tangent) out.K_t = Matrix::Zero(n, n);
  // Fixed element order keeps the scatter-add deterministic.
  for (int el = 0; el < assembly.geometry().elements; ++el) {
    const int off = AncfAssembly::element_offset(el);
    const ElementElastic ee =
        element_elastic(assembly.invariants(), e.segment<12>(off), with_tangent);
    out.q.segment<12>(off) -= ee.gradient;
    if (with_tangent) out.K_t.block<12, 12>(off, off) -= ee.hessian;
  }
  return out;
}

Matrix stiffness_matrix(const AncfAssembly& assembly, const Vector& e) {
  const int n = assembly.coordinates();
  Matrix K = Matrix::Zero(n, n);
  for (int el = 0; el < assembly.geometry().elements; ++el) {
    const int off = AncfAssembly::element_offset(el);
    const Eigen::Matrix<double, 2, 6> E = nodal_vectors(e.segment<12>(off));
    const Vector36 p = as_vec(E.transpose() * E);
    const Vector36 sv = assembly.invariants().A * p + assembly.invariants().s0;
    const Eigen::Map<const Eigen::Matrix<double, 6, 6>> stress(sv.data());
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) {
        K(off + 2 * i, off + 2 * j) += 2.0 * stress(i, j);
        K(off + 2 * i + 1, off + 2 * j + 1) += 2.0 * stress(i, j);
      }
    }
  }
  return K;
}

Eigen::Vector2d pin_constraint(const Vector& e) { return {e[0], e[1]}; }

namespace {

double slope_norm2(const Vector& e) {
  const double f2 = e[4] * e[4] + e[5] * e[5];
  if (!(f2 > 0.0)) throw SingularityError("cross-section slope vector vanishes at the left node");
  return f2;
}

}  // namespace

double actuator_constraint(const Vector& e, const Vector& edot, double u) {
  const double f2 = slope_norm2(e);
  return u + (e[5] * edot[4] - e[4] * edot[5]) / f2;
}

double cross_section_angle(const Vector& e) { return std::atan2(e[5], e[4]); }

double output_angle(const Vector& e, int elements) {
  const int ix = 6 * elements;
  const double x = e[ix];
  const double y = e[ix + 1];
  if (x == 0.0 && y == 0.0) throw SingularityError("end node at the origin, output angle undefined");
  return std::atan2(y, x);
}

SystemModel assemble_system(const AncfMaterial& material, const AncfGeometry& geometry) {
  return assemble_system(std::make_shared<const AncfAssembly>(material, geometry));
}

SystemModel assemble_system(std::shared_ptr<const AncfAssembly> assembly) {
  const int n = assembly->coordinates();
  const int N = assembly->geometry().elements;
  SystemModel model;
  model.dims = {n, 3, 1};
  model.holonomic_rows = 2;
  model.identity_kinematics = true;
  model.constant_mass = true;

  model.Z = [n](const Vector&) { return Matrix(Matrix::Identity(n, n)); };
  model.M = [assembly](const Vector&, double) { return assembly->mass_matrix(); };
  model.k = [n](const Vector&, const Vector&, double) { return Vector(Vector::Zero(n)); };
  model.q = [assembly](const Vector& y, const Vector&, double) {
    return elastic_forces(*assembly, y, false).q;
  };
  model.C = [n](const Vector& y, const Vector&, double) {
    const double f2 = slope_norm2(y);
    Matrix C = Matrix::Zero(3, n);
    C(0, 0) = 1.0;
    C(1, 1) = 1.0;
    C(2, 4) = y[5] / f2;
    C(2, 5) = -y[4] / f2;
    return C;
  };
  model.B = [n](const Vector&) { return Matrix(Matrix::Zero(n, 1)); };
  model.c = [](const Vector& y, const Vector& v, const Vector& u, double) {
    Vector c(3);
    c << y[0], y[1], actuator_constraint(y, v, u[0]);
    return c;
  };
  model.h = [N](const Vector& y) {
    Vector z(1);
    z[0] = output_angle(y, N);
    return z;
  };

  model.applied_force_jacobian = [assembly, n](const Vector& y, const Vector&, double) {
    ForceJacobians fj;
    fj.f_y = elastic_forces(*assembly, y, true).K_t;
    fj.f_v = Matrix::Zero(n, n);
    return fj;
  };
  model.constraint_jacobian = [n](const Vector& y, const Vector& v, const Vector&, double) {
    const double f2 = slope_norm2(y);
    const double g = (y[5] * v[4] - y[4] * v[5]) / f2;
    ConstraintJacobians cj;
    cj.c_y = Matrix::Zero(3, n);
    cj.c_v = Matrix::Zero(3, n);
    cj.c_u = Matrix::Zero(3, 1);
    cj.c_y(0, 0) = 1.0;
    cj.c_y(1, 1) = 1.0;
    cj.c_y(2, 4) = -v[5] / f2 - g * 2.0 * y[4] / f2;
    cj.c_y(2, 5) = v[4] / f2 - g * 2.0 * y[5] / f2;
    cj.c_v(2, 4) = y[5] / f2;
    cj.c_v(2, 5) = -y[4] / f2;
    cj.c_u(2, 0) = 1.0;
    return cj;
  };
  model.output_jacobian = [n, N](const Vector& y) {
    const int ix = 6 * N;
    const double x = y[ix];
    const double yy = y[ix + 1];
    const double r2 = x * x + yy * yy;
    if (r2 == 0.0) throw SingularityError("end node at the origin, output angle undefined");
    Matrix H = Matrix::Zero(1, n);
    H(0, ix) = -yy / r2;
    H(0, ix + 1) = x / r2;
    return H;
  };
  return model;
}

std::vector<Eigen::Vector2d> node_positions(const Vector& e) {
  std::vector<Eigen::Vector2d> out;
  for (Eigen::Index j = 0; j + 5 < e.size(); j += 6) out.emplace_back(e[j], e[j + 1]);
  return out;
}

std::vector<Eigen::Vector2d> centerline(const Vector& e, int elements, double element_length,
                                        int per_element) {
  std::vector<Eigen::Vector2d> out;
  for (int el = 0; el < elements; ++el) {
    const Vector12 ee = e.segment<12>(AncfAssembly::element_offset(el));
    for (int s = 0; s < per_element; ++s) {
      const double xi = static_cast<double>(s) / per_element;
      out.emplace_back(shape_functions(xi, 0.0, element_length).S * ee);
    }
  }
  out.emplace_back(e[6 * elements], e[6 * elements + 1]);
  return out;
}

Vector rotate_rigidly(const Vector& e, double theta) {
  const Eigen::Rotation2Dd rot(theta);
  Vector out = e;
  for (Eigen::Index j = 0; j + 1 < e.size(); j += 2) {
    out.segment<2>(j) = rot * Eigen::Vector2d(e[j], e[j + 1]);
  }
  return out;
}

std::vector<double> pinned_natural_frequencies(const AncfAssembly& assembly, int count) {
  const int n = assembly.coordinates();
  const Vector e0 = assembly.undeformed();
  const Matrix K = -elastic_forces(assembly, e0, true).K_t;
  const int r = n - 2;
  const Matrix K_red = K.bottomRightCorner(r, r);
  const Matrix M_red = assembly.mass_matrix().bottomRightCorner(r, r);
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(0.5 * (K_red + K_red.transpose()), M_red);
  const Vector& omega2 = es.eigenvalues();
  const double cutoff = 1e-8 * omega2.cwiseAbs().maxCoeff();
  std::vector<double> out;
  for (Eigen::Index i = 0; i < omega2.size() && static_cast<int>(out.size()) < count; ++i) {
    if (omega2[i] > cutoff) out.push_back(std::sqrt(omega2[i]));
  }
  return out;
}

}  // namespace stable_inv::ancf
