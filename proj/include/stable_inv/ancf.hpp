#pragma once

#include <Eigen/Dense>
#include <array>
#include <memory>
#include <vector>

#include "stable_inv/mbs_core.hpp"

namespace stable_inv::ancf {

using Matrix12 = Eigen::Matrix<double, 12, 12>;
using Vector12 = Eigen::Matrix<double, 12, 1>;
using Matrix36 = Eigen::Matrix<double, 36, 36>;
using Vector36 = Eigen::Matrix<double, 36, 1>;

struct AncfMaterial {
  double rho = 910.0;
  double E = 1.2e7;
  double nu = 0.0;

  void validate() const;
  /// Lame constants (lambda, mu) of the Saint-Venant-Kirchhoff law.
  double lame_lambda() const;
  double lame_mu() const;
};

struct AncfGeometry {
  double length = 1.0;
  double area = 0.0081;
  int elements = 4;

  void validate() const;
  double element_length() const { return length / elements; }
  double side() const;  // square cross-section a = sqrt(A)
  int coordinates() const { return 6 * (elements + 1); }
};

/// Shape functions of the shear-deformable planar element at (xi, eta_hat)
/// with xi = x / L_e and eta_hat = y / L_e, plus the 2x12 interpolation matrix.
struct ShapeValues {
  std::array<double, 6> s{};
  Eigen::Matrix<double, 2, 12> S;
};

ShapeValues shape_functions(double xi, double eta_hat, double element_length);

/// d s_i / dx and d s_i / dy at the same point.
struct ShapeGradients {
  Eigen::Matrix<double, 6, 1> dx;
  Eigen::Matrix<double, 6, 1> dy;
};

ShapeGradients shape_gradients(double xi, double eta_hat, double element_length);

/// Consistent element mass matrix integrated exactly by Gauss quadrature.
Matrix12 element_mass_matrix(const AncfMaterial& material, const AncfGeometry& geometry);

/// Constant tensors of the element strain energy.
///
/// With the nodal vectors arranged as E = [d_1 ... d_6] (2x6) and the Gram
/// matrix P = E^T E, the Saint-Venant-Kirchhoff energy of an element is the
/// exact quadratic
///   U = 1/2 vec(P)^T A vec(P) + s0^T vec(P) + U0,
/// so forces and tangents need no volume integration at run time.
struct ElasticInvariants {
  Matrix36 A;
  Vector36 s0;
  double U0 = 0.0;
};

ElasticInvariants elastic_invariants(const AncfMaterial& material, const AncfGeometry& geometry);

struct ElementElastic {
  double energy = 0.0;
  Vector12 gradient;  // dU/de
  Matrix12 hessian;   // d^2U/de^2
};

ElementElastic element_elastic(const ElasticInvariants& inv, const Vector12& e,
                               bool with_hessian = true);

/// Precomputed data of an N-element beam pinned at x = 0.
class AncfAssembly {
 public:
  AncfAssembly(AncfMaterial material, AncfGeometry geometry);

  const AncfMaterial& material() const { return material_; }
  const AncfGeometry& geometry() const { return geometry_; }
  int coordinates() const { return geometry_.coordinates(); }
  const Matrix& mass_matrix() const { return mass_; }
  const Matrix12& element_mass() const { return element_mass_; }
  const ElasticInvariants& invariants() const { return invariants_; }

  /// First global index of element `i`; its 12 coordinates are contiguous.
  static int element_offset(int element) { return 6 * element; }

  /// Straight beam along the x axis starting at the origin.
  Vector undeformed() const;

  double strain_energy(const Vector& e) const;
  double kinetic_energy(const Vector& edot) const;

 private:
  AncfMaterial material_;
  AncfGeometry geometry_;
  Matrix12 element_mass_;
  Matrix mass_;
  ElasticInvariants invariants_;
};

struct ElasticForces {
  Vector q;   // applied elastic force, -dU/de
  Matrix K_t; // dq/de
};

ElasticForces elastic_forces(const AncfAssembly& assembly, const Vector& e,
                             bool with_tangent = true);

/// K(e) with q = -K(e) e.
Matrix stiffness_matrix(const AncfAssembly& assembly, const Vector& e);

/// (e_1, e_2): position of the left node.
Eigen::Vector2d pin_constraint(const Vector& e);

/// u - gamma_dot with gamma = atan2(e_6, e_5) the cross-section angle at the left node.
double actuator_constraint(const Vector& e, const Vector& edot, double u);

/// Cross-section angle at the left node.
double cross_section_angle(const Vector& e);

/// Angle of the end-node position vector for an N-element beam.
double output_angle(const Vector& e, int elements);

/// SystemModel with n = 6(N+1), n_c = 3 (pin rows, actuator row), m = 1.
SystemModel assemble_system(const AncfMaterial& material, const AncfGeometry& geometry);
SystemModel assemble_system(std::shared_ptr<const AncfAssembly> assembly);

/// Node positions (x, y) for plotting.
std::vector<Eigen::Vector2d> node_positions(const Vector& e);
/// Neutral-axis points, `per_element` samples per element plus the tip.
std::vector<Eigen::Vector2d> centerline(const Vector& e, int elements, double element_length,
                                        int per_element);

/// e0 rotated rigidly by angle theta about the origin (positions and slopes).
Vector rotate_rigidly(const Vector& e, double theta);

/// Smallest natural frequencies (rad/s) of the beam linearized about the
/// straight configuration with the left node pinned, rigid mode excluded.
std::vector<double> pinned_natural_frequencies(const AncfAssembly& assembly, int count);

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int points, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace stable_inv::ancf
