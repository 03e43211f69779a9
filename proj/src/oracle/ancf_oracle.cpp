#include "stable_inv/oracle/ancf_oracle.hpp"

#include <array>
#include <cmath>
#include <vector>

namespace stable_inv::oracle {

namespace {

using ancf::AncfGeometry;
using ancf::AncfMaterial;
using ancf::Vector12;

// Interpolation weights of the six nodal vectors (r_L, r_x,L, r_y,L, r_R, r_x,R, r_y,R),
// written from cubic Hermite interpolation along x and linear interpolation of
// the cross-section slope.
struct Basis {
  std::array<double, 6> value;
  std::array<double, 6> d_dx;
  std::array<double, 6> d_dy;
};

Basis basis(double x, double y, double L) {
  const double t = x / L;
  const double h00 = 2 * t * t * t - 3 * t * t + 1;
  const double h10 = t * t * t - 2 * t * t + t;
  const double h01 = -2 * t * t * t + 3 * t * t;
  const double h11 = t * t * t - t * t;
  const double dh00 = (6 * t * t - 6 * t) / L;
  const double dh10 = (3 * t * t - 4 * t + 1) / L;
  const double dh01 = (-6 * t * t + 6 * t) / L;
  const double dh11 = (3 * t * t - 2 * t) / L;
  Basis b;
  b.value = {h00, L * h10, y * (1 - t), h01, L * h11, y * t};
  b.d_dx = {dh00, L * dh10, -y / L, dh01, L * dh11, y / L};
  b.d_dy = {0, 0, 1 - t, 0, 0, t};
  return b;
}

Eigen::Vector2d nodal(const Vector12& e, int j) { return {e[2 * j], e[2 * j + 1]}; }

// Composite three-point Gauss-Legendre rule over `panels` equal panels of [a, b].
void panel_rule(int panels, double a, double b, std::vector<double>& x, std::vector<double>& w) {
  static const double g = std::sqrt(0.6);
  const double nodes[3] = {-g, 0.0, g};
  const double weights[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  const double h = (b - a) / panels;
  for (int i = 0; i < panels; ++i) {
    const double c = a + (i + 0.5) * h;
    for (int k = 0; k < 3; ++k) {
      x.push_back(c + 0.5 * h * nodes[k]);
      w.push_back(0.5 * h * weights[k]);
    }
  }
}

}  // namespace

ancf::Matrix12 brute_force_mass(const AncfMaterial& material, const AncfGeometry& geometry,
                                int panels) {
  const double L = geometry.element_length();
  const double a = geometry.side();
  std::vector<double> px, wx, py, wy, pz, wz;
  panel_rule(panels, 0.0, L, px, wx);
  panel_rule(panels, -0.5 * a, 0.5 * a, py, wy);
  panel_rule(panels, -0.5 * a, 0.5 * a, pz, wz);
  Eigen::Matrix<double, 6, 6> scalar = Eigen::Matrix<double, 6, 6>::Zero();
  for (std::size_t i = 0; i < px.size(); ++i) {
    for (std::size_t j = 0; j < py.size(); ++j) {
      const Basis b = basis(px[i], py[j], L);
      Eigen::Map<const Eigen::Matrix<double, 6, 1>> n(b.value.data());
      const Eigen::Matrix<double, 6, 6> outer = n * n.transpose();
      for (std::size_t k = 0; k < pz.size(); ++k) {
        scalar += material.rho * wx[i] * wy[j] * wz[k] * outer;
      }
    }
  }
  ancf::Matrix12 mass = ancf::Matrix12::Zero();
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      mass(2 * i, 2 * j) = scalar(i, j);
      mass(2 * i + 1, 2 * j + 1) = scalar(i, j);
    }
  }
  return mass;
}

double quadrature_strain_energy(const AncfMaterial& material, const AncfGeometry& geometry,
                                const Vector12& e) {
  const double L = geometry.element_length();
  const double a = geometry.side();
  const double lam = material.E * material.nu / ((1 + material.nu) * (1 - 2 * material.nu));
  const double mu = material.E / (2 * (1 + material.nu));
  std::vector<double> gx, wx, gy, wy;
  ancf::gauss_legendre(8, gx, wx);
  ancf::gauss_legendre(6, gy, wy);
  double energy = 0.0;
  for (std::size_t i = 0; i < gx.size(); ++i) {
    const double x = 0.5 * L * (gx[i] + 1);
    for (std::size_t j = 0; j < gy.size(); ++j) {
      const double y = 0.5 * a * gy[j];
      const Basis b = basis(x, y, L);
      Eigen::Matrix2d F = Eigen::Matrix2d::Zero();
      for (int k = 0; k < 6; ++k) {
        F.col(0) += b.d_dx[k] * nodal(e, k);
        F.col(1) += b.d_dy[k] * nodal(e, k);
      }
      const Eigen::Matrix2d strain = 0.5 * (F.transpose() * F - Eigen::Matrix2d::Identity());
      const double density =
          mu * (strain.array() * strain.array()).sum() + 0.5 * lam * strain.trace() * strain.trace();
      energy += wx[i] * wy[j] * 0.5 * L * 0.5 * a * a * density;
    }
  }
  return energy;
}

Vector12 finite_difference_force(const AncfMaterial& material, const AncfGeometry& geometry,
                                 const Vector12& e, double step) {
  Vector12 force;
  for (int i = 0; i < 12; ++i) {
    Vector12 ep = e, em = e;
    const double h = step * std::max(1.0, std::abs(e[i]));
    ep[i] += h;
    em[i] -= h;
    force[i] = -(quadrature_strain_energy(material, geometry, ep) -
                 quadrature_strain_energy(material, geometry, em)) /
               (2 * h);
  }
  return force;
}

}  // namespace stable_inv::oracle
