#pragma once

// Reference computations for the ANCF element evaluated by brute-force
// quadrature of the continuum expressions, independent of the invariant
// tensors used by the production code.

#include <Eigen/Dense>

#include "stable_inv/ancf.hpp"

namespace stable_inv::oracle {

/// Element mass matrix by composite 3-point Gauss quadrature on a panels^3 grid.
ancf::Matrix12 brute_force_mass(const ancf::AncfMaterial& material,
                                const ancf::AncfGeometry& geometry, int panels = 50);

/// Element strain energy from the deformation gradient at high-order Gauss points.
double quadrature_strain_energy(const ancf::AncfMaterial& material,
                                const ancf::AncfGeometry& geometry, const ancf::Vector12& e);

/// Elastic force -dU/de by central differences of the quadrature energy.
ancf::Vector12 finite_difference_force(const ancf::AncfMaterial& material,
                                       const ancf::AncfGeometry& geometry,
                                       const ancf::Vector12& e, double step = 1e-6);

}  // namespace stable_inv::oracle
