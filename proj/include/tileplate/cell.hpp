#pragma once

#include <array>
#include <vector>

#include "tileplate/fem.hpp"
#include "tileplate/geometry.hpp"
#include "tileplate/material.hpp"

namespace tileplate {

// Loading matrices M_r of family alpha at height y3, r in {1,2,3}.
// alpha = 1: shear (1,2) = 1/2, e22 = 1, e22 = -y3.
// alpha = 2: shear (1,2) = 1/2, e11 = 1, e11 = -y3. Slot 1 is always the
// shear so that it pairs with the in-plane derivative of the transverse
// membrane component (d2 U1 for alpha = 1, d1 U2 for alpha = 2).
Eigen::Matrix3d loading_matrix(int alpha, int r, double y3);
Hooke::Vector6 loading_mandel(int alpha, int r, double y3);

struct CorrectorSet {
  int alpha = 1;
  CellGrid grid;
  // chi[s][r-1]: nodal field (3 components per node, node-major) on slice s.
  // A single entry is stored when all slices carry the same coefficients.
  std::vector<std::array<Vec, 3>> chi;
  std::array<double, 3> rhs_norm{};      // norm of the discrete load, per r
  std::array<double, 3> residual{};      // worst relative residual, per r
  int reduced_dofs = 0;

  const Vec& field(int slice, int r) const {
    return chi[chi.size() == 1 ? 0 : slice][r - 1];
  }
  int slice_of(double y_axial) const;
  // Bilinear value and Mandel cross-section strain at a cell point.
  Eigen::Vector3d value(int r, double y_axial, double y_cross, double y3) const;
  Hooke::Vector6 strain(int r, double y_axial, double y_cross, double y3) const;
};

CorrectorSet solve_correctors(int alpha, const CellGrid& grid, const CellCoefficients& coeffs,
                              const SolverConfig& cfg);

struct HomogenizedTensor {
  int alpha = 1;
  Eigen::Matrix3d A = Eigen::Matrix3d::Zero();      // symmetrized energy form
  Eigen::Matrix3d form1 = Eigen::Matrix3d::Zero();  // int A (M_r + e(chi_r)) : M_s
  Eigen::Matrix3d form2 = Eigen::Matrix3d::Zero();  // int A (M_r + e(chi_r)) : (M_s + e(chi_s))
  Eigen::Vector3d chi_zero_bound = Eigen::Vector3d::Zero();  // int A M_r : M_r
  double form_gap = 0.0;

  // Same tensor with slots 1 and 2 exchanged for alpha = 2 (stretch first).
  Eigen::Matrix3d stretch_first() const;
};

// Throws if the two forms differ by more than form_tol * max(1, max|A|).
HomogenizedTensor homogenized_tensor(const CorrectorSet& correctors, const CellCoefficients& coeffs,
                                     double form_tol = 1e-10);

}  // namespace tileplate
