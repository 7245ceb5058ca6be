#pragma once

#include <functional>
#include <vector>

#include "tileplate/cell.hpp"
#include "tileplate/fine.hpp"
#include "tileplate/macro.hpp"

namespace tileplate {

// Physical point of the micro coordinate y in cell (p, q) for family alpha:
// (p eps, q eps) + eps y_alpha e_alpha + delta y_{3-alpha} e_{3-alpha}, x3 = delta y3.
std::array<double, 3> unfold_point(int alpha, int p, int q, const std::array<double, 3>& y, const PlateParams& P);

// Tensor-product sample points in Y_alpha = (0,1) x (-1/2,1/2)^2 (axial,
// cross, thickness): n intervals per direction with a Gauss rule on each.
struct MicroGrid {
  int n_axial = 8;
  int n_cross = 8;
  int gauss = 2;
  // Points as (axial, cross, y3) with weights summing to 1.
  void points(std::vector<std::array<double, 3>>& y, std::vector<double>& w) const;
};

struct UnfoldedField {
  int alpha = 1;
  int N = 0;                              // cells per axis, index p * N + q
  int components = 0;
  std::vector<std::array<double, 3>> y;   // (axial, cross, y3)
  std::vector<double> values;             // [cell][point][component]
  double at(int p, int q, int point, int comp) const {
    return values[((static_cast<std::size_t>(p) * N + q) * y.size() + point) * components + comp];
  }
};

using PointField = std::function<Eigen::VectorXd(const std::array<double, 3>&)>;
using PlaneField = std::function<Eigen::VectorXd(double, double)>;

// Samples psi at the unfolded points of every cell (p, q) in 0..N-1.
UnfoldedField unfold3(const PointField& psi, int components, int alpha, const PlateParams& P,
                      const std::vector<std::array<double, 3>>& y);
// Same on a nodal field of the fine mesh by trilinear interpolation.
UnfoldedField unfold3(const PlateMesh3D& mesh, const Vec& u, int alpha, const PlateParams& P,
                      const std::vector<std::array<double, 3>>& y);
// In-plane version; y3 of the sample points is ignored.
UnfoldedField unfold2(const PlaneField& psi, int components, int alpha, const PlateParams& P,
                      const std::vector<std::array<double, 3>>& y);

// Macro coefficients paired with the correctors r = 1, 2, 3 at x':
// alpha = 1: (d2 U1, d2 U2, G''), alpha = 2: (d1 U2, d1 U1, F'').
Eigen::Vector3d limit_coefficients(const MacroSolution& macro, int alpha, double x1, double x2);

// Limit strain (Mandel vector) at macro point x' and micro point y:
// sum_r S_r (M_r(y3) + e_y(chi_r)).
Hooke::Vector6 limit_strain(const MacroSolution& macro, const CorrectorSet& chi, double x1, double x2,
                            const std::array<double, 3>& y);

struct StrainGap {
  double gap = 0.0;         // relative L2 gap (0 when both vanish)
  double fine_norm = 0.0;   // || (1/(eps delta)) Pi(e(u)) ||
  double limit_norm = 0.0;  // || E ||
};

// Relative gap between (1/(eps delta)) Pi^(alpha)(e(u)) and the limit strain,
// over omega x Y_alpha with 2 x 2 Gauss points in x' per cell.
StrainGap strain_gap(const PlateMesh3D& mesh, const Vec& u, const MacroSolution& macro, const CorrectorSet& chi,
                     const PlateParams& P, const MicroGrid& grid = {});

// ||Pi^(alpha)(u_c)||^2 over omega x Y_alpha, integrated exactly for the
// trilinear field on micro pieces aligned with the mesh breakpoints.
double unfolded_norm_sq(const PlateMesh3D& mesh, const Vec& u, int comp, int alpha, const PlateParams& P);
// ||u_c||^2 over Omega^(alpha) (covered_only = false) or over the part swept
// by the unfolding of the cells 0..N-1 (covered_only = true).
double beam_norm_sq(const PlateMesh3D& mesh, const Vec& u, int comp, int alpha, const PlateParams& P,
                    bool covered_only);

}  // namespace tileplate
