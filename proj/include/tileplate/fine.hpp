#pragma once

#include <optional>
#include <vector>

#include "tileplate/fem.hpp"
#include "tileplate/geometry.hpp"
#include "tileplate/material.hpp"

namespace tileplate {

// Constant macroscopic load f on omega, realized on the plate as
// eps^kappa * (delta f1, delta f2, delta^2 f3) and zero outside omega.
struct LoadSpec {
  Eigen::Vector3d f = Eigen::Vector3d(0, 0, 1);
  double kappa = 1.0;
  Eigen::Vector3d density(const PlateParams& P) const;
};

// One link per tile (p,q), centered at ((p+1/2) eps, (q+1/2) eps, 0), slaving
// every node of the tile's elements, interface nodes included.
std::vector<RigidLink> build_rigid_links(const PlateMesh3D& mesh, const PlateParams& params);

// Assembled fine problem: soft-frame stiffness, consistent load, clamp and
// rigid links, and the reduced system.
struct FineProblem {
  PlateMesh3D mesh;
  PlateParams params;
  LoadSpec load;
  std::vector<std::optional<Hooke>> coeffs;
  std::vector<int> clamped_nodes;
  ConstraintSet constraints;
  SymmetricSparseSystem full;
  ReducedSystem reduced;

  int dofs() const { return full.dof_count(); }
  double energy(const Vec& u) const;  // a(u, u)
  double work(const Vec& u) const;    // int f . u
};

FineProblem build_fine_problem(const PlateMesh3D& mesh, const PlateParams& params, const HookeField& field,
                               const LoadSpec& load);

struct FineSolution {
  Vec u;                                          // nodal displacement, 3 per node
  std::vector<Eigen::Matrix<double, 6, 1>> rigid;  // (a, R) per tile, link order
  double strain_norm = 0.0;   // ||e(u)|| over the soft frame
  double energy = 0.0;        // a(u, u)
  double load_work = 0.0;     // int f . u
  double residual = 0.0;      // relative residual of the reduced solve
  int iterations = 0;
  double hard_strain = 0.0;   // max |e(u)| over hard elements
  double u_max = 0.0;
  double bound_constant = 0.0;  // E(u) / (eps^(kappa - 1/2) delta^2 ||f||)
};

FineSolution solve_fine(const FineProblem& prob, const SolverConfig& cfg);

double strain_norm(const FineProblem& prob, const Vec& u);
double hard_strain_max(const FineProblem& prob, const Vec& u);
// a(u, u) / (eps delta^4)
double scaled_energy(const FineSolution& sol, const PlateParams& params);

struct NpcMargins {
  double family1 = 0.0;  // min over facing faces of (u2 jump + delta), beams along x1
  double family2 = 0.0;  // min of (u1 jump + delta), beams along x2
};
NpcMargins npc_margins(const PlateMesh3D& mesh, const PlateParams& params, const Vec& u);

// Thickness moments on every in-plane node column.
struct KLFields {
  std::vector<double> x1, x2;           // column coordinates
  std::vector<Eigen::Vector2d> Um;      // (1/delta) int u_alpha
  std::vector<double> U3;               // (1/delta) int u_3
  std::vector<Eigen::Vector2d> rot;     // -(12/delta^3) int x3 u_alpha
  int index(int i, int j) const { return i * static_cast<int>(x2.size()) + j; }
  // Bilinear interpolation between columns; component 0,1 Um, 2 U3, 3,4 rot.
  Eigen::Matrix<double, 5, 1> at(double y1, double y2) const;
};
KLFields extract_kl(const PlateMesh3D& mesh, const Vec& u);

struct KornRatios {
  double bend = 0.0, mem = 0.0, hess = 0.0;
  bool valid = false;  // false when E(u) = 0; ratios are NaN then
};
// Norms from tile-center samples on the eps-lattice, derivatives by finite differences.
KornRatios korn_report(const KLFields& kl, double strain_norm, const PlateParams& params);

// Helpers shared with the recovery and unfolding modules.
Eigen::Matrix<double, 8, 3> element_values(const PlateMesh3D& mesh, const Vec& u, int e);
// Gradient du_i/dx_j of the nodal field at a physical point.
Eigen::Matrix3d field_gradient(const PlateMesh3D& mesh, const Vec& u, const std::array<double, 3>& x);
Eigen::Vector3d field_value(const PlateMesh3D& mesh, const Vec& u, const std::array<double, 3>& x);

}  // namespace tileplate
