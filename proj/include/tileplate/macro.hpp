#pragma once

#include <vector>

#include "tileplate/fem.hpp"

namespace tileplate {

// Discrete limit space on omega = (0,L)^2: bilinear U1, U2 on an n x n grid
// and the deflection U3 = F(x1) + G(x2) with F, G cubic Hermite lines. U3 is
// never a 2D field, so d12 U3 = 0 holds exactly.
struct MacroSpace {
  double L = 1.0, l = 0.5;
  int n_membrane = 16, n_beam = 64;
  double hm = 0.0, hb = 0.0;
  std::vector<int> clamped;  // pinned dofs

  int mem_nodes() const { return (n_membrane + 1) * (n_membrane + 1); }
  int dof_U(int comp, int i, int j) const { return comp * mem_nodes() + i * (n_membrane + 1) + j; }
  int dof_F(int k, int d) const { return 2 * mem_nodes() + 2 * k + d; }
  int dof_G(int k, int d) const { return 2 * mem_nodes() + 2 * (n_beam + 1) + 2 * k + d; }
  int total_dofs() const { return 2 * mem_nodes() + 4 * (n_beam + 1); }
  int membrane_dofs() const { return 2 * mem_nodes(); }
};

MacroSpace build_macro_space(double L, double l, int n_membrane, int n_beam);

struct MacroSolution {
  MacroSpace space;
  Eigen::Matrix3d A1 = Eigen::Matrix3d::Zero(), A2 = Eigen::Matrix3d::Zero();
  Vec dofs;                 // full dof vector
  double energy = 0.0;      // sum_alpha int A E.E at the solution
  double load_work = 0.0;   // int f . U
  double residual = 0.0;
  int reduced_dofs = 0;

  // Membrane values and gradients (bilinear); row c of grad is grad U_{c+1}.
  Eigen::Vector2d membrane(double x1, double x2) const;
  Eigen::Matrix2d membrane_grad(double x1, double x2) const;
  // d = 0, 1, 2: value, first, second derivative of F or G.
  double F(double x, int d = 0) const;
  double G(double x, int d = 0) const;
  double U3(double x1, double x2) const { return F(x1) + G(x2); }
};

// Assembled (unreduced) macro system; exposed for structural tests.
SymmetricSparseSystem assemble_macro(const MacroSpace& space, const Eigen::Matrix3d& A1,
                                     const Eigen::Matrix3d& A2, const Eigen::Vector3d& f);

MacroSolution solve_macro(const MacroSpace& space, const Eigen::Matrix3d& A1, const Eigen::Matrix3d& A2,
                          const Eigen::Vector3d& f, const SolverConfig& cfg);

// (U1, U2, U3) at points of the closed square.
std::vector<Eigen::Vector3d> eval_deflection(const MacroSolution& sol,
                                             const std::vector<Eigen::Vector2d>& points);

}  // namespace tileplate
