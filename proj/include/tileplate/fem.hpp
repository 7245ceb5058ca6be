#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>
#include <functional>
#include <stdexcept>
#include <vector>

#include "tileplate/material.hpp"

namespace tileplate {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;
using Vec = Eigen::VectorXd;

// Worker count for assembly, matrix-vector products and level dispatch.
void set_thread_count(int n);
int thread_count();

// Splits [0, n) into `chunks` contiguous ranges and runs fn(chunk, begin, end)
// on the worker pool. Chunk boundaries depend only on n and chunks.
void parallel_chunks(int n, int chunks, const std::function<void(int, int, int)>& fn);

// ---------------------------------------------------------------- kernels

// Trilinear shape functions on the reference cube (0,1)^3, local node
// a + 2b + 4c at corner (a,b,c).
std::array<double, 8> hex8_shape(const std::array<double, 3>& xi);

// Mandel strain operator (6 x 24, dofs node-major) of an axis-aligned box at
// reference point xi.
Eigen::Matrix<double, 6, 24> hex8_strain(const std::array<double, 3>& lo, const std::array<double, 3>& hi,
                                         const std::array<double, 3>& xi);

// Gradient of a trilinear field with nodal values v (8 x 3) at xi: returns du_i/dx_j.
Eigen::Matrix3d hex8_gradient(const std::array<double, 3>& lo, const std::array<double, 3>& hi,
                              const std::array<double, 3>& xi, const Eigen::Matrix<double, 8, 3>& v);

// 24 x 24 stiffness with 2x2x2 Gauss, exactly symmetric.
Eigen::Matrix<double, 24, 24> hex8_stiffness(const std::array<double, 3>& lo, const std::array<double, 3>& hi,
                                             const Hooke& A);

// Cross-section strain operator of the periodicity cell of family alpha
// (6 x 12, dofs node-major, node order (ic,k) -> (0,0),(1,0),(0,1),(1,1)) on a
// square element of side h, at reference point (sc, s3) in (0,1)^2. Axial
// derivatives are absent.
Eigen::Matrix<double, 6, 12> cell_quad_strain(int alpha, double h, double sc, double s3);

// Cubic Hermite basis on an element of length h, local dofs (w0, w0', w1, w1'),
// evaluated at t in (0,1). Returns value, first and second derivative rows.
struct HermiteBasis {
  Eigen::Vector4d N, dN, d2N;
};
HermiteBasis hermite_basis(double t, double h);

// -------------------------------------------------------------- assembly

using ElementKernel = std::function<void(int element, std::vector<Triplet>& out)>;

// Collects element triplets into per-worker buffers over contiguous element
// chunks, concatenates them in element order, stable-sorts by (row, col), sums
// duplicates sequentially and compresses. The result is bit-identical for any
// worker count.
SpMat assemble_matrix(int n, int n_elements, const ElementKernel& kernel);

// Same merge rules for a triplet list that is already in element order.
SpMat compress_triplets(int n_rows, int n_cols, std::vector<Triplet> triplets);

struct SymmetricSparseSystem {
  SpMat matrix;
  Vec rhs;
  int dof_count() const { return static_cast<int>(rhs.size()); }
};

double max_asymmetry(const SpMat& A);

// -------------------------------------------------------------- constraints

struct ConstraintError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct RigidLink {
  int p = 0, q = 0;
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  std::vector<int> nodes;  // slaved nodes, dofs 3n..3n+2
};

struct ConstraintSet {
  std::vector<int> dirichlet;  // dof indices pinned to zero
  std::vector<RigidLink> rigid_links;
};

// full = T * reduced. Free dofs come first in increasing order, then the
// master coordinates of each link. A link whose slaved nodes are also pinned
// keeps only the rigid motions that vanish on those nodes (overlap resolved
// to Dirichlet); basis[l] maps its reduced coordinates to (a, R).
struct Reduction {
  SpMat T;
  int full_dofs = 0;
  int reduced_dofs = 0;
  int free_dofs = 0;
  std::vector<int> link_offset;
  std::vector<Eigen::MatrixXd> link_basis;  // 6 x k_l

  Vec expand(const Vec& x) const { return T * x; }
  // Link masters (a, R) from a reduced vector.
  Eigen::Matrix<double, 6, 1> link_masters(int l, const Vec& x) const;
};

Reduction build_reduction(int full_dofs, const ConstraintSet& c,
                          const std::function<std::array<double, 3>(int)>& node_coord);

struct ReducedSystem {
  SymmetricSparseSystem sys;
  Reduction map;
};

ReducedSystem apply_constraints(const SymmetricSparseSystem& sys, const ConstraintSet& c,
                                const std::function<std::array<double, 3>(int)>& node_coord);

// -------------------------------------------------------------- solver

enum class SolverMethod { CG, Direct };
enum class Preconditioner { Jacobi, None };

struct SolverConfig {
  SolverMethod method = SolverMethod::CG;
  double tol = 1e-10;   // relative residual
  int maxiter = 0;      // 0 means 20 * n + 100
  Preconditioner preconditioner = Preconditioner::Jacobi;
  void validate() const;
};

struct SolverError : std::runtime_error {
  enum class Kind { Breakdown, MaxIter, Config };
  Kind kind;
  SolverError(Kind k, const std::string& what) : std::runtime_error(what), kind(k) {}
};

struct SolveStats {
  int iterations = 0;
  double rel_residual = 0.0;
};

// Solves A x = b for symmetric positive definite A. Breakdown (p'Ap <= 0 or a
// non-positive pivot) and exceeding maxiter raise distinct errors.
Vec solve_spd(const SpMat& A, const Vec& b, const SolverConfig& cfg, SolveStats* stats = nullptr);

// y = A x, parallel over rows, using the exact symmetry of A.
void sym_matvec(const SpMat& A, const Vec& x, Vec& y);

}  // namespace tileplate
