#include "tileplate/cell.hpp"

#include <algorithm>
#include <cmath>

#include "tileplate/quadrature.hpp"

namespace tileplate {

Eigen::Matrix3d loading_matrix(int alpha, int r, double y3) {
  if (alpha != 1 && alpha != 2) throw std::invalid_argument("loading_matrix: alpha must be 1 or 2");
  if (r < 1 || r > 3) throw std::invalid_argument("loading_matrix: r must be 1, 2 or 3");
  Eigen::Matrix3d M = Eigen::Matrix3d::Zero();
  const int s = alpha == 1 ? 1 : 0;  // stretch diagonal slot
  if (r == 1) M(0, 1) = M(1, 0) = 0.5;
  if (r == 2) M(s, s) = 1.0;
  if (r == 3) M(s, s) = -y3;
  return M;
}

Hooke::Vector6 loading_mandel(int alpha, int r, double y3) {
  return Hooke::mandel(loading_matrix(alpha, r, y3));
}

namespace {

std::array<int, 4> quad_nodes(const CellGrid& g, int jc, int j3) {
  return {g.node(jc, j3), g.node(jc + 1, j3), g.node(jc, j3 + 1), g.node(jc + 1, j3 + 1)};
}

Eigen::Matrix<double, 12, 1> gather(const Vec& u, const std::array<int, 4>& nodes) {
  Eigen::Matrix<double, 12, 1> ue;
  for (int a = 0; a < 4; ++a) ue.segment<3>(3 * a) = u.segment<3>(3 * nodes[a]);
  return ue;
}

}  // namespace

int CorrectorSet::slice_of(double y_axial) const {
  return std::clamp(static_cast<int>(std::floor(y_axial * grid.n_slices)), 0, grid.n_slices - 1);
}

Eigen::Vector3d CorrectorSet::value(int r, double ya, double yc, double y3) const {
  const int n = grid.n_cross;
  const double h = grid.h();
  const int jc = std::clamp(static_cast<int>(std::floor((yc + 0.5) / h)), 0, n - 1);
  const int j3 = std::clamp(static_cast<int>(std::floor((y3 + 0.5) / h)), 0, n - 1);
  const double sc = (yc - grid.coord(jc)) / h, s3 = (y3 - grid.coord(j3)) / h;
  const Vec& u = field(slice_of(ya), r);
  const auto nodes = quad_nodes(grid, jc, j3);
  const double w[4] = {(1 - sc) * (1 - s3), sc * (1 - s3), (1 - sc) * s3, sc * s3};
  Eigen::Vector3d v = Eigen::Vector3d::Zero();
  for (int a = 0; a < 4; ++a) v += w[a] * u.segment<3>(3 * nodes[a]);
  return v;
}

Hooke::Vector6 CorrectorSet::strain(int r, double ya, double yc, double y3) const {
  const int n = grid.n_cross;
  const double h = grid.h();
  const int jc = std::clamp(static_cast<int>(std::floor((yc + 0.5) / h)), 0, n - 1);
  const int j3 = std::clamp(static_cast<int>(std::floor((y3 + 0.5) / h)), 0, n - 1);
  const double sc = (yc - grid.coord(jc)) / h, s3 = (y3 - grid.coord(j3)) / h;
  const auto B = cell_quad_strain(alpha, h, sc, s3);
  return B * gather(field(slice_of(ya), r), quad_nodes(grid, jc, j3));
}

CorrectorSet solve_correctors(int alpha, const CellGrid& grid, const CellCoefficients& coeffs,
                              const SolverConfig& cfg) {
  if (grid.alpha != alpha || coeffs.grid.alpha != alpha || coeffs.grid.n_cross != grid.n_cross ||
      coeffs.grid.n_slices != grid.n_slices)
    throw std::invalid_argument("solve_correctors: coefficient table does not match the grid");
  CorrectorSet out;
  out.alpha = alpha;
  out.grid = grid;
  const int n = grid.n_cross;
  const double h = grid.h();
  const int ndof = 3 * grid.nodes_per_slice();
  const int n_solve = coeffs.slice_invariant ? 1 : grid.n_slices;

  ConstraintSet cons;
  for (int ic : {0, n})
    for (int k = 0; k <= n; ++k)
      for (int c = 0; c < 3; ++c) cons.dirichlet.push_back(3 * grid.node(ic, k) + c);

  out.chi.resize(n_solve);
  for (int s = 0; s < n_solve; ++s) {
    SymmetricSparseSystem sys;
    sys.matrix = assemble_matrix(ndof, n * n, [&](int e, std::vector<Triplet>& t) {
      const int jc = e % n, j3 = e / n;
      Eigen::Matrix<double, 12, 12> K = Eigen::Matrix<double, 12, 12>::Zero();
      for (int g = 0; g < 4; ++g) {
        const auto gp = cell_gauss_point(g);
        const auto B = cell_quad_strain(alpha, h, gp[0], gp[1]);
        K.noalias() += (0.25 * h * h) * (B.transpose() * coeffs.get(s, jc, j3, g).voigt * B);
      }
      K = (0.5 * (K + K.transpose())).eval();
      const auto nodes = quad_nodes(grid, jc, j3);
      for (int a = 0; a < 12; ++a)
        for (int b = 0; b < 12; ++b)
          t.emplace_back(3 * nodes[a / 3] + a % 3, 3 * nodes[b / 3] + b % 3, K(a, b));
    });

    std::array<Vec, 3> rhs;
    for (int r = 1; r <= 3; ++r) {
      rhs[r - 1] = Vec::Zero(ndof);
      for (int j3 = 0; j3 < n; ++j3)
        for (int jc = 0; jc < n; ++jc) {
          Eigen::Matrix<double, 12, 1> fe = Eigen::Matrix<double, 12, 1>::Zero();
          for (int g = 0; g < 4; ++g) {
            const auto gp = cell_gauss_point(g);
            const double y3 = grid.coord(j3) + gp[1] * h;
            const auto B = cell_quad_strain(alpha, h, gp[0], gp[1]);
            fe.noalias() -= (0.25 * h * h) * (B.transpose() * (coeffs.get(s, jc, j3, g).voigt * loading_mandel(alpha, r, y3)));
          }
          const auto nodes = quad_nodes(grid, jc, j3);
          for (int a = 0; a < 12; ++a) rhs[r - 1](3 * nodes[a / 3] + a % 3) += fe(a);
        }
    }

    sys.rhs = Vec::Zero(ndof);
    ReducedSystem red = apply_constraints(sys, cons, {});
    out.reduced_dofs = red.map.reduced_dofs;
    for (int r = 1; r <= 3; ++r) {
      const Vec br = red.map.T.transpose() * rhs[r - 1];
      out.rhs_norm[r - 1] = std::max(out.rhs_norm[r - 1], br.norm());
      SolveStats st;
      const Vec x = solve_spd(red.sys.matrix, br, cfg, &st);
      out.residual[r - 1] = std::max(out.residual[r - 1], st.rel_residual);
      out.chi[s][r - 1] = red.map.expand(x);
    }
  }
  return out;
}

Eigen::Matrix3d HomogenizedTensor::stretch_first() const {
  if (alpha == 1) return A;
  Eigen::PermutationMatrix<3> P;
  P.indices() << 1, 0, 2;
  return P * A * P.transpose();
}

HomogenizedTensor homogenized_tensor(const CorrectorSet& cs, const CellCoefficients& coeffs, double form_tol) {
  const CellGrid& grid = cs.grid;
  const int n = grid.n_cross;
  const double h = grid.h();
  HomogenizedTensor H;
  H.alpha = cs.alpha;
  for (int s = 0; s < grid.n_slices; ++s) {
    Eigen::Matrix3d f1 = Eigen::Matrix3d::Zero(), f2 = Eigen::Matrix3d::Zero();
    Eigen::Vector3d b0 = Eigen::Vector3d::Zero();
    for (int j3 = 0; j3 < n; ++j3)
      for (int jc = 0; jc < n; ++jc) {
        const auto nodes = quad_nodes(grid, jc, j3);
        std::array<Eigen::Matrix<double, 12, 1>, 3> ue;
        for (int r = 0; r < 3; ++r) ue[r] = gather(cs.field(s, r + 1), nodes);
        for (int g = 0; g < 4; ++g) {
          const auto gp = cell_gauss_point(g);
          const double y3 = grid.coord(j3) + gp[1] * h;
          const auto B = cell_quad_strain(cs.alpha, h, gp[0], gp[1]);
          const auto& C = coeffs.get(s, jc, j3, g).voigt;
          const double w = 0.25 * h * h / grid.n_slices;
          std::array<Hooke::Vector6, 3> M, T;
          for (int r = 0; r < 3; ++r) {
            M[r] = loading_mandel(cs.alpha, r + 1, y3);
            T[r] = M[r] + B * ue[r];
          }
          for (int r = 0; r < 3; ++r) {
            const Hooke::Vector6 CT = C * T[r];
            b0(r) += w * M[r].dot(C * M[r]);
            for (int q = 0; q < 3; ++q) {
              f1(r, q) += w * CT.dot(M[q]);
              f2(r, q) += w * CT.dot(T[q]);
            }
          }
        }
      }
    H.form1 += f1;
    H.form2 += f2;
    H.chi_zero_bound += b0;
  }
  H.A = 0.5 * (H.form2 + H.form2.transpose());
  H.form_gap = (H.form1 - H.form2).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, H.A.cwiseAbs().maxCoeff());
  if (H.form_gap > form_tol * scale)
    throw std::runtime_error("homogenized_tensor: the two coefficient forms disagree by " +
                             std::to_string(H.form_gap) + " (discretization or solver inaccuracy)");
  return H;
}

}  // namespace tileplate
