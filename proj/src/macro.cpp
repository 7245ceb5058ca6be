#include "tileplate/macro.hpp"

#include <algorithm>
#include <cmath>

#include "tileplate/quadrature.hpp"

namespace tileplate {

namespace {

bool lands_on_grid(double x, double h) {
  const double t = x / h;
  return std::abs(t - std::round(t)) <= 1e-9 * std::max(1.0, t);
}

int element_of(double x, double h, int n) {
  return std::clamp(static_cast<int>(std::floor(x / h)), 0, n - 1);
}

}  // namespace

MacroSpace build_macro_space(double L, double l, int n_membrane, int n_beam) {
  if (n_membrane < 4) throw std::invalid_argument("macro space: n_membrane must be >= 4");
  if (n_beam < 8) throw std::invalid_argument("macro space: n_beam must be >= 8");
  if (!(l > 0.0) || !(l < L)) throw std::invalid_argument("macro space: need 0 < l < L");
  MacroSpace s;
  s.L = L;
  s.l = l;
  s.n_membrane = n_membrane;
  s.n_beam = n_beam;
  s.hm = L / n_membrane;
  s.hb = L / n_beam;
  if (!lands_on_grid(l, s.hb)) throw std::invalid_argument("macro space: l is not a node of the beam grid");
  if (!lands_on_grid(l, s.hm)) throw std::invalid_argument("macro space: l is not a node of the membrane grid");
  const double tol = 1e-12 * L;
  for (int i = 0; i <= n_membrane; ++i)
    for (int j = 0; j <= n_membrane; ++j) {
      const double x1 = i * s.hm, x2 = j * s.hm;
      const bool on_gamma = (i == 0 && x2 <= l + tol) || (j == 0 && x1 <= l + tol);
      if (on_gamma)
        for (int c = 0; c < 2; ++c) s.clamped.push_back(s.dof_U(c, i, j));
    }
  for (int k = 0; k <= n_beam; ++k)
    if (k * s.hb <= l + tol)
      for (int d = 0; d < 2; ++d) {
        s.clamped.push_back(s.dof_F(k, d));
        s.clamped.push_back(s.dof_G(k, d));
      }
  std::sort(s.clamped.begin(), s.clamped.end());
  return s;
}

namespace {

// Local dof map of one quadrature cell: 8 membrane (U1 at 4 nodes, U2 at 4
// nodes, node order (0,0),(1,0),(0,1),(1,1)), then 4 F, then 4 G dofs.
struct CellDofs {
  std::array<int, 16> dof;
  int im, jm, kf, kg;
};

CellDofs cell_dofs(const MacroSpace& s, double x1, double x2) {
  CellDofs c;
  c.im = element_of(x1, s.hm, s.n_membrane);
  c.jm = element_of(x2, s.hm, s.n_membrane);
  c.kf = element_of(x1, s.hb, s.n_beam);
  c.kg = element_of(x2, s.hb, s.n_beam);
  for (int comp = 0; comp < 2; ++comp)
    for (int b = 0; b < 2; ++b)
      for (int a = 0; a < 2; ++a) c.dof[4 * comp + a + 2 * b] = s.dof_U(comp, c.im + a, c.jm + b);
  for (int d = 0; d < 4; ++d) {
    c.dof[8 + d] = s.dof_F(c.kf + d / 2, d % 2);
    c.dof[12 + d] = s.dof_G(c.kg + d / 2, d % 2);
  }
  return c;
}

struct PointOps {
  Eigen::Matrix<double, 3, 16> B1 = Eigen::Matrix<double, 3, 16>::Zero();
  Eigen::Matrix<double, 3, 16> B2 = Eigen::Matrix<double, 3, 16>::Zero();
  Eigen::Matrix<double, 3, 16> N = Eigen::Matrix<double, 3, 16>::Zero();  // (U1, U2, U3) values
};

PointOps point_ops(const MacroSpace& s, const CellDofs& c, double x1, double x2) {
  PointOps o;
  const double s1 = (x1 - c.im * s.hm) / s.hm, s2 = (x2 - c.jm * s.hm) / s.hm;
  for (int b = 0; b < 2; ++b)
    for (int a = 0; a < 2; ++a) {
      const double f1 = a ? s1 : 1 - s1, f2 = b ? s2 : 1 - s2;
      const double d1 = (a ? 1.0 : -1.0) * f2 / s.hm, d2 = f1 * (b ? 1.0 : -1.0) / s.hm;
      const int n = a + 2 * b;
      // family 1: (d2 U1, d2 U2, G'')
      o.B1(0, n) = d2;
      o.B1(1, 4 + n) = d2;
      // family 2: (d1 U2, d1 U1, F'')
      o.B2(0, 4 + n) = d1;
      o.B2(1, n) = d1;
      o.N(0, n) = f1 * f2;
      o.N(1, 4 + n) = f1 * f2;
    }
  const HermiteBasis hf = hermite_basis((x1 - c.kf * s.hb) / s.hb, s.hb);
  const HermiteBasis hg = hermite_basis((x2 - c.kg * s.hb) / s.hb, s.hb);
  for (int d = 0; d < 4; ++d) {
    o.B2(2, 8 + d) = hf.d2N(d);
    o.B1(2, 12 + d) = hg.d2N(d);
    o.N(2, 8 + d) = hf.N(d);
    o.N(2, 12 + d) = hg.N(d);
  }
  return o;
}

// Common refinement of the membrane and beam grids on (0, L).
std::vector<double> refinement(const MacroSpace& s) {
  std::vector<double> b;
  for (int i = 0; i <= s.n_membrane; ++i) b.push_back(i * s.hm);
  for (int k = 0; k <= s.n_beam; ++k) b.push_back(k * s.hb);
  std::sort(b.begin(), b.end());
  std::vector<double> out;
  for (double x : b)
    if (out.empty() || x - out.back() > 1e-12 * s.L) out.push_back(x);
  out.back() = s.L;
  return out;
}

}  // namespace

SymmetricSparseSystem assemble_macro(const MacroSpace& s, const Eigen::Matrix3d& A1, const Eigen::Matrix3d& A2,
                                     const Eigen::Vector3d& f) {
  const std::vector<double> br = refinement(s);
  const int nr = static_cast<int>(br.size()) - 1;
  const Gauss1D g = gauss_rule(3);
  SymmetricSparseSystem sys;
  sys.rhs = Vec::Zero(s.total_dofs());
  auto cell_loop = [&](int e, auto&& body) {
    const int ix = e / nr, iy = e % nr;
    const double a1 = br[ix], b1 = br[ix + 1], a2 = br[iy], b2 = br[iy + 1];
    const CellDofs c = cell_dofs(s, 0.5 * (a1 + b1), 0.5 * (a2 + b2));
    for (int p = 0; p < g.n; ++p)
      for (int q = 0; q < g.n; ++q) {
        const double x1 = a1 + g.x[p] * (b1 - a1), x2 = a2 + g.x[q] * (b2 - a2);
        const double w = g.w[p] * g.w[q] * (b1 - a1) * (b2 - a2);
        body(c, point_ops(s, c, x1, x2), w);
      }
  };
  sys.matrix = assemble_matrix(s.total_dofs(), nr * nr, [&](int e, std::vector<Triplet>& t) {
    Eigen::Matrix<double, 16, 16> K = Eigen::Matrix<double, 16, 16>::Zero();
    CellDofs cd{};
    cell_loop(e, [&](const CellDofs& c, const PointOps& o, double w) {
      cd = c;
      K.noalias() += w * (o.B1.transpose() * A1 * o.B1 + o.B2.transpose() * A2 * o.B2);
    });
    K = (0.5 * (K + K.transpose())).eval();
    for (int a = 0; a < 16; ++a)
      for (int b = 0; b < 16; ++b)
        if (K(a, b) != 0.0) t.emplace_back(cd.dof[a], cd.dof[b], K(a, b));
  });
  for (int e = 0; e < nr * nr; ++e)
    cell_loop(e, [&](const CellDofs& c, const PointOps& o, double w) {
      const Eigen::Matrix<double, 16, 1> fe = w * (o.N.transpose() * f);
      for (int a = 0; a < 16; ++a) sys.rhs(c.dof[a]) += fe(a);
    });
  return sys;
}

MacroSolution solve_macro(const MacroSpace& space, const Eigen::Matrix3d& A1, const Eigen::Matrix3d& A2,
                          const Eigen::Vector3d& f, const SolverConfig& cfg) {
  for (const Eigen::Matrix3d* A : {&A1, &A2}) {
    if ((*A - A->transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, A->cwiseAbs().maxCoeff()))
      throw std::invalid_argument("solve_macro: homogenized tensor is not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(*A);
    if (!(es.eigenvalues().minCoeff() > 0.0)) throw std::invalid_argument("solve_macro: homogenized tensor is not SPD");
  }
  MacroSolution sol;
  sol.space = space;
  sol.A1 = A1;
  sol.A2 = A2;
  const SymmetricSparseSystem sys = assemble_macro(space, A1, A2, f);
  ConstraintSet cons;
  cons.dirichlet = space.clamped;
  const ReducedSystem red = apply_constraints(sys, cons, {});
  SolveStats st;
  const Vec x = solve_spd(red.sys.matrix, red.sys.rhs, cfg, &st);
  sol.dofs = red.map.expand(x);
  sol.residual = st.rel_residual;
  sol.reduced_dofs = red.map.reduced_dofs;
  Vec Ku;
  sym_matvec(sys.matrix, sol.dofs, Ku);
  sol.energy = sol.dofs.dot(Ku);
  sol.load_work = sys.rhs.dot(sol.dofs);
  return sol;
}

Eigen::Vector2d MacroSolution::membrane(double x1, double x2) const {
  const MacroSpace& s = space;
  const int i = element_of(x1, s.hm, s.n_membrane), j = element_of(x2, s.hm, s.n_membrane);
  const double s1 = (x1 - i * s.hm) / s.hm, s2 = (x2 - j * s.hm) / s.hm;
  Eigen::Vector2d v = Eigen::Vector2d::Zero();
  for (int b = 0; b < 2; ++b)
    for (int a = 0; a < 2; ++a) {
      const double w = (a ? s1 : 1 - s1) * (b ? s2 : 1 - s2);
      for (int c = 0; c < 2; ++c) v(c) += w * dofs(s.dof_U(c, i + a, j + b));
    }
  return v;
}

Eigen::Matrix2d MacroSolution::membrane_grad(double x1, double x2) const {
  const MacroSpace& s = space;
  const int i = element_of(x1, s.hm, s.n_membrane), j = element_of(x2, s.hm, s.n_membrane);
  const double s1 = (x1 - i * s.hm) / s.hm, s2 = (x2 - j * s.hm) / s.hm;
  Eigen::Matrix2d g = Eigen::Matrix2d::Zero();
  for (int b = 0; b < 2; ++b)
    for (int a = 0; a < 2; ++a) {
      const double f1 = a ? s1 : 1 - s1, f2 = b ? s2 : 1 - s2;
      const double d1 = (a ? 1.0 : -1.0) * f2 / s.hm, d2 = f1 * (b ? 1.0 : -1.0) / s.hm;
      for (int c = 0; c < 2; ++c) {
        const double u = dofs(s.dof_U(c, i + a, j + b));
        g(c, 0) += d1 * u;
        g(c, 1) += d2 * u;
      }
    }
  return g;
}

namespace {

double hermite_eval(const MacroSolution& sol, double x, int d, bool is_f) {
  const MacroSpace& s = sol.space;
  const int k = element_of(x, s.hb, s.n_beam);
  const HermiteBasis h = hermite_basis((x - k * s.hb) / s.hb, s.hb);
  const Eigen::Vector4d& row = d == 0 ? h.N : (d == 1 ? h.dN : h.d2N);
  double v = 0.0;
  for (int a = 0; a < 4; ++a) {
    const int dof = is_f ? s.dof_F(k + a / 2, a % 2) : s.dof_G(k + a / 2, a % 2);
    v += row(a) * sol.dofs(dof);
  }
  return v;
}

}  // namespace

double MacroSolution::F(double x, int d) const { return hermite_eval(*this, x, d, true); }
double MacroSolution::G(double x, int d) const { return hermite_eval(*this, x, d, false); }

std::vector<Eigen::Vector3d> eval_deflection(const MacroSolution& sol, const std::vector<Eigen::Vector2d>& points) {
  std::vector<Eigen::Vector3d> out;
  out.reserve(points.size());
  for (const auto& p : points) {
    if (p(0) < -1e-12 || p(1) < -1e-12 || p(0) > sol.space.L + 1e-12 || p(1) > sol.space.L + 1e-12)
      throw std::invalid_argument("eval_deflection: point outside the closed square");
    const Eigen::Vector2d m = sol.membrane(p(0), p(1));
    out.emplace_back(m(0), m(1), sol.U3(p(0), p(1)));
  }
  return out;
}

}  // namespace tileplate
