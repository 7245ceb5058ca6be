#include "tileplate/unfold.hpp"

#include <algorithm>
#include <cmath>

#include "tileplate/quadrature.hpp"

namespace tileplate {

std::array<double, 3> unfold_point(int alpha, int p, int q, const std::array<double, 3>& y, const PlateParams& P) {
  if (alpha == 1) return {p * P.epsilon + P.epsilon * y[0], q * P.epsilon + P.delta * y[1], P.delta * y[2]};
  return {p * P.epsilon + P.delta * y[1], q * P.epsilon + P.epsilon * y[0], P.delta * y[2]};
}

void MicroGrid::points(std::vector<std::array<double, 3>>& y, std::vector<double>& w) const {
  if (n_axial < 1 || n_cross < 1 || gauss < 1 || gauss > 3) throw std::invalid_argument("MicroGrid: bad sizes");
  const Gauss1D g = gauss_rule(gauss);
  y.clear();
  w.clear();
  for (int a = 0; a < n_axial; ++a)
    for (int ga = 0; ga < g.n; ++ga)
      for (int c = 0; c < n_cross; ++c)
        for (int gc = 0; gc < g.n; ++gc)
          for (int t = 0; t < n_cross; ++t)
            for (int gt = 0; gt < g.n; ++gt) {
              y.push_back({(a + g.x[ga]) / n_axial, -0.5 + (c + g.x[gc]) / n_cross, -0.5 + (t + g.x[gt]) / n_cross});
              w.push_back(g.w[ga] * g.w[gc] * g.w[gt] / (static_cast<double>(n_axial) * n_cross * n_cross));
            }
}

UnfoldedField unfold3(const PointField& psi, int components, int alpha, const PlateParams& P,
                      const std::vector<std::array<double, 3>>& y) {
  if (alpha != 1 && alpha != 2) throw std::invalid_argument("unfold3: alpha must be 1 or 2");
  for (const auto& s : y)
    if (s[0] < 0 || s[0] > 1 || std::abs(s[1]) > 0.5 || std::abs(s[2]) > 0.5)
      throw std::invalid_argument("unfold3: sample point outside the reference cell");
  UnfoldedField out;
  out.alpha = alpha;
  out.N = P.N_eps;
  out.components = components;
  out.y = y;
  const int N = P.N_eps;
  const std::size_t per_cell = y.size() * components;
  out.values.assign(static_cast<std::size_t>(N) * N * per_cell, 0.0);
  parallel_chunks(N * N, thread_count(), [&](int, int b, int e) {
    for (int c = b; c < e; ++c) {
      const int p = c / N, q = c % N;
      for (std::size_t k = 0; k < y.size(); ++k) {
        const Eigen::VectorXd v = psi(unfold_point(alpha, p, q, y[k], P));
        for (int j = 0; j < components; ++j) out.values[c * per_cell + k * components + j] = v(j);
      }
    }
  });
  return out;
}

UnfoldedField unfold3(const PlateMesh3D& mesh, const Vec& u, int alpha, const PlateParams& P,
                      const std::vector<std::array<double, 3>>& y) {
  return unfold3([&](const std::array<double, 3>& x) -> Eigen::VectorXd { return field_value(mesh, u, x); }, 3,
                 alpha, P, y);
}

UnfoldedField unfold2(const PlaneField& psi, int components, int alpha, const PlateParams& P,
                      const std::vector<std::array<double, 3>>& y) {
  return unfold3([&](const std::array<double, 3>& x) { return psi(x[0], x[1]); }, components, alpha, P, y);
}

Eigen::Vector3d limit_coefficients(const MacroSolution& macro, int alpha, double x1, double x2) {
  const Eigen::Matrix2d g = macro.membrane_grad(x1, x2);
  if (alpha == 1) return {g(0, 1), g(1, 1), macro.G(x2, 2)};
  return {g(1, 0), g(0, 0), macro.F(x1, 2)};
}

Hooke::Vector6 limit_strain(const MacroSolution& macro, const CorrectorSet& chi, double x1, double x2,
                            const std::array<double, 3>& y) {
  const Eigen::Vector3d S = limit_coefficients(macro, chi.alpha, x1, x2);
  Hooke::Vector6 E = Hooke::Vector6::Zero();
  for (int r = 1; r <= 3; ++r) {
    if (S(r - 1) == 0.0) continue;
    E += S(r - 1) * (loading_mandel(chi.alpha, r, y[2]) + chi.strain(r, y[0], y[1], y[2]));
  }
  return E;
}

namespace {

Hooke::Vector6 strain_at(const PlateMesh3D& mesh, const Vec& u, const std::array<double, 3>& x) {
  const Eigen::Matrix3d g = field_gradient(mesh, u, x);
  return Hooke::mandel(0.5 * (g + g.transpose()));
}

}  // namespace

StrainGap strain_gap(const PlateMesh3D& mesh, const Vec& u, const MacroSolution& macro, const CorrectorSet& chi,
                     const PlateParams& P, const MicroGrid& grid) {
  std::vector<std::array<double, 3>> y;
  std::vector<double> wy;
  grid.points(y, wy);
  const int alpha = chi.alpha, N = P.N_eps;
  const double eps = P.epsilon, scale = 1.0 / (P.epsilon * P.delta);
  const Gauss1D gx = gauss_rule(2);
  struct Part {
    double diff = 0, fine = 0, lim = 0;
  };
  std::vector<Part> parts(N * N);
  parallel_chunks(N * N, thread_count(), [&](int, int b, int e) {
    std::vector<Hooke::Vector6> F(y.size());
    for (int c = b; c < e; ++c) {
      const int p = c / N, q = c % N;
      for (std::size_t k = 0; k < y.size(); ++k) F[k] = scale * strain_at(mesh, u, unfold_point(alpha, p, q, y[k], P));
      Part s;
      for (int a = 0; a < 2; ++a)
        for (int bq = 0; bq < 2; ++bq) {
          const double x1 = (p + gx.x[a]) * eps, x2 = (q + gx.x[bq]) * eps;
          const double wx = gx.w[a] * gx.w[bq] * eps * eps;
          for (std::size_t k = 0; k < y.size(); ++k) {
            const Hooke::Vector6 E = limit_strain(macro, chi, x1, x2, y[k]);
            const double w = wx * wy[k];
            s.diff += w * (F[k] - E).squaredNorm();
            s.fine += w * F[k].squaredNorm();
            s.lim += w * E.squaredNorm();
          }
        }
      parts[c] = s;
    }
  });
  Part t;
  for (const Part& s : parts) {
    t.diff += s.diff;
    t.fine += s.fine;
    t.lim += s.lim;
  }
  StrainGap g;
  g.fine_norm = std::sqrt(t.fine);
  g.limit_norm = std::sqrt(t.lim);
  if (t.lim > 0) g.gap = std::sqrt(t.diff) / g.limit_norm;
  else g.gap = t.diff > 0 ? std::sqrt(t.diff) : 0.0;
  return g;
}

namespace {

// Breakpoints of `ax` inside [a, b], endpoints included, mapped by (x - a) / (b - a) * span + base.
std::vector<double> pieces(const Axis1DMesh& ax, double a, double b, double base, double span) {
  std::vector<double> out;
  const double tol = 1e-12 * std::max(1.0, std::abs(b - a));
  out.push_back(base);
  for (double x : ax.breakpoints)
    if (x > a + tol && x < b - tol) out.push_back(base + (x - a) / (b - a) * span);
  out.push_back(base + span);
  return out;
}

}  // namespace

double unfolded_norm_sq(const PlateMesh3D& mesh, const Vec& u, int comp, int alpha, const PlateParams& P) {
  const int N = P.N_eps;
  const double eps = P.epsilon, d = P.delta;
  const int ia = alpha == 1 ? 0 : 1, ic = 1 - ia;
  const Gauss1D g = gauss_rule(2);
  const std::vector<double> y3 = pieces(mesh.axes[2], -0.5 * d, 0.5 * d, -0.5, 1.0);
  std::vector<double> part(N * N, 0.0);
  for (int c = 0; c < N * N; ++c) {
    const int p = c / N, q = c % N;
    const int axial_cell = alpha == 1 ? p : q, cross_cell = alpha == 1 ? q : p;
    const auto ya = pieces(mesh.axes[ia], axial_cell * eps, (axial_cell + 1) * eps, 0.0, 1.0);
    const auto yc = pieces(mesh.axes[ic], cross_cell * eps - 0.5 * d, cross_cell * eps + 0.5 * d, -0.5, 1.0);
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < ya.size(); ++i)
      for (std::size_t j = 0; j + 1 < yc.size(); ++j)
        for (std::size_t k = 0; k + 1 < y3.size(); ++k)
          for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
              for (int t = 0; t < 2; ++t) {
                const std::array<double, 3> y = {ya[i] + g.x[a] * (ya[i + 1] - ya[i]),
                                                 yc[j] + g.x[b] * (yc[j + 1] - yc[j]),
                                                 y3[k] + g.x[t] * (y3[k + 1] - y3[k])};
                const double w = g.w[a] * g.w[b] * g.w[t] * (ya[i + 1] - ya[i]) * (yc[j + 1] - yc[j]) *
                                 (y3[k + 1] - y3[k]);
                const double v = field_value(mesh, u, unfold_point(alpha, p, q, y, P))(comp);
                s += w * v * v;
              }
    part[c] = s * eps * eps;
  }
  double total = 0.0;
  for (double s : part) total += s;
  return total;
}

double beam_norm_sq(const PlateMesh3D& mesh, const Vec& u, int comp, int alpha, const PlateParams& P,
                    bool covered_only) {
  const int ia = alpha == 1 ? 0 : 1, ic = 1 - ia;
  const Gauss1D g = gauss_rule(2);
  double total = 0.0;
  for (int e = 0; e < mesh.element_count(); ++e) {
    const auto ijk = mesh.element_ijk(e);
    const Axis1DMesh& cross = mesh.axes[ic];
    if (cross.band_tags[ijk[ic]] != Band::Beam) continue;
    if (covered_only && cross.band_index[ijk[ic]] >= P.N_eps) continue;
    const auto lo = mesh.element_lo(e), hi = mesh.element_hi(e);
    std::array<double, 3> clo = lo, chi = hi;
    if (covered_only) {
      clo[ia] = std::max(lo[ia], 0.0);
      chi[ia] = std::min(hi[ia], P.L);
      if (chi[ia] <= clo[ia]) continue;
    }
    const auto v = element_values(mesh, u, e);
    const double vol = (chi[0] - clo[0]) * (chi[1] - clo[1]) * (chi[2] - clo[2]);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int t = 0; t < 2; ++t) {
          std::array<double, 3> xi;
          const int idx[3] = {a, b, t};
          for (int k = 0; k < 3; ++k) xi[k] = (clo[k] + g.x[idx[k]] * (chi[k] - clo[k]) - lo[k]) / (hi[k] - lo[k]);
          const auto N = hex8_shape(xi);
          double s = 0.0;
          for (int n = 0; n < 8; ++n) s += N[n] * v(n, comp);
          total += g.w[a] * g.w[b] * g.w[t] * vol * s * s;
        }
  }
  return total;
}

}  // namespace tileplate
