#include "tileplate/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace tileplate {

namespace {

bool near_integer(double v, int& out) {
  const double r = std::round(v);
  if (std::abs(v - r) > 1e-9 * std::max(1.0, std::abs(v))) return false;
  out = static_cast<int>(r);
  return true;
}

}  // namespace

PlateParams PlateParams::make(double L, double l, double epsilon, double delta) {
  if (!(delta > 0.0) || !(3.0 * delta < epsilon) || !(epsilon < 1.0))
    throw GeometryError("plate params: need 0 < 3*delta < epsilon < 1");
  if (!(l > 0.0) || !(l < L)) throw GeometryError("plate params: need 0 < l < L");
  PlateParams p;
  p.L = L;
  p.l = l;
  p.epsilon = epsilon;
  p.delta = delta;
  if (!near_integer(L / epsilon, p.N_eps))
    throw GeometryError("plate params: L/epsilon must be an integer");
  if (!near_integer(l / epsilon, p.n_eps))
    throw GeometryError("plate params: l/epsilon must be an integer");
  return p;
}

int Axis1DMesh::locate(double x) const {
  const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), x);
  int i = static_cast<int>(it - breakpoints.begin()) - 1;
  return std::clamp(i, 0, intervals() - 1);
}

namespace {

// Beam band p edges are p*eps -+ delta/2; computed once so hard-band ends match exactly.
double beam_point(const PlateParams& P, int p, int k, int nb) {
  return p * P.epsilon + (static_cast<double>(k) / nb - 0.5) * P.delta;
}

Axis1DMesh build_inplane_axis(const PlateParams& P, int nb, int nh) {
  Axis1DMesh ax;
  const int N = P.N_eps;
  for (int p = 0; p <= N; ++p) {
    for (int k = 0; k < nb; ++k) {
      ax.breakpoints.push_back(beam_point(P, p, k, nb));
      ax.band_tags.push_back(Band::Beam);
      ax.band_index.push_back(p);
    }
    if (p == N) {
      ax.breakpoints.push_back(beam_point(P, p, nb, nb));
      break;
    }
    const double a = beam_point(P, p, nb, nb);
    const double b = beam_point(P, p + 1, 0, nb);
    for (int k = 0; k < nh; ++k) {
      ax.breakpoints.push_back(k == 0 ? a : a + (b - a) * k / nh);
      ax.band_tags.push_back(Band::Hard);
      ax.band_index.push_back(p);
    }
  }
  return ax;
}

}  // namespace

PlateMesh3D build_plate_mesh(const PlateParams& params, const MeshResolution& res) {
  if (res.nb < 2 || res.nh < 1 || res.nt < 2)
    throw GeometryError("plate mesh: need nb >= 2, nh >= 1, nt >= 2");
  // Re-validate in case the struct was filled by hand.
  PlateParams P = PlateParams::make(params.L, params.l, params.epsilon, params.delta);

  PlateMesh3D m;
  m.params = P;
  m.res = res;
  m.axes[0] = build_inplane_axis(P, res.nb, res.nh);
  m.axes[1] = m.axes[0];
  Axis1DMesh& z = m.axes[2];
  for (int k = 0; k <= res.nt; ++k) {
    z.breakpoints.push_back((static_cast<double>(k) / res.nt - 0.5) * P.delta);
    if (k < res.nt) {
      z.band_tags.push_back(Band::Beam);
      z.band_index.push_back(0);
    }
  }

  m.element_region.resize(m.element_count());
  for (int i = 0; i < m.ex(); ++i)
    for (int j = 0; j < m.ey(); ++j) {
      Region r;
      const Band bx = m.axes[0].band_tags[i];
      const Band by = m.axes[1].band_tags[j];
      if (bx == Band::Hard && by == Band::Hard) {
        r.hard = true;
        r.p = m.axes[0].band_index[i];
        r.q = m.axes[1].band_index[j];
      } else if (by == Band::Beam) {
        r.family = 1;  // junction squares take family 1
        r.p = m.axes[0].band_index[i];
        r.q = m.axes[1].band_index[j];
      } else {
        r.family = 2;
        r.p = m.axes[0].band_index[i];
        r.q = m.axes[1].band_index[j];
      }
      for (int k = 0; k < m.ez(); ++k) m.element_region[m.element(i, j, k)] = r;
    }
  return m;
}

std::array<double, 3> PlateMesh3D::node_coord(int n) const {
  const int k = n % nz();
  const int j = (n / nz()) % ny();
  const int i = n / (nz() * ny());
  return {axes[0].breakpoints[i], axes[1].breakpoints[j], axes[2].breakpoints[k]};
}

std::array<int, 3> PlateMesh3D::element_ijk(int e) const {
  const int k = e % ez();
  const int j = (e / ez()) % ey();
  const int i = e / (ez() * ey());
  return {i, j, k};
}

std::array<int, 8> PlateMesh3D::element_nodes(int e) const {
  const auto [i, j, k] = element_ijk(e);
  std::array<int, 8> out{};
  for (int c = 0; c < 2; ++c)
    for (int b = 0; b < 2; ++b)
      for (int a = 0; a < 2; ++a) out[a + 2 * b + 4 * c] = node(i + a, j + b, k + c);
  return out;
}

std::array<double, 3> PlateMesh3D::element_lo(int e) const {
  const auto [i, j, k] = element_ijk(e);
  return {axes[0].breakpoints[i], axes[1].breakpoints[j], axes[2].breakpoints[k]};
}

std::array<double, 3> PlateMesh3D::element_hi(int e) const {
  const auto [i, j, k] = element_ijk(e);
  return {axes[0].breakpoints[i + 1], axes[1].breakpoints[j + 1], axes[2].breakpoints[k + 1]};
}

std::vector<int> clamped_node_set(const PlateMesh3D& mesh, const PlateParams& P) {
  const double d = P.delta;
  const double tol = 1e-12 * std::max(1.0, P.L);
  auto in = [tol](double x, double a, double b) { return x >= a - tol && x <= b + tol; };
  std::vector<int> out;
  for (int n = 0; n < mesh.node_count(); ++n) {
    const auto x = mesh.node_coord(n);
    const bool strip1 = in(x[0], -d / 2, d / 2) && in(x[1], -d / 2, P.l - d / 2);
    const bool strip2 = in(x[1], -d / 2, d / 2) && in(x[0], -d / 2, P.l - d / 2);
    if (strip1 || strip2) out.push_back(n);
  }
  return out;
}

std::string CellGrid::dirichlet_faces() const {
  return alpha == 1 ? "y2=+-1/2" : "y1=+-1/2";
}

CellGrid build_cell_grid(int alpha, int n_cross, int n_slices) {
  if (alpha != 1 && alpha != 2) throw GeometryError("cell grid: alpha must be 1 or 2");
  if (n_cross < 2 || n_cross % 2 != 0)
    throw GeometryError("cell grid: n_cross must be even and >= 2 (y3 = 0 must be a mesh line)");
  if (n_slices < 1) throw GeometryError("cell grid: n_slices must be >= 1");
  CellGrid g;
  g.alpha = alpha;
  g.n_cross = n_cross;
  g.n_slices = n_slices;
  return g;
}

}  // namespace tileplate
