#include "tileplate/material.hpp"

#include <algorithm>
#include <cmath>

#include "tileplate/quadrature.hpp"

namespace tileplate {

HookeField HookeField::isotropic(double lambda, double mu) {
  HookeField f;
  f.kind = Kind::Isotropic;
  f.lambda = lambda;
  f.mu = mu;
  f.iso_ = isotropic_hooke(lambda, mu);
  validate_hooke(f.iso_);
  return f;
}

HookeField HookeField::cell_periodic(CellTable family1, CellTable family2) {
  HookeField f;
  f.kind = Kind::CellPeriodic;
  for (CellTable* t : {&family1, &family2}) {
    if (t->n_cross < 1 || t->n_slices < 1)
      throw MaterialError("cell table: resolutions must be positive");
    if (static_cast<long>(t->tensors.size()) != static_cast<long>(t->n_cross) * t->n_cross * t->n_slices)
      throw MaterialError("cell table: tensor count does not match n_cross^2 * n_slices");
    for (const Hooke& h : t->tensors) validate_hooke(h);
  }
  f.tables = {std::move(family1), std::move(family2)};
  return f;
}

const Hooke& HookeField::at(int alpha, double y_axial, double y_cross, double y3) const {
  if (kind == Kind::Isotropic) return iso_;
  const CellTable& t = tables.at(alpha - 1);
  auto idx = [](double y, int n, double lo) {
    return std::clamp(static_cast<int>(std::floor((y - lo) * n)), 0, n - 1);
  };
  const int s = idx(y_axial, t.n_slices, 0.0);
  const int jc = idx(y_cross, t.n_cross, -0.5);
  const int j3 = idx(y3, t.n_cross, -0.5);
  return t.tensors[(s * t.n_cross + j3) * t.n_cross + jc];
}

CellCoefficients cell_coefficients(const HookeField& field, int alpha, const CellGrid& grid) {
  if (grid.alpha != alpha) throw MaterialError("cell_coefficients: grid family mismatch");
  CellCoefficients c;
  c.grid = grid;
  const int n = grid.n_cross;
  c.at_qp.resize(4ull * grid.n_slices * n * n);
  for (int s = 0; s < grid.n_slices; ++s) {
    const double ya = (s + 0.5) / grid.n_slices;
    for (int j3 = 0; j3 < n; ++j3)
      for (int jc = 0; jc < n; ++jc)
        for (int g = 0; g < 4; ++g) {
          const auto gp = cell_gauss_point(g);
          const double yc = grid.coord(jc) + gp[0] * grid.h();
          const double y3 = grid.coord(j3) + gp[1] * grid.h();
          c.at_qp[4 * grid.element(s, jc, j3) + g] = field.at(alpha, ya, yc, y3);
        }
  }
  if (field.kind == HookeField::Kind::CellPeriodic) {
    const std::size_t per = 4ull * n * n;
    for (int s = 1; s < grid.n_slices && c.slice_invariant; ++s)
      for (std::size_t i = 0; i < per; ++i)
        if (!(c.at_qp[s * per + i] == c.at_qp[i])) {
          c.slice_invariant = false;
          break;
        }
  }
  return c;
}

std::array<double, 3> inverse_unfold(int alpha, const std::array<double, 3>& x, const PlateParams& P) {
  const int a = alpha - 1;       // axial axis
  const int c = 2 - alpha;       // cross axis
  const double t = x[a] / P.epsilon;
  const double y_axial = std::clamp(t - std::floor(t), 0.0, 1.0);
  const double q = std::round(x[c] / P.epsilon);
  const double y_cross = std::clamp((x[c] - q * P.epsilon) / P.delta, -0.5, 0.5);
  const double y3 = std::clamp(x[2] / P.delta, -0.5, 0.5);
  return {y_axial, y_cross, y3};
}

std::vector<std::optional<Hooke>> fine_coefficients(const HookeField& field, const PlateMesh3D& mesh,
                                                    const PlateParams& P) {
  std::vector<std::optional<Hooke>> out(mesh.element_count());
  for (int e = 0; e < mesh.element_count(); ++e) {
    const Region& r = mesh.element_region[e];
    if (r.hard) continue;
    if (r.family != 1 && r.family != 2)
      throw MaterialError("fine_coefficients: soft element without a beam family");
    const auto lo = mesh.element_lo(e), hi = mesh.element_hi(e);
    const std::array<double, 3> xc = {(lo[0] + hi[0]) / 2, (lo[1] + hi[1]) / 2, (lo[2] + hi[2]) / 2};
    const auto y = inverse_unfold(r.family, xc, P);
    out[e] = field.at(r.family, y[0], y[1], y[2]);
  }
  return out;
}

}  // namespace tileplate
