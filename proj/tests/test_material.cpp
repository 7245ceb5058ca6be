#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "tileplate/material.hpp"
#include "tileplate/quadrature.hpp"

using namespace tileplate;

namespace {

using Full = std::array<std::array<std::array<std::array<double, 3>, 3>, 3>, 3>;

Full isotropic_full(double lambda, double mu) {
  Full A{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l)
          A[i][j][k][l] = lambda * (i == j) * (k == l) + mu * ((i == k) * (j == l) + (i == l) * (j == k));
  return A;
}

Eigen::Matrix3d random_sym(std::mt19937& rng) {
  std::normal_distribution<double> n;
  Eigen::Matrix3d e;
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) e(i, j) = e(j, i) = n(rng);
  return e / e.norm();
}

}  // namespace

TEST_CASE("isotropic stored matrix") {
  const Hooke t = isotropic_hooke(1.0, 1.0);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(t.voigt(i, j) == (i == j ? 3.0 : 1.0));
  for (int s = 3; s < 6; ++s) CHECK(t.voigt(s, s) == 2.0);
  CHECK(t.voigt.block<3, 3>(0, 3).isZero());
  CHECK((t.voigt - hooke_from_full(isotropic_full(1.0, 1.0)).voigt).cwiseAbs().maxCoeff() < 1e-15);
  CHECK_THROWS_AS(isotropic_hooke(1.0, 0.0), MaterialError);
  CHECK_THROWS_AS(isotropic_hooke(-1.0, 1.0), MaterialError);
}

TEST_CASE("energy density matches the closed form") {
  std::mt19937 rng(7);
  const double lambda = 0.7, mu = 1.3;
  const Hooke t = isotropic_hooke(lambda, mu);
  for (int k = 0; k < 20; ++k) {
    const Eigen::Matrix3d e = random_sym(rng), f = random_sym(rng);
    const double ref = lambda * e.trace() * f.trace() + 2 * mu * (e.array() * f.array()).sum();
    CHECK(t.contract(e, f) == doctest::Approx(ref).epsilon(1e-13));
    CHECK((Hooke::from_mandel(Hooke::mandel(e)) - e).norm() < 1e-15);
  }
}

TEST_CASE("full reconstruction has all symmetries") {
  const Full A = isotropic_full(2.0, 0.5);
  const Hooke t = hooke_from_full(A);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) {
          CHECK(t.full(i, j, k, l) == doctest::Approx(A[i][j][k][l]).epsilon(1e-14));
          CHECK(t.full(i, j, k, l) == t.full(j, i, k, l));
          CHECK(t.full(i, j, k, l) == t.full(i, j, l, k));
          CHECK(t.full(i, j, k, l) == doctest::Approx(t.full(k, l, i, j)).epsilon(1e-15));
        }
}

TEST_CASE("validate_hooke") {
  CHECK(validate_hooke(isotropic_hooke(1.0, 1.0)) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(validate_hooke(isotropic_hooke(0.0, 1.0)) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK_THROWS_AS(validate_hooke(Hooke{}), MaterialError);

  // Brute force: A e:e over unit symmetric e never drops below 2 and reaches
  // it on a pure shear.
  std::mt19937 rng(11);
  const Hooke t = isotropic_hooke(1.0, 1.0);
  double lo = 1e300;
  for (int k = 0; k < 5000; ++k) {
    const Eigen::Matrix3d e = random_sym(rng);
    lo = std::min(lo, t.contract(e, e));
  }
  CHECK(lo >= 2.0 - 1e-12);
  Eigen::Matrix3d shear = Eigen::Matrix3d::Zero();
  shear(0, 1) = shear(1, 0) = std::sqrt(0.5);
  CHECK(t.contract(shear, shear) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("symmetry violations are rejected") {
  Full A = isotropic_full(1.0, 1.0);
  A[0][0][0][1] = A[0][0][1][0] = 0.3;  // A_1112 != A_1211
  CHECK_THROWS_WITH_AS(hooke_from_full(A), doctest::Contains("major symmetry"), MaterialError);
  Full B = isotropic_full(1.0, 1.0);
  B[0][1][0][0] = 0.2;  // A_1211 != A_2111
  CHECK_THROWS_AS(hooke_from_full(B), MaterialError);
  Hooke t = isotropic_hooke(1.0, 1.0);
  t.voigt(0, 5) = 0.1;
  CHECK_THROWS_WITH_AS(validate_hooke(t), doctest::Contains("symmetry"), MaterialError);
}

TEST_CASE("cell coefficients") {
  const HookeField iso = HookeField::isotropic(1.0, 1.0);
  const CellCoefficients c = cell_coefficients(iso, 1, build_cell_grid(1, 4, 1));
  for (const Hooke& h : c.at_qp) CHECK(h == isotropic_hooke(1.0, 1.0));

  // Two layers in y3 on a 2 x 2 table, sampled on a finer grid.
  const Hooke soft = isotropic_hooke(1.0, 1.0), stiff = isotropic_hooke(2.0, 5.0);
  CellTable layered{2, 1, {soft, soft, stiff, stiff}};
  const HookeField f = HookeField::cell_periodic(layered, layered);
  for (int n : {2, 8}) {
    const CellGrid g = build_cell_grid(2, n, 1);
    const CellCoefficients cc = cell_coefficients(f, 2, g);
    for (int j3 = 0; j3 < n; ++j3)
      for (int jc = 0; jc < n; ++jc)
        for (int q = 0; q < 4; ++q) {
          const double y3 = g.coord(j3) + cell_gauss_point(q)[1] * g.h();
          CHECK(cc.get(0, jc, j3, q) == (y3 < 0 ? soft : stiff));
        }
  }
  CHECK_THROWS_AS(cell_coefficients(iso, 2, build_cell_grid(1, 4, 1)), MaterialError);
  CHECK_THROWS_AS(HookeField::cell_periodic({2, 1, {soft}}, layered), MaterialError);
}

TEST_CASE("fine coefficients") {
  const PlateParams P = PlateParams::make(1, 0.5, 0.25, 1.0 / 24);
  const PlateMesh3D mesh = build_plate_mesh(P, {2, 2, 2});
  const auto iso = fine_coefficients(HookeField::isotropic(1.0, 1.0), mesh, P);
  for (int e = 0; e < mesh.element_count(); ++e) {
    CHECK(iso[e].has_value() == !mesh.element_region[e].hard);
    if (iso[e]) CHECK(*iso[e] == isotropic_hooke(1.0, 1.0));
  }

  // Family tables differ and are layered; junctions take family 1.
  const Hooke a0 = isotropic_hooke(1.0, 1.0), a1 = isotropic_hooke(1.0, 2.0);
  const Hooke b0 = isotropic_hooke(3.0, 1.0), b1 = isotropic_hooke(3.0, 2.0);
  const HookeField f = HookeField::cell_periodic({2, 1, {a0, a0, a1, a1}}, {2, 1, {b0, b0, b1, b1}});
  const auto layered = fine_coefficients(f, mesh, P);
  int junctions = 0;
  for (int e = 0; e < mesh.element_count(); ++e) {
    const Region& r = mesh.element_region[e];
    if (r.hard) continue;
    const auto ijk = mesh.element_ijk(e);
    const bool j = mesh.axes[0].band_tags[ijk[0]] == Band::Beam && mesh.axes[1].band_tags[ijk[1]] == Band::Beam;
    const bool below = mesh.element_hi(e)[2] <= 0;
    if (j) {
      ++junctions;
      CHECK(r.family == 1);
    }
    const Hooke& want = r.family == 1 ? (below ? a0 : a1) : (below ? b0 : b1);
    CHECK(*layered[e] == want);
  }
  CHECK(junctions == 25 * 4 * 2);
}
