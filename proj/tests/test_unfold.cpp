#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "tileplate/quadrature.hpp"
#include "tileplate/recovery.hpp"
#include "tileplate/unfold.hpp"

using namespace tileplate;

namespace {

const PlateParams kP = PlateParams::make(1.0, 0.5, 0.25, 1.0 / 24);

const PlateMesh3D& mesh() {
  static const PlateMesh3D m = build_plate_mesh(kP, {2, 2, 2});
  return m;
}

std::vector<std::array<double, 3>> sample_y() {
  std::vector<std::array<double, 3>> y;
  std::vector<double> w;
  MicroGrid{3, 2, 2}.points(y, w);
  y.push_back({0.0, -0.5, -0.5});
  y.push_back({1.0, 0.5, 0.5});
  return y;
}

Vec random_field(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  Vec v(3 * mesh().node_count());
  for (int i = 0; i < v.size(); ++i) v(i) = u(rng);
  return v;
}

// Nodal interpolant of a global trilinear polynomial.
struct Trilinear {
  std::array<double, 8> c;
  double operator()(const std::array<double, 3>& x) const {
    return c[0] + c[1] * x[0] + c[2] * x[1] + c[3] * x[2] + c[4] * x[0] * x[1] + c[5] * x[0] * x[2] +
           c[6] * x[1] * x[2] + c[7] * x[0] * x[1] * x[2];
  }
  Eigen::Vector3d grad(const std::array<double, 3>& x) const {
    return {c[1] + c[4] * x[1] + c[5] * x[2] + c[7] * x[1] * x[2], c[2] + c[4] * x[0] + c[6] * x[2] + c[7] * x[0] * x[2],
            c[3] + c[5] * x[0] + c[6] * x[1] + c[7] * x[0] * x[1]};
  }
};

Trilinear random_trilinear(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  Trilinear t;
  for (double& c : t.c) c = u(rng);
  return t;
}

Vec interpolate(const Trilinear& t) {
  Vec v = Vec::Zero(3 * mesh().node_count());
  for (int n = 0; n < mesh().node_count(); ++n) v(3 * n) = t(mesh().node_coord(n));
  return v;
}

// Polynomial integral over the box by 2-point Gauss (exact for the squared trilinear).
double box_integral(const Trilinear& t, std::array<double, 3> lo, std::array<double, 3> hi) {
  const Gauss1D g = gauss_rule(2);
  double s = 0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c) {
        const std::array<double, 3> x{lo[0] + g.x[a] * (hi[0] - lo[0]), lo[1] + g.x[b] * (hi[1] - lo[1]),
                                      lo[2] + g.x[c] * (hi[2] - lo[2])};
        s += g.w[a] * g.w[b] * g.w[c] * std::pow(t(x), 2);
      }
  return s * (hi[0] - lo[0]) * (hi[1] - lo[1]) * (hi[2] - lo[2]);
}

}  // namespace

TEST_CASE("unfolding is the identity on constants") {
  const auto y = sample_y();
  for (int alpha : {1, 2}) {
    const UnfoldedField f = unfold3([](const std::array<double, 3>&) { return Eigen::Vector2d(1.5, -2.0).eval(); }, 2,
                                    alpha, kP, y);
    for (double v : f.values) CHECK((v == 1.5 || v == -2.0));
    Vec c(3 * mesh().node_count());
    for (int n = 0; n < mesh().node_count(); ++n) c.segment<3>(3 * n) = Eigen::Vector3d(0.7, 0.1, -0.3);
    const UnfoldedField m = unfold3(mesh(), c, alpha, kP, y);
    for (int p = 0; p < 4; ++p)
      for (int q = 0; q < 4; ++q)
        for (std::size_t k = 0; k < y.size(); ++k) CHECK(m.at(p, q, k, 1) == doctest::Approx(0.1).epsilon(1e-14));
    const UnfoldedField u2 = unfold2([](double, double) { return Eigen::VectorXd::Constant(1, 4.0); }, 1, alpha, kP, y);
    for (double v : u2.values) CHECK(v == 4.0);
  }
}

TEST_CASE("affine field formulas") {
  const auto y = sample_y();
  const double e = kP.epsilon, d = kP.delta;
  auto coords = [](const std::array<double, 3>& x) { return Eigen::Vector3d(x[0], x[1], x[2]); };
  for (int alpha : {1, 2}) {
    const UnfoldedField f = unfold3(coords, 3, alpha, kP, y);
    for (int p = 0; p < 4; ++p)
      for (int q = 0; q < 4; ++q)
        for (std::size_t k = 0; k < y.size(); ++k) {
          const auto& s = y[k];
          // Pi(x1) = eps [x1/eps] + eps y_axial for alpha = 1, p eps + delta y_cross for alpha = 2.
          const double x1 = alpha == 1 ? p * e + e * s[0] : p * e + d * s[1];
          const double x2 = alpha == 1 ? q * e + d * s[1] : q * e + e * s[0];
          CHECK(f.at(p, q, k, 0) == doctest::Approx(x1).epsilon(1e-15));
          CHECK(f.at(p, q, k, 1) == doctest::Approx(x2).epsilon(1e-15));
          CHECK(f.at(p, q, k, 2) == doctest::Approx(d * s[2]).epsilon(1e-15));
        }
  }
  // unfold2 of x2 for alpha = 2, and compatibility with unfold3 at y3 = 0.
  auto plane = [](double a, double b) { return Eigen::Vector2d(a * b + a, b).eval(); };
  std::vector<std::array<double, 3>> y0 = y;
  for (auto& s : y0) s[2] = 0.0;
  const UnfoldedField u2 = unfold2(plane, 2, 2, kP, y);
  const UnfoldedField u3 = unfold3([&](const std::array<double, 3>& x) { return plane(x[0], x[1]); }, 2, 2, kP, y0);
  for (int p = 0; p < 4; ++p)
    for (int q = 0; q < 4; ++q)
      for (std::size_t k = 0; k < y.size(); ++k) {
        CHECK(u2.at(p, q, k, 1) == doctest::Approx(q * e + e * y[k][0]).epsilon(1e-15));
        CHECK(u2.at(p, q, k, 0) == u3.at(p, q, k, 0));
      }

  // Mesh path: resampling of the interpolated affine field.
  Vec lin(3 * mesh().node_count());
  for (int n = 0; n < mesh().node_count(); ++n) {
    const auto x = mesh().node_coord(n);
    lin.segment<3>(3 * n) = Eigen::Vector3d(x[0], x[1], x[2]);
  }
  const UnfoldedField m = unfold3(mesh(), lin, 1, kP, y);
  for (std::size_t k = 0; k < y.size(); ++k) {
    CHECK(m.at(2, 1, k, 0) == doctest::Approx(2 * e + e * y[k][0]).epsilon(1e-14));
    const auto x = unfold_point(1, 2, 1, y[k], kP);
    CHECK(m.at(2, 1, k, 2) == field_value(mesh(), lin, x)(2));
  }
  CHECK_THROWS(unfold3(coords, 3, 1, kP, {{1.2, 0.0, 0.0}}));
  CHECK_THROWS(unfold3(coords, 3, 3, kP, y));
}

TEST_CASE("norm identity against exact polynomial integrals") {
  std::mt19937 rng(5);
  const double e = kP.epsilon, d = kP.delta;
  for (int trial = 0; trial < 4; ++trial) {
    const Trilinear t = random_trilinear(rng);
    const Vec v = interpolate(t);
    for (int alpha : {1, 2}) {
      double covered = 0;
      for (int p = 0; p < 4; ++p)
        for (int q = 0; q < 4; ++q) {
          std::array<double, 3> lo, hi;
          if (alpha == 1) lo = {p * e, q * e - d / 2, -d / 2}, hi = {(p + 1) * e, q * e + d / 2, d / 2};
          else lo = {p * e - d / 2, q * e, -d / 2}, hi = {p * e + d / 2, (q + 1) * e, d / 2};
          covered += box_integral(t, lo, hi);
        }
      CHECK(beam_norm_sq(mesh(), v, 0, alpha, kP, true) == doctest::Approx(covered).epsilon(1e-12));
      CHECK(unfolded_norm_sq(mesh(), v, 0, alpha, kP) == doctest::Approx(e / (d * d) * covered).epsilon(1e-12));
    }
  }
}

TEST_CASE("norm inequality and identity on 20 random trilinear fields") {
  std::mt19937 rng(2024);
  const double ratio = kP.epsilon / (kP.delta * kP.delta);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec u = random_field(rng);
    for (int alpha : {1, 2})
      for (int c = 0; c < 3; ++c) {
        const double unf = unfolded_norm_sq(mesh(), u, c, alpha, kP);
        const double whole = beam_norm_sq(mesh(), u, c, alpha, kP, false);
        const double covered = beam_norm_sq(mesh(), u, c, alpha, kP, true);
        CHECK(unf <= ratio * whole * (1 + 1e-10));
        CHECK(std::abs(unf - ratio * covered) <= 1e-10 * unf);
        CHECK(covered < whole);
      }
  }
}

TEST_CASE("derivative exchange on 20 random trilinear fields") {
  std::mt19937 rng(99);
  const double e = kP.epsilon, d = kP.delta, h = 0.01;
  // Base points chosen inside single elements so that one-sided moves stay there.
  const std::vector<std::array<double, 3>> base = {{0.3, 0.25, -0.3}, {0.3, 0.25, 0.2}, {0.7, -0.2, -0.15}};
  for (int trial = 0; trial < 20; ++trial) {
    const Vec u = random_field(rng);
    for (int alpha : {1, 2}) {
      const int ia = alpha - 1, ic = 2 - alpha;
      std::vector<std::array<double, 3>> y;
      for (const auto& b : base)
        for (int dir = 0; dir < 3; ++dir)
          for (double s : {-h, h}) {
            auto p = b;
            p[dir] += s;
            y.push_back(p);
          }
      const UnfoldedField f = unfold3(mesh(), u, alpha, kP, y);
      const double scale[3] = {e, d, d};      // axial, cross, thickness
      const int xdir[3] = {ia, ic, 2};
      double worst = 0;
      for (int p = 0; p < 4; ++p)
        for (int q = 0; q < 4; ++q)
          for (std::size_t b = 0; b < base.size(); ++b) {
            const Eigen::Matrix3d G = field_gradient(mesh(), u, unfold_point(alpha, p, q, base[b], kP));
            for (int dir = 0; dir < 3; ++dir)
              for (int c = 0; c < 3; ++c) {
                const std::size_t k = b * 6 + dir * 2;
                const double dy = (f.at(p, q, k + 1, c) - f.at(p, q, k, c)) / (2 * h);
                worst = std::max(worst, std::abs(dy - scale[dir] * G(c, xdir[dir])));
              }
          }
      CHECK(worst <= 1e-10);
    }
  }
}

TEST_CASE("derivative exchange on polynomial inputs") {
  std::mt19937 rng(17);
  const double e = kP.epsilon, d = kP.delta, h = 0.05;
  for (int trial = 0; trial < 20; ++trial) {
    const Trilinear t = random_trilinear(rng);
    auto psi = [&](const std::array<double, 3>& x) { return Eigen::VectorXd::Constant(1, t(x)); };
    for (int alpha : {1, 2}) {
      const std::vector<std::array<double, 3>> y = {{0.4, 0.1, -h}, {0.4, 0.1, h}};
      const UnfoldedField f = unfold3(psi, 1, alpha, kP, y);
      for (int p = 0; p < 4; ++p)
        for (int q = 0; q < 4; ++q) {
          const double dy3 = (f.at(p, q, 1, 0) - f.at(p, q, 0, 0)) / (2 * h);
          const double ref = d * t.grad(unfold_point(alpha, p, q, {0.4, 0.1, 0.0}, kP))(2);
          CHECK(std::abs(dy3 - ref) <= 1e-10);
        }
    }
    (void)e;
  }
}

TEST_CASE("limit strain structure") {
  const MacroSpace space = build_macro_space(1.0, 0.5, 8, 16);
  MacroSolution m;
  m.space = space;
  m.dofs = Vec::Zero(space.total_dofs());
  CorrectorSet zero;
  zero.alpha = 1;
  zero.grid = build_cell_grid(1, 4, 1);
  zero.chi = {{Vec::Zero(3 * zero.grid.nodes_per_slice()), Vec::Zero(3 * zero.grid.nodes_per_slice()),
               Vec::Zero(3 * zero.grid.nodes_per_slice())}};
  CHECK(limit_strain(m, zero, 0.3, 0.7, {0.5, 0.1, 0.2}).norm() == 0.0);

  // U2 = x2 and nothing else.
  for (int i = 0; i <= 8; ++i)
    for (int j = 0; j <= 8; ++j) m.dofs(space.dof_U(1, i, j)) = j * space.hm;
  for (const std::array<double, 3>& y : {std::array<double, 3>{0.5, 0.1, 0.2}, {0.1, -0.4, -0.3}}) {
    const Eigen::Matrix3d E = Hooke::from_mandel(limit_strain(m, zero, 0.62, 0.41, y));
    Eigen::Matrix3d want = Eigen::Matrix3d::Zero();
    want(1, 1) = 1;
    CHECK((E - want).norm() <= 1e-14);
  }

  // (1,1) entry vanishes for alpha = 1, (2,2) for alpha = 2, whatever the inputs.
  const HookeField iso = HookeField::isotropic(1.0, 1.0);
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < m.dofs.size(); ++i) m.dofs(i) = u(rng);
  for (int alpha : {1, 2}) {
    const CellGrid g = build_cell_grid(alpha, 8, 1);
    const CorrectorSet chi = solve_correctors(alpha, g, cell_coefficients(iso, alpha, g), {SolverMethod::Direct});
    for (int k = 0; k < 10; ++k) {
      const std::array<double, 3> y{0.5 * (1 + u(rng)), 0.5 * u(rng), 0.5 * u(rng)};
      const Hooke::Vector6 E = limit_strain(m, chi, 0.5 * (1 + u(rng)), 0.5 * (1 + u(rng)), y);
      CHECK(E(alpha - 1) == 0.0);
      // No axial derivatives in the cross-section operator: no shear with the axial direction except slot 12.
      CHECK(E(alpha == 1 ? 4 : 3) == doctest::Approx(0.0).scale(1.0));
    }
  }
}

TEST_CASE("strain gap conventions and recovery convergence") {
  const HookeField iso = HookeField::isotropic(1.0, 1.0);
  CorrectorSet c[2];
  HomogenizedTensor H[2];
  for (int a = 1; a <= 2; ++a) {
    const CellGrid g = build_cell_grid(a, 16, 1);
    const CellCoefficients cc = cell_coefficients(iso, a, g);
    c[a - 1] = solve_correctors(a, g, cc, {SolverMethod::Direct});
    H[a - 1] = homogenized_tensor(c[a - 1], cc);
  }
  const MacroSolution macro = solve_macro(build_macro_space(1.0, 0.5, 16, 64), H[0].A, H[1].A,
                                          Eigen::Vector3d(0, 0, 1), {SolverMethod::Direct});
  MacroSolution zero = macro;
  zero.dofs.setZero();
  const Vec u0 = Vec::Zero(3 * mesh().node_count());
  const StrainGap g0 = strain_gap(mesh(), u0, zero, c[0], kP);
  CHECK(g0.gap == 0.0);
  CHECK(g0.fine_norm == 0.0);

  const PlateParams P2 = PlateParams::make(1.0, 0.5, 0.125, 1.0 / 96);
  std::array<double, 2> gap1{}, gap2{};
  int level = 0;
  for (const PlateParams* P : {&kP, &P2}) {
    const PlateMesh3D m = build_plate_mesh(*P, {2, 2, 2});
    const Vec v = recovery_displacement(macro, c[0], c[1], m, *P);
    gap1[level] = strain_gap(m, v, macro, c[0], *P).gap;
    gap2[level] = strain_gap(m, v, macro, c[1], *P).gap;
    ++level;
  }
  CHECK(gap1[1] < gap1[0]);
  CHECK(gap2[1] < gap2[0]);
}
