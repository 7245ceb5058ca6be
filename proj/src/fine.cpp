#include "tileplate/fine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "tileplate/quadrature.hpp"

namespace tileplate {

Eigen::Vector3d LoadSpec::density(const PlateParams& P) const {
  const double s = std::pow(P.epsilon, kappa);
  return {s * P.delta * f(0), s * P.delta * f(1), s * P.delta * P.delta * f(2)};
}

std::vector<RigidLink> build_rigid_links(const PlateMesh3D& mesh, const PlateParams& P) {
  const int N = P.N_eps;
  std::vector<std::set<int>> slaved(N * N);
  for (int e = 0; e < mesh.element_count(); ++e) {
    const Region& r = mesh.element_region[e];
    if (!r.hard) continue;
    for (int n : mesh.element_nodes(e)) slaved[r.p * N + r.q].insert(n);
  }
  std::vector<RigidLink> links;
  links.reserve(N * N);
  for (int p = 0; p < N; ++p)
    for (int q = 0; q < N; ++q) {
      RigidLink L;
      L.p = p;
      L.q = q;
      L.center = {(p + 0.5) * P.epsilon, (q + 0.5) * P.epsilon, 0.0};
      L.nodes.assign(slaved[p * N + q].begin(), slaved[p * N + q].end());
      links.push_back(std::move(L));
    }
  return links;
}

Eigen::Matrix<double, 8, 3> element_values(const PlateMesh3D& mesh, const Vec& u, int e) {
  Eigen::Matrix<double, 8, 3> v;
  const auto nodes = mesh.element_nodes(e);
  for (int a = 0; a < 8; ++a) v.row(a) = u.segment<3>(3 * nodes[a]).transpose();
  return v;
}

namespace {

struct Located {
  int e;
  std::array<double, 3> lo, hi, xi;
};

Located locate_point(const PlateMesh3D& mesh, const std::array<double, 3>& x) {
  Located L;
  const int i = mesh.axes[0].locate(x[0]), j = mesh.axes[1].locate(x[1]), k = mesh.axes[2].locate(x[2]);
  L.e = mesh.element(i, j, k);
  L.lo = mesh.element_lo(L.e);
  L.hi = mesh.element_hi(L.e);
  for (int d = 0; d < 3; ++d) L.xi[d] = std::clamp((x[d] - L.lo[d]) / (L.hi[d] - L.lo[d]), 0.0, 1.0);
  return L;
}

Eigen::Matrix<double, 24, 1> gather24(const PlateMesh3D& mesh, const Vec& u, int e) {
  Eigen::Matrix<double, 24, 1> ue;
  const auto nodes = mesh.element_nodes(e);
  for (int a = 0; a < 8; ++a) ue.segment<3>(3 * a) = u.segment<3>(3 * nodes[a]);
  return ue;
}

}  // namespace

Eigen::Vector3d field_value(const PlateMesh3D& mesh, const Vec& u, const std::array<double, 3>& x) {
  const Located L = locate_point(mesh, x);
  const auto N = hex8_shape(L.xi);
  const auto v = element_values(mesh, u, L.e);
  Eigen::Vector3d out = Eigen::Vector3d::Zero();
  for (int a = 0; a < 8; ++a) out += N[a] * v.row(a).transpose();
  return out;
}

Eigen::Matrix3d field_gradient(const PlateMesh3D& mesh, const Vec& u, const std::array<double, 3>& x) {
  const Located L = locate_point(mesh, x);
  return hex8_gradient(L.lo, L.hi, L.xi, element_values(mesh, u, L.e));
}

double FineProblem::energy(const Vec& u) const {
  Vec Ku;
  sym_matvec(full.matrix, u, Ku);
  return u.dot(Ku);
}

double FineProblem::work(const Vec& u) const { return full.rhs.dot(u); }

FineProblem build_fine_problem(const PlateMesh3D& mesh, const PlateParams& params, const HookeField& field,
                               const LoadSpec& load) {
  FineProblem prob;
  prob.mesh = mesh;
  prob.params = params;
  prob.load = load;
  prob.coeffs = fine_coefficients(field, mesh, params);
  const int ndof = 3 * mesh.node_count();

  prob.full.matrix = assemble_matrix(ndof, mesh.element_count(), [&](int e, std::vector<Triplet>& t) {
    if (!prob.coeffs[e]) return;
    const auto K = hex8_stiffness(mesh.element_lo(e), mesh.element_hi(e), *prob.coeffs[e]);
    const auto nodes = mesh.element_nodes(e);
    for (int a = 0; a < 24; ++a)
      for (int b = 0; b < 24; ++b) t.emplace_back(3 * nodes[a / 3] + a % 3, 3 * nodes[b / 3] + b % 3, K(a, b));
  });

  // Consistent load over the part of each element inside omega x thickness.
  const Eigen::Vector3d b = load.density(params);
  prob.full.rhs = Vec::Zero(ndof);
  const Gauss1D g = gauss_rule(2);
  for (int e = 0; e < mesh.element_count(); ++e) {
    const auto lo = mesh.element_lo(e), hi = mesh.element_hi(e);
    std::array<double, 3> clo = lo, chi = hi;
    for (int d = 0; d < 2; ++d) {
      clo[d] = std::max(lo[d], 0.0);
      chi[d] = std::min(hi[d], params.L);
    }
    if (chi[0] <= clo[0] || chi[1] <= clo[1]) continue;
    const double vol = (chi[0] - clo[0]) * (chi[1] - clo[1]) * (chi[2] - clo[2]);
    std::array<double, 8> w{};
    for (int c = 0; c < g.n; ++c)
      for (int bq = 0; bq < g.n; ++bq)
        for (int a = 0; a < g.n; ++a) {
          std::array<double, 3> xi;
          const int idx[3] = {a, bq, c};
          for (int d = 0; d < 3; ++d) {
            const double x = clo[d] + g.x[idx[d]] * (chi[d] - clo[d]);
            xi[d] = (x - lo[d]) / (hi[d] - lo[d]);
          }
          const auto N = hex8_shape(xi);
          const double wq = g.w[a] * g.w[bq] * g.w[c] * vol;
          for (int n = 0; n < 8; ++n) w[n] += wq * N[n];
        }
    const auto nodes = mesh.element_nodes(e);
    for (int n = 0; n < 8; ++n) prob.full.rhs.segment<3>(3 * nodes[n]) += w[n] * b;
  }

  prob.clamped_nodes = clamped_node_set(mesh, params);
  for (int n : prob.clamped_nodes)
    for (int c = 0; c < 3; ++c) prob.constraints.dirichlet.push_back(3 * n + c);
  prob.constraints.rigid_links = build_rigid_links(mesh, params);
  prob.reduced = apply_constraints(prob.full, prob.constraints, [&](int n) { return mesh.node_coord(n); });
  return prob;
}

double strain_norm(const FineProblem& prob, const Vec& u) {
  const PlateMesh3D& mesh = prob.mesh;
  const Gauss1D g = gauss_rule(2);
  std::vector<double> part(mesh.element_count(), 0.0);
  parallel_chunks(mesh.element_count(), thread_count(), [&](int, int b, int e_end) {
    for (int e = b; e < e_end; ++e) {
      if (mesh.element_region[e].hard) continue;
      const auto lo = mesh.element_lo(e), hi = mesh.element_hi(e);
      const double vol = (hi[0] - lo[0]) * (hi[1] - lo[1]) * (hi[2] - lo[2]);
      const auto ue = gather24(mesh, u, e);
      double s = 0.0;
      for (int c = 0; c < 2; ++c)
        for (int bq = 0; bq < 2; ++bq)
          for (int a = 0; a < 2; ++a) {
            const Hooke::Vector6 eps = hex8_strain(lo, hi, {g.x[a], g.x[bq], g.x[c]}) * ue;
            s += g.w[a] * g.w[bq] * g.w[c] * vol * eps.squaredNorm();
          }
      part[e] = s;
    }
  });
  double total = 0.0;
  for (double s : part) total += s;
  return std::sqrt(total);
}

double hard_strain_max(const FineProblem& prob, const Vec& u) {
  const PlateMesh3D& mesh = prob.mesh;
  const Gauss1D g = gauss_rule(2);
  double worst = 0.0;
  for (int e = 0; e < mesh.element_count(); ++e) {
    if (!mesh.element_region[e].hard) continue;
    const auto lo = mesh.element_lo(e), hi = mesh.element_hi(e);
    const auto ue = gather24(mesh, u, e);
    for (int c = 0; c < 2; ++c)
      for (int bq = 0; bq < 2; ++bq)
        for (int a = 0; a < 2; ++a)
          worst = std::max(worst, (hex8_strain(lo, hi, {g.x[a], g.x[bq], g.x[c]}) * ue).norm());
  }
  return worst;
}

FineSolution solve_fine(const FineProblem& prob, const SolverConfig& cfg) {
  FineSolution sol;
  const ReducedSystem& red = prob.reduced;
  SolveStats st;
  const Vec x = solve_spd(red.sys.matrix, red.sys.rhs, cfg, &st);
  sol.u = red.map.expand(x);
  for (int n : prob.clamped_nodes) sol.u.segment<3>(3 * n).setZero();
  sol.iterations = st.iterations;
  sol.residual = st.rel_residual;
  for (std::size_t l = 0; l < prob.constraints.rigid_links.size(); ++l)
    sol.rigid.push_back(red.map.link_masters(static_cast<int>(l), x));
  sol.energy = prob.energy(sol.u);
  sol.load_work = prob.work(sol.u);
  sol.strain_norm = strain_norm(prob, sol.u);
  sol.hard_strain = hard_strain_max(prob, sol.u);
  sol.u_max = sol.u.size() ? sol.u.cwiseAbs().maxCoeff() : 0.0;
  const PlateParams& P = prob.params;
  const double fnorm = prob.load.f.norm() * P.L;
  const double scale = std::pow(P.epsilon, prob.load.kappa - 0.5) * P.delta * P.delta * fnorm;
  sol.bound_constant = scale > 0 ? sol.strain_norm / scale : 0.0;
  return sol;
}

double scaled_energy(const FineSolution& sol, const PlateParams& P) {
  return sol.energy / (P.epsilon * std::pow(P.delta, 4));
}

NpcMargins npc_margins(const PlateMesh3D& mesh, const PlateParams& P, const Vec& u) {
  NpcMargins m;
  m.family1 = m.family2 = std::numeric_limits<double>::infinity();
  const int N = P.N_eps;
  const Gauss1D g = gauss_rule(2);
  const Axis1DMesh& az = mesh.axes[2];
  // beta: axis across the gap (1 for family 1, 0 for family 2); gamma: the other in-plane axis.
  for (int fam = 1; fam <= 2; ++fam) {
    const int beta = fam == 1 ? 1 : 0, gamma = 1 - beta;
    const Axis1DMesh& ag = mesh.axes[gamma];
    double worst = std::numeric_limits<double>::infinity();
    for (int s = 0; s < N; ++s)         // tile index along gamma
      for (int t = 1; t < N; ++t) {     // beam band between tiles t-1 and t
        const double lower = t * P.epsilon - 0.5 * P.delta, upper = t * P.epsilon + 0.5 * P.delta;
        for (int i = 0; i < ag.intervals(); ++i) {
          if (ag.band_tags[i] != Band::Hard || ag.band_index[i] != s) continue;
          for (int k = 0; k < az.intervals(); ++k)
            for (int gi = 0; gi < 2; ++gi)
              for (int gk = 0; gk < 2; ++gk) {
                std::array<double, 3> a{}, b{};
                const double xg = ag.breakpoints[i] + g.x[gi] * (ag.breakpoints[i + 1] - ag.breakpoints[i]);
                const double x3 = az.breakpoints[k] + g.x[gk] * (az.breakpoints[k + 1] - az.breakpoints[k]);
                a[gamma] = b[gamma] = xg;
                a[2] = b[2] = x3;
                a[beta] = lower;
                b[beta] = upper;
                const double jump = field_value(mesh, u, b)(beta) - field_value(mesh, u, a)(beta);
                worst = std::min(worst, jump + P.delta);
              }
        }
      }
    (fam == 1 ? m.family1 : m.family2) = worst;
  }
  return m;
}

Eigen::Matrix<double, 5, 1> KLFields::at(double y1, double y2) const {
  auto cell = [](const std::vector<double>& xs, double y, double& t) {
    const int n = static_cast<int>(xs.size());
    int i = static_cast<int>(std::upper_bound(xs.begin(), xs.end(), y) - xs.begin()) - 1;
    i = std::clamp(i, 0, n - 2);
    t = std::clamp((y - xs[i]) / (xs[i + 1] - xs[i]), 0.0, 1.0);
    return i;
  };
  double s, t;
  const int i = cell(x1, y1, s), j = cell(x2, y2, t);
  Eigen::Matrix<double, 5, 1> v = Eigen::Matrix<double, 5, 1>::Zero();
  const int ii[4] = {i, i + 1, i, i + 1}, jj[4] = {j, j, j + 1, j + 1};
  const double w[4] = {(1 - s) * (1 - t), s * (1 - t), (1 - s) * t, s * t};
  for (int a = 0; a < 4; ++a) {
    const int n = index(ii[a], jj[a]);
    v.head<2>() += w[a] * Um[n];
    v(2) += w[a] * U3[n];
    v.tail<2>() += w[a] * rot[n];
  }
  return v;
}

KLFields extract_kl(const PlateMesh3D& mesh, const Vec& u) {
  KLFields kl;
  kl.x1 = mesh.axes[0].breakpoints;
  kl.x2 = mesh.axes[1].breakpoints;
  const Axis1DMesh& az = mesh.axes[2];
  const double delta = az.breakpoints.back() - az.breakpoints.front();
  const Gauss1D g = gauss_rule(2);
  const int nx = mesh.nx(), ny = mesh.ny();
  kl.Um.assign(nx * ny, Eigen::Vector2d::Zero());
  kl.U3.assign(nx * ny, 0.0);
  kl.rot.assign(nx * ny, Eigen::Vector2d::Zero());
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      Eigen::Vector3d m0 = Eigen::Vector3d::Zero(), m1 = Eigen::Vector3d::Zero();
      for (int k = 0; k < az.intervals(); ++k) {
        const double z0 = az.breakpoints[k], z1 = az.breakpoints[k + 1];
        const Eigen::Vector3d u0 = u.segment<3>(3 * mesh.node(i, j, k));
        const Eigen::Vector3d u1 = u.segment<3>(3 * mesh.node(i, j, k + 1));
        for (int q = 0; q < g.n; ++q) {
          const double x3 = z0 + g.x[q] * (z1 - z0), w = g.w[q] * (z1 - z0);
          const Eigen::Vector3d v = (1 - g.x[q]) * u0 + g.x[q] * u1;
          m0 += w * v;
          m1 += w * x3 * v;
        }
      }
      const int n = kl.index(i, j);
      kl.Um[n] = m0.head<2>() / delta;
      kl.U3[n] = m0(2) / delta;
      kl.rot[n] = -12.0 / (delta * delta * delta) * m1.head<2>();
    }
  return kl;
}

namespace {

// Centered first difference on an N x N lattice, one-sided at the ends.
double d1(const std::vector<double>& f, int N, int p, int q, int axis, double h) {
  auto at = [&](int a, int b) { return f[a * N + b]; };
  const int c = axis == 0 ? p : q;
  auto shifted = [&](int o) { return axis == 0 ? at(p + o, q) : at(p, q + o); };
  if (c == 0) return (shifted(1) - shifted(0)) / h;
  if (c == N - 1) return (shifted(0) - shifted(-1)) / h;
  return (shifted(1) - shifted(-1)) / (2 * h);
}

// Centered second difference, copied from the nearest interior point at the ends.
double d2(const std::vector<double>& f, int N, int p, int q, int axis, double h) {
  int c = axis == 0 ? p : q;
  c = std::clamp(c, 1, N - 2);
  const int pp = axis == 0 ? c : p, qq = axis == 0 ? q : c;
  auto at = [&](int a, int b) { return f[a * N + b]; };
  if (axis == 0) return (at(pp + 1, qq) - 2 * at(pp, qq) + at(pp - 1, qq)) / (h * h);
  return (at(pp, qq + 1) - 2 * at(pp, qq) + at(pp, qq - 1)) / (h * h);
}

}  // namespace

KornRatios korn_report(const KLFields& kl, double E, const PlateParams& P) {
  KornRatios out;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (!(E > 0) || P.N_eps < 3) {
    out.bend = out.mem = out.hess = nan;
    return out;
  }
  const int N = P.N_eps;
  const double h = P.epsilon;
  std::vector<double> U3(N * N), U1(N * N), U2(N * N);
  for (int p = 0; p < N; ++p)
    for (int q = 0; q < N; ++q) {
      const auto v = kl.at((p + 0.5) * h, (q + 0.5) * h);
      U1[p * N + q] = v(0);
      U2[p * N + q] = v(1);
      U3[p * N + q] = v(2);
    }
  std::vector<double> D1(N * N);
  for (int p = 0; p < N; ++p)
    for (int q = 0; q < N; ++q) D1[p * N + q] = d1(U3, N, p, q, 0, h);
  double h1 = 0, mem = 0, hess = 0;
  for (int p = 0; p < N; ++p)
    for (int q = 0; q < N; ++q) {
      const int n = p * N + q;
      const double g1 = D1[n], g2 = d1(U3, N, p, q, 1, h);
      const double h11 = d2(U3, N, p, q, 0, h), h22 = d2(U3, N, p, q, 1, h), h12 = d1(D1, N, p, q, 1, h);
      h1 += U3[n] * U3[n] + g1 * g1 + g2 * g2;
      mem += U1[n] * U1[n] + U2[n] * U2[n];
      hess += h11 * h11 + 2 * h12 * h12 + h22 * h22;
    }
  // In-plane samples at roundoff of the transverse field carry no information;
  // without the cutoff the ratio is noise that varies with summation order.
  double umax = 0, u3max = 0;
  for (int n = 0; n < N * N; ++n) {
    umax = std::max({umax, std::abs(U1[n]), std::abs(U2[n])});
    u3max = std::max(u3max, std::abs(U3[n]));
  }
  if (umax <= 1e-12 * u3max) mem = 0;
  const double area = h * h;
  out.bend = std::sqrt(P.epsilon) * P.delta * std::sqrt(area * h1) / E;
  out.mem = std::sqrt(P.epsilon) * std::sqrt(area * mem) / E;
  out.hess = std::pow(P.delta, 1.5) * std::sqrt(area * hess) / E;
  out.valid = true;
  return out;
}

}  // namespace tileplate
