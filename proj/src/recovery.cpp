#include "tileplate/recovery.hpp"

#include <algorithm>
#include <cmath>

namespace tileplate {

namespace {

// Lattice index and weights along one axis: two tiles across a beam band,
// one tile otherwise.
struct AxisWeights {
  int i0, i1;
  double w0, w1;
};

AxisWeights axis_weights(double x, double eps, double delta) {
  const int p = static_cast<int>(std::lround(x / eps));
  const double z = x - p * eps;
  if (std::abs(z) < 0.5 * delta) {
    const double w1 = (delta + 2 * z) / (2 * delta);
    return {p - 1, p, 1 - w1, w1};
  }
  const int t = static_cast<int>(std::floor(x / eps));
  return {t, t, 1.0, 0.0};
}

double mirror(double x, double L) {
  if (x < 0) return -x;
  if (x > L) return 2 * L - x;
  return x;
}

}  // namespace

double TileInterpolant::operator()(double x1, double x2) const {
  const AxisWeights a = axis_weights(x1, epsilon, delta), b = axis_weights(x2, epsilon, delta);
  auto get = [&](int p, int q) { return at(std::clamp(p, -1, N), std::clamp(q, -1, N)); };
  return a.w0 * (b.w0 * get(a.i0, b.i0) + b.w1 * get(a.i0, b.i1)) +
         a.w1 * (b.w0 * get(a.i1, b.i0) + b.w1 * get(a.i1, b.i1));
}

TileInterpolant sample_tiles(const std::function<double(double, double)>& phi, const PlateParams& P, bool clamp) {
  TileInterpolant t;
  t.N = P.N_eps;
  t.epsilon = P.epsilon;
  t.delta = P.delta;
  t.values.assign((t.N + 2) * (t.N + 2), 0.0);
  const int n = P.n_eps;
  for (int p = -1; p <= t.N; ++p)
    for (int q = -1; q <= t.N; ++q) {
      if (clamp && ((p <= 0 && q <= n) || (q <= 0 && p <= n))) continue;
      t.at(p, q) = phi(mirror((p + 0.5) * P.epsilon, P.L), mirror((q + 0.5) * P.epsilon, P.L));
    }
  return t;
}

CompressedProfile::CompressedProfile(std::function<double(double, int)> phi, const PlateParams& P)
    : phi_(std::move(phi)), P_(P) {
  const int N = P.N_eps;
  const double e = P.epsilon, d = P.delta, r = d / e;
  offset_.resize(N + 1);
  end_.resize(N + 1);
  // Anchored so that the compressed profile equals Phi at x = 0.
  offset_[0] = ext(0.0, 0) * (1 - r);
  for (int p = 0; p <= N; ++p) {
    if (p > 0) {
      const double start = end_[p - 1] + (e - d) * ext((p - 0.5) * e, 1);
      offset_[p] = start - r * ext(p * e - 0.5 * e, 0);
    }
    end_[p] = offset_[p] + r * ext(p * e + 0.5 * e, 0);
  }
}

double CompressedProfile::ext(double t, int d) const {
  const double L = P_.L;
  if (t < 0) return d == 0 ? phi_(0, 0) + t * phi_(0, 1) : phi_(0, 1);
  if (t > L) return d == 0 ? phi_(L, 0) + (t - L) * phi_(L, 1) : phi_(L, 1);
  return phi_(t, d);
}

double CompressedProfile::value(double x) const {
  const double e = P_.epsilon, d = P_.delta;
  const int p = std::clamp(static_cast<int>(std::lround(x / e)), 0, P_.N_eps);
  const double z = x - p * e;
  if (std::abs(z) <= 0.5 * d) return offset_[p] + (d / e) * ext(p * e + (e / d) * z, 0);
  const int t = std::clamp(static_cast<int>(std::floor(x / e)), 0, P_.N_eps - 1);
  return end_[t] + (x - (t * e + 0.5 * d)) * ext((t + 0.5) * e, 1);
}

double CompressedProfile::derivative(double x) const {
  const double e = P_.epsilon, d = P_.delta;
  const int p = std::clamp(static_cast<int>(std::lround(x / e)), 0, P_.N_eps);
  const double z = x - p * e;
  if (std::abs(z) <= 0.5 * d) return ext(p * e + (e / d) * z, 1);
  const int t = std::clamp(static_cast<int>(std::floor(x / e)), 0, P_.N_eps - 1);
  return ext((t + 0.5) * e, 1);
}

namespace {

// Beam band index if x lies in the closed band, else -1.
int closed_beam(double x, const PlateParams& P, double tol) {
  const int p = static_cast<int>(std::lround(x / P.epsilon));
  return std::abs(x - p * P.epsilon) <= 0.5 * P.delta + tol ? p : -1;
}

// Hard band index if x lies in the closed hard band, else -1.
int closed_hard(double x, const PlateParams& P, double tol) {
  const int t = static_cast<int>(std::floor(x / P.epsilon));
  if (t < 0 || t >= P.N_eps) return -1;
  const double lo = t * P.epsilon + 0.5 * P.delta, hi = (t + 1) * P.epsilon - 0.5 * P.delta;
  return (x >= lo - tol && x <= hi + tol) ? t : -1;
}

}  // namespace

Vec recovery_displacement(const MacroSolution& macro, const CorrectorSet& c1, const CorrectorSet& c2,
                          const PlateMesh3D& mesh, const PlateParams& P) {
  if (c1.alpha != 1 || c2.alpha != 2) throw std::invalid_argument("build_recovery: corrector families out of order");
  if (std::abs(macro.space.L - P.L) > 1e-12 || std::abs(macro.space.l - P.l) > 1e-12)
    throw std::invalid_argument("build_recovery: macro domain does not match the plate");
  const double eps = P.epsilon, delta = P.delta, L = P.L;
  const TileInterpolant V1 = sample_tiles([&](double a, double b) { return macro.membrane(a, b)(0); }, P, true);
  const TileInterpolant V2 = sample_tiles([&](double a, double b) { return macro.membrane(a, b)(1); }, P, true);
  const CompressedProfile F([&](double x, int d) { return macro.F(x, d); }, P);
  const CompressedProfile G([&](double x, int d) { return macro.G(x, d); }, P);

  // Anchor values, taken from the right.
  const double nudge = 1e-12 * L;
  auto right = [&](double x) { return std::min(x + nudge, L); };
  const int N = P.N_eps;
  std::vector<Eigen::Vector3d> S1((N + 1) * (N + 1)), S2((N + 1) * (N + 1));
  for (int p = 0; p <= N; ++p)
    for (int q = 0; q <= N; ++q) {
      const double a = right(p * eps), b = right(q * eps);
      const Eigen::Matrix2d g = macro.membrane_grad(a, b);
      S1[p * (N + 1) + q] = {g(0, 1), g(1, 1), macro.G(b, 2)};
      S2[p * (N + 1) + q] = {g(1, 0), g(0, 0), macro.F(a, 2)};
    }

  const double tol = 1e-12 * std::max(1.0, L);
  const double amp = eps * delta * delta;
  Vec v = Vec::Zero(3 * mesh.node_count());
  for (int n = 0; n < mesh.node_count(); ++n) {
    const auto x = mesh.node_coord(n);
    Eigen::Vector3d w;
    w(0) = delta * delta * V1(x[0], x[1]) - delta * x[2] * F.derivative(x[0]);
    w(1) = delta * delta * V2(x[0], x[1]) - delta * x[2] * G.derivative(x[1]);
    w(2) = delta * (F.value(x[0]) + G.value(x[1]));

    const double y3 = std::clamp(x[2] / delta, -0.5, 0.5);
    if (const int q = closed_beam(x[1], P, tol), p = closed_hard(x[0], P, tol); q >= 0 && p >= 0) {
      const Eigen::Vector3d& S = S1[p * (N + 1) + q];
      const double ya = (x[0] - p * eps) / eps, yc = std::clamp((x[1] - q * eps) / delta, -0.5, 0.5);
      for (int r = 1; r <= 3; ++r) w += amp * S(r - 1) * c1.value(r, ya, yc, y3);
    }
    if (const int p = closed_beam(x[0], P, tol), q = closed_hard(x[1], P, tol); p >= 0 && q >= 0) {
      const Eigen::Vector3d& S = S2[p * (N + 1) + q];
      const double ya = (x[1] - q * eps) / eps, yc = std::clamp((x[0] - p * eps) / delta, -0.5, 0.5);
      for (int r = 1; r <= 3; ++r) w += amp * S(r - 1) * c2.value(r, ya, yc, y3);
    }
    v.segment<3>(3 * n) = w;
  }
  for (int n : clamped_node_set(mesh, P)) v.segment<3>(3 * n).setZero();
  return v;
}

RecoveryField build_recovery(const MacroSolution& macro, const CorrectorSet& c1, const CorrectorSet& c2,
                             const FineProblem& prob) {
  RecoveryField out;
  out.v = recovery_displacement(macro, c1, c2, prob.mesh, prob.params);
  out.energy = prob.energy(out.v);
  out.scaled_energy = out.energy / (prob.params.epsilon * std::pow(prob.params.delta, 4));
  out.load_work = prob.work(out.v);
  out.hard_strain = hard_strain_max(prob, out.v);
  return out;
}

}  // namespace tileplate
