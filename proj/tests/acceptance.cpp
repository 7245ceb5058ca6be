// Acceptance run: one PASS/FAIL line per criterion, sub-checks indented below.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tileplate/harness.hpp"

using namespace tileplate;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;
double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Criterion {
  std::string name;
  std::vector<std::pair<bool, std::string>> checks;
  void check(bool ok, const std::string& what) { checks.emplace_back(ok, what); }
  bool ok() const {
    for (const auto& c : checks)
      if (!c.first) return false;
    return !checks.empty();
  }
};

std::vector<Criterion> results;

Criterion& begin(const std::string& name) {
  results.push_back({name, {}});
  return results.back();
}

std::string num(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.6g", v);
  return b;
}

void report(const Criterion& c) {
  std::cout << (c.ok() ? "PASS " : "FAIL ") << c.name << "\n";
  for (const auto& [ok, what] : c.checks) std::cout << "    " << (ok ? "ok   " : "FAIL ") << what << "\n";
  std::cout.flush();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Cells {
  CorrectorSet chi[2];
  HomogenizedTensor H[2];
  double seconds = 0;
};

Cells solve_cells(int n) {
  const HookeField iso = HookeField::isotropic(1.0, 1.0);
  Cells c;
  const auto t0 = Clock::now();
  for (int a = 1; a <= 2; ++a) {
    const CellGrid g = build_cell_grid(a, n, 1);
    const CellCoefficients cc = cell_coefficients(iso, a, g);
    c.chi[a - 1] = solve_correctors(a, g, cc, {SolverMethod::Direct});
    c.H[a - 1] = homogenized_tensor(c.chi[a - 1], cc);
  }
  c.seconds = since(t0);
  return c;
}

double off_diag(const Eigen::Matrix3d& A) {
  double m = 0;
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k)
      if (i != k) m = std::max(m, std::abs(A(i, k)));
  return m;
}

void criterion_material() {
  Criterion& c = begin("1 material: coercivity constant and symmetry guard");
  const double c0 = validate_hooke(isotropic_hooke(1.0, 1.0));
  c.check(std::abs(c0 - 2.0) <= 1e-12, "validate_hooke(iso(1,1)) = " + num(c0) + ", expected 2");
  Hooke t = isotropic_hooke(1.0, 1.0);
  t.voigt(0, 5) = 0.1;
  bool rejected = false;
  try {
    validate_hooke(t);
  } catch (const MaterialError&) {
    rejected = true;
  }
  c.check(rejected, "major-symmetry violation rejected");
  report(c);
}

void criterion_cells(const Cells& c64, const Cells& c32, const Cells& c16) {
  Criterion& c = begin("2 cell problems at 64x64");
  const Eigen::Matrix3d& A = c64.H[0].A;
  const Eigen::Matrix3d& B = c64.H[1].A;  // same slot order (shear, stretch, bend) in both families
  c.check(std::abs(A(0, 0) - 1) <= 1e-3, "A11 = " + num(A(0, 0)));
  c.check(A(1, 1) >= 2 && A(1, 1) <= 3, "A22 = " + num(A(1, 1)) + " in [2, 3]");
  c.check(A(2, 2) >= 0.1666 && A(2, 2) <= 0.25, "A33 = " + num(A(2, 2)) + " in [0.1666, 0.25]");
  const double od = std::max(off_diag(A), off_diag(B));
  c.check(od <= 1e-8, "max |off-diagonal| = " + num(od));
  const double sym = (A - B).cwiseAbs().maxCoeff();
  c.check(sym <= 1e-10, "|A(1) - A(2)| = " + num(sym));
  bool mono = true;
  for (int a = 0; a < 2; ++a)
    for (int r = 0; r < 3; ++r)
      mono = mono && c32.H[a].A(r, r) <= c16.H[a].A(r, r) && c64.H[a].A(r, r) <= c32.H[a].A(r, r);
  c.check(mono, "diagonal non-increasing over 16, 32, 64 (A33: " + num(c16.H[0].A(2, 2)) + ", " +
                    num(c32.H[0].A(2, 2)) + ", " + num(A(2, 2)) + ")");
  double fg = 0;
  for (int a = 0; a < 2; ++a) fg = std::max(fg, (c64.H[a].form1 - c64.H[a].form2).cwiseAbs().maxCoeff());
  c.check(fg <= 1e-10, "form gap = " + num(fg));
  c.check(c64.seconds < 10, "runtime " + num(c64.seconds) + " s");
  report(c);
}

MacroSolution criterion_macro(const Cells& c64) {
  Criterion& c = begin("3 macro plate with 64 Hermite elements");
  const auto t0 = Clock::now();
  const MacroSolution m = solve_macro(build_macro_space(1.0, 0.5, 16, 64), c64.H[0].A, c64.H[1].A,
                                      Eigen::Vector3d(0, 0, 1), {SolverMethod::Direct});
  const double t = since(t0);
  const double s = 0.5, ref = std::pow(s, 4) / (8 * c64.H[1].A(2, 2));
  const double tip = m.F(1.0);
  c.check(std::abs(tip - ref) <= 0.01 * ref, "tip " + num(tip) + " vs " + num(ref));
  double fg = 0;
  for (int k = 0; k <= 1000; ++k) fg = std::max(fg, std::abs(m.F(k / 1000.0) - m.G(k / 1000.0)));
  c.check(fg <= 1e-10, "|F - G|_inf = " + num(fg));
  const double id = std::abs(m.energy - m.load_work) / m.energy;
  c.check(id <= 1e-10, "energy identity, relative defect " + num(id));
  c.check(t < 1, "runtime " + num(t) + " s");
  report(c);
  return m;
}

void criterion_fine() {
  Criterion& c = begin("4 fine problem at (1/4, 1/24), nb = nh = nt = 2");
  const PlateParams P = PlateParams::make(1.0, 0.5, 0.25, 1.0 / 24);
  const HookeField iso = HookeField::isotropic(1.0, 1.0);
  const auto t0 = Clock::now();
  const PlateMesh3D mesh = build_plate_mesh(P, {2, 2, 2});
  LoadSpec none;
  none.f.setZero();
  const FineSolution z = solve_fine(build_fine_problem(mesh, P, iso, none), {});
  c.check(z.u.norm() == 0.0, "zero load gives |u| = " + num(z.u.norm()));
  const FineSolution s = solve_fine(build_fine_problem(mesh, P, iso, {}), {});
  const double hard = s.hard_strain / s.u_max;
  c.check(hard <= 1e-12, "hard-region strain / max|u| = " + num(hard));
  const NpcMargins npc = npc_margins(mesh, P, s.u);
  c.check(npc.family1 >= 0 && npc.family2 >= 0, "NPC margins " + num(npc.family1) + ", " + num(npc.family2));
  c.check(s.residual <= 1e-10, "relative residual " + num(s.residual));
  const double t = since(t0);
  c.check(t < 30, "runtime " + num(t) + " s");
  report(c);
}

void criterion_sweep() {
  const RunConfig cfg = parse_config("{}");
  const auto t0 = Clock::now();
  const ConvergenceReport r = run_converge(cfg, false);
  const double t = since(t0);
  const LevelReport &a = r.levels.at(0), &b = r.levels.at(1);
  auto pair = [](double x, double y) { return num(x) + " -> " + num(y); };

  Criterion& c = begin("5 convergence sweep over (1/4, 1/24), (1/8, 1/96)");
  c.check(b.gap_energy < a.gap_energy, "(a) energy gap decreasing: " + pair(a.gap_energy, b.gap_energy));
  c.check(b.gap_energy <= 0.25, "(a) energy gap at level 2 <= 0.25: " + num(b.gap_energy));
  c.check(b.gap_U3 < a.gap_U3, "(b) U3 gap decreasing: " + pair(a.gap_U3, b.gap_U3));
  c.check(b.gap_strain1 < a.gap_strain1, "(c) strain gap 1 decreasing: " + pair(a.gap_strain1, b.gap_strain1));
  c.check(b.gap_strain2 < a.gap_strain2, "(c) strain gap 2 decreasing: " + pair(a.gap_strain2, b.gap_strain2));
  c.check(b.gap_rec < a.gap_rec, "(d) recovery gap decreasing: " + pair(a.gap_rec, b.gap_rec));
  for (const LevelReport* L : {&a, &b})
    c.check(L->E_fine <= L->E_rec + 1e-8, "(d) level " + std::to_string(L->level) + " E_fine <= E_rec + 1e-8: " +
                                              num(L->E_fine) + " vs " + num(L->E_rec));
  const double ka[3] = {a.rho_bend, a.rho_mem, a.rho_hess}, kb[3] = {b.rho_bend, b.rho_mem, b.rho_hess};
  const char* kn[3] = {"bend", "mem", "hess"};
  for (int i = 0; i < 3; ++i)
    c.check(kb[i] <= 3 * ka[i], std::string("(e) Korn ratio ") + kn[i] + ": " + pair(ka[i], kb[i]));
  const double lr = b.load_bound / a.load_bound;
  c.check(lr >= 1.0 / 3 && lr <= 3, "(f) load-bound ratio " + num(lr) + " (" + pair(a.load_bound, b.load_bound) + ")");
  c.check(t < 600, "runtime " + num(t) + " s");
  report(c);
  std::cout << "    info: potential (a/2 - F) / (eps delta^4), fine vs recovery: level 1 " << num(a.potential_fine)
            << " vs " << num(a.potential_rec) << ", level 2 " << num(b.potential_fine) << " vs "
            << num(b.potential_rec) << "\n";
}

void criterion_unfold() {
  Criterion& c = begin("6 unfolding operator");
  const auto t0 = Clock::now();
  const PlateParams P = PlateParams::make(1.0, 0.5, 0.25, 1.0 / 24);
  const PlateMesh3D mesh = build_plate_mesh(P, {2, 2, 2});
  const double e = P.epsilon, d = P.delta;
  std::vector<std::array<double, 3>> y;
  std::vector<double> w;
  MicroGrid{3, 2, 2}.points(y, w);

  double cst = 0, aff = 0;
  for (int alpha : {1, 2}) {
    const UnfoldedField k = unfold3([](const std::array<double, 3>&) { return Eigen::VectorXd::Constant(1, 2.5); },
                                    1, alpha, P, y);
    for (double v : k.values) cst = std::max(cst, std::abs(v - 2.5));
    const UnfoldedField f =
        unfold3([](const std::array<double, 3>& x) { return Eigen::Vector3d(x[0], x[1], x[2]); }, 3, alpha, P, y);
    for (int p = 0; p < 4; ++p)
      for (int q = 0; q < 4; ++q)
        for (std::size_t i = 0; i < y.size(); ++i) {
          const double x1 = alpha == 1 ? p * e + e * y[i][0] : p * e + d * y[i][1];
          const double x2 = alpha == 1 ? q * e + d * y[i][1] : q * e + e * y[i][0];
          aff = std::max({aff, std::abs(f.at(p, q, i, 0) - x1), std::abs(f.at(p, q, i, 1) - x2),
                          std::abs(f.at(p, q, i, 2) - d * y[i][2])});
        }
  }
  c.check(cst == 0.0, "constants preserved, max defect " + num(cst));
  c.check(aff <= 1e-14, "affine formulas, max defect " + num(aff));

  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> u(-1, 1);
  const double ratio = e / (d * d), h = 0.01;
  const std::vector<std::array<double, 3>> base = {{0.3, 0.25, -0.3}, {0.7, -0.2, 0.15}};
  double ineq = -INFINITY, ident = 0, deriv = 0;
  for (int trial = 0; trial < 20; ++trial) {
    Vec v(3 * mesh.node_count());
    for (int i = 0; i < v.size(); ++i) v(i) = u(rng);
    for (int alpha : {1, 2}) {
      for (int comp = 0; comp < 3; ++comp) {
        const double unf = unfolded_norm_sq(mesh, v, comp, alpha, P);
        ineq = std::max(ineq, (unf - ratio * beam_norm_sq(mesh, v, comp, alpha, P, false)) / unf);
        ident = std::max(ident, std::abs(unf - ratio * beam_norm_sq(mesh, v, comp, alpha, P, true)) / unf);
      }
      std::vector<std::array<double, 3>> ys;
      for (const auto& b : base)
        for (int dir = 0; dir < 3; ++dir)
          for (double s : {-h, h}) {
            auto pt = b;
            pt[dir] += s;
            ys.push_back(pt);
          }
      const UnfoldedField f = unfold3(mesh, v, alpha, P, ys);
      const double scale[3] = {e, d, d};
      const int xdir[3] = {alpha - 1, 2 - alpha, 2};
      for (int p = 0; p < 4; ++p)
        for (int q = 0; q < 4; ++q)
          for (std::size_t b = 0; b < base.size(); ++b) {
            const Eigen::Matrix3d G = field_gradient(mesh, v, unfold_point(alpha, p, q, base[b], P));
            for (int dir = 0; dir < 3; ++dir)
              for (int comp = 0; comp < 3; ++comp) {
                const std::size_t k = b * 6 + dir * 2;
                const double dy = (f.at(p, q, k + 1, comp) - f.at(p, q, k, comp)) / (2 * h);
                deriv = std::max(deriv, std::abs(dy - scale[dir] * G(comp, xdir[dir])));
              }
          }
    }
  }
  c.check(ineq <= 1e-10, "norm inequality, worst relative excess " + num(ineq));
  c.check(ident <= 1e-10, "norm identity on the covered set, worst relative defect " + num(ident));
  c.check(deriv <= 1e-10, "derivative exchange, worst defect " + num(deriv));
  const double t = since(t0);
  c.check(t < 5, "runtime " + num(t) + " s");
  report(c);
}

void criterion_threads(const fs::path& work) {
  Criterion& c = begin("7 converge CSV independent of the thread count");
  std::string csv[2];
  int k = 0;
  for (int threads : {1, 8}) {
    const fs::path dir = work / ("threads" + std::to_string(threads));
    fs::remove_all(dir);
    const std::string cmd = std::string("\"") + TILEPLATE_CLI + "\" converge --threads " + std::to_string(threads) +
                            " --out \"" + dir.string() + "\" > \"" + (work / "cli.log").string() + "\" 2>&1";
    const int rc = std::system(cmd.c_str());
    c.check(rc == 0, "converge --threads " + std::to_string(threads) + " exit status " + std::to_string(rc));
    csv[k++] = slurp(dir / "report.csv");
  }
  c.check(!csv[0].empty() && csv[0] == csv[1], "report.csv byte-identical (" + std::to_string(csv[0].size()) + " bytes)");
  report(c);
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "tileplate_acceptance";
  fs::create_directories(work);
  try {
    criterion_material();
    const Cells c16 = solve_cells(16), c32 = solve_cells(32), c64 = solve_cells(64);
    criterion_cells(c64, c32, c16);
    criterion_macro(c64);
    criterion_fine();
    criterion_sweep();
    criterion_unfold();
    criterion_threads(work);
  } catch (const std::exception& e) {
    std::cout << "FAIL aborted: " << e.what() << "\n";
    return 2;
  }
  int failed = 0;
  for (const Criterion& c : results) failed += !c.ok();
  std::cout << failed << " of " << results.size() << " criteria failed\n";
  return failed ? 1 : 0;
}
