// Command line driver: cell problems, macro plate, fine solves, unfolding
// diagnostics and the convergence sweep.
#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "tileplate/harness.hpp"

using namespace tileplate;
using nlohmann::json;

namespace {

struct Globals {
  std::string config;
  std::string out = "out";
  int threads = 1;
  double tol = 0.0;
  bool timings = false;
  int level = 1;
  int decimate = 1;
  int micro = 4;
};

RunConfig make_config(const Globals& g) {
  RunConfig c = g.config.empty() ? RunConfig{} : load_config(g.config);
  if (g.tol > 0) c.fine_solver.tol = g.tol;
  c.validate();
  return c;
}

std::string out_path(const Globals& g, const std::string& name) {
  std::filesystem::create_directories(g.out);
  return (std::filesystem::path(g.out) / name).string();
}

json matrix(const Eigen::Matrix3d& A) {
  json m = json::array();
  for (int i = 0; i < 3; ++i) m.push_back({A(i, 0), A(i, 1), A(i, 2)});
  return m;
}

int level_index(const Globals& g, const RunConfig& c) {
  if (g.level < 1 || g.level > static_cast<int>(c.levels.size()))
    throw ConfigError("--level must lie in 1.." + std::to_string(c.levels.size()));
  return g.level - 1;
}

struct LevelState {
  PlateParams P;
  PlateMesh3D mesh;
  FineProblem prob;
  FineSolution sol;
};

LevelState solve_level(const RunConfig& c, int k) {
  LevelState s;
  s.P = PlateParams::make(c.L, c.l, c.levels[k].first, c.levels[k].second);
  s.mesh = build_plate_mesh(s.P, c.res);
  s.prob = build_fine_problem(s.mesh, s.P, c.material.field(), c.load);
  s.sol = solve_fine(s.prob, c.fine_solver);
  return s;
}

void write_nodal_csv(const std::string& path, const PlateMesh3D& mesh, const Vec& u, int decimate) {
  std::string text = "x1,x2,x3,u1,u2,u3\r\n";
  for (int n = 0; n < mesh.node_count(); n += std::max(1, decimate)) {
    const auto x = mesh.node_coord(n);
    for (int d = 0; d < 3; ++d) text += format_number(x[d]) + ",";
    text += format_number(u(3 * n)) + "," + format_number(u(3 * n + 1)) + "," + format_number(u(3 * n + 2)) + "\r\n";
  }
  write_text(path, text);
}

int cmd_material(const Globals& g) {
  const RunConfig c = make_config(g);
  double c0 = INFINITY;
  if (c.material.kind == MaterialSpec::Kind::Isotropic) {
    c0 = validate_hooke(isotropic_hooke(c.material.lambda, c.material.mu));
  } else {
    for (const CellTable& t : c.material.tables)
      for (const Hooke& h : t.tensors) c0 = std::min(c0, validate_hooke(h));
  }
  std::cout << "coercivity c0 = " << format_number(c0) << "\n";
  write_text(out_path(g, "material.json"), json{{"c0", c0}}.dump(2) + "\n");
  return 0;
}

int cmd_cell(const Globals& g) {
  const RunConfig c = make_config(g);
  const HookeField field = c.material.field();
  json out = json::object();
  for (int alpha = 1; alpha <= 2; ++alpha) {
    const CellGrid grid = build_cell_grid(alpha, c.cell_n, c.cell_slices);
    const CellCoefficients coeffs = cell_coefficients(field, alpha, grid);
    const CorrectorSet cs = solve_correctors(alpha, grid, coeffs, c.cell_solver);
    const HomogenizedTensor H = homogenized_tensor(cs, coeffs);
    std::cout << "family " << alpha << " (Dirichlet on " << grid.dirichlet_faces() << ")\n" << H.A << "\n";
    out["family" + std::to_string(alpha)] = {{"A", matrix(H.A)},
                                             {"A_stretch_first", matrix(H.stretch_first())},
                                             {"form_gap", H.form_gap},
                                             {"n_cross", c.cell_n},
                                             {"residual", {cs.residual[0], cs.residual[1], cs.residual[2]}}};
  }
  write_text(out_path(g, "cells.json"), out.dump(2) + "\n");
  return 0;
}

int cmd_macro(const Globals& g) {
  const RunConfig c = make_config(g);
  const LimitModel m = solve_limit(c);
  const MacroSolution& s = m.macro;
  const double span = c.L - c.l;
  std::cout << "tip F(L) = " << format_number(s.F(c.L)) << ", cantilever reference "
            << format_number(c.load.f(2) * std::pow(span, 4) / (8 * m.H2.A(2, 2))) << "\n"
            << "energy = " << format_number(s.energy) << ", load work = " << format_number(s.load_work) << "\n";
  std::string csv = "x,F,G\r\n";
  for (int i = 0; i <= s.space.n_beam; ++i) {
    const double x = i * s.space.hb;
    csv += format_number(x) + "," + format_number(s.F(x)) + "," + format_number(s.G(x)) + "\r\n";
  }
  write_text(out_path(g, "macro.csv"), csv);
  write_text(out_path(g, "macro.json"),
             json{{"tip", s.F(c.L)}, {"energy", s.energy}, {"load_work", s.load_work}, {"residual", s.residual}}
                     .dump(2) + "\n");
  return 0;
}

int cmd_fine(const Globals& g) {
  const RunConfig c = make_config(g);
  const int k = level_index(g, c);
  const LimitModel m = solve_limit(c);
  const LevelState s = solve_level(c, k);
  const KLFields kl = extract_kl(s.mesh, s.sol.u);
  const NpcMargins npc = npc_margins(s.mesh, s.P, s.sol.u);
  const KornRatios korn = korn_report(kl, s.sol.strain_norm, s.P);
  const FieldGaps gaps = kl_field_gaps(kl, m.macro, s.P);
  write_nodal_csv(out_path(g, "fine_displacement.csv"), s.mesh, s.sol.u, g.decimate);
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  const json rep = {{"E_u", s.sol.strain_norm},
                    {"scaled_energy", scaled_energy(s.sol, s.P)},
                    {"residual", s.sol.residual},
                    {"iterations", s.sol.iterations},
                    {"bound_constant", s.sol.bound_constant},
                    {"npc_margins", {npc.family1, npc.family2}},
                    {"korn_ratios", {{"bend", num(korn.bend)}, {"mem", num(korn.mem)}, {"hess", num(korn.hess)}}},
                    {"kl_field_errors", {{"U3", gaps.U3}, {"Um", gaps.Um}}}};
  write_text(out_path(g, "fine.json"), rep.dump(2) + "\n");
  std::cout << rep.dump(2) << "\n";
  return 0;
}

int cmd_unfold(const Globals& g) {
  const RunConfig c = make_config(g);
  const int k = level_index(g, c);
  const LimitModel m = solve_limit(c);
  const LevelState s = solve_level(c, k);
  MicroGrid grid{g.micro, g.micro, 1};
  std::vector<std::array<double, 3>> y;
  std::vector<double> w;
  grid.points(y, w);
  const double scale = 1.0 / (s.P.epsilon * s.P.delta);
  for (int alpha = 1; alpha <= 2; ++alpha) {
    const CorrectorSet& chi = alpha == 1 ? m.chi1 : m.chi2;
    const UnfoldedField U = unfold3(
        [&](const std::array<double, 3>& x) -> Eigen::VectorXd {
          const Eigen::Matrix3d G = field_gradient(s.mesh, s.sol.u, x);
          return Hooke::mandel(0.5 * (G + G.transpose()));
        },
        6, alpha, s.P, y);
    std::string csv = "p,q,y1,y2,y3,e11,e22,e33,e23,e13,e12,E11,E22,E33,E23,E13,E12\r\n";
    for (int p = 0; p < U.N; ++p)
      for (int q = 0; q < U.N; ++q)
        for (std::size_t i = 0; i < y.size(); ++i) {
          // y reported in (y1, y2, y3) order of the family's cell
          const double y1 = alpha == 1 ? y[i][0] : y[i][1], y2 = alpha == 1 ? y[i][1] : y[i][0];
          const Hooke::Vector6 E =
              limit_strain(m.macro, chi, (p + 0.5) * s.P.epsilon, (q + 0.5) * s.P.epsilon, y[i]);
          csv += std::to_string(p) + "," + std::to_string(q) + "," + format_number(y1) + "," + format_number(y2) +
                 "," + format_number(y[i][2]);
          for (int j = 0; j < 6; ++j)
            csv += "," + format_number(scale * U.at(p, q, static_cast<int>(i), j) / Hooke::weight(j));
          for (int j = 0; j < 6; ++j) csv += "," + format_number(E(j) / Hooke::weight(j));
          csv += "\r\n";
        }
    write_text(out_path(g, "unfold_family" + std::to_string(alpha) + ".csv"), csv);
    const StrainGap gap = strain_gap(s.mesh, s.sol.u, m.macro, chi, s.P, c.micro);
    std::cout << "family " << alpha << ": strain gap " << format_number(gap.gap) << "\n";
  }
  return 0;
}

int cmd_recovery(const Globals& g) {
  const RunConfig c = make_config(g);
  const int k = level_index(g, c);
  const LimitModel m = solve_limit(c);
  const PlateParams P = PlateParams::make(c.L, c.l, c.levels[k].first, c.levels[k].second);
  const PlateMesh3D mesh = build_plate_mesh(P, c.res);
  const FineProblem prob = build_fine_problem(mesh, P, c.material.field(), c.load);
  const RecoveryField rec = build_recovery(m.macro, m.chi1, m.chi2, prob);
  const NpcMargins npc = npc_margins(mesh, P, rec.v);
  write_nodal_csv(out_path(g, "recovery.csv"), mesh, rec.v, g.decimate);
  const json rep = {{"E_rec", rec.scaled_energy},
                    {"E_hom", m.macro.energy},
                    {"gap", std::abs(rec.scaled_energy - m.macro.energy) / m.macro.energy},
                    {"npc_margins", {npc.family1, npc.family2}},
                    {"hard_strain", rec.hard_strain}};
  write_text(out_path(g, "recovery.json"), rep.dump(2) + "\n");
  std::cout << rep.dump(2) << "\n";
  return 0;
}

int cmd_converge(const Globals& g) {
  const RunConfig c = make_config(g);
  std::map<std::string, double> timings;
  const ConvergenceReport r = run_converge(c, g.timings, &timings);
  write_outputs(r, timings, g.out);
  std::cout << report_csv(r);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thin plate with periodic rigid inclusions: homogenized model and fine-scale checks"};
  app.fallthrough();
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "JSON configuration file");
  app.add_option("--out", g.out, "output directory");
  app.add_option("--threads", g.threads, "worker threads")->check(CLI::Range(1, 1024));
  app.add_option("--tol", g.tol, "relative residual tolerance of the fine solver");

  auto* material = app.add_subcommand("material-check", "validate the Hooke tensors");
  auto* cell = app.add_subcommand("cell", "solve the cell problems and print the homogenized tensors");
  auto* macro = app.add_subcommand("macro", "solve the homogenized plate");
  auto* fine = app.add_subcommand("fine", "solve one fine-scale level");
  auto* unfold = app.add_subcommand("unfold", "unfolded strain of one level against the limit strain");
  auto* recovery = app.add_subcommand("recovery", "recovery field of the macro solution on one level");
  auto* converge = app.add_subcommand("converge", "run the convergence sweep");
  for (auto* s : {fine, unfold, recovery}) s->add_option("--level", g.level, "sweep level, 1-based");
  for (auto* s : {fine, recovery}) s->add_option("--decimate", g.decimate, "write every n-th node");
  unfold->add_option("--micro", g.micro, "micro intervals per direction in the CSV");
  converge->add_flag("--timings", g.timings, "write wall times into the CSV seconds column");

  CLI11_PARSE(app, argc, argv);
  set_thread_count(g.threads);
  try {
    if (*material) return cmd_material(g);
    if (*cell) return cmd_cell(g);
    if (*macro) return cmd_macro(g);
    if (*fine) return cmd_fine(g);
    if (*unfold) return cmd_unfold(g);
    if (*recovery) return cmd_recovery(g);
    if (*converge) return cmd_converge(g);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const StageError& e) {
    std::cerr << "stage '" << e.stage << "' failed: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
