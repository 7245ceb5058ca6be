#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "tileplate/harness.hpp"
#include "tileplate/quadrature.hpp"

namespace tileplate {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <class F>
auto staged(const std::string& stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

}  // namespace

FieldGaps kl_field_gaps(const KLFields& kl, const MacroSolution& macro, const PlateParams& P) {
  const Gauss1D g = gauss_rule(3);
  auto clipped = [&](const std::vector<double>& xs) {
    std::vector<double> out;
    for (double x : xs)
      if (x > 0 && x < P.L) out.push_back(x);
    out.insert(out.begin(), 0.0);
    out.push_back(P.L);
    return out;
  };
  const auto x1 = clipped(kl.x1), x2 = clipped(kl.x2);
  double d3 = 0, n3 = 0, dm = 0;
  for (std::size_t i = 0; i + 1 < x1.size(); ++i)
    for (std::size_t j = 0; j + 1 < x2.size(); ++j)
      for (int a = 0; a < g.n; ++a)
        for (int b = 0; b < g.n; ++b) {
          const double y1 = x1[i] + g.x[a] * (x1[i + 1] - x1[i]), y2 = x2[j] + g.x[b] * (x2[j + 1] - x2[j]);
          const double w = g.w[a] * g.w[b] * (x1[i + 1] - x1[i]) * (x2[j + 1] - x2[j]);
          const auto v = kl.at(y1, y2);
          const double U3 = macro.U3(y1, y2);
          const Eigen::Vector2d Um = macro.membrane(y1, y2);
          d3 += w * std::pow(v(2) / P.delta - U3, 2);
          n3 += w * U3 * U3;
          dm += w * (v.head<2>() / (P.delta * P.delta) - Um).squaredNorm();
        }
  FieldGaps out;
  out.U3 = n3 > 0 ? std::sqrt(d3 / n3) : std::sqrt(d3);
  out.Um = std::sqrt(dm);
  return out;
}

LimitModel solve_limit(const RunConfig& cfg, std::map<std::string, double>* timings) {
  LimitModel m;
  const HookeField field = staged("material", [&] { return cfg.material.field(); });
  auto t0 = Clock::now();
  staged("cell", [&] {
    for (int alpha = 1; alpha <= 2; ++alpha) {
      const CellGrid grid = build_cell_grid(alpha, cfg.cell_n, cfg.cell_slices);
      const CellCoefficients coeffs = cell_coefficients(field, alpha, grid);
      CorrectorSet cs = solve_correctors(alpha, grid, coeffs, cfg.cell_solver);
      HomogenizedTensor H = homogenized_tensor(cs, coeffs);
      (alpha == 1 ? m.chi1 : m.chi2) = std::move(cs);
      (alpha == 1 ? m.H1 : m.H2) = H;
    }
    return 0;
  });
  if (timings) (*timings)["cell"] = since(t0);
  t0 = Clock::now();
  m.macro = staged("macro", [&] {
    const MacroSpace space = build_macro_space(cfg.L, cfg.l, cfg.macro_membrane, cfg.macro_beam);
    return solve_macro(space, m.H1.A, m.H2.A, cfg.load.f, cfg.macro_solver);
  });
  if (timings) (*timings)["macro"] = since(t0);
  return m;
}

LevelReport run_level(const RunConfig& cfg, const LimitModel& model, int level, bool record_time) {
  const auto t0 = Clock::now();
  if (level < 0 || level >= static_cast<int>(cfg.levels.size()))
    throw StageError("level", "index " + std::to_string(level) + " outside the sweep");
  const std::string stage = "level " + std::to_string(level + 1);
  return staged(stage, [&] {
    const auto [eps, delta] = cfg.levels[level];
    const PlateParams P = PlateParams::make(cfg.L, cfg.l, eps, delta);
    const PlateMesh3D mesh = build_plate_mesh(P, cfg.res);
    const FineProblem prob = build_fine_problem(mesh, P, cfg.material.field(), cfg.load);
    const FineSolution sol = solve_fine(prob, cfg.fine_solver);
    const double scale = 1.0 / (eps * std::pow(delta, 4));
    const MacroSolution& macro = model.macro;

    LevelReport r;
    r.level = level + 1;
    r.epsilon = eps;
    r.delta = delta;
    r.E_fine = scaled_energy(sol, P);
    r.E_hom = macro.energy;
    r.gap_energy = std::abs(r.E_fine - r.E_hom) / r.E_hom;

    const KLFields kl = extract_kl(mesh, sol.u);
    const FieldGaps fg = kl_field_gaps(kl, macro, P);
    r.gap_U3 = fg.U3;
    r.gap_Um = fg.Um;
    r.gap_strain1 = strain_gap(mesh, sol.u, macro, model.chi1, P, cfg.micro).gap;
    r.gap_strain2 = strain_gap(mesh, sol.u, macro, model.chi2, P, cfg.micro).gap;
    const NpcMargins npc = npc_margins(mesh, P, sol.u);
    r.npc1 = npc.family1;
    r.npc2 = npc.family2;
    const KornRatios korn = korn_report(kl, sol.strain_norm, P);
    r.rho_bend = korn.bend;
    r.rho_mem = korn.mem;
    r.rho_hess = korn.hess;

    const RecoveryField rec = build_recovery(macro, model.chi1, model.chi2, prob);
    r.E_rec = rec.scaled_energy;
    r.gap_rec = std::abs(r.E_rec - r.E_hom) / r.E_hom;
    const NpcMargins rnpc = npc_margins(mesh, P, rec.v);
    r.npc_rec1 = rnpc.family1;
    r.npc_rec2 = rnpc.family2;
    r.gap_rec_strain1 = strain_gap(mesh, rec.v, macro, model.chi1, P, cfg.micro).gap;
    r.gap_rec_strain2 = strain_gap(mesh, rec.v, macro, model.chi2, P, cfg.micro).gap;

    r.strain_norm = sol.strain_norm;
    r.load_bound = sol.strain_norm / (std::pow(eps, cfg.load.kappa - 0.5) * delta * delta);
    r.work_fine = scale * sol.load_work;
    r.potential_fine = scale * (0.5 * sol.energy - sol.load_work);
    r.potential_rec = scale * (0.5 * rec.energy - rec.load_work);
    r.residual = sol.residual;
    r.iterations = sol.iterations;
    r.dofs = prob.reduced.map.reduced_dofs;
    r.hard_strain_rel = sol.u_max > 0 ? sol.hard_strain / sol.u_max : 0.0;
    if (record_time) r.seconds = since(t0);
    return r;
  });
}

ConvergenceReport run_converge(const RunConfig& cfg, bool record_time, std::map<std::string, double>* timings) {
  staged("config", [&] {
    cfg.validate();
    return 0;
  });
  const auto t0 = Clock::now();
  const LimitModel model = solve_limit(cfg, timings);
  ConvergenceReport rep;
  rep.A1 = model.H1.A;
  rep.A2 = model.H2.A;
  rep.E_hom = model.macro.energy;
  rep.tip = model.macro.F(cfg.L);

  const int n = static_cast<int>(cfg.levels.size());
  rep.levels.resize(n);
  std::vector<double> level_time(n, 0.0);
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::mutex mu;
  auto worker = [&] {
    for (int k = next++; k < n; k = next++) {
      try {
        const auto tl = Clock::now();
        rep.levels[k] = run_level(cfg, model, k, record_time);
        level_time[k] = since(tl);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!err) err = std::current_exception();
      }
    }
  };
  const int workers = std::max(1, std::min(thread_count(), n));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (err) std::rethrow_exception(err);
  if (timings) {
    for (int k = 0; k < n; ++k) (*timings)["level " + std::to_string(k + 1)] = level_time[k];
    (*timings)["total"] = since(t0);
  }
  return rep;
}

}  // namespace tileplate
