#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tileplate/cell.hpp"
#include "tileplate/fine.hpp"
#include "tileplate/macro.hpp"
#include "tileplate/recovery.hpp"
#include "tileplate/unfold.hpp"

namespace tileplate {

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Error raised by a pipeline stage; `stage` names it (cell, macro, level 2, ...).
struct StageError : std::runtime_error {
  std::string stage;
  StageError(std::string s, const std::string& what) : std::runtime_error(s + ": " + what), stage(std::move(s)) {}
};

struct MaterialSpec {
  enum class Kind { Isotropic, CellPeriodic };
  Kind kind = Kind::Isotropic;
  double lambda = 1.0, mu = 1.0;
  std::array<CellTable, 2> tables;  // CellPeriodic only
  HookeField field() const;
};

struct RunConfig {
  double L = 1.0, l = 0.5;
  MeshResolution res;
  int cell_n = 64;
  int cell_slices = 1;
  int macro_membrane = 16;
  int macro_beam = 64;
  MaterialSpec material;
  LoadSpec load;
  std::vector<std::pair<double, double>> levels = {{0.25, 1.0 / 24}, {0.125, 1.0 / 96}};
  SolverConfig fine_solver;
  SolverConfig cell_solver{SolverMethod::Direct};
  SolverConfig macro_solver{SolverMethod::Direct};
  MicroGrid micro;

  // Rejects empty sweeps, 3 delta >= eps, non-integral lattices and
  // non-decreasing delta/eps before anything is solved.
  void validate() const;
};

// Numbers may be given as JSON numbers or as "a/b" strings.
double parse_number(const std::string& text);
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

struct LevelReport {
  int level = 0;
  double epsilon = 0, delta = 0;
  double E_fine = 0, E_hom = 0, E_rec = 0;
  double gap_energy = 0, gap_U3 = 0, gap_Um = 0, gap_strain1 = 0, gap_strain2 = 0;
  double npc1 = 0, npc2 = 0;
  double rho_bend = 0, rho_mem = 0, rho_hess = 0;
  double seconds = 0;
  // Not in the CSV.
  double gap_rec = 0;          // |E_rec - E_hom| / E_hom
  double strain_norm = 0;      // E(u)
  double load_bound = 0;       // E(u) / (eps^(1/2) delta^2)
  double potential_fine = 0;   // (a(u,u)/2 - F(u)) / (eps delta^4)
  double potential_rec = 0;
  double work_fine = 0;        // F(u) / (eps delta^4)
  double residual = 0;
  int iterations = 0;
  int dofs = 0;
  double hard_strain_rel = 0;  // max hard |e(u)| / max |u|
  double npc_rec1 = 0, npc_rec2 = 0;
  double gap_rec_strain1 = 0, gap_rec_strain2 = 0;

  bool operator==(const LevelReport& o) const;
};

struct ConvergenceReport {
  Eigen::Matrix3d A1 = Eigen::Matrix3d::Zero(), A2 = Eigen::Matrix3d::Zero();
  double E_hom = 0, tip = 0;
  std::vector<LevelReport> levels;
  bool operator==(const ConvergenceReport& o) const;
};

// Cell and macro stages, shared by the sub-commands.
struct LimitModel {
  CorrectorSet chi1, chi2;
  HomogenizedTensor H1, H2;
  MacroSolution macro;
};
LimitModel solve_limit(const RunConfig& cfg, std::map<std::string, double>* timings = nullptr);

struct FieldGaps {
  double U3 = 0;  // relative L2 gap of U3 / delta against the macro U3
  double Um = 0;  // absolute L2 gap of Um / delta^2 against the macro membrane field
};
FieldGaps kl_field_gaps(const KLFields& kl, const MacroSolution& macro, const PlateParams& P);

LevelReport run_level(const RunConfig& cfg, const LimitModel& model, int level, bool record_time);

// Cell and macro once, then every level on a worker pool; rows ordered by level.
ConvergenceReport run_converge(const RunConfig& cfg, bool record_time,
                               std::map<std::string, double>* timings = nullptr);

// ------------------------------------------------------------- outputs

extern const char* const kReportHeader;
std::string csv_field(const std::string& s);
std::string format_number(double v);
std::string report_csv(const ConvergenceReport& r);
std::string report_json(const ConvergenceReport& r);
ConvergenceReport report_from_json(const std::string& text);
std::string report_svg(const ConvergenceReport& r);
void write_text(const std::string& path, const std::string& text);
// report.csv, report.json, convergence.svg and timings.json under dir.
void write_outputs(const ConvergenceReport& r, const std::map<std::string, double>& timings,
                   const std::string& dir);

}  // namespace tileplate
