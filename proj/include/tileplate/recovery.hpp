#pragma once

#include <functional>
#include <vector>

#include "tileplate/cell.hpp"
#include "tileplate/fine.hpp"
#include "tileplate/macro.hpp"

namespace tileplate {

// Lattice interpolant of tile-center samples: constant on each tile, linear
// across beam bands, bilinear on junction squares. Samples phi_pq are taken
// for p, q in -1..N (index p + 1, q + 1 in `values`).
struct TileInterpolant {
  int N = 0;
  double epsilon = 0.0, delta = 0.0;
  std::vector<double> values;  // (N + 2)^2, row-major in p
  double& at(int p, int q) { return values[(p + 1) * (N + 2) + (q + 1)]; }
  double at(int p, int q) const { return values[(p + 1) * (N + 2) + (q + 1)]; }
  double operator()(double x1, double x2) const;
};

// Samples phi at tile centers, mirrored across the edges of omega for the
// ghost tiles. With clamp = true the samples in {-1,0} x {0..n} and
// {0..n} x {-1,0} are zero, so the interpolant vanishes near the clamp.
TileInterpolant sample_tiles(const std::function<double(double, double)>& phi, const PlateParams& P,
                             bool clamp);

// Derivative-compressed version of a 1D profile: in beam band p the
// derivative is d Phi(p eps + (eps/delta) z), on hard band p it is the
// constant d Phi((p + 1/2) eps). Phi is extended linearly outside (0, L).
class CompressedProfile {
 public:
  CompressedProfile(std::function<double(double, int)> phi, const PlateParams& P);
  double value(double x) const;
  double derivative(double x) const;

 private:
  double ext(double t, int d) const;
  std::function<double(double, int)> phi_;
  PlateParams P_;
  std::vector<double> offset_;  // additive constant per beam band
  std::vector<double> end_;     // value at the right end of beam band p
};

struct RecoveryField {
  Vec v;
  double energy = 0.0;         // a(v, v)
  double scaled_energy = 0.0;  // a(v, v) / (eps delta^4)
  double load_work = 0.0;
  double hard_strain = 0.0;
};

// Nodal recovery displacement of a macro solution with the cell correctors
// added on the beam segments, clamped nodes zeroed.
Vec recovery_displacement(const MacroSolution& macro, const CorrectorSet& c1, const CorrectorSet& c2,
                          const PlateMesh3D& mesh, const PlateParams& P);

RecoveryField build_recovery(const MacroSolution& macro, const CorrectorSet& c1, const CorrectorSet& c2,
                             const FineProblem& prob);

}  // namespace tileplate
