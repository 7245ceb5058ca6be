#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace tileplate {

struct GeometryError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Scales of the reinforced plate. omega = (0,L)^2, thickness delta, one rigid
// tile per epsilon-cell, clamped strips of length l along both axes.
struct PlateParams {
  double L = 1.0;
  double l = 0.5;
  double epsilon = 0.25;
  double delta = 0.0625;
  int N_eps = 4;  // L / epsilon
  int n_eps = 2;  // l / epsilon

  // Validates 0 < 3 delta < epsilon < 1, integrality of L/eps and l/eps, 0 < l < L.
  static PlateParams make(double L, double l, double epsilon, double delta);
};

enum class Band : std::uint8_t { Beam, Hard };

// Breakpoints over (-delta/2, L+delta/2) for one in-plane axis, or over the
// thickness interval for x3 (all intervals tagged Beam there).
struct Axis1DMesh {
  std::vector<double> breakpoints;
  std::vector<Band> band_tags;   // per interval
  std::vector<int> band_index;   // beam band p in 0..N or hard band p in 0..N-1

  int intervals() const { return static_cast<int>(band_tags.size()); }
  int nodes() const { return static_cast<int>(breakpoints.size()); }
  // Interval containing x. Points on a breakpoint go to the interval on the
  // right, except the last breakpoint. Values outside are clamped.
  int locate(double x) const;
};

struct MeshResolution {
  int nb = 2;  // intervals per beam band
  int nh = 2;  // intervals per hard band
  int nt = 2;  // intervals through the thickness
};

// Region tag of an element: hard tile (p,q) or soft frame.
struct Region {
  bool hard = false;
  int p = -1;
  int q = -1;
  // For soft elements: beam family. 1 = beam along x1 (x2 in a beam band,
  // junction squares included), 2 = beam along x2.
  int family = 0;
};

struct PlateMesh3D {
  PlateParams params;
  MeshResolution res;
  std::array<Axis1DMesh, 3> axes;
  std::vector<Region> element_region;

  int nx() const { return axes[0].nodes(); }
  int ny() const { return axes[1].nodes(); }
  int nz() const { return axes[2].nodes(); }
  int ex() const { return axes[0].intervals(); }
  int ey() const { return axes[1].intervals(); }
  int ez() const { return axes[2].intervals(); }
  int node_count() const { return nx() * ny() * nz(); }
  int element_count() const { return ex() * ey() * ez(); }

  // Lexicographic with x3 fastest.
  int node(int i, int j, int k) const { return (i * ny() + j) * nz() + k; }
  int element(int i, int j, int k) const { return (i * ey() + j) * ez() + k; }
  std::array<double, 3> node_coord(int n) const;
  std::array<int, 3> element_ijk(int e) const;
  // Global node numbers of an element, local order (a,b,c) -> a + 2b + 4c.
  std::array<int, 8> element_nodes(int e) const;
  std::array<double, 3> element_lo(int e) const;
  std::array<double, 3> element_hi(int e) const;
};

PlateMesh3D build_plate_mesh(const PlateParams& params, const MeshResolution& res);

// Nodes inside the two clamped beam volumes (closure inclusive).
std::vector<int> clamped_node_set(const PlateMesh3D& mesh, const PlateParams& params);

// Cross-section grid of the periodicity cell of beam family alpha. The cross
// coordinate is y2 for alpha = 1 and y1 for alpha = 2; both it and y3 span
// (-1/2, 1/2) with n_cross intervals. The axial coordinate has n_slices slices.
struct CellGrid {
  int alpha = 1;
  int n_cross = 2;
  int n_slices = 1;

  int nodes_per_slice() const { return (n_cross + 1) * (n_cross + 1); }
  int elements_per_slice() const { return n_cross * n_cross; }
  double h() const { return 1.0 / n_cross; }
  // Node (ic, k): ic along the cross coordinate, k along y3.
  int node(int ic, int k) const { return ic * (n_cross + 1) + k; }
  // Element (jc, j3) in slice s; matches the cells.json table layout.
  int element(int s, int jc, int j3) const { return (s * n_cross + j3) * n_cross + jc; }
  double coord(int i) const { return -0.5 + static_cast<double>(i) / n_cross; }
  bool dirichlet_node(int ic) const { return ic == 0 || ic == n_cross; }
  // Human readable name of the Dirichlet faces, e.g. "y2=+-1/2".
  std::string dirichlet_faces() const;
};

CellGrid build_cell_grid(int alpha, int n_cross, int n_slices);

}  // namespace tileplate
