#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "tileplate/geometry.hpp"

namespace tileplate {

struct MaterialError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Strain/stress slot order used everywhere: 11, 22, 33, 23, 13, 12.
inline constexpr std::array<std::array<int, 2>, 6> kSlotPair = {
    {{0, 0}, {1, 1}, {2, 2}, {1, 2}, {0, 2}, {0, 1}}};

inline int slot_of(int i, int j) {
  if (i == j) return i;
  const int s = i + j;  // 1 -> 12, 2 -> 13, 3 -> 23
  return s == 3 ? 3 : (s == 2 ? 4 : 5);
}

// Elastic moduli A_ijkl stored as a 6x6 matrix with Mandel weighting: the
// shear rows and columns carry a factor sqrt(2), so that with the strain
// vector (e11, e22, e33, sqrt2 e23, sqrt2 e13, sqrt2 e12) the energy density
// is e_hat' * voigt * e_hat and the spectrum of voigt is the spectrum of the
// quadratic form on symmetric matrices. Isotropic (lambda, mu) gives
// lambda + 2 mu on the normal diagonal, lambda off it, 2 mu on the shear diagonal.
template <typename Scalar>
struct HookeTensor {
  using Matrix6 = Eigen::Matrix<Scalar, 6, 6>;
  using Vector6 = Eigen::Matrix<Scalar, 6, 1>;
  Matrix6 voigt = Matrix6::Zero();

  static Scalar weight(int slot) { return slot < 3 ? Scalar(1) : Scalar(std::sqrt(2.0)); }

  // Full tensor entry, reconstructed from the stored matrix.
  Scalar full(int i, int j, int k, int l) const {
    const int I = slot_of(i, j), J = slot_of(k, l);
    return voigt(I, J) / (weight(I) * weight(J));
  }

  static Vector6 mandel(const Eigen::Matrix<Scalar, 3, 3>& e) {
    Vector6 v;
    for (int s = 0; s < 6; ++s) v(s) = weight(s) * e(kSlotPair[s][0], kSlotPair[s][1]);
    return v;
  }
  static Eigen::Matrix<Scalar, 3, 3> from_mandel(const Vector6& v) {
    Eigen::Matrix<Scalar, 3, 3> e;
    for (int s = 0; s < 6; ++s) {
      const auto [i, j] = kSlotPair[s];
      e(i, j) = e(j, i) = v(s) / weight(s);
    }
    return e;
  }
  // A e : f for symmetric e, f.
  Scalar contract(const Eigen::Matrix<Scalar, 3, 3>& e, const Eigen::Matrix<Scalar, 3, 3>& f) const {
    return mandel(e).dot(voigt * mandel(f));
  }

  bool operator==(const HookeTensor& o) const { return voigt == o.voigt; }
};

using Hooke = HookeTensor<double>;

template <typename Scalar>
HookeTensor<Scalar> isotropic_hooke(Scalar lambda, Scalar mu) {
  if (!(mu > Scalar(0))) throw MaterialError("isotropic_hooke: mu must be positive");
  if (lambda < Scalar(0)) throw MaterialError("isotropic_hooke: lambda must be nonnegative");
  HookeTensor<Scalar> t;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) t.voigt(i, j) = lambda;
    t.voigt(i, i) = lambda + 2 * mu;
    t.voigt(3 + i, 3 + i) = 2 * mu;
  }
  return t;
}

// Minimum eigenvalue of the quadratic form on symmetric matrices (the
// coercivity constant c0). Throws on asymmetry or if c0 < 1e-12.
template <typename Scalar>
Scalar validate_hooke(const HookeTensor<Scalar>& t) {
  const Scalar scale = std::max(Scalar(1), t.voigt.cwiseAbs().maxCoeff());
  if (!t.voigt.allFinite()) throw MaterialError("validate_hooke: non-finite entries");
  if ((t.voigt - t.voigt.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-12) * scale)
    throw MaterialError("validate_hooke: major symmetry violated (A_ijkl != A_klij)");
  Eigen::SelfAdjointEigenSolver<typename HookeTensor<Scalar>::Matrix6> es(t.voigt, Eigen::EigenvaluesOnly);
  const Scalar c0 = es.eigenvalues().minCoeff();
  if (!(c0 >= Scalar(1e-12))) throw MaterialError("validate_hooke: tensor is not coercive");
  return c0;
}

// Builds the stored matrix from a full 3x3x3x3 array indexed [i][j][k][l],
// rejecting inputs without minor and major symmetry.
template <typename Scalar>
HookeTensor<Scalar> hooke_from_full(const std::array<std::array<std::array<std::array<Scalar, 3>, 3>, 3>, 3>& A,
                                    Scalar tol = Scalar(1e-12)) {
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) {
          const Scalar a = A[i][j][k][l];
          if (std::abs(a - A[j][i][k][l]) > tol || std::abs(a - A[i][j][l][k]) > tol)
            throw MaterialError("hooke_from_full: minor symmetry violated");
          if (std::abs(a - A[k][l][i][j]) > tol)
            throw MaterialError("hooke_from_full: major symmetry violated (A_ijkl != A_klij)");
        }
  HookeTensor<Scalar> t;
  for (int I = 0; I < 6; ++I)
    for (int J = 0; J < 6; ++J) {
      const auto [i, j] = kSlotPair[I];
      const auto [k, l] = kSlotPair[J];
      t.voigt(I, J) = HookeTensor<Scalar>::weight(I) * HookeTensor<Scalar>::weight(J) * A[i][j][k][l];
    }
  return t;
}

// Per-element table over one family's cell grid. Element index layout is
// (s * n_cross + j3) * n_cross + jc.
struct CellTable {
  int n_cross = 0;
  int n_slices = 0;
  std::vector<Hooke> tensors;
};

struct HookeField {
  enum class Kind { Isotropic, CellPeriodic };
  Kind kind = Kind::Isotropic;
  double lambda = 1.0;
  double mu = 1.0;
  std::array<CellTable, 2> tables;  // CellPeriodic only, index alpha - 1

  static HookeField isotropic(double lambda, double mu);
  static HookeField cell_periodic(CellTable family1, CellTable family2);
  // Tensor at cell point y of family alpha (axial, cross, y3); nearest table element.
  const Hooke& at(int alpha, double y_axial, double y_cross, double y3) const;
 private:
  Hooke iso_;
};

// Tensor at every quadrature point of grid, 4 per element in the order of
// cell_gauss_points(); element order as in CellGrid::element.
struct CellCoefficients {
  CellGrid grid;
  std::vector<Hooke> at_qp;
  bool slice_invariant = true;  // all slices carry identical tables
  const Hooke& get(int s, int jc, int j3, int g) const {
    return at_qp[4 * grid.element(s, jc, j3) + g];
  }
};

CellCoefficients cell_coefficients(const HookeField& field, int alpha, const CellGrid& grid);

// One tensor per soft element, empty for hard (rigid) elements.
std::vector<std::optional<Hooke>> fine_coefficients(const HookeField& field, const PlateMesh3D& mesh,
                                                    const PlateParams& params);

// Inverse image under the unfolding map of the given family: returns
// (y_axial, y_cross, y3) for the physical point x.
std::array<double, 3> inverse_unfold(int alpha, const std::array<double, 3>& x, const PlateParams& params);

}  // namespace tileplate
