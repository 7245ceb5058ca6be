#pragma once

#include <array>
#include <cmath>

namespace tileplate {

// Gauss-Legendre rules on the reference interval (0,1).
struct Gauss1D {
  int n;
  std::array<double, 3> x;
  std::array<double, 3> w;
};

inline Gauss1D gauss_rule(int n) {
  if (n == 1) return {1, {0.5, 0, 0}, {1.0, 0, 0}};
  if (n == 2) {
    const double a = 0.5 / std::sqrt(3.0);
    return {2, {0.5 - a, 0.5 + a, 0}, {0.5, 0.5, 0}};
  }
  const double a = 0.5 * std::sqrt(0.6);
  return {3, {0.5 - a, 0.5, 0.5 + a}, {5.0 / 18, 8.0 / 18, 5.0 / 18}};
}

// 2x2 points on the cell cross-section element, cross coordinate fastest:
// g = gc + 2 * g3.
inline std::array<double, 2> cell_gauss_point(int g) {
  const Gauss1D r = gauss_rule(2);
  return {r.x[g % 2], r.x[g / 2]};
}

}  // namespace tileplate
