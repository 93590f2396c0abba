#pragma once

#include <vector>

namespace stdg {

/// Gauss-Legendre rule on the reference interval [0, 1].
struct QuadratureRule {
  std::vector<double> points;
  std::vector<double> weights;

  [[nodiscard]] int size() const { return static_cast<int>(points.size()); }
  /// Polynomials up to this degree are integrated exactly.
  [[nodiscard]] int exactness() const { return 2 * size() - 1; }
};

/// n-point rule; cached, thread-safe after the first call for a given n.
[[nodiscard]] const QuadratureRule& gauss_legendre(int n);

/// Smallest point count exact for the given polynomial degree.
[[nodiscard]] inline int points_for_exactness(int degree) { return degree / 2 + 1; }

/// Point count per direction for bilinear forms of degree-d polynomials: ceil((2d + 3) / 2).
[[nodiscard]] inline int linear_form_points(int degree) { return degree + 2; }

/// Point count for integrands cubic in degree-d polynomials (nonlinear forms).
[[nodiscard]] inline int nonlinear_form_points(int degree) {
  const int base = linear_form_points(degree) + 1;
  const int cubic = points_for_exactness(3 * degree);
  return base > cubic ? base : cubic;
}

/// L2-orthonormal Legendre polynomials on [0, 1]: ell_n(s) = sqrt(2n + 1) P_n(2s - 1).
/// Fills values[0..n_max] and, when non-null, first derivatives.
void legendre_orthonormal(int n_max, double s, double* values, double* derivatives = nullptr);

}  // namespace stdg
