#include "stdg/quadrature.hpp"

#include "stdg/model.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

namespace stdg {

namespace {

QuadratureRule compute_rule(int n) {
  QuadratureRule rule;
  rule.points.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  // Newton iteration on P_n over [-1, 1] from Chebyshev-like initial guesses.
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double pn = n == 0 ? 1.0 : p1;
      const double pn1 = n == 0 ? 0.0 : p0;
      dp = n * (x * pn - pn1) / (x * x - 1.0);
      const double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged root for the weight.
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // Map to [0, 1], ascending.
    const auto idx = static_cast<std::size_t>(n - 1 - i);
    rule.points[idx] = 0.5 * (x + 1.0);
    rule.weights[idx] = 0.5 * w;
  }
  if (n == 1) {
    rule.points[0] = 0.5;
    rule.weights[0] = 1.0;
  }
  return rule;
}

}  // namespace

const QuadratureRule& gauss_legendre(int n) {
  if (n < 1 || n > 64) {
    throw InvalidArgument("Gauss-Legendre point count must lie in [1, 64]");
  }
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<QuadratureRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) {
    slot = std::make_unique<QuadratureRule>(compute_rule(n));
  }
  return *slot;
}

void legendre_orthonormal(int n_max, double s, double* values, double* derivatives) {
  const double x = 2.0 * s - 1.0;
  double p0 = 1.0, p1 = x;
  double d0 = 0.0, d1 = 1.0;
  for (int n = 0; n <= n_max; ++n) {
    double p, d;
    if (n == 0) {
      p = 1.0;
      d = 0.0;
    } else if (n == 1) {
      p = x;
      d = 1.0;
    } else {
      p = ((2.0 * n - 1.0) * x * p1 - (n - 1.0) * p0) / n;
      d = d0 + (2.0 * n - 1.0) * p1;  // P'_n = P'_{n-2} + (2n - 1) P_{n-1}
      p0 = p1;
      p1 = p;
      d0 = d1;
      d1 = d;
    }
    const double scale = std::sqrt(2.0 * n + 1.0);
    values[n] = scale * p;
    if (derivatives != nullptr) {
      derivatives[n] = 2.0 * scale * d;
    }
  }
}

}  // namespace stdg
