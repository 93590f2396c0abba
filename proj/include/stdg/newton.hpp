#pragma once

#include "stdg/linsolve.hpp"

#include <functional>
#include <limits>
#include <vector>

namespace stdg {

struct NewtonOptions {
  double c_tol = 1e-10;
  int max_iter = 20;
  /// Step halving until the residual decreases; off by default (Algorithm 1 is undamped).
  bool damping = false;
  /// Also solve every linearization by forward substitution and record the difference.
  bool verify_oracle = false;
  /// Solve slab by slab in time order, each slab to c_tol / sqrt(number of slabs) with the
  /// earlier slabs fixed. The root is the same as for the global iteration.
  bool marching = false;
  SlabSolverOptions oracle_slab{SlabSolve::Auto};
};

struct NewtonStep {
  int iteration = 0;
  /// Euclidean norm of the residual vector, i.e. the L2(Q) norm of its Riesz representative.
  double residual = 0.0;
  int linear_iterations = 0;
  long long inner_iterations = 0;
  /// ||x_gmres - x_oracle|| / ||x_oracle|| for the step that produced this iterate.
  double oracle_difference = std::numeric_limits<double>::quiet_NaN();
  double seconds = 0.0;
};

struct NewtonResult {
  Vector u;
  std::vector<NewtonStep> history;
  bool converged = false;
  /// Marching only: the largest number of Newton steps spent on one slab.
  int max_slab_iterations = 0;
  [[nodiscard]] int iterations() const { return static_cast<int>(history.size()) - 1; }
};

/// Observed order log(r_n / r_{n-1}) / log(r_{n-1} / r_{n-2}) of the last three residuals;
/// NaN with fewer than three.
[[nodiscard]] double contraction_order(const std::vector<NewtonStep>& history);

/// Algorithm 1. Each step solves b'_h(du, z; u^n) = r_h(u^n)(z) and sets u^{n+1} = u^n - du.
/// Throws SolverFailure when max_iter is exceeded or a linear solve fails. With marching the
/// history holds the global residual before and after the sweep, and the final step counts
/// all slab Newton steps as linear iterations.
[[nodiscard]] NewtonResult newton_solve(const Discretization& disc, const Vector& load, Vector initial,
                                        const NewtonOptions& opts, const LinsolveOptions& lin,
                                        const std::function<void(const NewtonStep&)>& log = {});

}  // namespace stdg
