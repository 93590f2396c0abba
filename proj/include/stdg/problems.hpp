#pragma once

#include "stdg/space.hpp"

#include <functional>

namespace stdg {

/// Exact solution with derivatives, when known.
using ExactSolution = std::function<ManufacturedState(double t, double x, double y)>;

struct Problem {
  Rectangle domain;
  double final_time = 1.0;
  ProblemData data;
  BoundaryLabeler labeler = all_dirichlet();
  ExactSolution exact;  ///< empty when unknown
};

/// Omega = (0, 1)^2, T = 1, Dirichlet data and initial value taken from the exact solution.
/// With nonlinear == false the source omits N(u, u) (the linear model).
[[nodiscard]] Problem manufactured_problem(const ModelParams& params, const ManufacturedConfig& cfg = {},
                                           bool nonlinear = true);

/// Omega = (-1/2, 1/2)^2, T = 1, homogeneous data except the pressure source.
[[nodiscard]] Problem bump_problem(const BumpConfig& cfg = {});

}  // namespace stdg
