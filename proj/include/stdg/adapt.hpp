#pragma once

#include "stdg/forms.hpp"
#include "stdg/problems.hpp"

#include <vector>

namespace stdg {

/// Squared contributions of the DG norm.
struct DgNormParts {
  double time_jumps = 0.0;  ///< 1/2 sum_j ||M^{1/2} [u]_j||^2
  double face_flux = 0.0;   ///< c_A int sum_K sum_F ||A_n [u]_{F,K}||^2
  double ip = 0.0;          ///< c_Theta int |||u|||_h^2
  [[nodiscard]] double total() const { return time_jumps + face_flux + ip; }
};

struct NormWeights {
  double c_a = 1.0;
  double c_theta = 1.0;
};

/// DG norm parts of u_h, or of the error u_h - u when exact is given. For the error, jumps
/// at t_0, on Dirichlet faces and on Neumann faces are taken against the exact trace.
[[nodiscard]] DgNormParts dg_norm_parts(const DiscreteField& u, const ModelParams& params, const FormOptions& opts,
                                        const ExactSolution* exact = nullptr, NormWeights weights = {});

[[nodiscard]] double dg_norm(const DiscreteField& u, const ModelParams& params, const FormOptions& opts = {},
                             NormWeights weights = {});

/// |||u_h(t)|||_h, evaluated on slab_of(t).
[[nodiscard]] double ip_norm(const DiscreteField& u, double t, const ModelParams& params, const FormOptions& opts = {});

/// Per space-time cell indicator; data supplies f, u_0 and the boundary data against which
/// jumps at t_0 and on the boundary are measured.
[[nodiscard]] std::vector<double> indicator(const DiscreteField& u, const ProblemData& data, const ModelParams& params,
                                            bool nonlinear = true);

/// sqrt(sum eta_R^2).
[[nodiscard]] double aggregate(const std::vector<double>& eta);

struct AdaptConfig {
  double theta_ref = 0.1;
  double theta_deref = 0.01;
  int max_rounds = 2;
  CellDegree floor{0, 1};
  int ceiling = 6;

  void validate() const;
};

struct AdaptResult {
  DegreeMap degrees;
  int refined = 0;
  int derefined = 0;
  int clamped = 0;  ///< refinements limited by the ceiling
};

/// Maximum marking with derefinement: eta >= theta_ref max raises (p, q) by one, eta <=
/// theta_deref max lowers both by one, bounded by [floor, ceiling].
[[nodiscard]] AdaptResult mark_and_adapt(const DegreeMap& degrees, const std::vector<double>& eta, const AdaptConfig& cfg);

}  // namespace stdg
