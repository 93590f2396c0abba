#pragma once

#include "stdg/adapt.hpp"
#include "stdg/newton.hpp"

#include <string>
#include <vector>

namespace stdg {

/// Malformed or invalid configuration. The message names the line or the field.
class ConfigError : public Error {
public:
  using Error::Error;
};

struct MeshSettings {
  int n_r = 3;
  double ratio = 4.0;
  /// Exterior sides labeled Neumann, any of left, right, bottom, top.
  std::vector<std::string> neumann;
};

struct DegreeSettings {
  int p = 1;
  int q = 1;
  int ceiling = 6;
};

/// Newton starting value for uniform runs: zero, or the solution one level coarser,
/// prolonged to the finer mesh (solved recursively down to coarse_level).
struct InitialGuess {
  bool coarse = false;
  int coarse_level = 1;
};

struct AdaptSettings {
  bool enabled = false;
  double theta_ref = 0.1;
  double theta_deref = 0.01;
  int rounds = 2;
  /// Negative entries fall back to the starting degrees of the run.
  int floor_p = -1;
  int floor_q = -1;
};

struct ExperimentSettings {
  std::string problem = "manufactured";  ///< manufactured or bump
  bool linear = false;
  ManufacturedConfig manufactured;
  BumpConfig bump;
  std::vector<int> levels{2, 3, 4, 5};
  std::vector<CellDegree> pairs{{1, 1}, {2, 1}, {2, 2}};
  double probe_x = 0.246094;
  double probe_y = 0.246094;
  /// Bump runs also solve the linear model for comparison.
  bool compare_linear = true;
  /// Functional-error study against a finer uniform run; 0 disables it.
  int reference_level = 0;
  CellDegree reference{2, 2};
};

struct RunConfig {
  ModelParams model;
  FormOptions forms;  ///< linear_mode mirrors experiment.linear
  MeshSettings mesh;
  DegreeSettings degrees;
  NewtonOptions newton;
  InitialGuess initial_guess;
  LinsolveOptions linsolve;
  AdaptSettings adapt;
  ExperimentSettings experiment;

  /// Throws ConfigError naming the first offending field.
  void validate() const;
  [[nodiscard]] AdaptConfig adapt_config(CellDegree start) const;
};

/// Parses "[section]" headers and "key = value" lines; '#' starts a comment. Unknown
/// sections and keys are errors. force_linear sets experiment.linear before the result is
/// validated, so the nonlinear coefficients are not checked.
[[nodiscard]] RunConfig parse_config(const std::string& text, bool force_linear = false);
[[nodiscard]] RunConfig load_config(const std::string& path, bool force_linear = false);

/// Normalized form: every section and key in fixed order, reals with 17 significant digits.
[[nodiscard]] std::string serialize_config(const RunConfig& cfg);

/// 17 significant digits; non-finite values print as nan, inf or -inf.
[[nodiscard]] std::string format_real(double x);

}  // namespace stdg
