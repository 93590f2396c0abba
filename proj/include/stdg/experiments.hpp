#pragma once

#include "stdg/analysis.hpp"
#include "stdg/config.hpp"

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace stdg {

using Logger = std::function<void(const std::string&)>;

/// Problem selected by experiment.problem, with the configured boundary labels. On
/// Neumann sides of the manufactured problem the data come from the exact solution.
[[nodiscard]] Problem make_problem(const RunConfig& cfg, bool linear);

struct SolveRecord {
  std::string run;  ///< label used in newton.csv
  int n_r = 0;
  std::shared_ptr<const Space> space;
  DiscreteField u;
  NewtonResult newton;
  double seconds = 0.0;
};

/// Assembles and solves on the given space; initial may be null (zero start).
[[nodiscard]] SolveRecord solve_on(const Problem& problem, std::shared_ptr<const Space> space, const RunConfig& cfg,
                                   bool linear, const Vector* initial, const std::string& run, const Logger& log = {});

[[nodiscard]] std::shared_ptr<const SpaceTimeMesh> make_mesh(const Problem& problem, const RunConfig& cfg, int n_r);

/// Uniform-degree solve on level n_r. With initial_guess.coarse the Newton start is the
/// prolonged solution of level n_r - 1: coarser (when it matches) or a recursive solve down
/// to coarse_level. Recursive solves are appended to warmups when given.
[[nodiscard]] SolveRecord solve_uniform(const Problem& problem, const RunConfig& cfg, int n_r, CellDegree d, bool linear,
                                        const std::string& run, const Logger& log = {},
                                        const SolveRecord* coarser = nullptr, std::vector<SolveRecord>* warmups = nullptr);

struct AdaptiveRound {
  int round = 0;
  SolveRecord solve;
  std::vector<double> eta;
  double eta_global = 0.0;
  /// Degrees for the next round; equal to the current ones after the last round.
  AdaptResult next;
};

/// Solve, estimate and mark for rounds 0..adapt.rounds, each round warm-started from the
/// transferred solution of the previous one.
[[nodiscard]] std::vector<AdaptiveRound> run_adaptive(const Problem& problem, const RunConfig& cfg, int n_r,
                                                      CellDegree start, bool linear, const Logger& log = {});

struct ConvergenceRow {
  CellDegree degree;
  int n_r = 0;
  double h = 0.0;
  Index dofs = 0;
  double dg_error = 0.0;
  double dg_order = 0.0;  ///< NaN on the coarsest level
  double l2_error = 0.0;
  double l2_order = 0.0;
  int newton_iterations = 0;
  double contraction_order = 0.0;
};

struct ConvergenceResult {
  std::vector<ConvergenceRow> rows;
  std::vector<SolveRecord> solves;  ///< Newton histories only; fields are released
  std::vector<SolveRecord> warmups;  ///< coarse solves below the first level, if any
};

struct BumpStudyRow {
  std::string mode;  ///< uniform or adaptive
  CellDegree start;
  int n_r = 0;
  Index dofs = 0;
  FunctionalErrors errors;
};

/// Each command writes its artifacts into out (created when missing) and returns the exit
/// status. Reals are printed with 17 significant digits; timings appear only in run.json.
int cmd_solve(const RunConfig& cfg, const std::filesystem::path& out, const Logger& log = {});
int cmd_convergence(const RunConfig& cfg, const std::filesystem::path& out, const Logger& log = {});
int cmd_bump(const RunConfig& cfg, const std::filesystem::path& out, const Logger& log = {});

/// Runs the manufactured convergence study without writing artifacts.
[[nodiscard]] ConvergenceResult run_convergence(const RunConfig& cfg, const Logger& log = {});

}  // namespace stdg
