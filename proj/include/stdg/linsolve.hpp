#pragma once

#include "stdg/forms.hpp"

#include <Eigen/LU>
#include <Eigen/Sparse>

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace stdg {

/// Raised when a linear or nonlinear solve cannot reach its tolerance.
class SolverFailure : public Error {
public:
  using Error::Error;
};

using LinearMap = std::function<void(const Vector& x, Vector& y)>;

struct GmresOptions {
  double tol = 1e-10;  ///< relative to ||b||
  int max_iter = 1000;
  int restart = 50;
};

struct KrylovResult {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
  /// Relative residual estimate after every inner iteration.
  std::vector<double> history;
};

/// Right-preconditioned flexible GMRES with restarts. precond may be empty; it may also
/// change between calls (e.g. an inner iterative solve). x holds the initial guess.
KrylovResult fgmres(const LinearMap& op, const Vector& b, Vector& x, const LinearMap& precond, const GmresOptions& opts);

enum class SlabSolve {
  Direct,       ///< sparse LU (UMFPACK) of the slab block
  Iterative,    ///< GMRES with a cell-block Jacobi preconditioner to inner_tol
  BlockJacobi,  ///< fixed number of cell-block Jacobi sweeps (inexact)
  Auto,         ///< Direct below direct_limit unknowns per slab, Iterative above
};

[[nodiscard]] std::string to_string(SlabSolve s);
[[nodiscard]] SlabSolve slab_solve_from_string(const std::string& s);

struct SlabSolverOptions {
  SlabSolve mode = SlabSolve::Iterative;
  double inner_tol = 1e-13;
  int inner_max_iter = 2000;
  int jacobi_sweeps = 1;
  Index direct_limit = 20000;
};

/// Diagonal block D_j of b'_h(., .; tilde) restricted to slab j: per-cell dense diagonal
/// blocks plus the shared same-slab neighbor couplings of the linear forms.
class SlabMatrix {
public:
  SlabMatrix(const Discretization& disc, int slab, const Vector* tilde);

  [[nodiscard]] int slab() const { return slab_; }
  [[nodiscard]] Index size() const { return size_; }
  void apply(const double* x, double* y) const;
  [[nodiscard]] Eigen::SparseMatrix<double> to_sparse() const;
  [[nodiscard]] int num_cells() const { return static_cast<int>(diag_.size()); }
  [[nodiscard]] const Matrix& cell_diagonal(int k) const { return diag_[static_cast<std::size_t>(k)]; }
  /// Offset of cell k inside the slab-local vector.
  [[nodiscard]] Index cell_offset(int k) const { return offsets_[static_cast<std::size_t>(k)]; }

private:
  const Discretization* disc_;
  int slab_;
  Index size_ = 0;
  std::vector<Matrix> diag_;
  std::vector<Index> offsets_;
};

/// Factorization of one slab block according to the selected mode.
class SlabSolver {
public:
  SlabSolver(SlabMatrix matrix, const SlabSolverOptions& opts);
  ~SlabSolver();
  SlabSolver(const SlabSolver&) = delete;
  SlabSolver& operator=(const SlabSolver&) = delete;

  /// x = D_j^{-1} b (exactly, to inner_tol, or approximately, depending on the mode).
  void solve(const Vector& b, Vector& x) const;
  [[nodiscard]] SlabSolve mode() const { return mode_; }
  [[nodiscard]] int last_inner_iterations() const { return last_inner_; }
  [[nodiscard]] std::size_t memory_bytes() const;

private:
  SlabMatrix matrix_;
  SlabSolverOptions opts_;
  SlabSolve mode_;
  std::vector<Eigen::PartialPivLU<Matrix>> cell_lu_;
  struct Direct;
  std::unique_ptr<Direct> direct_;
  mutable int last_inner_ = 0;

  void apply_cell_jacobi(const Vector& r, Vector& z) const;
};

/// Block lower-triangular system of b'_h(., .; tilde) over all slabs.
class BlockSystem {
public:
  /// tilde may be null (n'_h omitted, i.e. linearization at zero).
  BlockSystem(const Discretization& disc, const Vector* tilde);

  [[nodiscard]] const Discretization& discretization() const { return *disc_; }
  [[nodiscard]] const Vector* tilde() const { return tilde_; }
  [[nodiscard]] int num_slabs() const { return disc_->space().mesh().num_slabs(); }
  [[nodiscard]] Index size() const { return disc_->space().dofs().total(); }
  void apply(const Vector& x, Vector& y) const;
  [[nodiscard]] SlabMatrix slab(int j) const { return SlabMatrix(*disc_, j, tilde_); }

private:
  const Discretization* disc_;
  const Vector* tilde_;
};

/// One forward block Gauss-Seidel sweep x_j = D_j^{-1}(b_j - L_j x_{j-1}). Slab
/// factorizations are kept between applications while their total size stays below
/// cache_bytes; otherwise they are rebuilt per sweep.
class BlockGaussSeidel {
public:
  BlockGaussSeidel(const BlockSystem& system, const SlabSolverOptions& opts, std::size_t cache_bytes = std::size_t{1} << 30);
  ~BlockGaussSeidel();

  void apply(const Vector& b, Vector& x) const;
  [[nodiscard]] int applications() const { return applications_; }
  [[nodiscard]] long long inner_iterations() const { return inner_iterations_; }

private:
  const BlockSystem* system_;
  SlabSolverOptions opts_;
  std::size_t cache_bytes_;
  mutable std::vector<std::unique_ptr<SlabSolver>> cache_;
  mutable bool cache_full_ = false;
  mutable int applications_ = 0;
  mutable long long inner_iterations_ = 0;
};

/// Forward substitution with per-slab solves; the reference for the Krylov path.
[[nodiscard]] Vector sequential_slab_solve(const BlockSystem& system, const Vector& b, const SlabSolverOptions& opts);

struct LinsolveOptions {
  GmresOptions gmres;
  SlabSolverOptions slab;
  bool precondition = true;
  std::size_t cache_bytes = std::size_t{1} << 30;
};

struct LinearSolveResult {
  Vector x;
  KrylovResult krylov;
  long long inner_iterations = 0;
};

/// GMRES on the full system, preconditioned by one block Gauss-Seidel sweep.
[[nodiscard]] LinearSolveResult solve_block_system(const BlockSystem& system, const Vector& b, const LinsolveOptions& opts);

}  // namespace stdg
