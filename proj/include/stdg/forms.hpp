#pragma once

#include "stdg/space.hpp"

#include <array>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

namespace stdg {

/// Selects which linear forms enter a LinearOperator.
enum FormMask : unsigned {
  kFormM = 1u,
  kFormA = 2u,
  kFormD = 4u,
  kFormLinear = kFormM | kFormA | kFormD,
};

struct FormOptions {
  /// Multiplies sigma_F = C_sigma / h_F by (1 + max adjacent q)^2.
  bool degree_penalty = false;
  /// Drops N entirely (the linear acoustic model).
  bool linear_mode = false;
};

/// Penalty sigma_F for face f, given the spatial degrees of the adjacent cells.
[[nodiscard]] double penalty(const ModelParams& params, const FormOptions& opts, double h_face, int q_self, int q_other);

/// Rows of the test cell, columns of the trial cell. Missing couplings are 0 x 0.
struct CellBlocks {
  Matrix diag;
  std::array<Matrix, 4> neighbor;
  Matrix previous;
};

/// Space-time cells adjacent to r: same-slab neighbors per side and the cell below in time.
struct CellLinks {
  std::array<int, 4> neighbor{-1, -1, -1, -1};
  int previous = -1;
};

[[nodiscard]] std::vector<CellLinks> build_links(const Space& space);

/// Matrix of m_h + a_h + d_h (or a subset), stored as shared local blocks keyed by the
/// local configuration. Rows are test functions.
class LinearOperator {
public:
  LinearOperator(std::shared_ptr<const Space> space, const ModelParams& params, unsigned mask = kFormLinear,
                 FormOptions options = {});

  [[nodiscard]] const Space& space() const { return *space_; }
  [[nodiscard]] const CellBlocks& blocks(int r) const { return *blocks_[static_cast<std::size_t>(r)]; }
  [[nodiscard]] const CellLinks& links(int r) const { return links_[static_cast<std::size_t>(r)]; }
  [[nodiscard]] std::size_t unique_blocks() const { return cache_.size(); }

  /// y = L x over the whole space.
  void apply(const Vector& x, Vector& y) const;
  /// y_j = D_j x_j for slab-local vectors (no time coupling).
  void apply_slab_diagonal(int j, const double* x, double* y) const;
  /// y_j -= L_j x_{j-1}; x is global, y slab-local.
  void subtract_slab_coupling(int j, const Vector& x, double* y) const;

private:
  std::shared_ptr<const Space> space_;
  std::vector<CellLinks> links_;
  std::vector<const CellBlocks*> blocks_;
  std::map<std::vector<double>, std::unique_ptr<CellBlocks>> cache_;
};

/// Builds the local blocks of cell r from scratch (no caching); used by the operator and tests.
[[nodiscard]] CellBlocks build_cell_blocks(const Space& space, const std::vector<CellLinks>& links, int r,
                                           const ModelParams& params, unsigned mask, const FormOptions& options);

/// Volume tables reused across cells of equal shape.
class TableCache {
public:
  [[nodiscard]] const BasisTable& volume(CellDegree d, const CellFrame& f, int nqt, int nqs);
  [[nodiscard]] const BasisTable& face(CellDegree d, const CellFrame& f, Side side, int nqt, int nqs);
  [[nodiscard]] const BasisTable& time_trace(CellDegree d, const CellFrame& f, bool at_end, int nqs);

private:
  std::mutex mutex_;
  std::map<std::vector<double>, std::unique_ptr<BasisTable>> tables_;
};

/// Full discretization: linear forms, nonlinear volume forms and the load functional.
class Discretization {
public:
  Discretization(std::shared_ptr<const Space> space, const ModelParams& params, FormOptions options = {});

  [[nodiscard]] const Space& space() const { return *space_; }
  [[nodiscard]] const std::shared_ptr<const Space>& space_ptr() const { return space_; }
  [[nodiscard]] const ModelParams& params() const { return params_; }
  [[nodiscard]] const FormOptions& options() const { return options_; }
  [[nodiscard]] const LinearOperator& linear() const { return linear_; }
  [[nodiscard]] bool nonlinear() const { return !options_.linear_mode; }

  /// Vector of n_h(u, phi) over all basis functions phi.
  [[nodiscard]] Vector eval_n(const Vector& u) const;
  /// Slab j part of r_h(u): depends on u only through slabs j - 1 and j.
  [[nodiscard]] Vector slab_residual(int j, const Vector& u, const Vector& load) const;
  /// Vector of n'_h(x, phi; tilde).
  [[nodiscard]] Vector apply_nprime(const Vector& tilde, const Vector& x) const;
  /// Local matrix of n'_h(., .; tilde) on cell r.
  [[nodiscard]] Matrix nprime_block(int r, const Vector& tilde) const;

  /// y = (L + N'(tilde)) x, the matrix of b'_h(., .; tilde).
  void apply_jacobian(const Vector& tilde, const Vector& x, Vector& y) const;

  /// Vector of l_h(phi).
  [[nodiscard]] Vector rhs(const DataFields& data) const;
  /// r_h(u) = b_h(u, .) - l_h.
  [[nodiscard]] Vector residual(const Vector& u, const Vector& load) const;

private:
  std::shared_ptr<const Space> space_;
  ModelParams params_;
  FormOptions options_;
  LinearOperator linear_;
  mutable TableCache tables_;

  [[nodiscard]] const BasisTable& nonlinear_table(int r) const;
  void eval_n_cell(int r, const Vector& u, double* out) const;
};

}  // namespace stdg
