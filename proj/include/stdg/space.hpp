#pragma once

#include "stdg/mesh.hpp"
#include "stdg/model.hpp"

#include <Eigen/Dense>

#include <compare>
#include <functional>
#include <memory>
#include <vector>

namespace stdg {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Polynomial degree in time (p) and in each space direction (q) of one space-time cell.
struct CellDegree {
  int p = 0;
  int q = 0;
  auto operator<=>(const CellDegree&) const = default;
};

/// Scalar tensor basis size (p + 1)(q + 1)^2.
[[nodiscard]] inline int scalar_count(CellDegree d) { return (d.p + 1) * (d.q + 1) * (d.q + 1); }
/// Local vector basis size, (1 + d) components per scalar function.
[[nodiscard]] inline int local_count(CellDegree d) { return kComponents * scalar_count(d); }
/// Scalar index of T_i X_a Y_b.
[[nodiscard]] inline int scalar_index(CellDegree d, int i, int a, int b) { return (i * (d.q + 1) + a) * (d.q + 1) + b; }

class DegreeMap {
public:
  DegreeMap() = default;
  DegreeMap(int num_cells, CellDegree uniform, int ceiling = 6);

  [[nodiscard]] int size() const { return static_cast<int>(degrees_.size()); }
  [[nodiscard]] const CellDegree& operator[](int r) const { return degrees_[static_cast<std::size_t>(r)]; }
  void set(int r, CellDegree d);
  [[nodiscard]] int ceiling() const { return ceiling_; }
  [[nodiscard]] CellDegree max_degree() const;
  [[nodiscard]] int min_time_degree() const;
  [[nodiscard]] bool operator==(const DegreeMap& other) const = default;

private:
  std::vector<CellDegree> degrees_;
  int ceiling_ = 6;
};

/// Contiguous per-cell blocks, slab-major because cells are numbered slab-major.
class DofMap {
public:
  DofMap() = default;
  explicit DofMap(const DegreeMap& degrees);

  [[nodiscard]] Index offset(int r) const { return offsets_[static_cast<std::size_t>(r)]; }
  [[nodiscard]] int count(int r) const { return static_cast<int>(offsets_[static_cast<std::size_t>(r) + 1] - offset(r)); }
  [[nodiscard]] Index total() const { return offsets_.back(); }
  [[nodiscard]] int num_cells() const { return static_cast<int>(offsets_.size()) - 1; }

private:
  std::vector<Index> offsets_{0};
};

/// Geometry of one space-time cell I_j x K.
struct CellFrame {
  double t0 = 0.0, tau = 1.0;
  double x0 = 0.0, hx = 1.0;
  double y0 = 0.0, hy = 1.0;

  [[nodiscard]] bool contains(double t, const Vec2& x, double tol = 1e-12) const;
};

/// Scalar basis functions tabulated on a set of points. Rows are points, columns scalar
/// basis functions. weights holds physical quadrature weights when the points form a rule.
struct BasisTable {
  Matrix val, dt, dx, dy;
  Vector weights;
  [[nodiscard]] int num_points() const { return static_cast<int>(val.rows()); }
};

/// Tensor Gauss grid on the cell; point index (it * nqs + ix) * nqs + iy.
[[nodiscard]] BasisTable volume_table(CellDegree d, const CellFrame& f, int nqt, int nqs);
/// Gauss grid on I_j x F for the given side; point index it * nqs + is, tangential
/// coordinate increasing along the face.
[[nodiscard]] BasisTable face_table(CellDegree d, const CellFrame& f, Side side, int nqt, int nqs);
/// Spatial Gauss grid at t_{j-1} (at_end false) or t_j (at_end true); point index ix * nqs + iy.
[[nodiscard]] BasisTable time_trace_table(CellDegree d, const CellFrame& f, bool at_end, int nqs);

/// Broken polynomial space on a space-time mesh with per-cell degrees and an orthonormal
/// Legendre tensor basis (time x space x component).
class Space {
public:
  Space(std::shared_ptr<const SpaceTimeMesh> mesh, DegreeMap degrees);

  [[nodiscard]] const SpaceTimeMesh& mesh() const { return *mesh_; }
  [[nodiscard]] const std::shared_ptr<const SpaceTimeMesh>& mesh_ptr() const { return mesh_; }
  [[nodiscard]] const DegreeMap& degrees() const { return degrees_; }
  [[nodiscard]] const DofMap& dofs() const { return dofs_; }
  [[nodiscard]] CellDegree degree(int r) const { return degrees_[r]; }
  [[nodiscard]] CellFrame frame(int r) const;
  [[nodiscard]] int num_cells() const { return mesh_->num_cells(); }
  [[nodiscard]] Index slab_begin(int j) const { return dofs_.offset(mesh_->cell_index(j, 0)); }
  [[nodiscard]] Index slab_end(int j) const;

private:
  std::shared_ptr<const SpaceTimeMesh> mesh_;
  DegreeMap degrees_;
  DofMap dofs_;
};

[[nodiscard]] std::shared_ptr<const Space> make_space(std::shared_ptr<const SpaceTimeMesh> mesh, DegreeMap degrees);
[[nodiscard]] std::shared_ptr<const Space> make_space(std::shared_ptr<const SpaceTimeMesh> mesh, CellDegree uniform);

/// Evaluation of a local coefficient block at a physical point inside the cell closure.
[[nodiscard]] StateValue eval_local(CellDegree d, const CellFrame& f, const double* coeffs, double t, const Vec2& x);
[[nodiscard]] PointState eval_local_full(CellDegree d, const CellFrame& f, const double* coeffs, double t, const Vec2& x);
[[nodiscard]] StateValue eval_local_dt(CellDegree d, const CellFrame& f, const double* coeffs, double t, const Vec2& x);

/// Coefficient vector over Z_h.
class DiscreteField {
public:
  DiscreteField() = default;
  explicit DiscreteField(std::shared_ptr<const Space> space);
  DiscreteField(std::shared_ptr<const Space> space, Vector coefficients);

  [[nodiscard]] const Space& space() const { return *space_; }
  [[nodiscard]] const std::shared_ptr<const Space>& space_ptr() const { return space_; }
  [[nodiscard]] const Vector& coefficients() const { return coeffs_; }
  [[nodiscard]] Vector& coefficients() { return coeffs_; }
  [[nodiscard]] const double* local(int r) const { return coeffs_.data() + space_->dofs().offset(r); }

private:
  std::shared_ptr<const Space> space_;
  Vector coeffs_;
};

/// Point evaluation on cell r; throws InvalidArgument when (t, x) is outside its closure.
[[nodiscard]] StateValue eval(const DiscreteField& u, int r, double t, const Vec2& x);
[[nodiscard]] StateGradient eval_grad(const DiscreteField& u, int r, double t, const Vec2& x);
[[nodiscard]] StateValue eval_dt(const DiscreteField& u, int r, double t, const Vec2& x);

using SpaceFunction = std::function<StateValue(double x, double y)>;
using SpaceTimeFunction = std::function<StateValue(double t, double x, double y)>;

/// Piecewise polynomial in space only: per spatial cell, spatial degree q and
/// coefficients ordered (component, a, b).
struct SpatialField {
  std::vector<int> degree;
  std::vector<Vector> coefficients;
};

/// Spatial L2 projection (Pi_h) onto per-cell degrees q_K. extra_points raises the rule
/// above the 2q + 1 exactness of the mass matrix.
[[nodiscard]] SpatialField project_spatial(const SpaceFunction& u, const SpatialMesh& mesh, const std::vector<int>& q,
                                           int extra_points = 4);
/// Evaluates a spatial field at x in cell k.
[[nodiscard]] StateValue eval_spatial(const SpatialField& u, const SpatialMesh& mesh, int k, const Vec2& x);

/// Space-time projection (pi_h): right-endpoint values match Pi_h u(t_j), and the
/// projection error is orthogonal to time degrees below p_R. Rejects p_R = 0.
[[nodiscard]] DiscreteField project_spacetime(const SpaceTimeFunction& u, std::shared_ptr<const Space> space,
                                              int extra_points = 4);

/// Cellwise L2(Q) projection.
[[nodiscard]] DiscreteField project_l2(const SpaceTimeFunction& u, std::shared_ptr<const Space> space,
                                       int extra_points = 4);

/// Copies overlapping Legendre coefficients: the L2 projection between nested spaces
/// on one mesh.
[[nodiscard]] DiscreteField transfer(const DiscreteField& u, std::shared_ptr<const Space> target);

/// L2 projection of u onto a space over a different mesh of the same domain, by point
/// evaluation of the owning source cell. Exact on nested meshes when degrees do not drop.
[[nodiscard]] DiscreteField prolong(const DiscreteField& u, std::shared_ptr<const Space> target, int extra_points = 2);

/// Boundary and volume data of a problem; unset callbacks are identically zero.
struct ProblemData {
  SpaceTimeFunction source;
  SpaceFunction initial;
  SpaceTimeFunction dirichlet;
  /// Pressure Neumann datum beta grad p . n, given the outward normal.
  std::function<double(double t, double x, double y, const Vec2& normal)> neumann_p;
  /// Velocity trace on Neumann faces (the p entry is ignored).
  SpaceTimeFunction neumann_v;
};

/// Face-wise L2 projection of boundary data onto P^p(I_j) x P^q(F) of the owner cell.
struct FaceData {
  int slab = 0;
  int face = 0;
  int cell = 0;  ///< space-time cell index
  Side side = Side::Left;
  CellDegree degree;
  BoundaryLabel label = BoundaryLabel::Dirichlet;
  /// Coefficients ordered (component, i, a) with 3 components for Dirichlet data and
  /// (p_N, v_N) packed the same way on Neumann faces.
  Vector coefficients;
};

struct DataFields {
  Vector f_h;
  SpatialField u0_h;
  std::vector<FaceData> boundary;
};

[[nodiscard]] DataFields interpolate_data(const ProblemData& data, const Space& space, int extra_points = 4);

/// Evaluates projected face data at (t, s) with s the tangential offset from face start.
[[nodiscard]] StateValue eval_face_data(const FaceData& fd, const CellFrame& f, double t, double s);

}  // namespace stdg
