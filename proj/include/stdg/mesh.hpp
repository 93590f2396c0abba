#pragma once

#include "stdg/model.hpp"

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace stdg {

enum class BoundaryLabel { Interior, Dirichlet, Neumann };

/// Local face numbering of an axis-aligned quadrilateral.
enum class Side : int { Left = 0, Right = 1, Bottom = 2, Top = 3 };

[[nodiscard]] inline int axis_of(Side s) { return static_cast<int>(s) / 2; }
[[nodiscard]] inline Side opposite(Side s) { return static_cast<Side>(static_cast<int>(s) ^ 1); }
[[nodiscard]] Vec2 outward_normal(Side s);

struct Rectangle {
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  [[nodiscard]] double area() const { return (x1 - x0) * (y1 - y0); }
};

struct Cell {
  Vec2 lower;
  Vec2 upper;
  /// Face ids ordered Left, Right, Bottom, Top.
  std::array<int, 4> faces{};

  [[nodiscard]] double hx() const { return upper.x() - lower.x(); }
  [[nodiscard]] double hy() const { return upper.y() - lower.y(); }
  [[nodiscard]] double area() const { return hx() * hy(); }
  [[nodiscard]] bool contains(const Vec2& x, double tol = 1e-12) const;
};

struct Face {
  int owner = -1;
  /// -1 on exterior faces.
  int neighbor = -1;
  BoundaryLabel label = BoundaryLabel::Interior;
  Side owner_side = Side::Left;
  Vec2 a;  ///< endpoints, ordered along the tangential axis
  Vec2 b;
  /// Unit normal pointing out of the owner cell.
  Vec2 normal;

  [[nodiscard]] double measure() const { return (b - a).norm(); }
  [[nodiscard]] Vec2 midpoint() const { return 0.5 * (a + b); }
  [[nodiscard]] bool is_boundary() const { return neighbor < 0; }
};

/// Result of looking across a face from one of its cells.
struct FaceNeighbor {
  int cell = -1;
  BoundaryLabel label = BoundaryLabel::Interior;
  [[nodiscard]] bool is_boundary() const { return cell < 0; }
};

/// Assigns Dirichlet or Neumann to an exterior face given its midpoint and outward normal.
using BoundaryLabeler = std::function<BoundaryLabel(const Vec2& midpoint, const Vec2& normal)>;

[[nodiscard]] BoundaryLabeler all_dirichlet();

/// Conforming mesh of axis-aligned quadrilaterals on a rectangle.
class SpatialMesh {
public:
  static SpatialMesh structured(const Rectangle& domain, int nx, int ny, const BoundaryLabeler& labeler = all_dirichlet());

  [[nodiscard]] const Rectangle& domain() const { return domain_; }
  [[nodiscard]] int num_cells() const { return static_cast<int>(cells_.size()); }
  [[nodiscard]] int num_faces() const { return static_cast<int>(faces_.size()); }
  [[nodiscard]] const Cell& cell(int k) const;
  [[nodiscard]] const Face& face(int f) const;
  [[nodiscard]] std::span<const Cell> cells() const { return cells_; }
  [[nodiscard]] std::span<const Face> faces() const { return faces_; }

  [[nodiscard]] std::span<const int, 4> faces_of(int k) const;
  [[nodiscard]] FaceNeighbor neighbor(int f, int k) const;
  /// Side of cell k on which face f lies.
  [[nodiscard]] Side side_of(int f, int k) const;

  /// Largest edge length.
  [[nodiscard]] double h_max() const { return h_max_; }
  /// Cell containing x (lowest index on ties), or -1.
  [[nodiscard]] int locate(const Vec2& x) const;
  [[nodiscard]] int nx() const { return nx_; }
  [[nodiscard]] int ny() const { return ny_; }

private:
  Rectangle domain_;
  int nx_ = 0, ny_ = 0;
  std::vector<Cell> cells_;
  std::vector<Face> faces_;
  double h_max_ = 0.0;
};

class TimePartition {
public:
  TimePartition() = default;
  /// Validates monotonicity, t_0 = 0 and quasi-uniformity with constant c_sr.
  explicit TimePartition(std::vector<double> t_points, double c_sr = 1.0);
  static TimePartition uniform(double T, int slabs);

  [[nodiscard]] int num_slabs() const { return static_cast<int>(t_.size()) - 1; }
  [[nodiscard]] double t(int i) const { return t_.at(static_cast<std::size_t>(i)); }
  [[nodiscard]] double tau(int j) const { return t(j + 1) - t(j); }
  [[nodiscard]] double tau_max() const { return tau_max_; }
  [[nodiscard]] double final_time() const { return t_.back(); }
  [[nodiscard]] const std::vector<double>& points() const { return t_; }
  /// Slab whose half-open interval [t_j, t_{j+1}) contains t; the last slab also owns T.
  [[nodiscard]] int slab_of(double t) const;

private:
  std::vector<double> t_;
  double tau_max_ = 0.0;
};

struct MeshBalance {
  double omega = 1.0;
  double c_r = 1.0;
};

/// Tensor product of a time partition and a spatial mesh. Space-time cell R = (j, K)
/// is numbered j * num_space_cells + K (slab-major).
class SpaceTimeMesh {
public:
  SpaceTimeMesh(TimePartition time, SpatialMesh space, MeshBalance balance);

  [[nodiscard]] const TimePartition& time() const { return time_; }
  [[nodiscard]] const SpatialMesh& space() const { return space_; }
  [[nodiscard]] const MeshBalance& balance() const { return balance_; }
  [[nodiscard]] int num_slabs() const { return time_.num_slabs(); }
  [[nodiscard]] int num_space_cells() const { return space_.num_cells(); }
  [[nodiscard]] int num_cells() const { return num_slabs() * num_space_cells(); }
  [[nodiscard]] int cell_index(int slab, int space_cell) const { return slab * num_space_cells() + space_cell; }
  [[nodiscard]] int slab_of_cell(int r) const { return r / num_space_cells(); }
  [[nodiscard]] int space_cell_of(int r) const { return r % num_space_cells(); }

  /// h^omega <= c_r tau <= h < 1, with a relative slack of 1e-12.
  [[nodiscard]] bool balance_holds() const;

private:
  TimePartition time_;
  SpatialMesh space_;
  MeshBalance balance_;
};

/// Uniform grid with h = 2^-n_r per axis and tau = h / ratio.
/// The domain side lengths must be integer multiples of h and T of tau.
[[nodiscard]] std::shared_ptr<const SpaceTimeMesh> build_uniform(const Rectangle& domain, double T, int n_r, double ratio,
                                                                 const BoundaryLabeler& labeler = all_dirichlet());

}  // namespace stdg
