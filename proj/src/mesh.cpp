#include "stdg/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace stdg {

Vec2 outward_normal(Side s) {
  switch (s) {
    case Side::Left: return {-1.0, 0.0};
    case Side::Right: return {1.0, 0.0};
    case Side::Bottom: return {0.0, -1.0};
    case Side::Top: return {0.0, 1.0};
  }
  return {0.0, 0.0};
}

bool Cell::contains(const Vec2& x, double tol) const {
  const double sx = tol * std::max(1.0, hx());
  const double sy = tol * std::max(1.0, hy());
  return x.x() >= lower.x() - sx && x.x() <= upper.x() + sx && x.y() >= lower.y() - sy && x.y() <= upper.y() + sy;
}

BoundaryLabeler all_dirichlet() {
  return [](const Vec2&, const Vec2&) { return BoundaryLabel::Dirichlet; };
}

SpatialMesh SpatialMesh::structured(const Rectangle& domain, int nx, int ny, const BoundaryLabeler& labeler) {
  if (nx < 1 || ny < 1) {
    throw InvalidArgument("structured mesh needs at least one cell per direction");
  }
  if (!(domain.x1 > domain.x0) || !(domain.y1 > domain.y0)) {
    throw InvalidArgument("structured mesh needs a non-degenerate rectangle");
  }
  SpatialMesh m;
  m.domain_ = domain;
  m.nx_ = nx;
  m.ny_ = ny;
  const double hx = (domain.x1 - domain.x0) / nx;
  const double hy = (domain.y1 - domain.y0) / ny;
  m.h_max_ = std::max(hx, hy);

  auto xcoord = [&](int i) { return i == nx ? domain.x1 : domain.x0 + i * hx; };
  auto ycoord = [&](int j) { return j == ny ? domain.y1 : domain.y0 + j * hy; };

  m.cells_.resize(static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      Cell& c = m.cells_[static_cast<std::size_t>(j * nx + i)];
      c.lower = Vec2(xcoord(i), ycoord(j));
      c.upper = Vec2(xcoord(i + 1), ycoord(j + 1));
    }
  }

  auto add_face = [&](int owner, int neighbor, Side side, const Vec2& a, const Vec2& b) {
    Face f;
    f.owner = owner;
    f.neighbor = neighbor;
    f.owner_side = side;
    f.a = a;
    f.b = b;
    f.normal = outward_normal(side);
    if (neighbor < 0) {
      f.label = labeler(f.midpoint(), f.normal);
      if (f.label == BoundaryLabel::Interior) {
        throw InvalidArgument("boundary labeler returned Interior for an exterior face");
      }
    }
    const int id = static_cast<int>(m.faces_.size());
    m.faces_.push_back(f);
    return id;
  };

  // Vertical faces (x-normal), then horizontal faces (y-normal).
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      const Vec2 a(xcoord(i), ycoord(j)), b(xcoord(i), ycoord(j + 1));
      const int left = i > 0 ? j * nx + i - 1 : -1;
      const int right = i < nx ? j * nx + i : -1;
      int id;
      if (left >= 0) {
        id = add_face(left, right, Side::Right, a, b);
      } else {
        id = add_face(right, -1, Side::Left, a, b);
      }
      if (left >= 0) m.cells_[static_cast<std::size_t>(left)].faces[static_cast<int>(Side::Right)] = id;
      if (right >= 0) m.cells_[static_cast<std::size_t>(right)].faces[static_cast<int>(Side::Left)] = id;
    }
  }
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const Vec2 a(xcoord(i), ycoord(j)), b(xcoord(i + 1), ycoord(j));
      const int below = j > 0 ? (j - 1) * nx + i : -1;
      const int above = j < ny ? j * nx + i : -1;
      int id;
      if (below >= 0) {
        id = add_face(below, above, Side::Top, a, b);
      } else {
        id = add_face(above, -1, Side::Bottom, a, b);
      }
      if (below >= 0) m.cells_[static_cast<std::size_t>(below)].faces[static_cast<int>(Side::Top)] = id;
      if (above >= 0) m.cells_[static_cast<std::size_t>(above)].faces[static_cast<int>(Side::Bottom)] = id;
    }
  }

  bool has_dirichlet = false;
  for (const Face& f : m.faces_) {
    has_dirichlet = has_dirichlet || f.label == BoundaryLabel::Dirichlet;
  }
  if (!has_dirichlet) {
    throw InvalidArgument("the Dirichlet boundary must have positive measure");
  }
  return m;
}

const Cell& SpatialMesh::cell(int k) const {
  if (k < 0 || k >= num_cells()) {
    throw InvalidArgument("cell index " + std::to_string(k) + " out of range");
  }
  return cells_[static_cast<std::size_t>(k)];
}

const Face& SpatialMesh::face(int f) const {
  if (f < 0 || f >= num_faces()) {
    throw InvalidArgument("face index " + std::to_string(f) + " out of range");
  }
  return faces_[static_cast<std::size_t>(f)];
}

std::span<const int, 4> SpatialMesh::faces_of(int k) const { return std::span<const int, 4>(cell(k).faces); }

FaceNeighbor SpatialMesh::neighbor(int f, int k) const {
  const Face& fc = face(f);
  if (fc.owner != k && fc.neighbor != k) {
    throw InvalidArgument("face " + std::to_string(f) + " is not a face of cell " + std::to_string(k));
  }
  if (fc.is_boundary()) {
    return {-1, fc.label};
  }
  return {fc.owner == k ? fc.neighbor : fc.owner, BoundaryLabel::Interior};
}

Side SpatialMesh::side_of(int f, int k) const {
  const Face& fc = face(f);
  if (fc.owner == k) return fc.owner_side;
  if (fc.neighbor == k) return opposite(fc.owner_side);
  throw InvalidArgument("face " + std::to_string(f) + " is not a face of cell " + std::to_string(k));
}

int SpatialMesh::locate(const Vec2& x) const {
  const double hx = (domain_.x1 - domain_.x0) / nx_;
  const double hy = (domain_.y1 - domain_.y0) / ny_;
  const int i = std::clamp(static_cast<int>(std::floor((x.x() - domain_.x0) / hx)), 0, nx_ - 1);
  const int j = std::clamp(static_cast<int>(std::floor((x.y() - domain_.y0) / hy)), 0, ny_ - 1);
  const int k = j * nx_ + i;
  return cells_[static_cast<std::size_t>(k)].contains(x) ? k : -1;
}

TimePartition::TimePartition(std::vector<double> t_points, double c_sr) : t_(std::move(t_points)) {
  if (t_.size() < 2) {
    throw InvalidArgument("time partition needs at least one interval");
  }
  if (t_.front() != 0.0) {
    throw InvalidArgument("time partition must start at t_0 = 0");
  }
  if (!(c_sr > 0.0 && c_sr <= 1.0)) {
    throw InvalidArgument("time partition shape constant must lie in (0, 1]");
  }
  for (std::size_t i = 1; i < t_.size(); ++i) {
    if (!(t_[i] > t_[i - 1])) {
      throw InvalidArgument("time points must be strictly increasing");
    }
    tau_max_ = std::max(tau_max_, t_[i] - t_[i - 1]);
  }
  for (std::size_t i = 1; i < t_.size(); ++i) {
    if (t_[i] - t_[i - 1] < c_sr * tau_max_ * (1.0 - 1e-12)) {
      throw InvalidArgument("time partition violates quasi-uniformity");
    }
  }
}

TimePartition TimePartition::uniform(double T, int slabs) {
  if (slabs < 1 || !(T > 0.0)) {
    throw InvalidArgument("uniform time partition needs T > 0 and at least one slab");
  }
  std::vector<double> t(static_cast<std::size_t>(slabs) + 1);
  for (int j = 0; j <= slabs; ++j) {
    t[static_cast<std::size_t>(j)] = j == slabs ? T : T * j / slabs;
  }
  return TimePartition(std::move(t));
}

int TimePartition::slab_of(double t) const {
  if (t < t_.front() || t > t_.back()) {
    throw InvalidArgument("time outside the partition");
  }
  const auto it = std::upper_bound(t_.begin(), t_.end(), t);
  const int j = static_cast<int>(it - t_.begin()) - 1;
  return std::min(j, num_slabs() - 1);
}

SpaceTimeMesh::SpaceTimeMesh(TimePartition time, SpatialMesh space, MeshBalance balance)
    : time_(std::move(time)), space_(std::move(space)), balance_(balance) {
  if (!(balance_.omega >= 1.0) || !(balance_.c_r > 0.0)) {
    throw InvalidArgument("mesh balance needs omega >= 1 and c_r > 0");
  }
}

bool SpaceTimeMesh::balance_holds() const {
  const double h = space_.h_max();
  const double ct = balance_.c_r * time_.tau_max();
  const double slack = 1e-12;
  return std::pow(h, balance_.omega) <= ct * (1.0 + slack) && ct <= h * (1.0 + slack) && h < 1.0;
}

std::shared_ptr<const SpaceTimeMesh> build_uniform(const Rectangle& domain, double T, int n_r, double ratio,
                                                   const BoundaryLabeler& labeler) {
  if (n_r < 1) {
    throw InvalidArgument("mesh.n_r must be at least 1");
  }
  if (!(ratio > 0.0)) {
    throw InvalidArgument("mesh.ratio must be positive");
  }
  const double h = std::ldexp(1.0, -n_r);
  auto count = [](double length, double step, const char* what) {
    const double n = length / step;
    const double rounded = std::round(n);
    if (rounded < 1.0 || std::abs(n - rounded) > 1e-9 * std::max(1.0, n)) {
      throw InvalidArgument(std::string("non-integer ") + what + " count for the requested resolution");
    }
    return static_cast<int>(rounded);
  };
  const int nx = count(domain.x1 - domain.x0, h, "cell");
  const int ny = count(domain.y1 - domain.y0, h, "cell");
  const int slabs = count(T, h / ratio, "slab");
  return std::make_shared<const SpaceTimeMesh>(TimePartition::uniform(T, slabs),
                                               SpatialMesh::structured(domain, nx, ny, labeler),
                                               MeshBalance{1.0, ratio});
}

}  // namespace stdg
