#include "stdg/space.hpp"

#include "stdg/parallel.hpp"
#include "stdg/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace stdg {

namespace {

constexpr int kMaxModes = 64;

/// Orthonormal 1D basis on an interval of length `length`, evaluated at reference s.
struct Modes1D {
  std::array<double, kMaxModes> val{};
  std::array<double, kMaxModes> der{};
};

Modes1D modes_at(int n_max, double s, double length) {
  Modes1D m;
  legendre_orthonormal(n_max, s, m.val.data(), m.der.data());
  const double sv = 1.0 / std::sqrt(length);
  const double sd = sv / length;
  for (int n = 0; n <= n_max; ++n) {
    m.val[static_cast<std::size_t>(n)] *= sv;
    m.der[static_cast<std::size_t>(n)] *= sd;
  }
  return m;
}

struct PointModes {
  Modes1D t, x, y;
};

PointModes point_modes(CellDegree d, const CellFrame& f, double t, const Vec2& x) {
  return {modes_at(d.p, (t - f.t0) / f.tau, f.tau), modes_at(d.q, (x.x() - f.x0) / f.hx, f.hx),
          modes_at(d.q, (x.y() - f.y0) / f.hy, f.hy)};
}

BasisTable tabulate(CellDegree d, const std::vector<PointModes>& pts) {
  const int ns = scalar_count(d);
  const auto np = static_cast<Index>(pts.size());
  BasisTable tb;
  tb.val.resize(np, ns);
  tb.dt.resize(np, ns);
  tb.dx.resize(np, ns);
  tb.dy.resize(np, ns);
  for (Index k = 0; k < np; ++k) {
    const PointModes& m = pts[static_cast<std::size_t>(k)];
    for (int i = 0; i <= d.p; ++i) {
      for (int a = 0; a <= d.q; ++a) {
        for (int b = 0; b <= d.q; ++b) {
          const int s = scalar_index(d, i, a, b);
          const auto ui = static_cast<std::size_t>(i), ua = static_cast<std::size_t>(a), ub = static_cast<std::size_t>(b);
          tb.val(k, s) = m.t.val[ui] * m.x.val[ua] * m.y.val[ub];
          tb.dt(k, s) = m.t.der[ui] * m.x.val[ua] * m.y.val[ub];
          tb.dx(k, s) = m.t.val[ui] * m.x.der[ua] * m.y.val[ub];
          tb.dy(k, s) = m.t.val[ui] * m.x.val[ua] * m.y.der[ub];
        }
      }
    }
  }
  return tb;
}

void check_degree(CellDegree d) {
  if (d.p < 0 || d.q < 0 || d.p >= kMaxModes || d.q >= kMaxModes) {
    throw InvalidArgument("polynomial degrees must be non-negative and below 64");
  }
}

}  // namespace

DegreeMap::DegreeMap(int num_cells, CellDegree uniform, int ceiling) : ceiling_(ceiling) {
  if (num_cells < 0) throw InvalidArgument("negative cell count");
  if (ceiling < 0) throw InvalidArgument("degree ceiling must be non-negative");
  degrees_.assign(static_cast<std::size_t>(num_cells), CellDegree{});
  for (int r = 0; r < num_cells; ++r) set(r, uniform);
}

void DegreeMap::set(int r, CellDegree d) {
  if (r < 0 || r >= size()) throw InvalidArgument("degree map index out of range");
  if (d.p < 0 || d.q < 0 || d.p > ceiling_ || d.q > ceiling_) {
    throw InvalidArgument("degree (" + std::to_string(d.p) + ", " + std::to_string(d.q) + ") outside [0, " +
                          std::to_string(ceiling_) + "]");
  }
  degrees_[static_cast<std::size_t>(r)] = d;
}

CellDegree DegreeMap::max_degree() const {
  CellDegree m{0, 0};
  for (const auto& d : degrees_) {
    m.p = std::max(m.p, d.p);
    m.q = std::max(m.q, d.q);
  }
  return m;
}

int DegreeMap::min_time_degree() const {
  int m = ceiling_;
  for (const auto& d : degrees_) m = std::min(m, d.p);
  return m;
}

DofMap::DofMap(const DegreeMap& degrees) {
  offsets_.resize(static_cast<std::size_t>(degrees.size()) + 1);
  offsets_[0] = 0;
  for (int r = 0; r < degrees.size(); ++r) {
    offsets_[static_cast<std::size_t>(r) + 1] = offsets_[static_cast<std::size_t>(r)] + local_count(degrees[r]);
  }
}

bool CellFrame::contains(double t, const Vec2& x, double tol) const {
  return t >= t0 - tol * tau && t <= t0 + tau + tol * tau && x.x() >= x0 - tol * hx && x.x() <= x0 + hx + tol * hx &&
         x.y() >= y0 - tol * hy && x.y() <= y0 + hy + tol * hy;
}

BasisTable volume_table(CellDegree d, const CellFrame& f, int nqt, int nqs) {
  check_degree(d);
  const auto& rt = gauss_legendre(nqt);
  const auto& rs = gauss_legendre(nqs);
  std::vector<PointModes> pts;
  pts.reserve(static_cast<std::size_t>(nqt * nqs * nqs));
  Vector w(nqt * nqs * nqs);
  const double jac = f.tau * f.hx * f.hy;
  for (int it = 0; it < nqt; ++it) {
    const auto mt = modes_at(d.p, rt.points[static_cast<std::size_t>(it)], f.tau);
    for (int ix = 0; ix < nqs; ++ix) {
      const auto mx = modes_at(d.q, rs.points[static_cast<std::size_t>(ix)], f.hx);
      for (int iy = 0; iy < nqs; ++iy) {
        pts.push_back({mt, mx, modes_at(d.q, rs.points[static_cast<std::size_t>(iy)], f.hy)});
        w((it * nqs + ix) * nqs + iy) = jac * rt.weights[static_cast<std::size_t>(it)] *
                                        rs.weights[static_cast<std::size_t>(ix)] * rs.weights[static_cast<std::size_t>(iy)];
      }
    }
  }
  BasisTable tb = tabulate(d, pts);
  tb.weights = std::move(w);
  return tb;
}

BasisTable face_table(CellDegree d, const CellFrame& f, Side side, int nqt, int nqs) {
  check_degree(d);
  const auto& rt = gauss_legendre(nqt);
  const auto& rs = gauss_legendre(nqs);
  const int axis = axis_of(side);
  const double fixed = (side == Side::Left || side == Side::Bottom) ? 0.0 : 1.0;
  const double h_tan = axis == 0 ? f.hy : f.hx;
  std::vector<PointModes> pts;
  pts.reserve(static_cast<std::size_t>(nqt * nqs));
  Vector w(nqt * nqs);
  for (int it = 0; it < nqt; ++it) {
    const auto mt = modes_at(d.p, rt.points[static_cast<std::size_t>(it)], f.tau);
    for (int is = 0; is < nqs; ++is) {
      const double s = rs.points[static_cast<std::size_t>(is)];
      PointModes m;
      m.t = mt;
      if (axis == 0) {
        m.x = modes_at(d.q, fixed, f.hx);
        m.y = modes_at(d.q, s, f.hy);
      } else {
        m.x = modes_at(d.q, s, f.hx);
        m.y = modes_at(d.q, fixed, f.hy);
      }
      pts.push_back(m);
      w(it * nqs + is) = f.tau * h_tan * rt.weights[static_cast<std::size_t>(it)] * rs.weights[static_cast<std::size_t>(is)];
    }
  }
  BasisTable tb = tabulate(d, pts);
  tb.weights = std::move(w);
  return tb;
}

BasisTable time_trace_table(CellDegree d, const CellFrame& f, bool at_end, int nqs) {
  check_degree(d);
  const auto& rs = gauss_legendre(nqs);
  const auto mt = modes_at(d.p, at_end ? 1.0 : 0.0, f.tau);
  std::vector<PointModes> pts;
  pts.reserve(static_cast<std::size_t>(nqs * nqs));
  Vector w(nqs * nqs);
  for (int ix = 0; ix < nqs; ++ix) {
    const auto mx = modes_at(d.q, rs.points[static_cast<std::size_t>(ix)], f.hx);
    for (int iy = 0; iy < nqs; ++iy) {
      pts.push_back({mt, mx, modes_at(d.q, rs.points[static_cast<std::size_t>(iy)], f.hy)});
      w(ix * nqs + iy) = f.hx * f.hy * rs.weights[static_cast<std::size_t>(ix)] * rs.weights[static_cast<std::size_t>(iy)];
    }
  }
  BasisTable tb = tabulate(d, pts);
  tb.weights = std::move(w);
  return tb;
}

Space::Space(std::shared_ptr<const SpaceTimeMesh> mesh, DegreeMap degrees)
    : mesh_(std::move(mesh)), degrees_(std::move(degrees)), dofs_(degrees_) {
  if (!mesh_) throw InvalidArgument("space requires a mesh");
  if (degrees_.size() != mesh_->num_cells()) {
    throw InvalidArgument("degree map size does not match the number of space-time cells");
  }
}

CellFrame Space::frame(int r) const {
  const int j = mesh_->slab_of_cell(r);
  const Cell& c = mesh_->space().cell(mesh_->space_cell_of(r));
  return {mesh_->time().t(j), mesh_->time().tau(j), c.lower.x(), c.hx(), c.lower.y(), c.hy()};
}

Index Space::slab_end(int j) const {
  return j + 1 == mesh_->num_slabs() ? dofs_.total() : slab_begin(j + 1);
}

std::shared_ptr<const Space> make_space(std::shared_ptr<const SpaceTimeMesh> mesh, DegreeMap degrees) {
  return std::make_shared<const Space>(std::move(mesh), std::move(degrees));
}

std::shared_ptr<const Space> make_space(std::shared_ptr<const SpaceTimeMesh> mesh, CellDegree uniform) {
  const int n = mesh->num_cells();
  return make_space(std::move(mesh), DegreeMap(n, uniform));
}

StateValue eval_local(CellDegree d, const CellFrame& f, const double* coeffs, double t, const Vec2& x) {
  const PointModes m = point_modes(d, f, t, x);
  const int ns = scalar_count(d);
  Vec3 out = Vec3::Zero();
  for (int i = 0; i <= d.p; ++i) {
    for (int a = 0; a <= d.q; ++a) {
      for (int b = 0; b <= d.q; ++b) {
        const double phi = m.t.val[static_cast<std::size_t>(i)] * m.x.val[static_cast<std::size_t>(a)] *
                           m.y.val[static_cast<std::size_t>(b)];
        const int s = scalar_index(d, i, a, b);
        for (int c = 0; c < kComponents; ++c) out(c) += coeffs[c * ns + s] * phi;
      }
    }
  }
  return StateValue::from_vector(out);
}

PointState eval_local_full(CellDegree d, const CellFrame& f, const double* coeffs, double t, const Vec2& x) {
  const PointModes m = point_modes(d, f, t, x);
  const int ns = scalar_count(d);
  Vec3 val = Vec3::Zero(), gx = Vec3::Zero(), gy = Vec3::Zero();
  for (int i = 0; i <= d.p; ++i) {
    const double ti = m.t.val[static_cast<std::size_t>(i)];
    for (int a = 0; a <= d.q; ++a) {
      for (int b = 0; b <= d.q; ++b) {
        const auto ua = static_cast<std::size_t>(a), ub = static_cast<std::size_t>(b);
        const double v = ti * m.x.val[ua] * m.y.val[ub];
        const double vx = ti * m.x.der[ua] * m.y.val[ub];
        const double vy = ti * m.x.val[ua] * m.y.der[ub];
        const int s = scalar_index(d, i, a, b);
        for (int c = 0; c < kComponents; ++c) {
          const double cf = coeffs[c * ns + s];
          val(c) += cf * v;
          gx(c) += cf * vx;
          gy(c) += cf * vy;
        }
      }
    }
  }
  PointState ps;
  ps.value = StateValue::from_vector(val);
  ps.grad.grad_p = Vec2(gx(0), gy(0));
  ps.grad.grad_v << gx(1), gy(1), gx(2), gy(2);
  return ps;
}

StateValue eval_local_dt(CellDegree d, const CellFrame& f, const double* coeffs, double t, const Vec2& x) {
  const PointModes m = point_modes(d, f, t, x);
  const int ns = scalar_count(d);
  Vec3 out = Vec3::Zero();
  for (int i = 0; i <= d.p; ++i) {
    for (int a = 0; a <= d.q; ++a) {
      for (int b = 0; b <= d.q; ++b) {
        const double phi = m.t.der[static_cast<std::size_t>(i)] * m.x.val[static_cast<std::size_t>(a)] *
                           m.y.val[static_cast<std::size_t>(b)];
        const int s = scalar_index(d, i, a, b);
        for (int c = 0; c < kComponents; ++c) out(c) += coeffs[c * ns + s] * phi;
      }
    }
  }
  return StateValue::from_vector(out);
}

DiscreteField::DiscreteField(std::shared_ptr<const Space> space)
    : space_(std::move(space)), coeffs_(Vector::Zero(space_->dofs().total())) {}

DiscreteField::DiscreteField(std::shared_ptr<const Space> space, Vector coefficients)
    : space_(std::move(space)), coeffs_(std::move(coefficients)) {
  if (coeffs_.size() != space_->dofs().total()) {
    throw InvalidArgument("coefficient vector length does not match the dof count");
  }
}

namespace {

const CellFrame& checked_frame(const DiscreteField& u, int r, double t, const Vec2& x, CellFrame& storage) {
  if (r < 0 || r >= u.space().num_cells()) throw InvalidArgument("cell index out of range");
  storage = u.space().frame(r);
  if (!storage.contains(t, x)) throw InvalidArgument("evaluation point outside the cell");
  return storage;
}

}  // namespace

StateValue eval(const DiscreteField& u, int r, double t, const Vec2& x) {
  CellFrame f;
  return eval_local(u.space().degree(r), checked_frame(u, r, t, x, f), u.local(r), t, x);
}

StateGradient eval_grad(const DiscreteField& u, int r, double t, const Vec2& x) {
  CellFrame f;
  return eval_local_full(u.space().degree(r), checked_frame(u, r, t, x, f), u.local(r), t, x).grad;
}

StateValue eval_dt(const DiscreteField& u, int r, double t, const Vec2& x) {
  CellFrame f;
  return eval_local_dt(u.space().degree(r), checked_frame(u, r, t, x, f), u.local(r), t, x);
}

SpatialField project_spatial(const SpaceFunction& u, const SpatialMesh& mesh, const std::vector<int>& q, int extra_points) {
  if (static_cast<int>(q.size()) != mesh.num_cells()) {
    throw InvalidArgument("spatial degree list does not match the mesh");
  }
  SpatialField out;
  out.degree = q;
  out.coefficients.resize(q.size());
  parallel_for(mesh.num_cells(), [&](int k) {
    const Cell& c = mesh.cell(k);
    const int qk = q[static_cast<std::size_t>(k)];
    const int nq = qk + 1 + extra_points;
    const auto& rule = gauss_legendre(nq);
    const int nloc = (qk + 1) * (qk + 1);
    Vector coef = Vector::Zero(kComponents * nloc);
    for (int ix = 0; ix < nq; ++ix) {
      const auto mx = modes_at(qk, rule.points[static_cast<std::size_t>(ix)], c.hx());
      const double x = c.lower.x() + c.hx() * rule.points[static_cast<std::size_t>(ix)];
      for (int iy = 0; iy < nq; ++iy) {
        const auto my = modes_at(qk, rule.points[static_cast<std::size_t>(iy)], c.hy());
        const double y = c.lower.y() + c.hy() * rule.points[static_cast<std::size_t>(iy)];
        const double w =
            c.area() * rule.weights[static_cast<std::size_t>(ix)] * rule.weights[static_cast<std::size_t>(iy)];
        const Vec3 val = u(x, y).as_vector();
        for (int a = 0; a <= qk; ++a) {
          for (int b = 0; b <= qk; ++b) {
            const double phi = w * mx.val[static_cast<std::size_t>(a)] * my.val[static_cast<std::size_t>(b)];
            for (int comp = 0; comp < kComponents; ++comp) coef(comp * nloc + a * (qk + 1) + b) += val(comp) * phi;
          }
        }
      }
    }
    out.coefficients[static_cast<std::size_t>(k)] = std::move(coef);
  });
  return out;
}

StateValue eval_spatial(const SpatialField& u, const SpatialMesh& mesh, int k, const Vec2& x) {
  const Cell& c = mesh.cell(k);
  const int qk = u.degree.at(static_cast<std::size_t>(k));
  const auto mx = modes_at(qk, (x.x() - c.lower.x()) / c.hx(), c.hx());
  const auto my = modes_at(qk, (x.y() - c.lower.y()) / c.hy(), c.hy());
  const int nloc = (qk + 1) * (qk + 1);
  const Vector& coef = u.coefficients[static_cast<std::size_t>(k)];
  Vec3 out = Vec3::Zero();
  for (int a = 0; a <= qk; ++a) {
    for (int b = 0; b <= qk; ++b) {
      const double phi = mx.val[static_cast<std::size_t>(a)] * my.val[static_cast<std::size_t>(b)];
      for (int comp = 0; comp < kComponents; ++comp) out(comp) += coef(comp * nloc + a * (qk + 1) + b) * phi;
    }
  }
  return StateValue::from_vector(out);
}

namespace {

/// Cellwise moments (u, phi) for all time modes up to p_max (<= p of the cell).
Vector cell_moments(const SpaceTimeFunction& u, CellDegree d, const CellFrame& f, int extra_points) {
  const BasisTable tb = volume_table(d, f, d.p + 1 + extra_points, d.q + 1 + extra_points);
  const auto& rt = gauss_legendre(d.p + 1 + extra_points);
  const auto& rs = gauss_legendre(d.q + 1 + extra_points);
  const int nqt = rt.size(), nqs = rs.size();
  Matrix vals(tb.num_points(), kComponents);
  for (int it = 0; it < nqt; ++it) {
    const double t = f.t0 + f.tau * rt.points[static_cast<std::size_t>(it)];
    for (int ix = 0; ix < nqs; ++ix) {
      const double x = f.x0 + f.hx * rs.points[static_cast<std::size_t>(ix)];
      for (int iy = 0; iy < nqs; ++iy) {
        const double y = f.y0 + f.hy * rs.points[static_cast<std::size_t>(iy)];
        vals.row((it * nqs + ix) * nqs + iy) = u(t, x, y).as_vector().transpose();
      }
    }
  }
  const int ns = scalar_count(d);
  Vector out(kComponents * ns);
  const Matrix weighted = tb.weights.asDiagonal() * vals;
  for (int c = 0; c < kComponents; ++c) out.segment(c * ns, ns) = tb.val.transpose() * weighted.col(c);
  return out;
}

}  // namespace

DiscreteField project_l2(const SpaceTimeFunction& u, std::shared_ptr<const Space> space, int extra_points) {
  DiscreteField out(space);
  parallel_for(space->num_cells(), [&](int r) {
    out.coefficients().segment(space->dofs().offset(r), space->dofs().count(r)) =
        cell_moments(u, space->degree(r), space->frame(r), extra_points);
  });
  return out;
}

DiscreteField prolong(const DiscreteField& u, std::shared_ptr<const Space> target, int extra_points) {
  const Space& src = u.space();
  const SpaceTimeMesh& mesh = src.mesh();
  const SpaceTimeFunction f = [&](double t, double x, double y) {
    const Vec2 pt(x, y);
    const int k = mesh.space().locate(pt);
    if (k < 0) throw InvalidArgument("prolong: point outside the source mesh");
    const int r = mesh.cell_index(mesh.time().slab_of(t), k);
    return eval_local(src.degree(r), src.frame(r), u.local(r), t, pt);
  };
  return project_l2(f, std::move(target), extra_points);
}

DiscreteField project_spacetime(const SpaceTimeFunction& u, std::shared_ptr<const Space> space, int extra_points) {
  if (space->degrees().min_time_degree() < 1) {
    throw InvalidArgument("space-time projection requires time degree at least one on every cell");
  }
  DiscreteField out(space);
  const SpatialMesh& smesh = space->mesh().space();
  parallel_for(space->num_cells(), [&](int r) {
    const CellDegree d = space->degree(r);
    const CellFrame f = space->frame(r);
    const int ns = scalar_count(d);
    const int nsp = (d.q + 1) * (d.q + 1);
    Vector coef = cell_moments(u, d, f, extra_points);

    // Right-endpoint condition on the spatial projection of u(t_j).
    const Cell& cell = smesh.cell(space->mesh().space_cell_of(r));
    const double t_end = f.t0 + f.tau;
    const auto& rule = gauss_legendre(d.q + 1 + extra_points);
    Vector g = Vector::Zero(kComponents * nsp);
    for (int ix = 0; ix < rule.size(); ++ix) {
      const double sx = rule.points[static_cast<std::size_t>(ix)];
      const auto mx = modes_at(d.q, sx, cell.hx());
      for (int iy = 0; iy < rule.size(); ++iy) {
        const double sy = rule.points[static_cast<std::size_t>(iy)];
        const auto my = modes_at(d.q, sy, cell.hy());
        const double w = cell.area() * rule.weights[static_cast<std::size_t>(ix)] * rule.weights[static_cast<std::size_t>(iy)];
        const Vec3 val = u(t_end, cell.lower.x() + sx * cell.hx(), cell.lower.y() + sy * cell.hy()).as_vector();
        for (int a = 0; a <= d.q; ++a)
          for (int b = 0; b <= d.q; ++b)
            for (int c = 0; c < kComponents; ++c)
              g(c * nsp + a * (d.q + 1) + b) +=
                  w * val(c) * mx.val[static_cast<std::size_t>(a)] * my.val[static_cast<std::size_t>(b)];
      }
    }
    const auto mt = modes_at(d.p, 1.0, f.tau);
    for (int c = 0; c < kComponents; ++c) {
      for (int a = 0; a <= d.q; ++a) {
        for (int b = 0; b <= d.q; ++b) {
          double acc = g(c * nsp + a * (d.q + 1) + b);
          for (int i = 0; i < d.p; ++i) acc -= coef(c * ns + scalar_index(d, i, a, b)) * mt.val[static_cast<std::size_t>(i)];
          coef(c * ns + scalar_index(d, d.p, a, b)) = acc / mt.val[static_cast<std::size_t>(d.p)];
        }
      }
    }
    out.coefficients().segment(space->dofs().offset(r), space->dofs().count(r)) = coef;
  });
  return out;
}

DiscreteField transfer(const DiscreteField& u, std::shared_ptr<const Space> target) {
  if (&u.space().mesh() != &target->mesh()) {
    throw InvalidArgument("transfer requires both spaces on the same mesh");
  }
  DiscreteField out(target);
  for (int r = 0; r < target->num_cells(); ++r) {
    const CellDegree ds = u.space().degree(r);
    const CellDegree dt = target->degree(r);
    const int nss = scalar_count(ds), nst = scalar_count(dt);
    const double* src = u.local(r);
    double* dst = out.coefficients().data() + target->dofs().offset(r);
    for (int i = 0; i <= std::min(ds.p, dt.p); ++i)
      for (int a = 0; a <= std::min(ds.q, dt.q); ++a)
        for (int b = 0; b <= std::min(ds.q, dt.q); ++b)
          for (int c = 0; c < kComponents; ++c)
            dst[c * nst + scalar_index(dt, i, a, b)] = src[c * nss + scalar_index(ds, i, a, b)];
  }
  return out;
}

DataFields interpolate_data(const ProblemData& data, const Space& space, int extra_points) {
  const SpaceTimeMesh& mesh = space.mesh();
  const SpatialMesh& smesh = mesh.space();
  DataFields out;

  auto shared = std::shared_ptr<const Space>(&space, [](const Space*) {});
  if (data.source) {
    out.f_h = project_l2(data.source, shared, extra_points).coefficients();
  } else {
    out.f_h = Vector::Zero(space.dofs().total());
  }

  std::vector<int> q0(static_cast<std::size_t>(smesh.num_cells()));
  for (int k = 0; k < smesh.num_cells(); ++k) q0[static_cast<std::size_t>(k)] = space.degree(mesh.cell_index(0, k)).q;
  if (data.initial) {
    out.u0_h = project_spatial(data.initial, smesh, q0, extra_points);
  } else {
    out.u0_h.degree = q0;
    for (int q : q0) out.u0_h.coefficients.push_back(Vector::Zero(kComponents * (q + 1) * (q + 1)));
  }

  for (int j = 0; j < mesh.num_slabs(); ++j) {
    for (int fi = 0; fi < smesh.num_faces(); ++fi) {
      const Face& face = smesh.face(fi);
      if (!face.is_boundary()) continue;
      FaceData fd;
      fd.slab = j;
      fd.face = fi;
      fd.cell = mesh.cell_index(j, face.owner);
      fd.side = face.owner_side;
      fd.degree = space.degree(fd.cell);
      fd.label = face.label;
      const CellFrame f = space.frame(fd.cell);
      const int p = fd.degree.p, q = fd.degree.q;
      const int nf = (p + 1) * (q + 1);
      fd.coefficients = Vector::Zero(kComponents * nf);
      const bool dirichlet = face.label == BoundaryLabel::Dirichlet;
      const bool have = dirichlet ? static_cast<bool>(data.dirichlet) : (data.neumann_p || data.neumann_v);
      if (have) {
        const auto& rt = gauss_legendre(p + 1 + extra_points);
        const auto& rs = gauss_legendre(q + 1 + extra_points);
        const double hf = face.measure();
        const Vec2 tangent = (face.b - face.a) / hf;
        for (int it = 0; it < rt.size(); ++it) {
          const double st = rt.points[static_cast<std::size_t>(it)];
          const double t = f.t0 + f.tau * st;
          const auto mt = modes_at(p, st, f.tau);
          for (int is = 0; is < rs.size(); ++is) {
            const double ss = rs.points[static_cast<std::size_t>(is)];
            const Vec2 x = face.a + ss * hf * tangent;
            const auto ms = modes_at(q, ss, hf);
            const double w = f.tau * hf * rt.weights[static_cast<std::size_t>(it)] * rs.weights[static_cast<std::size_t>(is)];
            Vec3 val = Vec3::Zero();
            if (dirichlet) {
              val = data.dirichlet(t, x.x(), x.y()).as_vector();
            } else {
              if (data.neumann_p) val(0) = data.neumann_p(t, x.x(), x.y(), face.normal);
              if (data.neumann_v) {
                const StateValue nv = data.neumann_v(t, x.x(), x.y());
                val(1) = nv.v.x();
                val(2) = nv.v.y();
              }
            }
            for (int i = 0; i <= p; ++i)
              for (int a = 0; a <= q; ++a)
                for (int c = 0; c < kComponents; ++c)
                  fd.coefficients(c * nf + i * (q + 1) + a) +=
                      w * val(c) * mt.val[static_cast<std::size_t>(i)] * ms.val[static_cast<std::size_t>(a)];
          }
        }
      }
      out.boundary.push_back(std::move(fd));
    }
  }
  return out;
}

StateValue eval_face_data(const FaceData& fd, const CellFrame& f, double t, double s) {
  const int p = fd.degree.p, q = fd.degree.q;
  const double hf = axis_of(fd.side) == 0 ? f.hy : f.hx;
  const auto mt = modes_at(p, (t - f.t0) / f.tau, f.tau);
  const auto ms = modes_at(q, s / hf, hf);
  const int nf = (p + 1) * (q + 1);
  Vec3 out = Vec3::Zero();
  for (int i = 0; i <= p; ++i)
    for (int a = 0; a <= q; ++a)
      for (int c = 0; c < kComponents; ++c)
        out(c) += fd.coefficients(c * nf + i * (q + 1) + a) * mt.val[static_cast<std::size_t>(i)] *
                  ms.val[static_cast<std::size_t>(a)];
  return StateValue::from_vector(out);
}

}  // namespace stdg
