#include "stdg/adapt.hpp"

#include "stdg/parallel.hpp"
#include "stdg/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace stdg {

namespace {

using ConstMap = Eigen::Map<const Matrix>;

double mass_coeff(const ModelParams& params, int c) { return c == 0 ? params.alpha : params.epsilon; }
double diffusion_coeff(const ModelParams& params, int c) { return c == 0 ? params.beta : params.zeta; }

struct Point3 {
  double t, x, y;
};

/// Physical points of a face table, in table order.
std::vector<Point3> face_points(const CellFrame& f, Side side, int nqt, int nqs) {
  const auto& rt = gauss_legendre(nqt);
  const auto& rs = gauss_legendre(nqs);
  std::vector<Point3> pts;
  pts.reserve(static_cast<std::size_t>(nqt * nqs));
  const bool low = side == Side::Left || side == Side::Bottom;
  for (int it = 0; it < nqt; ++it) {
    const double t = f.t0 + f.tau * rt.points[static_cast<std::size_t>(it)];
    for (int is = 0; is < nqs; ++is) {
      const double s = rs.points[static_cast<std::size_t>(is)];
      if (axis_of(side) == 0) {
        pts.push_back({t, f.x0 + (low ? 0.0 : f.hx), f.y0 + s * f.hy});
      } else {
        pts.push_back({t, f.x0 + s * f.hx, f.y0 + (low ? 0.0 : f.hy)});
      }
    }
  }
  return pts;
}

std::vector<Point3> trace_points(const CellFrame& f, bool at_end, int nqs) {
  const auto& rs = gauss_legendre(nqs);
  std::vector<Point3> pts;
  const double t = at_end ? f.t0 + f.tau : f.t0;
  for (int ix = 0; ix < nqs; ++ix)
    for (int iy = 0; iy < nqs; ++iy)
      pts.push_back({t, f.x0 + f.hx * rs.points[static_cast<std::size_t>(ix)], f.y0 + f.hy * rs.points[static_cast<std::size_t>(iy)]});
  return pts;
}

std::vector<Point3> volume_points(const CellFrame& f, int nqt, int nqs) {
  const auto& rt = gauss_legendre(nqt);
  const auto& rs = gauss_legendre(nqs);
  std::vector<Point3> pts;
  for (int it = 0; it < nqt; ++it)
    for (int ix = 0; ix < nqs; ++ix)
      for (int iy = 0; iy < nqs; ++iy)
        pts.push_back({f.t0 + f.tau * rt.points[static_cast<std::size_t>(it)],
                       f.x0 + f.hx * rs.points[static_cast<std::size_t>(ix)],
                       f.y0 + f.hy * rs.points[static_cast<std::size_t>(iy)]});
  return pts;
}

Matrix values(const BasisTable& tb, const Matrix& basis, const DiscreteField& u, int r) {
  const int ns = scalar_count(u.space().degree(r));
  (void)tb;
  return basis * ConstMap(u.local(r), ns, kComponents);
}

Vec3 row3(const Matrix& m, int k) { return Vec3(m(k, 0), m(k, 1), m(k, 2)); }

double mass_norm2(const Vec3& v, const ModelParams& params) {
  double s = 0.0;
  for (int c = 0; c < kComponents; ++c) s += mass_coeff(params, c) * v(c) * v(c);
  return s;
}

int elevated(int degree) { return degree + 3; }

}  // namespace

DgNormParts dg_norm_parts(const DiscreteField& u, const ModelParams& params, const FormOptions& opts,
                          const ExactSolution* exact, NormWeights weights) {
  const Space& space = u.space();
  const SpaceTimeMesh& mesh = space.mesh();
  const SpatialMesh& smesh = mesh.space();
  const std::vector<CellLinks> links = build_links(space);
  const int nk = mesh.num_space_cells();
  const int slabs = mesh.num_slabs();
  TableCache cache;
  std::vector<DgNormParts> per_cell(static_cast<std::size_t>(mesh.num_cells()));

  parallel_for(mesh.num_cells(), [&](int r) {
    DgNormParts& acc = per_cell[static_cast<std::size_t>(r)];
    const CellDegree d = space.degree(r);
    const CellFrame f = space.frame(r);
    const CellLinks& link = links[static_cast<std::size_t>(r)];
    const int j = mesh.slab_of_cell(r);

    // Time jump at t_{j-1}, and at T for the last slab.
    {
      const int prev = link.previous;
      const int nqs = elevated(std::max(d.q, prev >= 0 ? space.degree(prev).q : d.q));
      const BasisTable& start = cache.time_trace(d, f, false, nqs);
      Matrix jump = values(start, start.val, u, r);
      if (prev >= 0) {
        const BasisTable& end = cache.time_trace(space.degree(prev), space.frame(prev), true, nqs);
        jump -= values(end, end.val, u, prev);
      } else if (exact != nullptr) {
        const auto pts = trace_points(f, false, nqs);
        for (int k = 0; k < start.num_points(); ++k) {
          jump.row(k) -= (*exact)(pts[static_cast<std::size_t>(k)].t, pts[static_cast<std::size_t>(k)].x,
                                  pts[static_cast<std::size_t>(k)].y).u.value.as_vector().transpose();
        }
      }
      for (int k = 0; k < start.num_points(); ++k) acc.time_jumps += 0.5 * start.weights(k) * mass_norm2(row3(jump, k), params);
      if (j + 1 == slabs) {
        const BasisTable& end = cache.time_trace(d, f, true, elevated(d.q));
        Matrix val = values(end, end.val, u, r);
        if (exact != nullptr) {
          const auto pts = trace_points(f, true, elevated(d.q));
          for (int k = 0; k < end.num_points(); ++k) {
            val.row(k) -= (*exact)(pts[static_cast<std::size_t>(k)].t, pts[static_cast<std::size_t>(k)].x,
                                   pts[static_cast<std::size_t>(k)].y).u.value.as_vector().transpose();
          }
        }
        for (int k = 0; k < end.num_points(); ++k) acc.time_jumps += 0.5 * end.weights(k) * mass_norm2(row3(val, k), params);
      }
    }

    // Volume gradient part of the IP norm.
    {
      const int nqt = elevated(d.p), nqs = elevated(d.q);
      const BasisTable& tb = cache.volume(d, f, nqt, nqs);
      Matrix gx = values(tb, tb.dx, u, r), gy = values(tb, tb.dy, u, r);
      if (exact != nullptr) {
        const auto pts = volume_points(f, nqt, nqs);
        for (int k = 0; k < tb.num_points(); ++k) {
          const auto& pt = pts[static_cast<std::size_t>(k)];
          const PointState ex = (*exact)(pt.t, pt.x, pt.y).u;
          gx(k, 0) -= ex.grad.grad_p.x();
          gy(k, 0) -= ex.grad.grad_p.y();
          gx(k, 1) -= ex.grad.grad_v(0, 0);
          gy(k, 1) -= ex.grad.grad_v(0, 1);
          gx(k, 2) -= ex.grad.grad_v(1, 0);
          gy(k, 2) -= ex.grad.grad_v(1, 1);
        }
      }
      for (int k = 0; k < tb.num_points(); ++k)
        for (int c = 0; c < kComponents; ++c)
          acc.ip += tb.weights(k) * diffusion_coeff(params, c) * (gx(k, c) * gx(k, c) + gy(k, c) * gy(k, c));
    }

    // Faces: flux jumps from this side, IP jumps shared half/half between the two sides.
    const auto faces = smesh.faces_of(mesh.space_cell_of(r));
    for (int s = 0; s < 4; ++s) {
      const Side side = static_cast<Side>(s);
      const Face& face = smesh.face(faces[static_cast<std::size_t>(s)]);
      const Vec2 n = outward_normal(side);
      const FluxMatrix an = flux_An(n);
      const int nb = link.neighbor[static_cast<std::size_t>(s)];
      if (nb >= 0) {
        const CellDegree dn = space.degree(nb);
        const int nqt = elevated(std::max(d.p, dn.p)), nqs = elevated(std::max(d.q, dn.q));
        const BasisTable& fk = cache.face(d, f, side, nqt, nqs);
        const BasisTable& fn = cache.face(dn, space.frame(nb), opposite(side), nqt, nqs);
        const Matrix jump = values(fn, fn.val, u, nb) - values(fk, fk.val, u, r);
        const double sigma = penalty(params, opts, face.measure(), d.q, dn.q);
        for (int k = 0; k < fk.num_points(); ++k) {
          const Vec3 jv = row3(jump, k);
          acc.face_flux += fk.weights(k) * (an * jv).squaredNorm();
          acc.ip += 0.5 * fk.weights(k) * sigma * (params.beta * jv(0) * jv(0) + params.zeta * jv.tail<2>().squaredNorm());
        }
      } else {
        const int nqt = elevated(d.p), nqs = elevated(d.q);
        const BasisTable& fk = cache.face(d, f, side, nqt, nqs);
        Matrix e = values(fk, fk.val, u, r);
        if (exact != nullptr) {
          const auto pts = face_points(f, side, nqt, nqs);
          for (int k = 0; k < fk.num_points(); ++k) {
            const auto& pt = pts[static_cast<std::size_t>(k)];
            e.row(k) -= (*exact)(pt.t, pt.x, pt.y).u.value.as_vector().transpose();
          }
        }
        const double sigma = penalty(params, opts, face.measure(), d.q, d.q);
        const bool dirichlet = face.label == BoundaryLabel::Dirichlet;
        for (int k = 0; k < fk.num_points(); ++k) {
          Vec3 ev = row3(e, k);
          if (dirichlet) {
            acc.face_flux += fk.weights(k) * (an * ev).squaredNorm();
            acc.ip += fk.weights(k) * sigma * (params.beta * ev(0) * ev(0) + params.zeta * ev.tail<2>().squaredNorm());
          } else {
            const double vv = ev.tail<2>().squaredNorm();
            ev(0) = 0.0;
            acc.face_flux += fk.weights(k) * (an * (2.0 * ev)).squaredNorm();
            acc.ip += fk.weights(k) * sigma * params.zeta * vv;
          }
        }
      }
    }
  });

  DgNormParts total;
  for (const auto& p : per_cell) {
    total.time_jumps += p.time_jumps;
    total.face_flux += p.face_flux;
    total.ip += p.ip;
  }
  total.face_flux *= weights.c_a;
  total.ip *= weights.c_theta;
  (void)nk;
  return total;
}

double dg_norm(const DiscreteField& u, const ModelParams& params, const FormOptions& opts, NormWeights weights) {
  return std::sqrt(dg_norm_parts(u, params, opts, nullptr, weights).total());
}

double ip_norm(const DiscreteField& u, double t, const ModelParams& params, const FormOptions& opts) {
  const Space& space = u.space();
  const SpaceTimeMesh& mesh = space.mesh();
  const SpatialMesh& smesh = mesh.space();
  const int j = mesh.time().slab_of(t);
  double sum = 0.0;
  // Brute-force point evaluation, one face at a time.
  for (int k = 0; k < smesh.num_cells(); ++k) {
    const int r = mesh.cell_index(j, k);
    const CellDegree d = space.degree(r);
    const CellFrame f = space.frame(r);
    const auto& rule = gauss_legendre(elevated(d.q));
    for (int a = 0; a < rule.size(); ++a) {
      for (int b = 0; b < rule.size(); ++b) {
        const Vec2 x(f.x0 + f.hx * rule.points[static_cast<std::size_t>(a)], f.y0 + f.hy * rule.points[static_cast<std::size_t>(b)]);
        const PointState ps = eval_local_full(d, f, u.local(r), t, x);
        const double w = f.hx * f.hy * rule.weights[static_cast<std::size_t>(a)] * rule.weights[static_cast<std::size_t>(b)];
        sum += w * (params.beta * ps.grad.grad_p.squaredNorm() + params.zeta * ps.grad.grad_v.squaredNorm());
      }
    }
  }
  for (int fi = 0; fi < smesh.num_faces(); ++fi) {
    const Face& face = smesh.face(fi);
    if (face.label == BoundaryLabel::Neumann && face.is_boundary()) {
      // velocity only
    }
    const int ro = mesh.cell_index(j, face.owner);
    const int rn = face.is_boundary() ? -1 : mesh.cell_index(j, face.neighbor);
    const int qo = space.degree(ro).q;
    const int qn = rn >= 0 ? space.degree(rn).q : qo;
    const double sigma = penalty(params, opts, face.measure(), qo, qn);
    const auto& rule = gauss_legendre(elevated(std::max(qo, qn)));
    for (int a = 0; a < rule.size(); ++a) {
      const Vec2 x = face.a + rule.points[static_cast<std::size_t>(a)] * (face.b - face.a);
      const double w = face.measure() * rule.weights[static_cast<std::size_t>(a)];
      Vec3 jump = eval_local(space.degree(ro), space.frame(ro), u.local(ro), t, x).as_vector();
      if (rn >= 0) jump -= eval_local(space.degree(rn), space.frame(rn), u.local(rn), t, x).as_vector();
      const bool pressure = !(face.is_boundary() && face.label == BoundaryLabel::Neumann);
      sum += w * sigma * ((pressure ? params.beta * jump(0) * jump(0) : 0.0) + params.zeta * jump.tail<2>().squaredNorm());
    }
  }
  return std::sqrt(sum);
}

std::vector<double> indicator(const DiscreteField& u, const ProblemData& data, const ModelParams& params, bool nonlinear) {
  const Space& space = u.space();
  const SpaceTimeMesh& mesh = space.mesh();
  const SpatialMesh& smesh = mesh.space();
  const std::vector<CellLinks> links = build_links(space);
  const double h = smesh.h_max();
  TableCache cache;
  std::vector<double> eta(static_cast<std::size_t>(mesh.num_cells()));

  parallel_for(mesh.num_cells(), [&](int r) {
    const CellDegree d = space.degree(r);
    const CellFrame f = space.frame(r);
    const CellLinks& link = links[static_cast<std::size_t>(r)];
    double vol = 0.0, tj = 0.0, fl = 0.0;

    {
      const int nqt = nonlinear_form_points(d.p) + 1, nqs = nonlinear_form_points(d.q) + 1;
      const BasisTable& tb = cache.volume(d, f, nqt, nqs);
      const Matrix v = values(tb, tb.val, u, r), vt = values(tb, tb.dt, u, r);
      const Matrix vx = values(tb, tb.dx, u, r), vy = values(tb, tb.dy, u, r);
      const auto pts = volume_points(f, nqt, nqs);
      for (int k = 0; k < tb.num_points(); ++k) {
        PointState ps;
        ps.value = StateValue::from_vector(row3(v, k));
        ps.grad.grad_p = Vec2(vx(k, 0), vy(k, 0));
        ps.grad.grad_v << vx(k, 1), vy(k, 1), vx(k, 2), vy(k, 2);
        Vec3 res;
        res(0) = params.alpha * vt(k, 0) + ps.grad.div_v();
        res(1) = params.epsilon * vt(k, 1) + ps.grad.grad_p.x();
        res(2) = params.epsilon * vt(k, 2) + ps.grad.grad_p.y();
        if (nonlinear) res += eval_N(ps, ps.value, params).as_vector();
        const auto& pt = pts[static_cast<std::size_t>(k)];
        if (data.source) res -= data.source(pt.t, pt.x, pt.y).as_vector();
        vol += tb.weights(k) * res.squaredNorm();
      }
    }

    {
      // Inflow jump [u]_{j-1}; at t_0 measured against the initial value.
      const int prev = link.previous;
      const int nqs = elevated(std::max(d.q, prev >= 0 ? space.degree(prev).q : d.q));
      const BasisTable& start = cache.time_trace(d, f, false, nqs);
      Matrix jump = values(start, start.val, u, r);
      if (prev >= 0) {
        const BasisTable& end = cache.time_trace(space.degree(prev), space.frame(prev), true, nqs);
        jump -= values(end, end.val, u, prev);
      } else if (data.initial) {
        const auto pts = trace_points(f, false, nqs);
        for (int k = 0; k < start.num_points(); ++k) {
          jump.row(k) -= data.initial(pts[static_cast<std::size_t>(k)].x, pts[static_cast<std::size_t>(k)].y).as_vector().transpose();
        }
      }
      for (int k = 0; k < start.num_points(); ++k) tj += 0.5 * start.weights(k) * mass_norm2(row3(jump, k), params);
    }

    const auto faces = smesh.faces_of(mesh.space_cell_of(r));
    for (int s = 0; s < 4; ++s) {
      const Side side = static_cast<Side>(s);
      const Face& face = smesh.face(faces[static_cast<std::size_t>(s)]);
      const FluxMatrix an = flux_An(outward_normal(side));
      const int nb = link.neighbor[static_cast<std::size_t>(s)];
      if (nb >= 0) {
        const CellDegree dn = space.degree(nb);
        const int nqt = elevated(std::max(d.p, dn.p)), nqs = elevated(std::max(d.q, dn.q));
        const BasisTable& fk = cache.face(d, f, side, nqt, nqs);
        const BasisTable& fn = cache.face(dn, space.frame(nb), opposite(side), nqt, nqs);
        const Matrix jump = values(fn, fn.val, u, nb) - values(fk, fk.val, u, r);
        for (int k = 0; k < fk.num_points(); ++k) fl += 0.5 * fk.weights(k) * (an * row3(jump, k)).squaredNorm();
      } else {
        const int nqt = elevated(d.p), nqs = elevated(d.q);
        const BasisTable& fk = cache.face(d, f, side, nqt, nqs);
        const Matrix uk = values(fk, fk.val, u, r);
        const auto pts = face_points(f, side, nqt, nqs);
        const bool dirichlet = face.label == BoundaryLabel::Dirichlet;
        for (int k = 0; k < fk.num_points(); ++k) {
          const auto& pt = pts[static_cast<std::size_t>(k)];
          Vec3 jump;
          if (dirichlet) {
            const Vec3 ud = data.dirichlet ? data.dirichlet(pt.t, pt.x, pt.y).as_vector() : Vec3::Zero();
            jump = ud - row3(uk, k);
          } else {
            const Vec3 vn = data.neumann_v ? data.neumann_v(pt.t, pt.x, pt.y).as_vector() : Vec3::Zero();
            jump = -2.0 * (row3(uk, k) - vn);
            jump(0) = 0.0;
          }
          fl += 0.5 * fk.weights(k) * (an * jump).squaredNorm();
        }
      }
    }
    eta[static_cast<std::size_t>(r)] = std::sqrt(h * vol + tj + fl);
  });
  return eta;
}

double aggregate(const std::vector<double>& eta) {
  double s = 0.0;
  for (double e : eta) s += e * e;
  return std::sqrt(s);
}

void AdaptConfig::validate() const {
  if (!(theta_deref > 0.0 && theta_deref < theta_ref && theta_ref < 1.0)) {
    throw InvalidArgument("adapt thresholds must satisfy 0 < theta_deref < theta_ref < 1");
  }
  if (max_rounds < 0) throw InvalidArgument("adapt.rounds must be non-negative");
  if (floor.p < 0 || floor.q < 0 || floor.p > ceiling || floor.q > ceiling) {
    throw InvalidArgument("adapt degree floor must lie in [0, ceiling]");
  }
}

AdaptResult mark_and_adapt(const DegreeMap& degrees, const std::vector<double>& eta, const AdaptConfig& cfg) {
  cfg.validate();
  if (static_cast<int>(eta.size()) != degrees.size()) {
    throw InvalidArgument("indicator count does not match the degree map");
  }
  AdaptResult out;
  out.degrees = degrees;
  const double max = eta.empty() ? 0.0 : *std::max_element(eta.begin(), eta.end());
  if (!(max > 0.0)) return out;
  const int ceiling = std::min(cfg.ceiling, degrees.ceiling());
  for (int r = 0; r < degrees.size(); ++r) {
    const double e = eta[static_cast<std::size_t>(r)];
    CellDegree d = degrees[r];
    if (e >= cfg.theta_ref * max) {
      CellDegree up{d.p + 1, d.q + 1};
      if (up.p > ceiling || up.q > ceiling) ++out.clamped;
      up.p = std::min(up.p, ceiling);
      up.q = std::min(up.q, ceiling);
      if (up != d) ++out.refined;
      d = up;
    } else if (e <= cfg.theta_deref * max) {
      CellDegree down{std::max(d.p - 1, cfg.floor.p), std::max(d.q - 1, cfg.floor.q)};
      if (down != d) ++out.derefined;
      d = down;
    }
    out.degrees.set(r, d);
  }
  return out;
}

}  // namespace stdg
