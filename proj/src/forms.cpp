#include "stdg/forms.hpp"

#include "stdg/parallel.hpp"
#include "stdg/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace stdg {

namespace {

using ConstMap = Eigen::Map<const Matrix>;
using MutMap = Eigen::Map<Matrix>;

double mass_coeff(const ModelParams& params, int c) { return c == 0 ? params.alpha : params.epsilon; }
double diffusion_coeff(const ModelParams& params, int c) { return c == 0 ? params.beta : params.zeta; }

/// Phi_a^T W Phi_b.
Matrix weighted_product(const Matrix& a, const Vector& w, const Matrix& b) { return a.transpose() * (w.asDiagonal() * b); }

Matrix normal_derivative(const BasisTable& tb, const Vec2& n) { return n.x() * tb.dx + n.y() * tb.dy; }

void add_component_blocks(Matrix& target, const FluxMatrix& coeff, const Matrix& scalar, int ns_row, int ns_col,
                          double scale = 1.0) {
  for (int c = 0; c < kComponents; ++c) {
    for (int cc = 0; cc < kComponents; ++cc) {
      if (coeff(c, cc) != 0.0) target.block(c * ns_row, cc * ns_col, ns_row, ns_col) += scale * coeff(c, cc) * scalar;
    }
  }
}

PointState point_state(const Matrix& val, const Matrix& dx, const Matrix& dy, int k) {
  PointState ps;
  ps.value.p = val(k, 0);
  ps.value.v = Vec2(val(k, 1), val(k, 2));
  ps.grad.grad_p = Vec2(dx(k, 0), dy(k, 0));
  ps.grad.grad_v << dx(k, 1), dy(k, 1), dx(k, 2), dy(k, 2);
  return ps;
}

}  // namespace

double penalty(const ModelParams& params, const FormOptions& opts, double h_face, int q_self, int q_other) {
  double sigma = params.c_sigma / h_face;
  if (opts.degree_penalty) {
    const double m = 1.0 + std::max(q_self, q_other);
    sigma *= m * m;
  }
  return sigma;
}

std::vector<CellLinks> build_links(const Space& space) {
  const SpaceTimeMesh& mesh = space.mesh();
  const SpatialMesh& smesh = mesh.space();
  std::vector<CellLinks> links(static_cast<std::size_t>(mesh.num_cells()));
  for (int r = 0; r < mesh.num_cells(); ++r) {
    const int j = mesh.slab_of_cell(r);
    const int k = mesh.space_cell_of(r);
    CellLinks& l = links[static_cast<std::size_t>(r)];
    const auto faces = smesh.faces_of(k);
    for (int s = 0; s < 4; ++s) {
      const FaceNeighbor nb = smesh.neighbor(faces[static_cast<std::size_t>(s)], k);
      l.neighbor[static_cast<std::size_t>(s)] = nb.is_boundary() ? -1 : mesh.cell_index(j, nb.cell);
    }
    l.previous = j > 0 ? mesh.cell_index(j - 1, k) : -1;
  }
  return links;
}

CellBlocks build_cell_blocks(const Space& space, const std::vector<CellLinks>& links, int r, const ModelParams& params,
                             unsigned mask, const FormOptions& options) {
  const SpaceTimeMesh& mesh = space.mesh();
  const SpatialMesh& smesh = mesh.space();
  const CellDegree d = space.degree(r);
  const CellFrame f = space.frame(r);
  const int ns = scalar_count(d);
  const int nl = kComponents * ns;
  const CellLinks& link = links[static_cast<std::size_t>(r)];
  const double theta = params.theta_ip;

  CellBlocks b;
  b.diag = Matrix::Zero(nl, nl);

  if (mask & (kFormM | kFormA | kFormD)) {
    const BasisTable tb = volume_table(d, f, linear_form_points(d.p), linear_form_points(d.q));
    if (mask & kFormM) {
      const Matrix mt = weighted_product(tb.val, tb.weights, tb.dt);
      for (int c = 0; c < kComponents; ++c) b.diag.block(c * ns, c * ns, ns, ns) += mass_coeff(params, c) * mt;
    }
    if (mask & kFormA) {
      const Matrix px = weighted_product(tb.val, tb.weights, tb.dx);
      const Matrix py = weighted_product(tb.val, tb.weights, tb.dy);
      b.diag.block(0, ns, ns, ns) += px;
      b.diag.block(0, 2 * ns, ns, ns) += py;
      b.diag.block(ns, 0, ns, ns) += px;
      b.diag.block(2 * ns, 0, ns, ns) += py;
    }
    if (mask & kFormD) {
      const Matrix g = weighted_product(tb.dx, tb.weights, tb.dx) + weighted_product(tb.dy, tb.weights, tb.dy);
      for (int c = 0; c < kComponents; ++c) b.diag.block(c * ns, c * ns, ns, ns) += diffusion_coeff(params, c) * g;
    }
  }

  if (mask & kFormM) {
    const int prev = link.previous;
    const int q_prev = prev >= 0 ? space.degree(prev).q : d.q;
    const int nqs = linear_form_points(std::max(d.q, q_prev));
    const BasisTable start = time_trace_table(d, f, false, nqs);
    const Matrix self = weighted_product(start.val, start.weights, start.val);
    for (int c = 0; c < kComponents; ++c) b.diag.block(c * ns, c * ns, ns, ns) += mass_coeff(params, c) * self;
    if (prev >= 0) {
      const CellDegree dp = space.degree(prev);
      const int nsp = scalar_count(dp);
      const BasisTable end = time_trace_table(dp, space.frame(prev), true, nqs);
      const Matrix cross = weighted_product(start.val, start.weights, end.val);
      b.previous = Matrix::Zero(nl, kComponents * nsp);
      for (int c = 0; c < kComponents; ++c) b.previous.block(c * ns, c * nsp, ns, nsp) = -mass_coeff(params, c) * cross;
    }
  }

  if (mask & (kFormA | kFormD)) {
    const int k = mesh.space_cell_of(r);
    const auto faces = smesh.faces_of(k);
    for (int s = 0; s < 4; ++s) {
      const Side side = static_cast<Side>(s);
      const Face& face = smesh.face(faces[static_cast<std::size_t>(s)]);
      const Vec2 n = outward_normal(side);
      const FluxMatrix aup = flux_upwind(n, params);
      const double hf = face.measure();
      const int nb = link.neighbor[static_cast<std::size_t>(s)];
      if (nb >= 0) {
        const CellDegree dn = space.degree(nb);
        const int nsn = scalar_count(dn);
        const int nqt = linear_form_points(std::max(d.p, dn.p));
        const int nqs = linear_form_points(std::max(d.q, dn.q));
        const BasisTable fk = face_table(d, f, side, nqt, nqs);
        const BasisTable fn = face_table(dn, space.frame(nb), opposite(side), nqt, nqs);
        const Vector& w = fk.weights;
        Matrix& nbm = b.neighbor[static_cast<std::size_t>(s)];
        nbm = Matrix::Zero(nl, kComponents * nsn);
        // [u]_{F,K} = u_{K_F} - u_K
        if (mask & kFormA) {
          add_component_blocks(b.diag, aup, weighted_product(fk.val, w, fk.val), ns, ns, -1.0);
          add_component_blocks(nbm, aup, weighted_product(fk.val, w, fn.val), ns, nsn, 1.0);
        }
        if (mask & kFormD) {
          const double sigma = penalty(params, options, hf, d.q, dn.q);
          const Matrix gk = normal_derivative(fk, n);
          const Matrix gn = normal_derivative(fn, n);
          const Matrix self = -0.5 * theta * weighted_product(gk, w, fk.val) - 0.5 * weighted_product(fk.val, w, gk) +
                              sigma * weighted_product(fk.val, w, fk.val);
          const Matrix cross = 0.5 * theta * weighted_product(gk, w, fn.val) - 0.5 * weighted_product(fk.val, w, gn) -
                               sigma * weighted_product(fk.val, w, fn.val);
          for (int c = 0; c < kComponents; ++c) {
            const double dc = diffusion_coeff(params, c);
            b.diag.block(c * ns, c * ns, ns, ns) += dc * self;
            nbm.block(c * ns, c * nsn, ns, nsn) += dc * cross;
          }
        }
      } else {
        const BasisTable fk = face_table(d, f, side, linear_form_points(d.p), linear_form_points(d.q));
        const Vector& w = fk.weights;
        const Matrix kk = weighted_product(fk.val, w, fk.val);
        const bool dirichlet = face.label == BoundaryLabel::Dirichlet;
        if (mask & kFormA) {
          if (dirichlet) {
            add_component_blocks(b.diag, aup, kk, ns, ns, -1.0);
          } else {
            FluxMatrix vel = aup;
            vel.col(0).setZero();
            add_component_blocks(b.diag, vel, kk, ns, ns, -2.0);
          }
        }
        if (mask & kFormD) {
          const double sigma = penalty(params, options, hf, d.q, d.q);
          const Matrix gk = normal_derivative(fk, n);
          const Matrix bd = -theta * weighted_product(gk, w, fk.val) - weighted_product(fk.val, w, gk) + sigma * kk;
          for (int c = dirichlet ? 0 : 1; c < kComponents; ++c) {
            b.diag.block(c * ns, c * ns, ns, ns) += diffusion_coeff(params, c) * bd;
          }
        }
      }
    }
  }
  return b;
}

LinearOperator::LinearOperator(std::shared_ptr<const Space> space, const ModelParams& params, unsigned mask,
                               FormOptions options)
    : space_(std::move(space)), links_(build_links(*space_)) {
  params.validate(options.linear_mode);
  const SpaceTimeMesh& mesh = space_->mesh();
  const SpatialMesh& smesh = mesh.space();
  blocks_.resize(static_cast<std::size_t>(mesh.num_cells()));
  for (int r = 0; r < mesh.num_cells(); ++r) {
    const CellDegree d = space_->degree(r);
    const CellFrame f = space_->frame(r);
    const CellLinks& l = links_[static_cast<std::size_t>(r)];
    std::vector<double> key{static_cast<double>(mask), static_cast<double>(d.p), static_cast<double>(d.q), f.tau, f.hx,
                            f.hy};
    if (l.previous >= 0) {
      const CellDegree dp = space_->degree(l.previous);
      key.insert(key.end(), {static_cast<double>(dp.p), static_cast<double>(dp.q), space_->frame(l.previous).tau});
    } else {
      key.insert(key.end(), {-1.0, -1.0, -1.0});
    }
    const auto faces = smesh.faces_of(mesh.space_cell_of(r));
    for (int s = 0; s < 4; ++s) {
      const int nb = l.neighbor[static_cast<std::size_t>(s)];
      const Face& face = smesh.face(faces[static_cast<std::size_t>(s)]);
      if (nb >= 0) {
        const CellDegree dn = space_->degree(nb);
        const CellFrame fn = space_->frame(nb);
        key.insert(key.end(), {0.0, static_cast<double>(dn.p), static_cast<double>(dn.q), fn.hx, fn.hy});
      } else {
        key.insert(key.end(), {face.label == BoundaryLabel::Dirichlet ? 1.0 : 2.0, -1.0, -1.0, -1.0, -1.0});
      }
    }
    auto& slot = cache_[key];
    if (!slot) slot = std::make_unique<CellBlocks>(build_cell_blocks(*space_, links_, r, params, mask, options));
    blocks_[static_cast<std::size_t>(r)] = slot.get();
  }
}

void LinearOperator::apply(const Vector& x, Vector& y) const {
  const DofMap& dofs = space_->dofs();
  y.resize(dofs.total());
  parallel_for(space_->num_cells(), [&](int r) {
    const CellBlocks& b = blocks(r);
    const CellLinks& l = links(r);
    auto out = y.segment(dofs.offset(r), dofs.count(r));
    out.noalias() = b.diag * x.segment(dofs.offset(r), dofs.count(r));
    for (int s = 0; s < 4; ++s) {
      const int nb = l.neighbor[static_cast<std::size_t>(s)];
      if (nb >= 0) out.noalias() += b.neighbor[static_cast<std::size_t>(s)] * x.segment(dofs.offset(nb), dofs.count(nb));
    }
    if (l.previous >= 0) out.noalias() += b.previous * x.segment(dofs.offset(l.previous), dofs.count(l.previous));
  });
}

void LinearOperator::apply_slab_diagonal(int j, const double* x, double* y) const {
  const DofMap& dofs = space_->dofs();
  const SpaceTimeMesh& mesh = space_->mesh();
  const Index base = space_->slab_begin(j);
  const int first = mesh.cell_index(j, 0);
  parallel_for(mesh.num_space_cells(), [&](int k) {
    const int r = first + k;
    const CellBlocks& b = blocks(r);
    const CellLinks& l = links(r);
    Eigen::Map<Vector> out(y + (dofs.offset(r) - base), dofs.count(r));
    out.noalias() = b.diag * Eigen::Map<const Vector>(x + (dofs.offset(r) - base), dofs.count(r));
    for (int s = 0; s < 4; ++s) {
      const int nb = l.neighbor[static_cast<std::size_t>(s)];
      if (nb >= 0) {
        out.noalias() +=
            b.neighbor[static_cast<std::size_t>(s)] * Eigen::Map<const Vector>(x + (dofs.offset(nb) - base), dofs.count(nb));
      }
    }
  });
}

void LinearOperator::subtract_slab_coupling(int j, const Vector& x, double* y) const {
  if (j == 0) return;
  const DofMap& dofs = space_->dofs();
  const SpaceTimeMesh& mesh = space_->mesh();
  const Index base = space_->slab_begin(j);
  const int first = mesh.cell_index(j, 0);
  parallel_for(mesh.num_space_cells(), [&](int k) {
    const int r = first + k;
    const int prev = links(r).previous;
    Eigen::Map<Vector> out(y + (dofs.offset(r) - base), dofs.count(r));
    out.noalias() -= blocks(r).previous * x.segment(dofs.offset(prev), dofs.count(prev));
  });
}

const BasisTable& TableCache::volume(CellDegree d, const CellFrame& f, int nqt, int nqs) {
  std::vector<double> key{0.0, static_cast<double>(d.p), static_cast<double>(d.q), f.tau, f.hx, f.hy,
                          static_cast<double>(nqt), static_cast<double>(nqs)};
  std::lock_guard lock(mutex_);
  auto& slot = tables_[key];
  if (!slot) slot = std::make_unique<BasisTable>(volume_table(d, f, nqt, nqs));
  return *slot;
}

const BasisTable& TableCache::face(CellDegree d, const CellFrame& f, Side side, int nqt, int nqs) {
  std::vector<double> key{1.0 + static_cast<int>(side), static_cast<double>(d.p), static_cast<double>(d.q), f.tau, f.hx,
                          f.hy, static_cast<double>(nqt), static_cast<double>(nqs)};
  std::lock_guard lock(mutex_);
  auto& slot = tables_[key];
  if (!slot) slot = std::make_unique<BasisTable>(face_table(d, f, side, nqt, nqs));
  return *slot;
}

const BasisTable& TableCache::time_trace(CellDegree d, const CellFrame& f, bool at_end, int nqs) {
  std::vector<double> key{at_end ? 6.0 : 5.0, static_cast<double>(d.p), static_cast<double>(d.q), f.tau, f.hx, f.hy,
                          0.0, static_cast<double>(nqs)};
  std::lock_guard lock(mutex_);
  auto& slot = tables_[key];
  if (!slot) slot = std::make_unique<BasisTable>(time_trace_table(d, f, at_end, nqs));
  return *slot;
}

Discretization::Discretization(std::shared_ptr<const Space> space, const ModelParams& params, FormOptions options)
    : space_(space), params_(params), options_(options), linear_(std::move(space), params, kFormLinear, options) {}

const BasisTable& Discretization::nonlinear_table(int r) const {
  const CellDegree d = space_->degree(r);
  return tables_.volume(d, space_->frame(r), nonlinear_form_points(d.p), nonlinear_form_points(d.q));
}

void Discretization::eval_n_cell(int r, const Vector& u, double* out) const {
  const int ns = scalar_count(space_->degree(r));
  const BasisTable& tb = nonlinear_table(r);
  const ConstMap coef(u.data() + space_->dofs().offset(r), ns, kComponents);
  const Matrix val = tb.val * coef, dx = tb.dx * coef, dy = tb.dy * coef;
  Matrix pts(tb.num_points(), kComponents);
  for (int k = 0; k < tb.num_points(); ++k) {
    const PointState ps = point_state(val, dx, dy, k);
    pts.row(k) = tb.weights(k) * eval_N(ps, ps.value, params_).as_vector().transpose();
  }
  MutMap(out, ns, kComponents).noalias() = tb.val.transpose() * pts;
}

Vector Discretization::eval_n(const Vector& u) const {
  const DofMap& dofs = space_->dofs();
  Vector out = Vector::Zero(dofs.total());
  if (!nonlinear()) return out;
  parallel_for(space_->num_cells(), [&](int r) { eval_n_cell(r, u, out.data() + dofs.offset(r)); });
  return out;
}

Vector Discretization::slab_residual(int j, const Vector& u, const Vector& load) const {
  const Index base = space_->slab_begin(j), size = space_->slab_end(j) - base;
  Vector r(size);
  linear_.apply_slab_diagonal(j, u.data() + base, r.data());
  // subtract_slab_coupling removes L_j u_{j-1}; the residual needs it added.
  Vector coupling = Vector::Zero(size);
  linear_.subtract_slab_coupling(j, u, coupling.data());
  r -= coupling;
  if (nonlinear()) {
    const SpaceTimeMesh& mesh = space_->mesh();
    const int first = mesh.cell_index(j, 0);
    Vector n(size);
    parallel_for(mesh.num_space_cells(), [&](int k) {
      const int c = first + k;
      eval_n_cell(c, u, n.data() + (space_->dofs().offset(c) - base));
    });
    r += n;
  }
  r -= load.segment(base, size);
  return r;
}

Vector Discretization::apply_nprime(const Vector& tilde, const Vector& x) const {
  const DofMap& dofs = space_->dofs();
  Vector out = Vector::Zero(dofs.total());
  if (!nonlinear()) return out;
  parallel_for(space_->num_cells(), [&](int r) {
    const int ns = scalar_count(space_->degree(r));
    const BasisTable& tb = nonlinear_table(r);
    const ConstMap ct(tilde.data() + dofs.offset(r), ns, kComponents);
    const ConstMap cx(x.data() + dofs.offset(r), ns, kComponents);
    const Matrix tv = tb.val * ct, tx = tb.dx * ct, ty = tb.dy * ct;
    const Matrix xv = tb.val * cx, xx = tb.dx * cx, xy = tb.dy * cx;
    Matrix pts(tb.num_points(), kComponents);
    for (int k = 0; k < tb.num_points(); ++k) {
      const StateValue n = eval_N_prime(point_state(xv, xx, xy, k), point_state(tv, tx, ty, k), params_);
      pts.row(k) = tb.weights(k) * n.as_vector().transpose();
    }
    MutMap(out.data() + dofs.offset(r), ns, kComponents).noalias() = tb.val.transpose() * pts;
  });
  return out;
}

Matrix Discretization::nprime_block(int r, const Vector& tilde) const {
  const DofMap& dofs = space_->dofs();
  const int ns = scalar_count(space_->degree(r));
  Matrix block = Matrix::Zero(kComponents * ns, kComponents * ns);
  if (!nonlinear()) return block;
  const BasisTable& tb = nonlinear_table(r);
  const int np = tb.num_points();
  const ConstMap ct(tilde.data() + dofs.offset(r), ns, kComponents);
  const Matrix tv = tb.val * ct, tx = tb.dx * ct, ty = tb.dy * ct;

  // g[c][cc][kind]: kind 0 multiplies the trial value, 1 its x-derivative, 2 its y-derivative.
  std::array<std::array<std::array<Vector, 3>, kComponents>, kComponents> g;
  for (auto& row : g)
    for (auto& col : row)
      for (auto& v : col) v = Vector::Zero(np);
  const double ga = params_.gamma, de = params_.delta, et = params_.eta, th = params_.theta;
  for (int k = 0; k < np; ++k) {
    const double w = tb.weights(k);
    const double up = tv(k, 0);
    const Vec2 uv(tv(k, 1), tv(k, 2));
    const Vec2 gp(tx(k, 0), ty(k, 0));
    Mat2 gv;
    gv << tx(k, 1), ty(k, 1), tx(k, 2), ty(k, 2);
    g[0][0][0](k) = w * ga * gv.trace();
    g[0][0][1](k) = w * de * uv.x();
    g[0][0][2](k) = w * de * uv.y();
    g[0][1][1](k) = w * ga * up;
    g[0][1][0](k) = w * de * gp.x();
    g[0][2][2](k) = w * ga * up;
    g[0][2][0](k) = w * de * gp.y();
    for (int i = 0; i < 2; ++i) {
      g[1 + i][0][1 + i](k) = -w * th * up;
      g[1 + i][0][0](k) = -w * th * gp(i);
      for (int m = 0; m < 2; ++m) {
        g[1 + i][1 + m][1 + i](k) += w * et * uv(m);
        g[1 + i][1 + m][0](k) += w * et * gv(m, i);
      }
    }
  }
  const Matrix phit = tb.val.transpose();
  Matrix trial(np, kComponents * ns);
  for (int c = 0; c < kComponents; ++c) {
    for (int cc = 0; cc < kComponents; ++cc) {
      const auto& gc = g[static_cast<std::size_t>(c)][static_cast<std::size_t>(cc)];
      trial.middleCols(cc * ns, ns) = gc[0].asDiagonal() * tb.val + gc[1].asDiagonal() * tb.dx + gc[2].asDiagonal() * tb.dy;
    }
    block.middleRows(c * ns, ns).noalias() = phit * trial;
  }
  return block;
}

void Discretization::apply_jacobian(const Vector& tilde, const Vector& x, Vector& y) const {
  linear_.apply(x, y);
  if (nonlinear()) y += apply_nprime(tilde, x);
}

Vector Discretization::rhs(const DataFields& data) const {
  const DofMap& dofs = space_->dofs();
  const SpaceTimeMesh& mesh = space_->mesh();
  const SpatialMesh& smesh = mesh.space();
  Vector out = Vector::Zero(dofs.total());
  if (data.f_h.size() == dofs.total()) out = data.f_h;

  // (M u_{0,h}, z(0)) with u_{0,h} in the spatial tensor basis of each slab-0 cell.
  if (!data.u0_h.coefficients.empty()) {
    for (int k = 0; k < smesh.num_cells(); ++k) {
      const int r = mesh.cell_index(0, k);
      const CellDegree d = space_->degree(r);
      const int ns = scalar_count(d);
      const int q0 = data.u0_h.degree[static_cast<std::size_t>(k)];
      const int nloc = (q0 + 1) * (q0 + 1);
      const Vector& coef = data.u0_h.coefficients[static_cast<std::size_t>(k)];
      const double tau = space_->frame(r).tau;
      double* dst = out.data() + dofs.offset(r);
      for (int i = 0; i <= d.p; ++i) {
        const double ti = std::sqrt((2.0 * i + 1.0) / tau) * (i % 2 == 0 ? 1.0 : -1.0);
        for (int a = 0; a <= std::min(d.q, q0); ++a)
          for (int b = 0; b <= std::min(d.q, q0); ++b)
            for (int c = 0; c < kComponents; ++c)
              dst[c * ns + scalar_index(d, i, a, b)] +=
                  mass_coeff(params_, c) * ti * coef(c * nloc + a * (q0 + 1) + b);
      }
    }
  }

  const double theta = params_.theta_ip;
  for (const FaceData& fd : data.boundary) {
    const int r = fd.cell;
    const CellDegree d = space_->degree(r);
    const CellFrame f = space_->frame(r);
    const int ns = scalar_count(d);
    const int nqt = linear_form_points(std::max(d.p, fd.degree.p)) + 1;
    const int nqs = linear_form_points(std::max(d.q, fd.degree.q)) + 1;
    const BasisTable fk = face_table(d, f, fd.side, nqt, nqs);
    const auto& rt = gauss_legendre(nqt);
    const auto& rs = gauss_legendre(nqs);
    const Vec2 n = outward_normal(fd.side);
    const FluxMatrix aup = flux_upwind(n, params_);
    const double htan = axis_of(fd.side) == 0 ? f.hy : f.hx;
    const double sigma = penalty(params_, options_, smesh.face(fd.face).measure(), d.q, d.q);
    const Matrix gk = normal_derivative(fk, n);
    const bool dirichlet = fd.label == BoundaryLabel::Dirichlet;

    Matrix value_w(fk.num_points(), kComponents), grad_w(fk.num_points(), kComponents);
    for (int it = 0; it < nqt; ++it) {
      const double t = f.t0 + f.tau * rt.points[static_cast<std::size_t>(it)];
      for (int is = 0; is < nqs; ++is) {
        const int k = it * nqs + is;
        const StateValue data_val = eval_face_data(fd, f, t, htan * rs.points[static_cast<std::size_t>(is)]);
        Vec3 g = data_val.as_vector();
        double p_n = 0.0;
        Vec3 flux;
        if (dirichlet) {
          flux = -aup * g;
        } else {
          p_n = g(0);
          g(0) = 0.0;
          flux = -2.0 * aup * g;
        }
        for (int c = 0; c < kComponents; ++c) {
          const double dg = diffusion_coeff(params_, c) * g(c);
          value_w(k, c) = fk.weights(k) * (flux(c) + sigma * dg + (c == 0 ? p_n : 0.0));
          grad_w(k, c) = -fk.weights(k) * theta * dg;
        }
      }
    }
    MutMap(out.data() + dofs.offset(r), ns, kComponents) += fk.val.transpose() * value_w + gk.transpose() * grad_w;
  }
  return out;
}

Vector Discretization::residual(const Vector& u, const Vector& load) const {
  Vector r;
  linear_.apply(u, r);
  if (nonlinear()) r += eval_n(u);
  r -= load;
  return r;
}

}  // namespace stdg
