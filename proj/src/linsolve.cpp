#include "stdg/linsolve.hpp"

#include "stdg/parallel.hpp"

#include <Eigen/UmfPackSupport>

#include <atomic>
#include <cmath>
#include <sstream>

namespace stdg {

namespace {

// For diagnostics; std::to_string prints tiny residuals as 0.000000.
std::string short_real(double x) {
  std::ostringstream s;
  s.precision(3);
  s << x;
  return s.str();
}

}  // namespace

KrylovResult fgmres(const LinearMap& op, const Vector& b, Vector& x, const LinearMap& precond, const GmresOptions& opts) {
  if (!(opts.tol > 0.0) || opts.restart < 1 || opts.max_iter < 0) {
    throw InvalidArgument("GMRES needs tol > 0, restart >= 1 and max_iter >= 0");
  }
  KrylovResult res;
  const Index n = b.size();
  if (x.size() != n) x = Vector::Zero(n);
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    x.setZero();
    res.converged = true;
    return res;
  }

  Vector r(n), w(n);
  std::vector<Vector> v, z;
  while (true) {
    op(x, w);
    r = b - w;
    const double beta = r.norm();
    res.relative_residual = beta / bnorm;
    if (res.relative_residual <= opts.tol) {
      res.converged = true;
      break;
    }
    if (res.iterations >= opts.max_iter) break;

    const int m = opts.restart;
    Matrix h = Matrix::Zero(m + 1, m);
    Vector cs = Vector::Zero(m), sn = Vector::Zero(m), g = Vector::Zero(m + 1);
    g(0) = beta;
    if (v.empty()) v.emplace_back(n);
    v[0] = r / beta;
    int used = 0;
    for (int k = 0; k < m && res.iterations < opts.max_iter; ++k) {
      if (static_cast<int>(z.size()) <= k) z.emplace_back(n);
      if (precond) {
        precond(v[static_cast<std::size_t>(k)], z[static_cast<std::size_t>(k)]);
      } else {
        z[static_cast<std::size_t>(k)] = v[static_cast<std::size_t>(k)];
      }
      op(z[static_cast<std::size_t>(k)], w);
      // Modified Gram-Schmidt, two passes.
      for (int pass = 0; pass < 2; ++pass) {
        for (int i = 0; i <= k; ++i) {
          const double hij = w.dot(v[static_cast<std::size_t>(i)]);
          h(i, k) += hij;
          w -= hij * v[static_cast<std::size_t>(i)];
        }
      }
      h(k + 1, k) = w.norm();
      for (int i = 0; i < k; ++i) {
        const double t = cs(i) * h(i, k) + sn(i) * h(i + 1, k);
        h(i + 1, k) = -sn(i) * h(i, k) + cs(i) * h(i + 1, k);
        h(i, k) = t;
      }
      const double denom = std::hypot(h(k, k), h(k + 1, k));
      const double hk1 = h(k + 1, k);
      if (denom == 0.0) {
        cs(k) = 1.0;
        sn(k) = 0.0;
      } else {
        cs(k) = h(k, k) / denom;
        sn(k) = hk1 / denom;
      }
      h(k, k) = denom;
      h(k + 1, k) = 0.0;
      g(k + 1) = -sn(k) * g(k);
      g(k) = cs(k) * g(k);
      ++res.iterations;
      used = k + 1;
      const double rel = std::abs(g(k + 1)) / bnorm;
      res.history.push_back(rel);
      if (rel <= opts.tol || hk1 <= 1e-14 * denom) break;
      if (static_cast<int>(v.size()) <= k + 1) v.emplace_back(n);
      v[static_cast<std::size_t>(k) + 1] = w / hk1;
    }
    if (used == 0) break;
    const Vector y = h.topLeftCorner(used, used).triangularView<Eigen::Upper>().solve(g.head(used));
    for (int i = 0; i < used; ++i) x += y(i) * z[static_cast<std::size_t>(i)];
  }
  return res;
}

std::string to_string(SlabSolve s) {
  switch (s) {
    case SlabSolve::Direct: return "direct";
    case SlabSolve::Iterative: return "iterative";
    case SlabSolve::BlockJacobi: return "block_jacobi";
    case SlabSolve::Auto: return "auto";
  }
  return "auto";
}

SlabSolve slab_solve_from_string(const std::string& s) {
  if (s == "direct") return SlabSolve::Direct;
  if (s == "iterative") return SlabSolve::Iterative;
  if (s == "block_jacobi") return SlabSolve::BlockJacobi;
  if (s == "auto") return SlabSolve::Auto;
  throw InvalidArgument("linsolve.slab_solver must be one of direct, iterative, block_jacobi, auto");
}

SlabMatrix::SlabMatrix(const Discretization& disc, int slab, const Vector* tilde) : disc_(&disc), slab_(slab) {
  const Space& space = disc.space();
  const SpaceTimeMesh& mesh = space.mesh();
  if (slab < 0 || slab >= mesh.num_slabs()) throw InvalidArgument("slab index out of range");
  size_ = space.slab_end(slab) - space.slab_begin(slab);
  const int nk = mesh.num_space_cells();
  diag_.resize(static_cast<std::size_t>(nk));
  offsets_.resize(static_cast<std::size_t>(nk) + 1);
  for (int k = 0; k <= nk; ++k) {
    offsets_[static_cast<std::size_t>(k)] =
        k == nk ? size_ : space.dofs().offset(mesh.cell_index(slab, k)) - space.slab_begin(slab);
  }
  const bool with_n = tilde != nullptr && disc.nonlinear();
  parallel_for(nk, [&](int k) {
    const int r = mesh.cell_index(slab, k);
    Matrix& d = diag_[static_cast<std::size_t>(k)];
    d = disc.linear().blocks(r).diag;
    if (with_n) d += disc.nprime_block(r, *tilde);
  });
}

void SlabMatrix::apply(const double* x, double* y) const {
  const Space& space = disc_->space();
  const DofMap& dofs = space.dofs();
  const SpaceTimeMesh& mesh = space.mesh();
  const Index base = space.slab_begin(slab_);
  const LinearOperator& lin = disc_->linear();
  parallel_for(mesh.num_space_cells(), [&](int k) {
    const int r = mesh.cell_index(slab_, k);
    Eigen::Map<Vector> out(y + (dofs.offset(r) - base), dofs.count(r));
    out.noalias() = diag_[static_cast<std::size_t>(k)] * Eigen::Map<const Vector>(x + (dofs.offset(r) - base), dofs.count(r));
    const CellLinks& l = lin.links(r);
    for (int s = 0; s < 4; ++s) {
      const int nb = l.neighbor[static_cast<std::size_t>(s)];
      if (nb >= 0) {
        out.noalias() += lin.blocks(r).neighbor[static_cast<std::size_t>(s)] *
                         Eigen::Map<const Vector>(x + (dofs.offset(nb) - base), dofs.count(nb));
      }
    }
  });
}

Eigen::SparseMatrix<double> SlabMatrix::to_sparse() const {
  const Space& space = disc_->space();
  const DofMap& dofs = space.dofs();
  const SpaceTimeMesh& mesh = space.mesh();
  const Index base = space.slab_begin(slab_);
  const LinearOperator& lin = disc_->linear();
  std::vector<Eigen::Triplet<double>> trip;
  auto add = [&](const Matrix& m, Index row0, Index col0) {
    for (Index c = 0; c < m.cols(); ++c)
      for (Index rr = 0; rr < m.rows(); ++rr)
        if (m(rr, c) != 0.0) trip.emplace_back(row0 + rr, col0 + c, m(rr, c));
  };
  for (int k = 0; k < mesh.num_space_cells(); ++k) {
    const int r = mesh.cell_index(slab_, k);
    const Index row0 = dofs.offset(r) - base;
    add(diag_[static_cast<std::size_t>(k)], row0, row0);
    const CellLinks& l = lin.links(r);
    for (int s = 0; s < 4; ++s) {
      const int nb = l.neighbor[static_cast<std::size_t>(s)];
      if (nb >= 0) add(lin.blocks(r).neighbor[static_cast<std::size_t>(s)], row0, dofs.offset(nb) - base);
    }
  }
  Eigen::SparseMatrix<double> a(size_, size_);
  a.setFromTriplets(trip.begin(), trip.end());
  a.makeCompressed();
  return a;
}

struct SlabSolver::Direct {
  Eigen::SparseMatrix<double> a;
  Eigen::UmfPackLU<Eigen::SparseMatrix<double>> lu;
};

SlabSolver::SlabSolver(SlabMatrix matrix, const SlabSolverOptions& opts)
    : matrix_(std::move(matrix)), opts_(opts), mode_(opts.mode) {
  if (mode_ == SlabSolve::Auto) mode_ = matrix_.size() <= opts.direct_limit ? SlabSolve::Direct : SlabSolve::Iterative;
  if (mode_ == SlabSolve::Direct) {
    direct_ = std::make_unique<Direct>();
    direct_->a = matrix_.to_sparse();
    direct_->lu.compute(direct_->a);
    if (direct_->lu.info() != Eigen::Success) {
      throw SolverFailure("sparse LU failed on the diagonal block of slab " + std::to_string(matrix_.slab()));
    }
  } else {
    cell_lu_.resize(static_cast<std::size_t>(matrix_.num_cells()));
    std::atomic<bool> singular{false};
    parallel_for(matrix_.num_cells(), [&](int k) {
      auto& lu = cell_lu_[static_cast<std::size_t>(k)];
      lu.compute(matrix_.cell_diagonal(k));
      if (!(lu.rcond() > 1e-15)) singular = true;
    });
    if (singular) {
      throw SolverFailure("singular cell block in the diagonal block of slab " + std::to_string(matrix_.slab()));
    }
  }
}

SlabSolver::~SlabSolver() = default;

std::size_t SlabSolver::memory_bytes() const {
  std::size_t bytes = 0;
  for (int k = 0; k < matrix_.num_cells(); ++k) {
    bytes += static_cast<std::size_t>(matrix_.cell_diagonal(k).size()) * sizeof(double);
  }
  if (direct_) {
    bytes += static_cast<std::size_t>(direct_->a.nonZeros()) * (sizeof(double) + sizeof(int));
    // UMFPACK fill-in is not exposed cheaply; assume a generous factor.
    bytes += 20 * static_cast<std::size_t>(direct_->a.nonZeros()) * (sizeof(double) + sizeof(int));
  } else {
    bytes *= 2;
  }
  return bytes;
}

void SlabSolver::apply_cell_jacobi(const Vector& r, Vector& z) const {
  z.resize(r.size());
  parallel_for(matrix_.num_cells(), [&](int k) {
    const Index off = matrix_.cell_offset(k);
    const Index cnt = matrix_.cell_offset(k + 1) - off;
    z.segment(off, cnt) = cell_lu_[static_cast<std::size_t>(k)].solve(r.segment(off, cnt));
  });
}

void SlabSolver::solve(const Vector& b, Vector& x) const {
  last_inner_ = 0;
  switch (mode_) {
    case SlabSolve::Direct: {
      x = direct_->lu.solve(b);
      if (direct_->lu.info() != Eigen::Success) {
        throw SolverFailure("sparse LU solve failed in slab " + std::to_string(matrix_.slab()));
      }
      return;
    }
    case SlabSolve::Iterative: {
      GmresOptions g;
      g.tol = opts_.inner_tol;
      g.max_iter = opts_.inner_max_iter;
      g.restart = 50;
      x = Vector::Zero(b.size());
      const KrylovResult res = fgmres([this](const Vector& in, Vector& out) {
        out.resize(in.size());
        matrix_.apply(in.data(), out.data());
      }, b, x, [this](const Vector& in, Vector& out) { apply_cell_jacobi(in, out); }, g);
      last_inner_ = res.iterations;
      if (!res.converged) {
        throw SolverFailure("inner GMRES did not converge in slab " + std::to_string(matrix_.slab()) +
                            " (relative residual " + short_real(res.relative_residual) + ")");
      }
      return;
    }
    default: {
      x = Vector::Zero(b.size());
      Vector r(b.size()), z;
      for (int s = 0; s < opts_.jacobi_sweeps; ++s) {
        matrix_.apply(x.data(), r.data());
        r = b - r;
        apply_cell_jacobi(r, z);
        x += z;
      }
      last_inner_ = opts_.jacobi_sweeps;
      return;
    }
  }
}

BlockSystem::BlockSystem(const Discretization& disc, const Vector* tilde) : disc_(&disc), tilde_(tilde) {
  if (tilde != nullptr && tilde->size() != disc.space().dofs().total()) {
    throw InvalidArgument("linearization point has the wrong length");
  }
}

void BlockSystem::apply(const Vector& x, Vector& y) const {
  disc_->linear().apply(x, y);
  if (tilde_ != nullptr && disc_->nonlinear()) y += disc_->apply_nprime(*tilde_, x);
}

BlockGaussSeidel::BlockGaussSeidel(const BlockSystem& system, const SlabSolverOptions& opts, std::size_t cache_bytes)
    : system_(&system), opts_(opts), cache_bytes_(cache_bytes) {
  cache_.resize(static_cast<std::size_t>(system.num_slabs()));
}

BlockGaussSeidel::~BlockGaussSeidel() = default;

void BlockGaussSeidel::apply(const Vector& b, Vector& x) const {
  const Space& space = system_->discretization().space();
  x = Vector::Zero(b.size());
  std::size_t cached = 0;
  for (const auto& c : cache_)
    if (c) cached += c->memory_bytes();
  Vector bj, xj;
  for (int j = 0; j < system_->num_slabs(); ++j) {
    const Index begin = space.slab_begin(j);
    const Index count = space.slab_end(j) - begin;
    bj = b.segment(begin, count);
    system_->discretization().linear().subtract_slab_coupling(j, x, bj.data());
    auto& slot = cache_[static_cast<std::size_t>(j)];
    std::unique_ptr<SlabSolver> local;
    const SlabSolver* solver = slot.get();
    if (solver == nullptr) {
      local = std::make_unique<SlabSolver>(system_->slab(j), opts_);
      solver = local.get();
      if (!cache_full_) {
        const std::size_t bytes = local->memory_bytes();
        if (cached + bytes <= cache_bytes_) {
          cached += bytes;
          slot = std::move(local);
          solver = slot.get();
        } else {
          cache_full_ = true;
        }
      }
    }
    solver->solve(bj, xj);
    inner_iterations_ += solver->last_inner_iterations();
    x.segment(begin, count) = xj;
  }
  ++applications_;
}

Vector sequential_slab_solve(const BlockSystem& system, const Vector& b, const SlabSolverOptions& opts) {
  BlockGaussSeidel sweep(system, opts, 0);
  Vector x;
  sweep.apply(b, x);
  return x;
}

LinearSolveResult solve_block_system(const BlockSystem& system, const Vector& b, const LinsolveOptions& opts) {
  LinearSolveResult out;
  out.x = Vector::Zero(b.size());
  BlockGaussSeidel bgs(system, opts.slab, opts.cache_bytes);
  LinearMap precond;
  if (opts.precondition) precond = [&bgs](const Vector& in, Vector& res) { bgs.apply(in, res); };
  out.krylov = fgmres([&system](const Vector& in, Vector& res) { system.apply(in, res); }, b, out.x, precond, opts.gmres);
  out.inner_iterations = bgs.inner_iterations();
  if (!out.krylov.converged) {
    throw SolverFailure("GMRES did not reach the relative tolerance " + short_real(opts.gmres.tol) + " after " +
                        std::to_string(out.krylov.iterations) + " iterations (relative residual " +
                        short_real(out.krylov.relative_residual) + ")");
  }
  return out;
}

}  // namespace stdg
