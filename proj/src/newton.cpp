#include "stdg/newton.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace stdg {

double contraction_order(const std::vector<NewtonStep>& history) {
  const std::size_t n = history.size();
  if (n < 3) return std::numeric_limits<double>::quiet_NaN();
  const double r0 = history[n - 3].residual, r1 = history[n - 2].residual, r2 = history[n - 1].residual;
  return std::log(r2 / r1) / std::log(r1 / r0);
}

namespace {

NewtonResult newton_marching(const Discretization& disc, const Vector& load, Vector initial, const NewtonOptions& opts,
                             const LinsolveOptions& lin, const std::function<void(const NewtonStep&)>& log) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  const Space& space = disc.space();
  const int slabs = space.mesh().num_slabs();
  const double slab_tol = opts.c_tol / std::sqrt(static_cast<double>(slabs));
  NewtonResult out;
  out.u = std::move(initial);
  {
    NewtonStep s;
    s.residual = disc.residual(out.u, load).norm();
    out.history.push_back(s);
    if (log) log(s);
  }
  NewtonStep total;
  total.iteration = 1;
  for (int j = 0; j < slabs; ++j) {
    const Index base = space.slab_begin(j), size = space.slab_end(j) - base;
    Vector r = disc.slab_residual(j, out.u, load);
    double norm = r.norm();
    int it = 0;
    while (norm > slab_tol) {
      if (++it > opts.max_iter) {
        std::ostringstream msg;
        msg << "Newton did not converge on slab " << j << " within " << opts.max_iter << " iterations (last residual "
            << norm << ")";
        throw SolverFailure(msg.str());
      }
      const SlabSolver solver(SlabMatrix(disc, j, &out.u), lin.slab);
      Vector step = Vector::Zero(size);
      try {
        solver.solve(r, step);
      } catch (const SolverFailure& e) {
        throw SolverFailure("slab " + std::to_string(j) + ", Newton iteration " + std::to_string(it) + ": " + e.what());
      }
      total.inner_iterations += solver.last_inner_iterations();
      const Vector old = out.u.segment(base, size);
      double lambda = 1.0;
      out.u.segment(base, size) = old - step;
      Vector r_new = disc.slab_residual(j, out.u, load);
      if (opts.damping) {
        for (int h = 0; h < 10 && r_new.norm() >= norm; ++h) {
          lambda *= 0.5;
          out.u.segment(base, size) = old - lambda * step;
          r_new = disc.slab_residual(j, out.u, load);
        }
      }
      r = std::move(r_new);
      norm = r.norm();
    }
    total.linear_iterations += it;
    out.max_slab_iterations = std::max(out.max_slab_iterations, it);
  }
  total.residual = disc.residual(out.u, load).norm();
  total.seconds = std::chrono::duration<double>(clock::now() - start).count();
  out.history.push_back(total);
  if (log) log(total);
  out.converged = true;
  return out;
}

}  // namespace

NewtonResult newton_solve(const Discretization& disc, const Vector& load, Vector initial, const NewtonOptions& opts,
                          const LinsolveOptions& lin, const std::function<void(const NewtonStep&)>& log) {
  if (!(opts.c_tol > 0.0)) throw InvalidArgument("newton.c_tol must be positive");
  if (opts.max_iter < 0) throw InvalidArgument("newton.max_iter must be non-negative");
  const Index n = disc.space().dofs().total();
  if (initial.size() == 0) initial = Vector::Zero(n);
  if (initial.size() != n) throw InvalidArgument("initial guess has the wrong length");
  if (opts.marching) return newton_marching(disc, load, std::move(initial), opts, lin, log);

  NewtonResult out;
  out.u = std::move(initial);
  Vector r = disc.residual(out.u, load);
  using clock = std::chrono::steady_clock;
  {
    NewtonStep s;
    s.residual = r.norm();
    out.history.push_back(s);
    if (log) log(s);
  }
  while (out.history.back().residual > opts.c_tol) {
    const int it = static_cast<int>(out.history.size());
    if (it > opts.max_iter) {
      std::ostringstream msg;
      msg << "Newton did not reach c_tol = " << opts.c_tol << " within " << opts.max_iter
          << " iterations (last residual " << out.history.back().residual << ")";
      throw SolverFailure(msg.str());
    }
    const auto start = clock::now();
    const BlockSystem system(disc, &out.u);
    LinsolveOptions step_opts = lin;
    // Keep the linear error well below the Newton tolerance.
    step_opts.gmres.tol = std::min(lin.gmres.tol, 0.1 * opts.c_tol / out.history.back().residual);
    LinearSolveResult step;
    try {
      step = solve_block_system(system, r, step_opts);
    } catch (const SolverFailure& e) {
      throw SolverFailure("Newton iteration " + std::to_string(it) + ": " + e.what());
    }
    NewtonStep s;
    s.iteration = it;
    s.linear_iterations = step.krylov.iterations;
    s.inner_iterations = step.inner_iterations;
    if (opts.verify_oracle) {
      const Vector ref = sequential_slab_solve(system, r, opts.oracle_slab);
      const double scale = ref.norm();
      s.oracle_difference = scale > 0.0 ? (step.x - ref).norm() / scale : (step.x - ref).norm();
    }
    double lambda = 1.0;
    Vector candidate = out.u - step.x;
    Vector r_new = disc.residual(candidate, load);
    if (opts.damping) {
      for (int h = 0; h < 10 && r_new.norm() >= out.history.back().residual; ++h) {
        lambda *= 0.5;
        candidate = out.u - lambda * step.x;
        r_new = disc.residual(candidate, load);
      }
    }
    out.u = std::move(candidate);
    r = std::move(r_new);
    s.residual = r.norm();
    s.seconds = std::chrono::duration<double>(clock::now() - start).count();
    out.history.push_back(s);
    if (log) log(s);
  }
  out.converged = true;
  return out;
}

}  // namespace stdg
