// Acceptance checks. Each invocation evaluates one criterion and prints a single line
// "criterion N: PASS|FAIL <details>"; the exit status is 0 on PASS and 1 on FAIL.
// Criteria 1-3 run in-process; the others read artifacts written by the CLI fixtures.

#include "oracle.hpp"

#include "stdg/experiments.hpp"
#include "stdg/quadrature.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;
using namespace stdg;

namespace {

// Pinned tolerances.
constexpr double kIdentityTol = 1e-11;
constexpr double kIdentitySeconds = 10.0;
constexpr double kCoercivitySeconds = 30.0;
constexpr double kProjectionTol = 1e-12;
constexpr double kProjectionEocBand = 0.2;
constexpr int kNewtonMaxIterations = 6;
constexpr double kContractionFloor = 1.5;
constexpr double kOracleTol = 1e-9;
constexpr int kGmresMax = 2;
constexpr double kHarmonicRatio = 3.0;
constexpr int kRandomFields = 100;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& why) {
    if (!ok) {
      pass = false;
      detail << " [" << why << "]";
    }
  }
};

std::string fmt(double x, int digits = 3) {
  std::ostringstream s;
  s.precision(digits);
  s << x;
  return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

double quadratic(const LinearOperator& op, const DiscreteField& u, const DiscreteField& z) {
  Vector y(u.coefficients().size());
  op.apply(u.coefficients(), y);
  return z.coefficients().dot(y);
}

// ---------------------------------------------------------------------------------------
// CSV access

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  [[nodiscard]] int column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw std::runtime_error("missing column " + name);
    return static_cast<int>(it - header.begin());
  }
  [[nodiscard]] double num(std::size_t r, const std::string& name) const { return std::stod(rows[r][column(name)]); }
  [[nodiscard]] std::string str(std::size_t r, const std::string& name) const { return rows[r][column(name)]; }
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream s(line);
  std::string cell;
  while (std::getline(s, cell, ',')) out.push_back(cell);
  return out;
}

Table read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  Table t;
  std::string line;
  std::getline(in, line);
  t.header = split(line);
  while (std::getline(in, line)) {
    if (!line.empty()) t.rows.push_back(split(line));
  }
  return t;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return nlohmann::json::parse(in);
}

// ---------------------------------------------------------------------------------------
// 1. Appendix identities

struct MixedCase {
  std::shared_ptr<const Space> space;
  std::vector<DiscreteField> fields;
};

// 4 x 4 cells, 4 slabs, Dirichlet left/bottom and Neumann right/top; a fresh random degree
// map every ten fields.
std::vector<MixedCase> mixed_cases(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto mesh = testing::small_mesh(4, 4, true);
  std::vector<MixedCase> cases;
  for (int c = 0; c < kRandomFields / 10; ++c) {
    MixedCase mc;
    mc.space = make_space(mesh, testing::random_degrees(mesh->num_cells(), rng, {0, 1}, {2, 3}));
    for (int i = 0; i < 10; ++i) mc.fields.push_back(testing::random_field(mc.space, rng));
    cases.push_back(std::move(mc));
  }
  return cases;
}

Outcome criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  const ModelParams prm;
  const testing::FormOracle oracle(prm);
  double identity = 0.0, identity_corrected = 0.0, lemma = 0.0, lemma_corrected = 0.0;
  for (const MixedCase& mc : mixed_cases(1)) {
    const LinearOperator a(mc.space, prm, kFormA);
    for (std::size_t i = 0; i < mc.fields.size(); ++i) {
      const DiscreteField& u = mc.fields[i];
      const DiscreteField& z = mc.fields[(i + 1) % mc.fields.size()];
      const double auu = quadratic(a, u, u);
      identity = std::max(identity, rel(auu, oracle.jump_dissipation(u, 0.5)));
      identity_corrected = std::max(identity_corrected, rel(auu, oracle.jump_dissipation(u, 1.0)));
      // Face parts of a_h: the assembled form minus the volume term.
      const double lhs = quadratic(a, u, z) - oracle.a_volume(u, z);
      const double rhs = quadratic(a, z, u) - oracle.a_volume(z, u);
      lemma = std::max(lemma, rel(lhs, rhs));
      lemma_corrected = std::max(lemma_corrected, std::abs(lhs - rhs - oracle.flux_asymmetry(u, z)) /
                                                      std::max(std::abs(lhs), std::abs(rhs)));
    }
  }
  const double secs = seconds_since(t0);
  Outcome out;
  out.detail << "a_h identity as printed: max rel dev " << fmt(identity) << "; flux-symmetry lemma as printed: max rel dev "
             << fmt(lemma) << "; diagnostics: identity with Dirichlet faces counted in full " << fmt(identity_corrected)
             << ", lemma with its interior and Neumann remainder " << fmt(lemma_corrected) << "; " << kRandomFields
             << " fields, " << fmt(secs) << " s";
  out.require(identity <= kIdentityTol, "a_h identity exceeds " + fmt(kIdentityTol));
  out.require(lemma <= kIdentityTol, "flux-symmetry lemma exceeds " + fmt(kIdentityTol));
  out.require(secs < kIdentitySeconds, "runtime");
  return out;
}

// ---------------------------------------------------------------------------------------
// 2. Coercivity

Outcome criterion2() {
  const auto t0 = std::chrono::steady_clock::now();
  const ModelParams prm;
  const double z0 = prm.impedance();
  const double c_a = 0.25 * std::min(z0, 1.0 / z0);
  const double c_a_printed = 4.0 * std::min(z0, 1.0 / z0);
  const testing::FormOracle oracle(prm);
  double m_identity = 0.0, bound_margin = 1e300, c_a_empirical = 1e300, c_b = 1e300;
  std::map<int, double> c_theta{{1, 1e300}, {-1, 1e300}, {0, 1e300}};
  for (const MixedCase& mc : mixed_cases(2)) {
    const LinearOperator m(mc.space, prm, kFormM), a(mc.space, prm, kFormA);
    std::map<int, std::unique_ptr<LinearOperator>> d;
    for (auto& [th, c] : c_theta) {
      ModelParams p = prm;
      p.theta_ip = th;
      d[th] = std::make_unique<LinearOperator>(mc.space, p, kFormD);
    }
    const Discretization disc(mc.space, prm);
    const Vector zero = Vector::Zero(mc.space->dofs().total());
    for (const DiscreteField& u : mc.fields) {
      const double muu = quadratic(m, u, u), auu = quadratic(a, u, u);
      const double jumps = oracle.time_jumps(u), flux = oracle.face_flux(u);
      m_identity = std::max(m_identity, rel(muu, jumps));
      bound_margin = std::min(bound_margin, (muu + auu - jumps - c_a * flux) / (muu + auu));
      c_a_empirical = std::min(c_a_empirical, (muu + auu - jumps) / flux);
      const double ip = oracle.ip_squared(u);
      for (auto& [th, c] : c_theta) c = std::min(c, quadratic(*d[th], u, u) / ip);
      Vector y(zero.size());
      disc.apply_jacobian(zero, u.coefficients(), y);
      c_b = std::min(c_b, u.coefficients().dot(y) / std::pow(dg_norm(u, prm, {}, {c_a, 1.0}), 2));
    }
  }
  const double secs = seconds_since(t0);
  Outcome out;
  out.detail << "m_h(u,u) = 1/2 sum ||M^1/2 [u]_j||^2 to " << fmt(m_identity) << "; m_h + a_h bound with c_A = 1/4 min(Z0, 1/Z0) = "
             << fmt(c_a) << " holds with min relative margin " << fmt(bound_margin) << " (empirical c_A " << fmt(c_a_empirical)
             << ", printed 4 min(Z0, 1/Z0) = " << fmt(c_a_printed) << (c_a_empirical >= c_a_printed ? " holds" : " violated")
             << "); d_h coercivity min ratio Theta=1: " << fmt(c_theta[1]) << ", Theta=-1: " << fmt(c_theta[-1])
             << ", Theta=0: " << fmt(c_theta[0]) << "; b'_h(z,z;0) >= c ||z||^2 with c = " << fmt(c_b) << "; " << fmt(secs)
             << " s";
  out.require(m_identity <= kIdentityTol, "m_h identity");
  out.require(bound_margin >= -kIdentityTol, "m_h + a_h lower bound");
  for (const auto& [th, c] : c_theta) out.require(c > 0.0, "d_h not coercive for Theta=" + std::to_string(th));
  out.require(c_b > 0.0, "b'_h not coercive");
  out.require(secs < kCoercivitySeconds, "runtime");
  return out;
}

// ---------------------------------------------------------------------------------------
// 3. Projection

StateValue smooth(double t, double x, double y) {
  ManufacturedConfig mc;
  mc.psi_a = 1.0;
  return manufactured_solution(t, x, y, mc).u.value;
}

Outcome criterion3() {
  Outcome out;
  std::mt19937_64 rng(3);
  const int extra = 10;
  auto mesh = build_uniform({0, 1, 0, 1}, 1.0, 2, 4.0);
  auto space = make_space(mesh, testing::random_degrees(mesh->num_cells(), rng, {1, 1}, {3, 3}));
  const DiscreteField pu = project_spacetime(smooth, space, extra);
  const SpatialMesh& sm = mesh->space();

  // (ii) right-endpoint values equal the spatial L2 projection.
  double endpoint = 0.0;
  for (int j = 0; j < mesh->num_slabs(); ++j) {
    const double t = mesh->time().t(j + 1);
    std::vector<int> q(static_cast<std::size_t>(sm.num_cells()));
    for (int k = 0; k < sm.num_cells(); ++k) q[static_cast<std::size_t>(k)] = space->degree(mesh->cell_index(j, k)).q;
    const SpatialField pi = project_spatial([t](double x, double y) { return smooth(t, x, y); }, sm, q, extra);
    for (int k = 0; k < sm.num_cells(); ++k) {
      const Cell& c = sm.cell(k);
      const QuadratureRule& g = gauss_legendre(4);
      for (double a : g.points)
        for (double b : g.points) {
          const Vec2 x(c.lower.x() + a * c.hx(), c.lower.y() + b * c.hy());
          const Vec3 d = eval(pu, mesh->cell_index(j, k), t, x).as_vector() - eval_spatial(pi, sm, k, x).as_vector();
          endpoint = std::max(endpoint, d.cwiseAbs().maxCoeff());
        }
    }
  }

  // (iii) the error is L2(R)-orthogonal to time degrees below p_R, relative to ||u||_L2(R).
  double orthogonality = 0.0;
  const QuadratureRule& g = gauss_legendre(14);
  for (int r = 0; r < space->num_cells(); ++r) {
    const CellDegree d = space->degree(r);
    const CellFrame f = space->frame(r);
    Matrix moments = Matrix::Zero(3, d.p * (d.q + 1) * (d.q + 1));
    double norm2 = 0.0;
    std::vector<double> lt(static_cast<std::size_t>(d.p + 1)), lx(static_cast<std::size_t>(d.q + 1)),
        ly(static_cast<std::size_t>(d.q + 1));
    for (int it = 0; it < g.size(); ++it) {
      legendre_orthonormal(d.p, g.points[it], lt.data());
      for (int ix = 0; ix < g.size(); ++ix) {
        legendre_orthonormal(d.q, g.points[ix], lx.data());
        for (int iy = 0; iy < g.size(); ++iy) {
          legendre_orthonormal(d.q, g.points[iy], ly.data());
          const double w = g.weights[it] * g.weights[ix] * g.weights[iy] * f.tau * f.hx * f.hy;
          const double t = f.t0 + f.tau * g.points[it];
          const Vec2 x(f.x0 + f.hx * g.points[ix], f.y0 + f.hy * g.points[iy]);
          const Vec3 u = smooth(t, x.x(), x.y()).as_vector();
          const Vec3 e = eval(pu, r, t, x).as_vector() - u;
          norm2 += w * u.squaredNorm();
          int col = 0;
          for (int i = 0; i < d.p; ++i)
            for (int a = 0; a <= d.q; ++a)
              for (int b = 0; b <= d.q; ++b) moments.col(col++) += w * lt[i] * lx[a] * ly[b] * e;
        }
      }
    }
    // Test functions normalized in L2(R).
    orthogonality = std::max(orthogonality, moments.cwiseAbs().maxCoeff() / std::sqrt(f.tau * f.hx * f.hy * norm2));
  }

  // Reproduction of polynomials inside the local degrees.
  const auto poly = [](double t, double x, double y) {
    return StateValue{t * t * x - y + 0.5, Vec2(x * y * t, y * y - t * x * x)};
  };
  auto rich = make_space(mesh, testing::random_degrees(mesh->num_cells(), rng, {2, 2}, {3, 3}));
  const DiscreteField pp = project_spacetime(poly, rich);
  double reproduction = 0.0;
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double t = U(rng), x = U(rng), y = U(rng);
    const int r = mesh->cell_index(mesh->time().slab_of(t), sm.locate({x, y}));
    reproduction = std::max(reproduction, (eval(pp, r, t, {x, y}).as_vector() - poly(t, x, y).as_vector()).cwiseAbs().maxCoeff());
  }

  out.detail << "(ii) endpoint max dev " << fmt(endpoint) << "; (iii) orthogonality max rel moment " << fmt(orthogonality)
             << "; reproduction max dev " << fmt(reproduction) << "; L2(Q) EOC n_r=2..5:";
  out.require(endpoint <= kProjectionTol, "(ii)");
  out.require(orthogonality <= kProjectionTol, "(iii)");
  out.require(reproduction <= kProjectionTol, "reproduction");

  const ExactSolution exact = [](double t, double x, double y) {
    ManufacturedConfig mc;
    mc.psi_a = 1.0;
    return manufactured_solution(t, x, y, mc);
  };
  for (const CellDegree d : {CellDegree{1, 1}, CellDegree{2, 1}, CellDegree{1, 2}, CellDegree{2, 2}}) {
    std::vector<double> errors, h;
    for (int n_r = 2; n_r <= 5; ++n_r) {
      auto sp = make_space(build_uniform({0, 1, 0, 1}, 1.0, n_r, 4.0), d);
      errors.push_back(l2q_error(project_spacetime(smooth, sp), exact));
      h.push_back(std::ldexp(1.0, -n_r));
    }
    const EocResult e = eoc(errors, h);
    const double expected = std::min(d.p, d.q) + 1.0;
    out.detail << " (" << d.p << "," << d.q << ") orders";
    for (double o : e.orders) out.detail << " " << fmt(o);
    out.detail << " expect " << expected << ";";
    out.require(std::abs(e.extrapolated - expected) <= kProjectionEocBand,
                "projection EOC (" + std::to_string(d.p) + "," + std::to_string(d.q) + ")");
  }
  return out;
}

// ---------------------------------------------------------------------------------------
// 4-6, 10. Manufactured convergence study

struct RunKey {
  int p, q, n_r;
  auto operator<=>(const RunKey&) const = default;
};

std::map<RunKey, std::vector<std::size_t>> newton_runs(const Table& t) {
  std::map<RunKey, std::vector<std::size_t>> runs;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (t.str(r, "run").rfind("uniform_", 0) != 0) continue;
    runs[{static_cast<int>(t.num(r, "p")), static_cast<int>(t.num(r, "q")), static_cast<int>(t.num(r, "n_r"))}].push_back(r);
  }
  return runs;
}

Outcome criterion4(const fs::path& data) {
  Outcome out;
  const Table t = read_csv(data / "eoc.csv");
  const std::map<std::pair<int, int>, double> floor{{{1, 1}, 1.0}, {{2, 1}, 1.4}, {{2, 2}, 1.8}};
  std::map<std::pair<int, int>, std::vector<std::size_t>> by_pair;
  for (std::size_t r = 0; r < t.rows.size(); ++r) by_pair[{static_cast<int>(t.num(r, "p")), static_cast<int>(t.num(r, "q"))}].push_back(r);
  for (const auto& [pq, fl] : floor) {
    const auto it = by_pair.find(pq);
    const std::string name = "(" + std::to_string(pq.first) + "," + std::to_string(pq.second) + ")";
    if (it == by_pair.end() || it->second.size() != 4) {
      out.require(false, name + " levels 2..5 missing");
      continue;
    }
    const auto& rows = it->second;
    out.detail << " " << name << " DG orders";
    for (std::size_t i = 1; i < rows.size(); ++i) out.detail << " " << fmt(t.num(rows[i], "dg_order"));
    const double finest = t.num(rows.back(), "dg_order");
    out.detail << " (floor " << fl << ");";
    out.require(finest >= fl, name + " EOC " + fmt(finest) + " below " + fmt(fl));
    for (std::size_t r : rows) {
      out.require(t.num(r, "l2_error") < t.num(r, "dg_error"), name + " L2 >= DG at n_r=" + t.str(r, "n_r"));
    }
  }
  out.detail << " L2(Q) error below DG error on every row checked";
  return out;
}

RunConfig convergence_config(const fs::path& path) { return load_config(path.string()); }

Outcome criterion5(const fs::path& data, const fs::path& config) {
  Outcome out;
  const Table t = read_csv(data / "newton.csv");
  const RunConfig cfg = convergence_config(config);
  int worst_iterations = 0;
  double worst_order = 1e300;
  for (const auto& [key, rows] : newton_runs(t)) {
    const int iterations = static_cast<int>(t.num(rows.back(), "iteration"));
    worst_iterations = std::max(worst_iterations, iterations);
    std::vector<NewtonStep> h;
    for (std::size_t r : rows) h.push_back({.iteration = static_cast<int>(t.num(r, "iteration")), .residual = t.num(r, "residual")});
    const double order = contraction_order(h);
    worst_order = std::min(worst_order, order);
    const std::string name = "(" + std::to_string(key.p) + "," + std::to_string(key.q) + ") n_r=" + std::to_string(key.n_r);
    out.require(iterations <= kNewtonMaxIterations, name + " took " + std::to_string(iterations) + " iterations");
    out.require(order >= kContractionFloor, name + " contraction " + fmt(order));
    out.require(h.back().residual <= cfg.newton.c_tol, name + " final residual above c_tol");
    // Monotone decrease over the last three iterates.
    for (std::size_t i = std::max<std::size_t>(h.size(), 3) - 3 + 1; i < h.size(); ++i)
      out.require(h[i].residual < h[i - 1].residual, name + " residual not decreasing");
  }
  out.detail << "max Newton iterations " << worst_iterations << ", min final contraction exponent " << fmt(worst_order);

  // Linear mode, in process: exactly one iteration.
  int linear_max = 0, linear_min = 1 << 20;
  for (const CellDegree d : cfg.experiment.pairs) {
    for (int n_r : {2, 3}) {
      RunConfig lc = cfg;
      lc.experiment.linear = lc.forms.linear_mode = true;
      lc.newton.verify_oracle = false;
      const Problem pb = make_problem(lc, true);
      const SolveRecord rec = solve_uniform(pb, lc, n_r, d, true, "linear");
      linear_max = std::max(linear_max, rec.newton.iterations());
      linear_min = std::min(linear_min, rec.newton.iterations());
    }
  }
  out.detail << "; linear mode iterations in [" << linear_min << ", " << linear_max << "] over n_r 2..3";
  out.require(linear_min == 1 && linear_max == 1, "linear mode not exactly one iteration");
  return out;
}

Outcome criterion6(const fs::path& data, const fs::path& config) {
  Outcome out;
  const Table t = read_csv(data / "newton.csv");
  double worst_diff = 0.0;
  int worst_gmres = 0;
  std::size_t checked = 0;
  for (const auto& [key, rows] : newton_runs(t)) {
    for (std::size_t r : rows) {
      if (t.num(r, "iteration") == 0) continue;
      const double diff = t.num(r, "oracle_difference");
      const int gm = static_cast<int>(t.num(r, "linear_iterations"));
      ++checked;
      worst_diff = std::max(worst_diff, std::isnan(diff) ? 1e300 : diff);
      worst_gmres = std::max(worst_gmres, gm);
    }
  }
  out.detail << "study (iterative slab solves to 1e-13): " << checked << " steps, max oracle difference " << fmt(worst_diff)
             << ", max GMRES iterations " << worst_gmres;
  out.require(checked > 0, "no Newton steps with oracle data");
  out.require(worst_diff <= kOracleTol, "oracle difference");
  out.require(worst_gmres <= kGmresMax, "GMRES iterations");

  // Exact (sparse direct) diagonal-block solves, in process.
  RunConfig cfg = convergence_config(config);
  cfg.linsolve.slab.mode = SlabSolve::Direct;
  cfg.newton.verify_oracle = true;
  cfg.newton.oracle_slab.mode = SlabSolve::Direct;
  double direct_diff = 0.0;
  int direct_gmres = 0;
  for (const CellDegree d : cfg.experiment.pairs) {
    for (int n_r : {2, 3}) {
      const SolveRecord rec = solve_uniform(make_problem(cfg, false), cfg, n_r, d, false, "direct");
      for (std::size_t i = 1; i < rec.newton.history.size(); ++i) {
        direct_diff = std::max(direct_diff, rec.newton.history[i].oracle_difference);
        direct_gmres = std::max(direct_gmres, rec.newton.history[i].linear_iterations);
      }
    }
  }
  out.detail << "; direct slab solves n_r 2..3: max oracle difference " << fmt(direct_diff) << ", max GMRES iterations "
             << direct_gmres;
  out.require(direct_diff <= kOracleTol, "direct oracle difference");
  out.require(direct_gmres <= kGmresMax, "direct GMRES iterations");
  return out;
}

Outcome criterion10(const fs::path& a, const fs::path& b) {
  Outcome out;
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(a))
    if (e.path().extension() == ".csv") names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  out.require(!names.empty(), "no CSV artifacts");
  for (const std::string& n : names) {
    const bool same = fs::exists(b / n) && read_file(a / n) == read_file(b / n);
    out.require(same, n + " differs");
  }
  std::size_t other = 0;
  for (const auto& e : fs::directory_iterator(b)) other += e.path().extension() == ".csv";
  out.require(other == names.size(), "different CSV sets");
  out.detail << names.size() << " CSV files compared byte for byte:";
  for (const std::string& n : names) out.detail << " " << n;
  return out;
}

// ---------------------------------------------------------------------------------------
// 7-9. Bump problem

bool local_max(const std::vector<double>& m, std::size_t i) { return i > 0 && i + 1 < m.size() && m[i] > m[i - 1] && m[i] > m[i + 1]; }

Outcome criterion7(const fs::path& data) {
  Outcome out;
  const Table t = read_csv(data / "spectrum.csv");
  std::vector<double> nl, lin;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    nl.push_back(t.num(r, "magnitude_nonlinear"));
    lin.push_back(t.num(r, "magnitude_linear"));
  }
  out.detail << "nonlinear |F| at bins 2..10:";
  for (std::size_t i = 2; i <= 10 && i < nl.size(); ++i) out.detail << " " << fmt(nl[i], 4);
  for (std::size_t bin : {3u, 6u, 9u}) out.require(local_max(nl, bin), "no local maximum at bin " + std::to_string(bin));
  const double ratio = nl.size() > 6 ? nl[6] / lin[6] : 0.0;
  out.detail << "; bin 6 nonlinear/linear ratio " << fmt(ratio, 4) << " (floor " << kHarmonicRatio << ")";
  out.require(ratio >= kHarmonicRatio, "bin 6 ratio");
  return out;
}

std::string failures_of(const fs::path& data, const std::string& prefix) {
  std::string s;
  if (!fs::exists(data / "run.json")) return "run.json missing";
  const nlohmann::json meta = read_json(data / "run.json");
  for (const auto& f : meta["failures"]) {
    const std::string run = f["run"].get<std::string>();
    if (run.rfind(prefix, 0) == 0) s += " {" + run + ": " + f["message"].get<std::string>() + "}";
  }
  return s;
}

Outcome criterion8(const fs::path& data, const fs::path& config) {
  Outcome out;
  const RunConfig cfg = load_config(config.string());
  const Table t = fs::exists(data / "adapt_summary.csv") ? read_csv(data / "adapt_summary.csv") : Table{};
  std::map<RunKey, std::vector<std::pair<double, double>>> rounds;  // (eta, dofs) per round
  if (!t.header.empty()) {
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      rounds[{static_cast<int>(t.num(r, "start_p")), static_cast<int>(t.num(r, "start_q")), static_cast<int>(t.num(r, "n_r"))}]
          .emplace_back(t.num(r, "eta_global"), t.num(r, "dofs"));
    }
  }
  for (const CellDegree d : {CellDegree{0, 1}, CellDegree{1, 1}}) {
    for (const int n_r : cfg.experiment.levels) {
      if (n_r > 4) continue;
      const std::string name = "(" + std::to_string(d.p) + "," + std::to_string(d.q) + ") n_r=" + std::to_string(n_r);
      const auto it = rounds.find({d.p, d.q, n_r});
      if (it == rounds.end() || static_cast<int>(it->second.size()) != cfg.adapt.rounds + 1) {
        out.require(false, name + " incomplete");
        continue;
      }
      out.detail << " " << name << " eta";
      for (const auto& [eta, dofs] : it->second) out.detail << " " << fmt(eta, 4) << "@" << static_cast<long long>(dofs);
      out.detail << ";";
      for (std::size_t i = 1; i < it->second.size(); ++i) {
        out.require(it->second[i].first < it->second[i - 1].first, name + " eta increases in round " + std::to_string(i));
      }
    }
  }
  for (int i = 0; i <= cfg.adapt.rounds; ++i) {
    const fs::path f = data / ("adapt_round_" + std::to_string(i) + ".csv");
    out.require(fs::exists(f) && read_csv(f).column("dofs") >= 0, f.filename().string() + " missing");
  }
  const std::string failed = failures_of(data, "adaptive");
  if (!failed.empty()) out.detail << " solver failures:" << failed;
  return out;
}

Outcome criterion9(const fs::path& data, const fs::path& config) {
  Outcome out;
  const RunConfig cfg = load_config(config.string());
  const fs::path file = data / "functional_errors.csv";
  if (!fs::exists(file)) {
    out.detail << "functional errors unavailable; solver failures:" << failures_of(data, "reference");
    out.require(false, "no n_r=" + std::to_string(cfg.experiment.reference_level) + " reference");
    return out;
  }
  const Table t = read_csv(file);
  std::map<std::tuple<std::string, int, int>, std::vector<std::size_t>> series;
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    series[{t.str(r, "mode"), static_cast<int>(t.num(r, "start_p")), static_cast<int>(t.num(r, "start_q"))}].push_back(r);
  for (const auto& [key, rows] : series) {
    const std::string name = std::get<0>(key) + " (" + std::to_string(std::get<1>(key)) + "," + std::to_string(std::get<2>(key)) + ")";
    out.detail << " " << name << " P/E:";
    for (std::size_t r : rows) out.detail << " " << fmt(t.num(r, "p_l1")) << "/" << fmt(t.num(r, "e_l2"));
    out.detail << ";";
    out.require(rows.size() == 3, name + " needs n_r 2, 3, 4");
    for (std::size_t i = 1; i < rows.size(); ++i) {
      out.require(t.num(rows[i], "p_l1") < t.num(rows[i - 1], "p_l1"), name + " P error not decreasing");
      out.require(t.num(rows[i], "e_l2") < t.num(rows[i - 1], "e_l2"), name + " E error not decreasing");
    }
  }
  // Matched DoF: the uniform E-error curve interpolated in log-log at the adaptive DoF count.
  for (const CellDegree d : cfg.experiment.pairs) {
    const auto u = series.find({"uniform", d.p, d.q}), a = series.find({"adaptive", d.p, d.q});
    if (u == series.end() || a == series.end() || u->second.size() < 2 || a->second.empty()) {
      out.require(false, "matched-DoF comparison unavailable");
      continue;
    }
    const std::size_t ar = a->second.back();
    const double ad = t.num(ar, "dofs"), ae = t.num(ar, "e_l2");
    const auto& ur = u->second;
    std::size_t i = 1;
    while (i + 1 < ur.size() && t.num(ur[i], "dofs") < ad) ++i;
    const double x0 = std::log(t.num(ur[i - 1], "dofs")), x1 = std::log(t.num(ur[i], "dofs"));
    const double y0 = std::log(t.num(ur[i - 1], "e_l2")), y1 = std::log(t.num(ur[i], "e_l2"));
    const double ue = std::exp(y0 + (y1 - y0) * (std::log(ad) - x0) / (x1 - x0));
    out.detail << " matched DoF " << static_cast<long long>(ad) << ": adaptive E " << fmt(ae) << " vs uniform " << fmt(ue) << ";";
    out.require(ae <= ue, "adaptive E error above uniform at matched DoF");
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  int criterion = 0;
  std::string data, data2, config;
  app.add_option("--criterion", criterion, "Criterion number 1-10")->required()->check(CLI::Range(1, 10));
  app.add_option("--data", data, "Artifact directory of the fixture run");
  app.add_option("--data2", data2, "Second artifact directory (criterion 10)");
  app.add_option("--config", config, "Config used by the fixture run");
  CLI11_PARSE(app, argc, argv);

  Outcome out;
  try {
    switch (criterion) {
      case 1: out = criterion1(); break;
      case 2: out = criterion2(); break;
      case 3: out = criterion3(); break;
      case 4: out = criterion4(data); break;
      case 5: out = criterion5(data, config); break;
      case 6: out = criterion6(data, config); break;
      case 7: out = criterion7(data); break;
      case 8: out = criterion8(data, config); break;
      case 9: out = criterion9(data, config); break;
      default: out = criterion10(data, data2); break;
    }
  } catch (const std::exception& e) {
    out.require(false, std::string("error: ") + e.what());
  }
  std::cout << "criterion " << criterion << ": " << (out.pass ? "PASS" : "FAIL") << " " << out.detail.str() << std::endl;
  return out.pass ? 0 : 1;
}
