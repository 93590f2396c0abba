#include "oracle.hpp"

#include "stdg/adapt.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace stdg {
namespace {

TEST(DgNorm, PartsMatchBruteForce) {
  std::mt19937_64 rng(3);
  auto mesh = testing::small_mesh(3, 3, true);
  auto space = make_space(mesh, testing::random_degrees(mesh->num_cells(), rng, {0, 1}, {2, 3}));
  const DiscreteField u = testing::random_field(space, rng);
  ModelParams prm;
  prm.alpha = 2.0;
  prm.beta = 0.01;
  prm.zeta = 0.02;
  const testing::FormOracle oracle(prm);
  const DgNormParts parts = dg_norm_parts(u, prm, {});
  EXPECT_NEAR(parts.time_jumps, oracle.time_jumps(u), 1e-12 * parts.time_jumps);
  EXPECT_NEAR(parts.face_flux, oracle.face_flux(u), 1e-12 * parts.face_flux);
  EXPECT_NEAR(parts.ip, oracle.ip_squared(u), 1e-12 * parts.ip);
  EXPECT_NEAR(dg_norm(u, prm), std::sqrt(parts.total()), 1e-13 * std::sqrt(parts.total()));
  const DgNormParts weighted = dg_norm_parts(u, prm, {}, nullptr, {0.25, 3.0});
  EXPECT_NEAR(weighted.face_flux, 0.25 * parts.face_flux, 1e-13 * parts.face_flux);
  EXPECT_NEAR(weighted.ip, 3.0 * parts.ip, 1e-13 * parts.ip);
  for (double t : {0.1, 0.5, 0.99}) {
    const double ip = ip_norm(u, t, prm);
    EXPECT_NEAR(ip * ip, oracle.ip_squared_at(u, t), 1e-12 * ip * ip);
  }
}

TEST(DgNorm, ZeroHomogeneousPositive) {
  std::mt19937_64 rng(4);
  auto space = make_space(testing::small_mesh(2, 2), CellDegree{1, 1});
  DiscreteField u = testing::random_field(space, rng);
  const ModelParams prm;
  EXPECT_EQ(dg_norm(DiscreteField(space), prm), 0.0);
  const double n = dg_norm(u, prm);
  EXPECT_GT(n, 0.0);
  for (double s : {-3.7, 0.01, 12.0}) {
    DiscreteField v(space, s * u.coefficients());
    EXPECT_NEAR(dg_norm(v, prm), std::abs(s) * n, 1e-13 * std::abs(s) * n);
  }
}

TEST(IpNorm, BoundaryConventions) {
  const ModelParams prm;
  auto space = make_space(testing::small_mesh(4, 1), CellDegree{0, 1});
  // A constant field touches Gamma_D everywhere, so only the boundary jump terms remain.
  const DiscreteField c = project_l2([](double, double, double) { return StateValue{1.0, Vec2(0, 0)}; }, space);
  const double sigma = prm.c_sigma / 0.25;
  EXPECT_NEAR(std::pow(ip_norm(c, 0.5, prm), 2), prm.beta * sigma * 4.0, 1e-12);
  // p = x is continuous: no interior jumps, and the trace enters on x = 1, bottom and top.
  const DiscreteField a = project_l2([](double, double x, double) { return StateValue{x, Vec2(0, 0)}; }, space);
  const double boundary = sigma * (1.0 + 1.0 / 3.0 + 1.0 / 3.0);
  EXPECT_NEAR(std::pow(ip_norm(a, 0.5, prm), 2), prm.beta * (1.0 + boundary), 1e-12);
}

// u = (1 + t x, y + t, x y) solves M u_t + A u + N(u, u) = f exactly with f taken in
// closed form, and lies in Z_h for (p, q) >= (1, 2).
StateValue exact_u(double t, double x, double y) { return {1.0 + t * x, Vec2(y + t, x * y)}; }

ProblemData exact_data(const ModelParams& prm) {
  ProblemData d;
  d.source = [prm](double t, double x, double y) {
    PointState s;
    s.value = exact_u(t, x, y);
    s.grad.grad_p = Vec2(t, 0.0);
    s.grad.grad_v << 0.0, 1.0, y, x;
    const Vec3 ut(x, 1.0, 0.0);
    const Vec3 au(s.grad.div_v(), s.grad.grad_p.x(), s.grad.grad_p.y());
    return StateValue::from_vector(prm.mass() * ut + au + eval_N(s, s.value, prm).as_vector());
  };
  d.initial = [](double x, double y) { return exact_u(0.0, x, y); };
  d.dirichlet = exact_u;
  d.neumann_v = exact_u;
  return d;
}

TEST(Indicator, VanishesOnExactDiscreteSolution) {
  const ModelParams prm;
  auto space = make_space(testing::small_mesh(3, 2, true), CellDegree{1, 2});
  const DiscreteField u = project_l2(exact_u, space);
  const std::vector<double> eta = indicator(u, exact_data(prm), prm);
  ASSERT_EQ(static_cast<int>(eta.size()), space->num_cells());
  for (double e : eta) EXPECT_LT(e, 1e-12);

  // A perturbation shows up.
  DiscreteField w = u;
  w.coefficients()(5) += 1e-3;
  EXPECT_GT(aggregate(indicator(w, exact_data(prm), prm)), 1e-6);
}

TEST(Indicator, ZeroDataZeroField) {
  auto space = make_space(testing::small_mesh(2, 2), CellDegree{1, 1});
  for (double e : indicator(DiscreteField(space), ProblemData{}, ModelParams{})) EXPECT_EQ(e, 0.0);
}

TEST(Indicator, LocalToNeighborhood) {
  std::mt19937_64 rng(5);
  const ModelParams prm;
  auto mesh = testing::small_mesh(4, 3);
  auto space = make_space(mesh, CellDegree{1, 1});
  const DiscreteField u = testing::random_field(space, rng);
  DiscreteField w = u;
  // Perturb cell (slab 2, corner 15); cell (slab 0, corner 0) does not see it.
  const int far = mesh->cell_index(2, 15), r = mesh->cell_index(0, 0);
  for (int i = 0; i < space->dofs().count(far); ++i) w.coefficients()(space->dofs().offset(far) + i) += 1.0;
  const auto e1 = indicator(u, ProblemData{}, prm), e2 = indicator(w, ProblemData{}, prm);
  EXPECT_EQ(e1[static_cast<std::size_t>(r)], e2[static_cast<std::size_t>(r)]);
  EXPECT_NE(e1[static_cast<std::size_t>(far)], e2[static_cast<std::size_t>(far)]);
}

TEST(Aggregate, RootSumOfSquares) {
  EXPECT_DOUBLE_EQ(aggregate({3.0, 4.0}), 5.0);
  EXPECT_EQ(aggregate({}), 0.0);
}

TEST(MarkAndAdapt, AllEqualRefinesEverything) {
  const DegreeMap dm(5, {1, 1});
  const AdaptResult res = mark_and_adapt(dm, std::vector<double>(5, 0.3), {});
  EXPECT_EQ(res.refined, 5);
  EXPECT_EQ(res.derefined, 0);
  for (int r = 0; r < 5; ++r) EXPECT_EQ(res.degrees[r], (CellDegree{2, 2}));
}

TEST(MarkAndAdapt, DominantCell) {
  DegreeMap dm(4, {2, 2});
  const AdaptResult res = mark_and_adapt(dm, {1.0, 0.05, 0.005, 0.02}, {});
  EXPECT_EQ(res.degrees[0], (CellDegree{3, 3}));
  EXPECT_EQ(res.degrees[1], (CellDegree{2, 2}));
  EXPECT_EQ(res.degrees[2], (CellDegree{1, 1}));
  EXPECT_EQ(res.degrees[3], (CellDegree{2, 2}));
  EXPECT_EQ(res.refined, 1);
  EXPECT_EQ(res.derefined, 1);
}

TEST(MarkAndAdapt, FloorAndCeiling) {
  DegreeMap dm(3, {0, 1}, 6);
  dm.set(1, {6, 5});
  AdaptConfig cfg;
  const AdaptResult res = mark_and_adapt(dm, {0.001, 1.0, 0.0}, cfg);
  EXPECT_EQ(res.degrees[0], (CellDegree{0, 1}));
  EXPECT_EQ(res.degrees[2], (CellDegree{0, 1}));
  EXPECT_EQ(res.degrees[1], (CellDegree{6, 6}));
  EXPECT_EQ(res.clamped, 1);
  EXPECT_EQ(res.derefined, 0);
  cfg.theta_deref = 0.5;
  EXPECT_THROW((void)mark_and_adapt(dm, {1, 1, 1}, cfg), InvalidArgument);
  EXPECT_THROW((void)mark_and_adapt(dm, {1, 1}, {}), InvalidArgument);
}

TEST(MarkAndAdapt, BoundedAndMonotone) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::uniform_int_distribution<int> deg(1, 4);
  AdaptConfig cfg;
  cfg.floor = {1, 1};
  cfg.ceiling = 4;
  for (int trial = 0; trial < 200; ++trial) {
    DegreeMap dm(12, {1, 1}, 4);
    std::vector<double> eta(12);
    for (int r = 0; r < 12; ++r) {
      dm.set(r, {deg(rng), deg(rng)});
      eta[static_cast<std::size_t>(r)] = std::pow(U(rng), 4);
    }
    const AdaptResult base = mark_and_adapt(dm, eta, cfg);
    for (int r = 0; r < 12; ++r) {
      const CellDegree d = base.degrees[r];
      EXPECT_TRUE(d.p >= 1 && d.q >= 1 && d.p <= 4 && d.q <= 4);
    }
    const int i = trial % 12;
    std::vector<double> raised = eta;
    raised[static_cast<std::size_t>(i)] *= 1.0 + 10.0 * U(rng);
    const CellDegree before = base.degrees[i], after = mark_and_adapt(dm, raised, cfg).degrees[i];
    EXPECT_GE(after.p, before.p);
    EXPECT_GE(after.q, before.q);
  }
}

}  // namespace
}  // namespace stdg
