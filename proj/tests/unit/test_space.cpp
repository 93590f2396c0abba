#include "oracle.hpp"

#include "stdg/quadrature.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace stdg {
namespace {

// Polynomial of degree (2 in t, 2 in x and y) per component.
StateValue poly(double t, double x, double y) {
  return {1.0 + t * x - 0.5 * y * y + t * t, Vec2(x * y - t, 0.3 + t * y * x - x * x)};
}

TEST(Space, DofLayoutIsSlabMajor) {
  std::mt19937_64 rng(1);
  auto mesh = testing::small_mesh(2, 3);
  const Space sp(mesh, testing::random_degrees(mesh->num_cells(), rng, {0, 1}, {2, 3}));
  Index total = 0;
  for (int r = 0; r < sp.num_cells(); ++r) {
    EXPECT_EQ(sp.dofs().offset(r), total);
    total += local_count(sp.degree(r));
  }
  EXPECT_EQ(sp.dofs().total(), total);
  for (int j = 0; j < 3; ++j) {
    EXPECT_EQ(sp.slab_begin(j), sp.dofs().offset(mesh->cell_index(j, 0)));
    EXPECT_EQ(sp.slab_end(j), j + 1 < 3 ? sp.slab_begin(j + 1) : total);
  }
  EXPECT_EQ(scalar_count({2, 3}), 48);
  EXPECT_EQ(local_count({1, 1}), 24);
}

TEST(Space, DegreeMapCeiling) {
  DegreeMap dm(4, {1, 1}, 3);
  EXPECT_THROW(dm.set(0, {4, 1}), InvalidArgument);
  dm.set(2, {0, 3});
  EXPECT_EQ(dm.max_degree(), (CellDegree{1, 3}));
  EXPECT_EQ(dm.min_time_degree(), 0);
}

TEST(Space, EvaluationReproducesProjectedPolynomial) {
  auto space = make_space(testing::small_mesh(2, 2), CellDegree{2, 2});
  const DiscreteField u = project_l2(poly, space);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const double t = U(rng), x = U(rng), y = U(rng);
    const int r = space->mesh().cell_index(space->mesh().time().slab_of(t), space->mesh().space().locate({x, y}));
    EXPECT_NEAR((eval(u, r, t, {x, y}).as_vector() - poly(t, x, y).as_vector()).norm(), 0.0, 1e-13);
    const StateGradient g = eval_grad(u, r, t, {x, y});
    EXPECT_NEAR(g.grad_p.x(), t, 1e-12);
    EXPECT_NEAR(g.grad_p.y(), -y, 1e-12);
    EXPECT_NEAR(g.grad_v(1, 0), t * y - 2 * x, 1e-12);
    EXPECT_NEAR(eval_dt(u, r, t, {x, y}).p, x + 2 * t, 1e-12);
  }
  EXPECT_THROW((void)eval(u, 0, 0.9, {0.1, 0.1}), InvalidArgument);
}

TEST(Space, SpacetimeProjectionReproducesPolynomials) {
  std::mt19937_64 rng(3);
  auto mesh = testing::small_mesh(2, 2);
  auto space = make_space(mesh, testing::random_degrees(mesh->num_cells(), rng, {2, 2}, {3, 3}));
  const DiscreteField u = project_spacetime(poly, space);
  const DiscreteField v = project_l2(poly, space);
  EXPECT_LT((u.coefficients() - v.coefficients()).norm(), 1e-12);
  EXPECT_THROW((void)project_spacetime(poly, make_space(mesh, CellDegree{0, 1})), InvalidArgument);
}

TEST(Space, TransferIsProjection) {
  std::mt19937_64 rng(4);
  auto mesh = testing::small_mesh(2, 2);
  auto fine = make_space(mesh, CellDegree{3, 3});
  auto coarse = make_space(mesh, CellDegree{1, 2});
  const DiscreteField u = testing::random_field(fine, rng);
  const DiscreteField c = transfer(u, coarse);
  const DiscreteField back = transfer(c, fine);
  // Idempotent, and the residual is L2-orthogonal to the coarse space.
  EXPECT_LT((transfer(back, coarse).coefficients() - c.coefficients()).norm(), 1e-15);
  const DiscreteField w = testing::random_field(coarse, rng);
  const Vector diff = u.coefficients() - back.coefficients();
  EXPECT_NEAR(transfer(w, fine).coefficients().dot(diff), 0.0, 1e-13);
}

TEST(Space, ProlongExactOnNestedMeshes) {
  std::mt19937_64 rng(5);
  auto coarse = make_space(testing::small_mesh(2, 2), CellDegree{1, 2});
  auto fine = make_space(testing::small_mesh(4, 4), CellDegree{1, 2});
  const DiscreteField u = testing::random_field(coarse, rng);
  const DiscreteField v = prolong(u, fine);
  for (const auto& [t, x, y] : {std::tuple{0.1, 0.2, 0.3}, std::tuple{0.7, 0.9, 0.6}, std::tuple{0.4, 0.1, 0.8}}) {
    const int rc = coarse->mesh().cell_index(coarse->mesh().time().slab_of(t), coarse->mesh().space().locate({x, y}));
    const int rf = fine->mesh().cell_index(fine->mesh().time().slab_of(t), fine->mesh().space().locate({x, y}));
    EXPECT_NEAR((eval(u, rc, t, {x, y}).as_vector() - eval(v, rf, t, {x, y}).as_vector()).norm(), 0.0, 1e-12);
  }
}

TEST(Space, SpatialProjectionOrthogonality) {
  const SpatialMesh m = SpatialMesh::structured({0, 1, 0, 1}, 2, 2);
  const SpaceFunction f = [](double x, double y) { return StateValue{std::sin(3 * x) * y, Vec2(std::exp(x * y), x)}; };
  const SpatialField pf = project_spatial(f, m, {1, 2, 3, 2}, 8);
  // Residual orthogonal to the constant and to x on every cell.
  const QuadratureRule& g = gauss_legendre(12);
  for (int k = 0; k < m.num_cells(); ++k) {
    const Cell& c = m.cell(k);
    Vec3 r0 = Vec3::Zero(), r1 = Vec3::Zero();
    for (int a = 0; a < g.size(); ++a)
      for (int b = 0; b < g.size(); ++b) {
        const Vec2 x(c.lower.x() + c.hx() * g.points[a], c.lower.y() + c.hy() * g.points[b]);
        const Vec3 e = f(x.x(), x.y()).as_vector() - eval_spatial(pf, m, k, x).as_vector();
        r0 += g.weights[a] * g.weights[b] * e;
        r1 += g.weights[a] * g.weights[b] * x.x() * e;
      }
    EXPECT_LT(r0.norm(), 1e-12);
    EXPECT_LT(r1.norm(), 1e-12);
  }
}

TEST(Space, InterpolatedDataReproducesPolynomials) {
  auto space = make_space(testing::small_mesh(2, 2, true), CellDegree{2, 2});
  ProblemData data;
  data.initial = [](double x, double y) { return poly(0.0, x, y); };
  data.dirichlet = poly;
  data.neumann_v = poly;
  data.neumann_p = [](double t, double x, double, const Vec2& n) { return t * n.x() + x; };
  const DataFields df = interpolate_data(data, *space);
  const SpatialMesh& sm = space->mesh().space();
  EXPECT_NEAR((eval_spatial(df.u0_h, sm, 3, {0.7, 0.6}).as_vector() - poly(0, 0.7, 0.6).as_vector()).norm(), 0.0, 1e-13);
  for (const FaceData& fd : df.boundary) {
    const CellFrame f = space->frame(fd.cell);
    const Face& face = sm.face(fd.face);
    const double t = f.t0 + 0.3 * f.tau, s = 0.4 * face.measure();
    const Vec2 x = face.a + 0.4 * (face.b - face.a);
    const StateValue got = eval_face_data(fd, f, t, s);
    if (fd.label == BoundaryLabel::Dirichlet) {
      EXPECT_NEAR((got.as_vector() - poly(t, x.x(), x.y()).as_vector()).norm(), 0.0, 1e-13);
    } else {
      EXPECT_NEAR(got.p, t * face.normal.x() + x.x(), 1e-13);
      EXPECT_NEAR((got.v - poly(t, x.x(), x.y()).v).norm(), 0.0, 1e-13);
    }
  }
}

}  // namespace
}  // namespace stdg
