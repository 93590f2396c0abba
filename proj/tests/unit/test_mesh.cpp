#include "stdg/mesh.hpp"
#include "stdg/quadrature.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace stdg {
namespace {

TEST(Quadrature, ExactForMonomials) {
  for (int n = 1; n <= 8; ++n) {
    const QuadratureRule& g = gauss_legendre(n);
    for (int k = 0; k <= g.exactness(); ++k) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += g.weights[i] * std::pow(g.points[i], k);
      EXPECT_NEAR(s, 1.0 / (k + 1), 1e-14) << "n=" << n << " k=" << k;
    }
  }
}

TEST(Quadrature, LegendreOrthonormal) {
  const int nmax = 7;
  const QuadratureRule& g = gauss_legendre(nmax + 1);
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(nmax + 1, nmax + 1);
  double v[nmax + 1], d[nmax + 1];
  for (int i = 0; i < g.size(); ++i) {
    legendre_orthonormal(nmax, g.points[i], v, d);
    for (int a = 0; a <= nmax; ++a)
      for (int b = 0; b <= nmax; ++b) gram(a, b) += g.weights[i] * v[a] * v[b];
  }
  EXPECT_TRUE(gram.isApprox(Eigen::MatrixXd::Identity(nmax + 1, nmax + 1), 1e-13));
  // Derivative against a central difference; ell_n(1) = sqrt(2n + 1).
  const double s = 0.37, h = 1e-6;
  double vp[nmax + 1], vm[nmax + 1];
  legendre_orthonormal(nmax, s, v, d);
  legendre_orthonormal(nmax, s + h, vp);
  legendre_orthonormal(nmax, s - h, vm);
  for (int n = 0; n <= nmax; ++n) EXPECT_NEAR(d[n], (vp[n] - vm[n]) / (2 * h), 1e-6);
  legendre_orthonormal(nmax, 1.0, v);
  for (int n = 0; n <= nmax; ++n) EXPECT_NEAR(v[n], std::sqrt(2.0 * n + 1.0), 1e-13);
}

TEST(Quadrature, PointCounts) {
  EXPECT_EQ(linear_form_points(1), 3);
  EXPECT_GE(2 * nonlinear_form_points(3) - 1, 9);
  EXPECT_GE(nonlinear_form_points(1), linear_form_points(1) + 1);
}

TEST(Mesh, StructuredTopology) {
  const SpatialMesh m = SpatialMesh::structured({0, 2, 0, 1}, 4, 2);
  EXPECT_EQ(m.num_cells(), 8);
  EXPECT_EQ(m.num_faces(), 5 * 2 + 4 * 3);
  EXPECT_DOUBLE_EQ(m.h_max(), 0.5);
  int boundary = 0;
  for (int f = 0; f < m.num_faces(); ++f) {
    const Face& face = m.face(f);
    EXPECT_NEAR(face.normal.norm(), 1.0, 1e-15);
    EXPECT_TRUE((face.normal - outward_normal(face.owner_side)).isZero());
    EXPECT_EQ(m.side_of(f, face.owner), face.owner_side);
    if (face.is_boundary()) {
      ++boundary;
      EXPECT_EQ(face.label, BoundaryLabel::Dirichlet);
      EXPECT_TRUE(m.neighbor(f, face.owner).is_boundary());
    } else {
      EXPECT_EQ(m.neighbor(f, face.owner).cell, face.neighbor);
      EXPECT_EQ(m.neighbor(f, face.neighbor).cell, face.owner);
      EXPECT_EQ(m.side_of(f, face.neighbor), opposite(face.owner_side));
    }
  }
  EXPECT_EQ(boundary, 12);
  double area = 0.0;
  for (const Cell& c : m.cells()) area += c.area();
  EXPECT_NEAR(area, 2.0, 1e-14);
  EXPECT_EQ(m.locate(Vec2(1.3, 0.2)), 2);
  EXPECT_EQ(m.locate(Vec2(3.0, 0.2)), -1);
}

TEST(Mesh, LabelerAssignsNeumann) {
  const auto lab = [](const Vec2&, const Vec2& n) {
    return n.x() < -0.5 ? BoundaryLabel::Neumann : BoundaryLabel::Dirichlet;
  };
  const SpatialMesh m = SpatialMesh::structured({0, 1, 0, 1}, 3, 3, lab);
  int neumann = 0;
  for (const Face& f : m.faces()) {
    if (f.label == BoundaryLabel::Neumann) {
      ++neumann;
      EXPECT_NEAR(f.midpoint().x(), 0.0, 1e-15);
    }
  }
  EXPECT_EQ(neumann, 3);
}

TEST(Mesh, TimePartition) {
  const TimePartition tp = TimePartition::uniform(1.0, 8);
  EXPECT_EQ(tp.num_slabs(), 8);
  EXPECT_DOUBLE_EQ(tp.tau_max(), 0.125);
  EXPECT_EQ(tp.slab_of(0.0), 0);
  EXPECT_EQ(tp.slab_of(0.125), 1);
  EXPECT_EQ(tp.slab_of(1.0), 7);
  EXPECT_THROW(TimePartition({0.0, 0.5, 0.4}), InvalidArgument);
  EXPECT_THROW(TimePartition({0.1, 0.5}), InvalidArgument);
}

TEST(Mesh, BuildUniformBalance) {
  const auto mesh = build_uniform({0, 1, 0, 1}, 1.0, 3, 4.0);
  EXPECT_EQ(mesh->num_space_cells(), 64);
  EXPECT_EQ(mesh->num_slabs(), 32);
  EXPECT_TRUE(mesh->balance_holds());
  const int r = mesh->cell_index(5, 17);
  EXPECT_EQ(mesh->slab_of_cell(r), 5);
  EXPECT_EQ(mesh->space_cell_of(r), 17);
  EXPECT_THROW((void)build_uniform({0, 1, 0, 1}, 0.3, 3, 4.0), InvalidArgument);
}

}  // namespace
}  // namespace stdg
