#include <gtest/gtest.h>

#include <hhomag/checks.hpp>

using namespace hhomag;

TEST(Dimensions, FaceAndCellSpaces)
{
  EXPECT_EQ(dim_poly3(0), 1);
  EXPECT_EQ(dim_poly3(2), 10);
  EXPECT_EQ(dim_poly2(3), 10);
  EXPECT_EQ(dim_trimmed_face(1), 5);
  EXPECT_EQ(dim_trimmed_face(2), 10);
  EXPECT_EQ(dim_trimmed_face(3), 17);
  // grad and Koszul parts split P^l(T)^3
  for (int l = 0; l <= 3; ++l) EXPECT_EQ(dim_grad_cell(l) + dim_koszul_cell(l), 3 * dim_poly3(l));
}

TEST(Dimensions, FaceBasisSizesFollowTheSpace)
{
  const PolyMesh m = generate_box_tet(1, 1, 1);
  for (int k = 1; k <= 3; ++k) {
    EXPECT_EQ(FaceBasis(m, 0, k, FaceSpace::trimmed).vector_size(), dim_trimmed_face(k));
    EXPECT_EQ(FaceBasis(m, 0, k, FaceSpace::rot).vector_size(), dim_rot_face(k));
    EXPECT_EQ(FaceBasis(m, 0, k, FaceSpace::full).vector_size(), 2 * dim_poly2(k));
  }
}

TEST(CellBasis, IsOrthonormalOnAgglomeratedCells)
{
  for (const auto& [name, cell] : detail::sample_cells()) {
    const auto& [m, c] = cell;
    const CellBasis b(m, c, 3);
    const auto q = m.cell_quadrature(c, 6);
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(b.size(), b.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
      const Eigen::VectorXd v = b.values(q.points[i]);
      G += q.weights[i] * v * v.transpose();
    }
    EXPECT_LT((G - Eigen::MatrixXd::Identity(b.size(), b.size())).norm(), 1e-11) << name;
  }
}

TEST(FaceBasis, ScalarAndVectorBasesAreOrthonormal)
{
  const PolyMesh m = agglomerate_random(generate_box_tet(2, 2, 2), 3, 0.5);
  for (int f : {0, m.num_faces() / 2, m.num_faces() - 1}) {
    const FaceBasis b(m, f, 2);
    const auto q = m.face_quadrature(f, 4);
    Eigen::MatrixXd Gs = Eigen::MatrixXd::Zero(b.scalar_size(), b.scalar_size());
    Eigen::MatrixXd Gv = Eigen::MatrixXd::Zero(b.vector_size(), b.vector_size());
    for (std::size_t i = 0; i < q.size(); ++i) {
      const Eigen::VectorXd s = b.scalar_values(q.points[i]);
      const Eigen::MatrixXd v = b.vector_values(q.points[i]);
      Gs += q.weights[i] * s * s.transpose();
      Gv += q.weights[i] * v * v.transpose();
    }
    EXPECT_LT((Gs - Eigen::MatrixXd::Identity(b.scalar_size(), b.scalar_size())).norm(), 1e-12);
    EXPECT_LT((Gv - Eigen::MatrixXd::Identity(b.vector_size(), b.vector_size())).norm(), 1e-12);
    EXPECT_NEAR(b.scalar_values(m.faces[f].center)[0] * b.constant_coefficient(m.faces[f].area), 1., 1e-12);
  }
}

TEST(FaceBasis, TrimmedSpaceContainsLowerDegreeFields)
{
  for (const auto& [name, cell] : detail::sample_cells())
    for (int k = 1; k <= 3; ++k) EXPECT_LT(face_containment_residual(cell.first, cell.second, k), 1e-10) << name << " k=" << k;
}

TEST(FaceBasis, RotSpaceMissesConstantsOnlyAtHigherDegree)
{
  // P^0(F)^2 lies in R^k for every k; P^1(F)^2 does not lie in R^2
  const auto [m, c] = detail::sample_cells().front().second;
  EXPECT_LT(face_containment_residual(m, c, 1, FaceSpace::rot), 1e-10);
  EXPECT_GT(face_containment_residual(m, c, 2, FaceSpace::rot), 1e-3);
}

TEST(FaceBasis, RotatedTracesOfGradientsSpanTheRotSpace)
{
  const int expected[] = {5, 9, 14};
  for (const auto& [name, cell] : detail::sample_cells())
    for (int k = 1; k <= 3; ++k)
      for (int r : rotated_trace_ranks(cell.first, cell.second, k)) EXPECT_EQ(r, expected[k - 1]) << name;
}

TEST(Projection, ReproducesPolynomials)
{
  const auto [m, c] = detail::sample_cells().back().second;
  std::mt19937 rng(3);
  const detail::RandomPolynomial p(2, rng);
  const CellBasis b(m, c, 2);
  const Eigen::VectorXd coef = project_cell(m, c, b, 2, [&](const Point3& x) { return p.scalar(x); }, 6);
  for (std::size_t i = 0; i < m.cells[c].tets.size(); ++i) {
    const auto& t = m.cells[c].tets[i];
    const Point3 x = 0.1 * m.vertices[t[0]] + 0.2 * m.vertices[t[1]] + 0.3 * m.vertices[t[2]] + 0.4 * m.vertices[t[3]];
    EXPECT_NEAR(b.values(x).dot(coef), p.scalar(x), 1e-11);
  }
  const int f = m.cells[c].faces.front().face;
  const FaceBasis fb(m, f, 2);
  const Eigen::VectorXd fc = project_face(m, f, fb, [&](const Point3& x) { return p.scalar(x); }, 6);
  EXPECT_NEAR(fb.scalar_values(m.faces[f].center).dot(fc), p.scalar(m.faces[f].center), 1e-11);
}

TEST(Closure, DivergenceTheoremOnCells)
{
  for (const PolyMesh& m : {generate_punched_box(1), agglomerate_random(generate_box_tet(3, 3, 3), 5, 0.5)}) {
    const auto [normals, flux] = divergence_closure(m, 11);
    EXPECT_LT(normals, 1e-12);
    EXPECT_LT(flux, 1e-12);
  }
}
