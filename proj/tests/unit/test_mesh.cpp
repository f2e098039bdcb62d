#include <gtest/gtest.h>

#include <sstream>

#include <hhomag/mesh_generators.hpp>
#include <hhomag/mesh_io.hpp>

using namespace hhomag;

namespace {

int euler_characteristic(const PolyMesh& m)
{
  std::set<std::array<int, 2>> edges;
  std::set<int> used;
  for (const auto& F : m.faces) {
    used.insert(F.vertices.begin(), F.vertices.end());
    for (std::size_t i = 0; i < F.vertices.size(); ++i) {
      const int a = F.vertices[i], b = F.vertices[(i + 1) % F.vertices.size()];
      edges.insert({std::min(a, b), std::max(a, b)});
    }
  }
  // vertices swallowed by agglomeration lie on no face
  return static_cast<int>(used.size()) - static_cast<int>(edges.size()) + m.num_faces() - m.num_cells();
}

double boundary_area(const PolyMesh& m)
{
  double a = 0.;
  for (int f : m.boundary_faces()) a += m.faces[f].area;
  return a;
}

} // namespace

TEST(Quadrature, TetrahedronIntegratesMonomialsExactly)
{
  const Point3 a(0., 0., 0.), b(1., 0., 0.), c(0., 1., 0.), d(0., 0., 1.);
  for (int deg = 0; deg <= 8; ++deg) {
    const auto q = tetrahedron_quadrature(a, b, c, d, deg);
    // int_T x^i y^j z^l = i! j! l! / (i+j+l+3)!
    for (int i = 0; i <= deg; ++i)
      for (int j = 0; i + j <= deg; ++j) {
        const int l = deg - i - j;
        double s = 0.;
        for (std::size_t p = 0; p < q.size(); ++p)
          s += q.weights[p] * std::pow(q.points[p].x(), i) * std::pow(q.points[p].y(), j) * std::pow(q.points[p].z(), l);
        const double exact = std::tgamma(i + 1) * std::tgamma(j + 1) * std::tgamma(l + 1) / std::tgamma(i + j + l + 4);
        EXPECT_NEAR(s, exact, 1e-14) << i << j << l;
      }
  }
}

TEST(Quadrature, TriangleIntegratesMonomialsExactly)
{
  const Point3 a(0., 0., 2.), b(1., 0., 2.), c(0., 1., 2.);
  for (int deg = 0; deg <= 10; ++deg) {
    const auto q = triangle_quadrature(a, b, c, deg);
    for (int i = 0; i <= deg; ++i) {
      const int j = deg - i;
      double s = 0.;
      for (std::size_t p = 0; p < q.size(); ++p) s += q.weights[p] * std::pow(q.points[p].x(), i) * std::pow(q.points[p].y(), j);
      EXPECT_NEAR(s, std::tgamma(i + 1) * std::tgamma(j + 1) / std::tgamma(i + j + 3), 1e-14);
    }
  }
}

TEST(Generators, UnitCubeHasSixTetrahedraPerCube)
{
  const PolyMesh m = generate_box_tet(1, 1, 1);
  EXPECT_EQ(m.num_cells(), 6);
  EXPECT_TRUE(m.all_tetrahedral());
  EXPECT_NEAR(m.total_volume(), 1., 1e-14);
  EXPECT_NEAR(boundary_area(m), 6., 1e-13);
  EXPECT_NO_THROW(m.check());
}

TEST(Generators, VolumesAndEulerCharacteristics)
{
  struct Expect
  {
    std::string name;
    double volume;
    int euler;  // beta0 - beta1 + beta2
  };
  const Expect cases[] = {
    {"box", 1., 1}, {"punched_box", 12., 0}, {"cavity_box", 56., 2}, {"reentrant_prism", 3., 1}, {"two_handle_box", 13., -1}};
  for (const auto& e : cases) {
    const PolyMesh m = find_geometry(e.name).generate(1);
    EXPECT_NEAR(m.total_volume(), e.volume, 1e-12) << e.name;
    EXPECT_EQ(euler_characteristic(m), e.euler) << e.name;
    EXPECT_NO_THROW(m.check()) << e.name;
  }
}

TEST(Generators, ReentrantPrismMissesTheQuadrant)
{
  const PolyMesh m = generate_reentrant_prism(2);
  for (const auto& c : m.cells) EXPECT_FALSE(c.center.x() > 0. && c.center.y() < 0.);
}

TEST(Generators, FaceNormalsPointOutOfThePlusCell)
{
  const PolyMesh m = generate_punched_box(1);
  for (const auto& F : m.faces) {
    const Point3 c = m.cells[F.cell_plus].center;
    EXPECT_GT((F.center - c).dot(F.normal), 0.);
  }
}

TEST(Generators, RejectsBadResolution)
{
  EXPECT_THROW(generate_punched_box(0), MeshError);
  EXPECT_THROW(find_geometry("sphere"), std::invalid_argument);
}

TEST(Agglomeration, PreservesVolumeAndReducesCells)
{
  const PolyMesh tets = generate_box_tet(3, 3, 3);
  AgglomerationStats st;
  const PolyMesh m = agglomerate_random(tets, 4, 0.5, &st);
  EXPECT_LT(m.num_cells(), tets.num_cells());
  EXPECT_GT(st.selected, 0);
  EXPECT_FALSE(m.all_tetrahedral());
  EXPECT_NEAR(m.total_volume(), 1., 1e-13);
  EXPECT_NEAR(boundary_area(m), 6., 1e-12);
  EXPECT_EQ(euler_characteristic(m), 1);
  EXPECT_NO_THROW(m.check());
}

TEST(Agglomeration, IsReproducibleForAFixedSeed)
{
  const PolyMesh tets = generate_box_tet(2, 2, 2);
  const PolyMesh a = agglomerate_random(tets, 9, 0.4), b = agglomerate_random(tets, 9, 0.4);
  ASSERT_EQ(a.num_cells(), b.num_cells());
  for (int c = 0; c < a.num_cells(); ++c) EXPECT_EQ(a.cells[c].tets, b.cells[c].tets);
}

TEST(Agglomeration, RejectsInvalidInput)
{
  const PolyMesh tets = generate_box_tet(1, 1, 1);
  EXPECT_THROW(agglomerate_random(tets, 1, 0.), MeshError);
  EXPECT_THROW(agglomerate_random(tets, 1, 1.5), MeshError);
  const PolyMesh poly = agglomerate_random(generate_box_tet(2, 2, 2), 1, 1.);
  EXPECT_THROW(agglomerate_random(poly, 1, 0.5), MeshError);
}

TEST(MeshIO, RoundTripKeepsGeometryAndFaceSets)
{
  PolyMesh m = agglomerate_random(generate_punched_box(1), 2, 0.3);
  m.mu.assign(m.num_cells(), 1.);
  m.mu[0] = 4.;
  const std::vector<FaceSet> sets{{"inner", {0, 3, 5}, {1, -1, 1}}};
  std::stringstream ss;
  write_mesh(ss, m, sets);
  std::vector<FaceSet> back_sets;
  const PolyMesh back = read_mesh(ss, &back_sets);
  ASSERT_EQ(back.num_vertices(), m.num_vertices());
  ASSERT_EQ(back.num_faces(), m.num_faces());
  ASSERT_EQ(back.num_cells(), m.num_cells());
  for (int v = 0; v < m.num_vertices(); ++v) EXPECT_EQ(back.vertices[v], m.vertices[v]);
  for (int c = 0; c < m.num_cells(); ++c) {
    ASSERT_EQ(back.cells[c].faces.size(), m.cells[c].faces.size());
    for (std::size_t i = 0; i < m.cells[c].faces.size(); ++i) {
      EXPECT_EQ(back.cells[c].faces[i].face, m.cells[c].faces[i].face);
      EXPECT_EQ(back.cells[c].faces[i].sign, m.cells[c].faces[i].sign);
    }
    EXPECT_NEAR(back.cells[c].volume, m.cells[c].volume, 1e-14);
  }
  EXPECT_EQ(back.mu, m.mu);
  ASSERT_EQ(back_sets.size(), 1u);
  EXPECT_EQ(back_sets[0].name, "inner");
  EXPECT_EQ(back_sets[0].faces, sets[0].faces);
  EXPECT_EQ(back_sets[0].signs, sets[0].signs);
}

TEST(MeshIO, ReportsTheOffendingLine)
{
  std::stringstream ss("polymesh 1\nvertices 2\n0 0 0\n1 1\n");
  try {
    read_mesh(ss);
    FAIL() << "expected a parse error";
  } catch (const MeshParseError& e) {
    EXPECT_EQ(e.line(), 4);
  }
  std::stringstream bad_header("mesh 2\n");
  EXPECT_THROW(read_mesh(bad_header), MeshParseError);
}
