#include <gtest/gtest.h>

#include <hhomag/hybrid_spaces.hpp>
#include <hhomag/mesh_generators.hpp>
#include <hhomag/testcases.hpp>

using namespace hhomag;

TEST(Topology, BettiNumbersOfTheGeometries)
{
  struct Expect
  {
    std::string name;
    int beta1, beta2, components;
  };
  const Expect cases[] = {{"box", 0, 0, 1},
                          {"punched_box", 1, 0, 1},
                          {"cavity_box", 0, 1, 2},
                          {"reentrant_prism", 0, 0, 1},
                          {"two_handle_box", 2, 0, 1}};
  for (const auto& e : cases) {
    PolyMesh m = find_geometry(e.name).generate(1);
    const TopologyInfo info = analyze_topology(m);
    EXPECT_EQ(info.beta0, 1) << e.name;
    EXPECT_EQ(info.beta1, e.beta1) << e.name;
    EXPECT_EQ(info.beta2, e.beta2) << e.name;
    EXPECT_EQ(static_cast<int>(info.boundary.size()), e.components) << e.name;
    EXPECT_EQ(static_cast<int>(info.surfaces.size()), e.beta1) << e.name;
  }
}

TEST(Topology, BettiNumbersSurviveAgglomeration)
{
  PolyMesh m = agglomerate_random(generate_punched_box(2), 5, 0.5);
  const TopologyInfo info = analyze_topology(m);
  EXPECT_EQ(info.beta1, 1);
  EXPECT_EQ(info.beta2, 0);
}

TEST(Topology, CuttingRemovesEveryTunnel)
{
  for (const std::string name : {"punched_box", "two_handle_box"}) {
    PolyMesh m = find_geometry(name).generate(1);
    const TopologyInfo info = analyze_topology(m);
    EXPECT_EQ(cut_betti(m, info.surfaces), 0) << name;
    for (const auto& s : info.surfaces) {
      EXPECT_FALSE(s.faces.empty());
      for (int f : s.faces) EXPECT_FALSE(m.faces[f].is_boundary());
      // a disc spanning the hole
      EXPECT_EQ(surface_euler(m, s.faces), 1);
    }
  }
}

TEST(Topology, SurfacesAreFaceDisjoint)
{
  PolyMesh m = generate_two_handle_box(1);
  const TopologyInfo info = analyze_topology(m);
  ASSERT_EQ(info.surfaces.size(), 2u);
  std::set<int> seen;
  for (const auto& s : info.surfaces)
    for (int f : s.faces) EXPECT_TRUE(seen.insert(f).second);
}

TEST(Topology, BoundaryComponentsPartitionTheBoundary)
{
  PolyMesh m = generate_cavity_box(1);
  const TopologyInfo info = analyze_topology(m);
  ASSERT_EQ(info.boundary.size(), 2u);
  EXPECT_EQ(info.boundary[0].faces.size() + info.boundary[1].faces.size(), m.boundary_faces().size());
  // boundary[0] is the outer box of area 96, the cavity has area 24
  EXPECT_NEAR(info.boundary[0].area, 96., 1e-12);
  EXPECT_NEAR(info.boundary[1].area, 24., 1e-12);
}

TEST(Topology, SideTagsFollowTheSurfaceNormal)
{
  PolyMesh m = generate_punched_box(1);
  const TopologyInfo info = analyze_topology(m);
  const auto tags = sigma_side_tags(m, info.surfaces[0]);
  ASSERT_EQ(tags.size(), info.surfaces[0].faces.size());
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const Face& F = m.faces[info.surfaces[0].faces[i]];
    EXPECT_EQ(tags[i].first, F.cell_plus);
    EXPECT_GT((F.center - m.cells[tags[i].first].center).dot(F.normal), 0.);
  }
}

namespace {

/// Per-cell branch of theta/2pi that is continuous across every interface not on a cutting surface.
std::function<double(int, const Point3&)> cut_branch(const PolyMesh& m, const TopologyInfo& info)
{
  const auto turn = [](const Point3& x) { return solutions::angle(x) / (2. * std::numbers::pi); };
  const auto on_cut = info.surface_index(m);
  std::vector<double> level(m.num_cells(), std::nan(""));
  std::vector<std::vector<int>> adj(m.num_cells());
  for (int f = 0; f < m.num_faces(); ++f) {
    const Face& F = m.faces[f];
    if (F.is_boundary() || on_cut[f] > 0) continue;
    adj[F.cell_plus].push_back(F.cell_minus);
    adj[F.cell_minus].push_back(F.cell_plus);
  }
  std::vector<int> queue{0};
  level[0] = turn(m.cells[0].center);
  for (std::size_t i = 0; i < queue.size(); ++i)
    for (int n : adj[queue[i]])
      if (std::isnan(level[n])) {
        const double t = turn(m.cells[n].center);
        level[n] = t + std::round(level[queue[i]] - t);
        queue.push_back(n);
      }
  return [turn, level](int c, const Point3& x) {
    const double t = turn(x);
    return t + std::round(level[c] - t);
  };
}

} // namespace

TEST(Topology, WindingPotentialReducesWithUnitJump)
{
  PolyMesh m = generate_punched_box(1);
  const TopologyInfo info = analyze_topology(m);
  const Discretization d(m, 1);
  const HybridPressure p = reduce_grad(d, {}, &info, cut_branch(m, info));
  ASSERT_EQ(p.sigma.size(), 1u);
  EXPECT_NEAR(std::abs(p.sigma[0]), 1., 1e-10);
}

TEST(Topology, NonConstantJumpIsRejected)
{
  PolyMesh m = generate_punched_box(1);
  const TopologyInfo info = analyze_topology(m);
  const Discretization d(m, 1);
  std::vector<char> plus_side(m.num_cells(), 0);
  for (int f : info.surfaces[0].faces) plus_side[m.faces[f].cell_plus] = 1;
  const auto branch = cut_branch(m, info);
  const auto tilted = [&](int c, const Point3& x) { return branch(c, x) + (plus_side[c] ? x.z() : 0.); };
  EXPECT_THROW(reduce_grad(d, {}, &info, tilted), std::invalid_argument);
}
