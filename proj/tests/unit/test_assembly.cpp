#include <gtest/gtest.h>

#include <hhomag/checks.hpp>

using namespace hhomag;

namespace {

struct Problem
{
  PolyMesh mesh;
  TopologyInfo topo;
  std::unique_ptr<Discretization> disc;

  Problem(PolyMesh m, int k) : mesh(std::move(m))
  {
    topo = analyze_topology(mesh);
    disc = std::make_unique<Discretization>(mesh, k);
  }
};

AssemblyOptions defaults(const PolyMesh& m)
{
  AssemblyOptions o;
  o.scheme = SchemeOptions::experiment_defaults(m);
  return o;
}

} // namespace

TEST(DofMap, CountsSkeletalUnknowns)
{
  Problem p(generate_cavity_box(1), 1);
  const auto& m = p.mesh;
  const int nf = m.num_faces(), nb = static_cast<int>(m.boundary_faces().size());
  const DofMap field = DofMap::build(*p.disc, p.topo, SchemeKind::field);
  EXPECT_EQ(field.skeletal, nf * (5 + 3) + 1);
  const DofMap vec = DofMap::build(*p.disc, p.topo, SchemeKind::vecpot);
  EXPECT_EQ(vec.num_gamma, 1);
  EXPECT_EQ(vec.skeletal, (nf - nb) * (5 + 3) + 1);

  Problem q(generate_two_handle_box(1), 2);
  const DofMap f2 = DofMap::build(*q.disc, q.topo, SchemeKind::field);
  EXPECT_EQ(f2.num_sigma, 2);
  EXPECT_EQ(f2.skeletal, q.mesh.num_faces() * (10 + 6) + 2 + 1);
}

TEST(Assembly, ZeroDataGivesZeroSolution)
{
  for (const std::string name : {"punched_box", "cavity_box"}) {
    Problem p(find_geometry(name).generate(1), 1);
    for (SchemeKind s : {SchemeKind::field, SchemeKind::vecpot}) {
      const Solution sol = solve(*p.disc, p.topo, s, SourceData{}, defaults(p.mesh));
      EXPECT_EQ(sol.global.cwiseAbs().maxCoeff(), 0.) << name;
    }
  }
}

TEST(Assembly, CondensationMatchesMonolithicSolve)
{
  EXPECT_LT(condensation_difference(generate_punched_box(1), SchemeKind::field), 1e-8);
  EXPECT_LT(condensation_difference(generate_cavity_box(1), SchemeKind::vecpot), 1e-8);
  EXPECT_LT(condensation_difference(agglomerate_random(generate_box_tet(2, 2, 2), 3, 0.5), SchemeKind::field, 2), 1e-8);
}

TEST(Assembly, SparseSolveAgreesWithDenseFactorization)
{
  Problem p(generate_reentrant_prism(1), 1);
  for (SchemeKind s : {SchemeKind::field, SchemeKind::vecpot}) {
    AssemblyOptions opt = defaults(p.mesh);
    opt.condense = false;
    const SaddleSystem sys = assemble(*p.disc, p.topo, s, detail::generic_data(), opt);
    const Eigen::MatrixXd dense(sys.matrix);
    EXPECT_LT((dense - dense.transpose()).norm(), 1e-12 * dense.norm());
    const Eigen::VectorXd ref = dense.fullPivLu().solve(sys.rhs);
    const Eigen::VectorXd x = solve_system(*p.disc, sys);
    EXPECT_LT((x - ref).norm(), 1e-9 * ref.norm());
  }
}

TEST(Assembly, CondensedMatrixIsSymmetric)
{
  Problem p(agglomerate_random(generate_punched_box(1), 4, 0.5), 2);
  const SaddleSystem sys = assemble(*p.disc, p.topo, SchemeKind::field, detail::generic_data(), defaults(p.mesh));
  const Eigen::SparseMatrix<double> T = sys.matrix.transpose();
  EXPECT_LT((sys.matrix - T).norm(), 1e-12 * sys.matrix.norm());
  EXPECT_EQ(sys.uncondensed_cells, 0);
}

TEST(Assembly, CuttingSurfaceFluxSelectsTheHarmonicField)
{
  Problem p(generate_punched_box(1), 1);
  const auto l2_error = [&](std::vector<double> fluxes) {
    const Solution s = solve(*p.disc, p.topo, SchemeKind::field, SourceData{{}, solutions::winding_field, fluxes}, defaults(p.mesh));
    return compute_errors(*p.disc, s.u, solutions::winding_field).l2;
  };
  EXPECT_LT(l2_error({}), 0.05);
  EXPECT_GT(l2_error({0.}), 0.5);
}

TEST(Assembly, FluxDataMustMatchTheTopology)
{
  Problem p(generate_punched_box(1), 1);
  SourceData data;
  data.fluxes = {1., 2.};
  EXPECT_THROW(assemble(*p.disc, p.topo, SchemeKind::field, data), std::invalid_argument);
}

TEST(Assembly, SolvesAreDeterministic)
{
  Problem p(agglomerate_random(generate_two_handle_box(1), 8, 0.4), 1);
  const Solution a = solve(*p.disc, p.topo, SchemeKind::field, detail::generic_data(), defaults(p.mesh));
  const Solution b = solve(*p.disc, p.topo, SchemeKind::field, detail::generic_data(), defaults(p.mesh));
  EXPECT_EQ(a.global, b.global);
}

TEST(Assembly, FieldPressureHasZeroMean)
{
  Problem p(generate_punched_box(1), 1);
  const Solution s = solve(*p.disc, p.topo, SchemeKind::field, detail::generic_data(), defaults(p.mesh));
  EXPECT_GT(pressure_cell_norm(s.p), 1e-6);
  EXPECT_LT(std::abs(pressure_cell_mean(p.mesh, s.p)), 1e-10);
}

TEST(Assembly, FluxesDefaultToTheBoundaryField)
{
  Problem p(generate_punched_box(1), 1);
  const SaddleSystem sys = assemble(*p.disc, p.topo, SchemeKind::field, SourceData{{}, solutions::winding_field, {}});
  ASSERT_EQ(sys.fluxes.size(), 1u);
  EXPECT_EQ(sys.fluxes[0], face_set_flux(*p.disc, p.topo.surfaces[0].faces, solutions::winding_field));
  const SaddleSystem given = assemble(*p.disc, p.topo, SchemeKind::field, SourceData{{}, solutions::winding_field, {0.5}});
  EXPECT_EQ(given.fluxes, std::vector<double>{0.5});
  EXPECT_EQ(given.rhs[given.map.sigma_first], 0.5);
}

TEST(Assembly, DescribesUnknowns)
{
  Problem p(generate_punched_box(1), 1);
  const SaddleSystem sys = assemble(*p.disc, p.topo, SchemeKind::field, SourceData{});
  EXPECT_EQ(describe_unknown(*p.disc, sys, sys.map.lambda), "mean-value multiplier");
  EXPECT_EQ(describe_unknown(*p.disc, sys, sys.map.sigma_first), "jump across cutting surface 1");
  EXPECT_EQ(describe_unknown(*p.disc, sys, 0), "tangential unknown 0 of face 0");
}

TEST(Errors, MeasureAgainstTheReduction)
{
  const PolyMesh m = generate_box_tet(1, 1, 1);
  const Discretization d(m, 1);
  const VectorFunction v = [](const Point3& x) { return Eigen::Vector3d(x.y() * x.y(), std::sin(x.z()), x.x()); };
  const HybridField I = reduce_curl(d, v);
  const ErrorReport exact = compute_errors(d, I, v);
  EXPECT_EQ(exact.energy, 0.);
  EXPECT_EQ(exact.l2, 0.);
  const ErrorReport zero = compute_errors(d, HybridField::zero(d), v);
  EXPECT_NEAR(zero.energy, 1., 1e-14);
  EXPECT_NEAR(zero.l2, 1., 1e-14);
  HybridField scaled = I;
  scaled *= 1.25;
  const ErrorReport e = compute_errors(d, scaled, v);
  EXPECT_NEAR(e.energy, 0.25, 1e-14);
  EXPECT_NEAR(e.l2, 0.25, 1e-14);
}

TEST(Exactness, VecpotReproducesPolynomialPotentials)
{
  for (double mu : {1., 3.}) {
    const std::pair<TestCase, int> runs[] = {{testcase_poly_vecpot_linear(), 1}, {testcase_poly_vecpot_quadratic(), 2}};
    for (const auto& [t, k] : runs) {
      Problem p(generate_box_tet(2, 2, 2), k);
      p.mesh.mu.assign(p.mesh.num_cells(), mu);
      const VectorFunction j = [&, mu](const Point3& x) { return (t.current(x) / mu).eval(); };
      const Solution s = solve(*p.disc, p.topo, SchemeKind::vecpot, SourceData{j, t.exact, {}}, defaults(p.mesh));
      const ErrorReport e = compute_errors(*p.disc, s.u, t.exact, p.mesh.mu);
      EXPECT_LT(e.energy, 1e-8) << t.name << " mu=" << mu;
      EXPECT_LT(e.l2, 1e-8) << t.name << " mu=" << mu;
    }
  }
}

TEST(Exactness, FieldSchemeReproducesLinearFields)
{
  // h = (y, z, x) + (1, 2, 3) has curl h = (-1, -1, -1) and div h = 0
  const VectorFunction h = [](const Point3& x) { return Eigen::Vector3d(x.y() + 1., x.z() + 2., x.x() + 3.); };
  const VectorFunction j = [](const Point3&) { return Eigen::Vector3d(-1., -1., -1.); };
  Problem p(agglomerate_random(generate_box_tet(2, 2, 2), 6, 0.5), 1);
  const Solution s = solve(*p.disc, p.topo, SchemeKind::field, SourceData{j, h, {}}, defaults(p.mesh));
  const ErrorReport e = compute_errors(*p.disc, s.u, h);
  EXPECT_LT(e.energy, 1e-8);
  EXPECT_LT(e.l2, 1e-8);
  EXPECT_LT(pressure_cell_norm(s.p), 1e-8);
}
