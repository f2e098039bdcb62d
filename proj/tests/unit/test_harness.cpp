#include <gtest/gtest.h>

#include <sstream>

#include <hhomag/checks.hpp>

using namespace hhomag;

namespace {

Eigen::Matrix3d jacobian(const VectorFunction& f, const Point3& x, double h = 1e-5)
{
  Eigen::Matrix3d J;
  for (int d = 0; d < 3; ++d) {
    Point3 a = x, b = x;
    a[d] += h;
    b[d] -= h;
    J.col(d) = (f(a) - f(b)) / (2. * h);
  }
  return J;
}

Eigen::Vector3d fd_curl(const VectorFunction& f, const Point3& x)
{
  const Eigen::Matrix3d J = jacobian(f, x);
  return {J(2, 1) - J(1, 2), J(0, 2) - J(2, 0), J(1, 0) - J(0, 1)};
}

double fd_div(const VectorFunction& f, const Point3& x) { return jacobian(f, x).trace(); }

const Point3 probes[] = {{1.3, 0.4, 0.2}, {-1.5, 1.2, -0.3}, {0.3, -1.7, 0.45}, {1.8, 1.8, -0.1}};

} // namespace

TEST(ExactSolutions, ToroidalFieldCurlAndDivergence)
{
  const solutions::Toroidal tor;
  const VectorFunction f = [&](const Point3& x) { return tor.field(x); };
  for (const auto& x : probes) {
    EXPECT_LT((fd_curl(f, x) - tor.curl(x)).norm(), 1e-7);
    EXPECT_NEAR(fd_div(f, x), 0., 1e-8);
  }
}

TEST(ExactSolutions, WindingFieldIsHarmonic)
{
  for (const auto& x : probes) {
    EXPECT_LT(fd_curl(solutions::winding_field, x).norm(), 1e-8);
    EXPECT_NEAR(fd_div(solutions::winding_field, x), 0., 1e-8);
  }
  // circulation around the axis is one
  double circ = 0.;
  const int n = 400;
  for (int i = 0; i < n; ++i) {
    const double t = 2. * std::numbers::pi * (i + 0.5) / n;
    const Point3 x(1.5 * std::cos(t), 1.5 * std::sin(t), 0.);
    circ += solutions::winding_field(x).dot(Eigen::Vector3d(-std::sin(t), std::cos(t), 0.)) * 1.5 * 2. * std::numbers::pi / n;
  }
  EXPECT_NEAR(circ, 1., 1e-12);
}

TEST(ExactSolutions, DipolePotential)
{
  for (const auto& x : probes) {
    EXPECT_NEAR(fd_div(solutions::dipole_potential, x), 0., 1e-8);
    EXPECT_LT((fd_curl(solutions::dipole_potential, x) - solutions::dipole_curl(x)).norm(), 1e-7);
    EXPECT_LT((fd_curl(solutions::dipole_curl, x) - solutions::dipole_current(x)).norm(), 1e-6);
  }
}

TEST(ExactSolutions, DipoleFluxThroughTheCavityVanishes)
{
  PolyMesh m = generate_cavity_box(1);
  const TopologyInfo topo = analyze_topology(m);
  const Discretization d(m, 3, FaceSpace::trimmed, 8);
  const double flux = face_set_flux(d, topo.boundary[1].faces, solutions::dipole_curl);
  double total = 0.;
  for (int f : topo.boundary[1].faces) {
    const auto q = m.face_quadrature(f, d.data_quadrature());
    for (std::size_t i = 0; i < q.size(); ++i) total += q.weights[i] * std::abs(solutions::dipole_curl(q.points[i]).dot(m.faces[f].normal));
  }
  EXPECT_GT(total, 1.);
  EXPECT_LT(std::abs(flux), 1e-11 * total);
}

TEST(ExactSolutions, CubePotential)
{
  using P = solutions::CubePotential;
  const VectorFunction a = P::potential, b = P::curl;
  const Point3 pts[] = {{0.2, 0.7, 0.4}, {0.9, 0.1, 0.55}, {0.5, 0.5, 0.5}};
  for (const auto& x : pts) {
    EXPECT_NEAR(fd_div(a, x), 0., 1e-7);
    EXPECT_LT((fd_curl(a, x) - P::curl(x)).norm(), 1e-7);
    const VectorFunction hb = [](const Point3& y) { return (P::inverse_mu(y) * P::curl(y)).eval(); };
    EXPECT_LT((fd_curl(hb, x) - P::current(x)).norm(), 1e-5);
  }
  EXPECT_EQ(P::inverse_mu(Point3(1., 1., 0.3)), 2.);
  // a vanishes on the face x = 0
  EXPECT_EQ(P::potential(Point3(0., 0.3, 0.8)).norm(), 0.);
}

TEST(ExactSolutions, CornerFieldIsHarmonicAwayFromTheEdge)
{
  const Point3 pts[] = {{-0.4, 0.3, 0.5}, {0.2, 0.6, 0.1}, {-0.3, -0.7, 0.9}};
  for (const auto& x : pts) {
    EXPECT_LT(fd_curl(solutions::corner_field, x).norm(), 1e-7);
    EXPECT_NEAR(fd_div(solutions::corner_field, x), 0., 1e-7);
    const Eigen::Vector3d g = jacobian([](const Point3& y) { return Eigen::Vector3d(solutions::corner_potential(y), 0., 0.); }, x).row(0);
    EXPECT_LT((g - solutions::corner_field(x)).norm(), 1e-8);
  }
  // the normal derivative vanishes on both faces of the reentrant edge
  EXPECT_NEAR(solutions::corner_field(Point3(0.5, 1e-14, 0.5)).y(), 0., 1e-10);
  EXPECT_NEAR(solutions::corner_field(Point3(1e-14, -0.5, 0.5)).x(), 0., 1e-10);
}

TEST(Report, FittedRateRecoversAPowerLaw)
{
  ConvergenceReport r;
  for (int i = 0; i < 4; ++i) {
    LevelResult row;
    row.h = std::pow(0.5, i);
    row.en_err = 3. * std::pow(row.h, 1.5);
    row.l2_err = 0.2 * std::pow(row.h, 2.5);
    r.rows.push_back(row);
  }
  EXPECT_NEAR(r.fitted_rate(&LevelResult::en_err), 1.5, 1e-12);
  EXPECT_NEAR(r.fitted_rate(&LevelResult::l2_err), 2.5, 1e-12);
  for (double p : r.pair_rates(&LevelResult::l2_err)) EXPECT_NEAR(p, 2.5, 1e-12);
  EXPECT_FALSE(r.all_exact());
}

TEST(Report, ExactLevelsAreExcludedFromRates)
{
  ConvergenceReport r;
  r.rows = {LevelResult{}, LevelResult{}};
  r.rows[0].h = 1.;
  r.rows[1].h = 0.5;
  r.rows[0].en_err = 1e-12;
  r.rows[1].en_err = 1e-13;
  EXPECT_TRUE(std::isnan(r.pair_rates(&LevelResult::en_err)[0]));
  EXPECT_TRUE(std::isnan(r.fitted_rate(&LevelResult::en_err)));
  EXPECT_TRUE(r.all_exact());
  std::ostringstream os;
  r.print_table(os);
  EXPECT_NE(os.str().find("rates: exact"), std::string::npos);
}

TEST(Harness, UnknownCaseListsTheAvailableNames)
{
  try {
    find_testcase("no_such_case");
    FAIL();
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    for (const auto& t : all_testcases()) EXPECT_NE(msg.find(t.name), std::string::npos);
  }
}

TEST(Harness, RejectsMoreLevelsThanTheCaseHas)
{
  RunOptions opt;
  opt.levels = 5;
  EXPECT_THROW(run_convergence(testcase_poly_vecpot_linear(), opt), std::invalid_argument);
  opt.levels = 0;
  opt.degree = 0;
  EXPECT_THROW(run_convergence(testcase_poly_vecpot_linear(), opt), std::invalid_argument);
}

TEST(Harness, CsvHasOneRowPerLevel)
{
  RunOptions opt;
  opt.degree = 1;
  const ConvergenceReport r = run_convergence(testcase_poly_vecpot_linear(), opt);
  ASSERT_TRUE(r.complete());
  std::ostringstream os;
  r.write_csv(os);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "level,h,ndof,en_err,l2_err,runtime_s");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 5);
    EXPECT_EQ(line.substr(0, 2), std::to_string(rows) + ",");
  }
  EXPECT_EQ(rows, 2);
  EXPECT_TRUE(r.all_exact());
}

TEST(Harness, RunsAreReproducible)
{
  RunOptions opt;
  opt.levels = 1;
  opt.agglomerate = 0.4;
  opt.seed = 12;
  const ConvergenceReport a = run_convergence(testcase_torus_field(), opt);
  const ConvergenceReport b = run_convergence(testcase_torus_field(), opt);
  ASSERT_TRUE(a.complete() && b.complete());
  EXPECT_EQ(a.rows[0].ndof, b.rows[0].ndof);
  EXPECT_EQ(a.rows[0].en_err, b.rows[0].en_err);
  EXPECT_EQ(a.rows[0].l2_err, b.rows[0].l2_err);
}

TEST(Harness, UnknownLimitStopsTheStudy)
{
  RunOptions opt;
  opt.max_unknowns = 100;
  const ConvergenceReport r = run_convergence(testcase_poly_vecpot_linear(), opt);
  EXPECT_FALSE(r.complete());
  EXPECT_NE(r.error.find("exceed the limit"), std::string::npos);
}

TEST(Harness, CaseOverridesPressureStabilization)
{
  const TestCase t = testcase_singular_field();
  const PolyMesh m = t.mesh(1);
  EXPECT_TRUE(scheme_options(t, m).pressure_stabilization);
  RunOptions opt;
  opt.pressure_stabilization = false;
  EXPECT_FALSE(scheme_options(t, m, opt).pressure_stabilization);
  EXPECT_FALSE(scheme_options(testcase_torus_field(), m).pressure_stabilization);
}
