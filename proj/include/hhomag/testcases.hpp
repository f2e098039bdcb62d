// Manufactured solutions and their geometries.

#ifndef HHOMAG_TESTCASES_HPP
#define HHOMAG_TESTCASES_HPP

#include <numbers>
#include <optional>

#include "assembly.hpp"
#include "mesh_generators.hpp"

namespace hhomag {

/// A manufactured problem: geometry family, scheme, exact fields, and discretization switches.
struct TestCase
{
  std::string name;
  std::string description;
  SchemeKind scheme = SchemeKind::field;
  std::function<PolyMesh(int)> mesh;   // mesh for a resolution
  std::vector<int> resolutions;        // default refinement sequence
  VectorFunction exact;                // h (field) or a (vecpot)
  VectorFunction current;              // j
  VectorFunction boundary_field;       // mu h (field) or a (vecpot)
  ScalarFunction inverse_mu;           // smooth mu^{-1}; empty for piecewise constant mesh.mu
  CurlVariant curl = CurlVariant::reconstruction;
  FaceSpace face_space = FaceSpace::trimmed;
  int extra_quadrature = 0;
  std::optional<bool> pressure_stabilization;  // overrides the mesh-based default when set
  /// Branch of a multivalued scalar potential seen from a cell (used only by tests).
  std::function<double(const Point3&)> potential;
};

namespace solutions {

  inline double cyl_rho(const Point3& x) { return std::hypot(x.x(), x.y()); }

  /// Unit azimuthal vector.
  inline Eigen::Vector3d phi_hat(const Point3& x)
  {
    const double r = cyl_rho(x);
    return {-x.y() / r, x.x() / r, 0.};
  }

  inline Eigen::Vector3d rho_hat(const Point3& x)
  {
    const double r = cyl_rho(x);
    return {x.x() / r, x.y() / r, 0.};
  }

  /// Toroidal field (cos(pi s) - c) phi_hat with s the distance to the circle rho = R, z = 0.
  struct Toroidal
  {
    double R = 2., c = 0.;

    Eigen::Vector3d field(const Point3& x) const
    {
      const double s = std::hypot(cyl_rho(x) - R, x.z());
      return (std::cos(std::numbers::pi * s) - c) * phi_hat(x);
    }

    Eigen::Vector3d curl(const Point3& x) const
    {
      // curl(f phi_hat) = -f_z rho_hat + (f / rho + f_rho) z_hat
      const double pi = std::numbers::pi;
      const double rho = cyl_rho(x), s = std::hypot(rho - R, x.z());
      const double sinc = s < 1e-12 ? pi * pi : pi * std::sin(pi * s) / s;
      const double f = std::cos(pi * s) - c;
      const double f_rho = -sinc * (rho - R), f_z = -sinc * x.z();
      return -f_z * rho_hat(x) + (f / rho + f_rho) * Eigen::Vector3d::UnitZ();
    }
  };

  /// grad(theta / 2 pi) around the z-axis.
  inline Eigen::Vector3d winding_field(const Point3& x)
  {
    const double r = cyl_rho(x);
    return phi_hat(x) / (2. * std::numbers::pi * r);
  }

  /// Dipole-like potential a = z x / r^4 (div-free).
  inline Eigen::Vector3d dipole_potential(const Point3& x)
  {
    const double r2 = x.squaredNorm();
    return x.z() * x / (r2 * r2);
  }

  inline Eigen::Vector3d dipole_curl(const Point3& x)
  {
    const double r2 = x.squaredNorm();
    return Eigen::Vector3d(-x.y(), x.x(), 0.) / (r2 * r2);
  }

  inline Eigen::Vector3d dipole_current(const Point3& x)
  {
    const double r2 = x.squaredNorm();
    const double rho2 = x.x() * x.x() + x.y() * x.y();
    return 2. / (r2 * r2 * r2) * Eigen::Vector3d(2. * x.x() * x.z(), 2. * x.y() * x.z(), x.z() * x.z() - rho2);
  }

  /// Smooth potential on the unit cube paired with mu^{-1} = 1 + x^2 y^2.
  struct CubePotential
  {
    static double inverse_mu(const Point3& x) { return 1. + x.x() * x.x() * x.y() * x.y(); }
    static Eigen::Vector3d grad_inverse_mu(const Point3& x)
    {
      return {2. * x.x() * x.y() * x.y(), 2. * x.x() * x.x() * x.y(), 0.};
    }

    static Eigen::Vector3d potential(const Point3& x)
    {
      const double w = 2. * std::numbers::pi;
      const double r = std::pow(x.x(), 3), r1 = 3. * x.x() * x.x();
      const double Sy = std::sin(w * x.y()), Cy = std::cos(w * x.y()), Sz = std::sin(w * x.z()), Cz = std::cos(w * x.z());
      return {w * r * Sy * Cz, -r1 * Cy * Cz, -2. * r1 * Sy * Sz};
    }

    static Eigen::Vector3d curl(const Point3& x)
    {
      const double w = 2. * std::numbers::pi;
      const double r = std::pow(x.x(), 3), r1 = 3. * x.x() * x.x(), r2 = 6. * x.x();
      const double Sy = std::sin(w * x.y()), Cy = std::cos(w * x.y()), Sz = std::sin(w * x.z()), Cz = std::cos(w * x.z());
      return {-3. * w * r1 * Cy * Sz, (2. * r2 - w * w * r) * Sy * Sz, -(r2 + w * w * r) * Cy * Cz};
    }

    static Eigen::Vector3d laplacian(const Point3& x)
    {
      const double w = 2. * std::numbers::pi;
      const double r = std::pow(x.x(), 3), r1 = 3. * x.x() * x.x(), r2 = 6. * x.x(), r3 = 6.;
      const double Sy = std::sin(w * x.y()), Cy = std::cos(w * x.y()), Sz = std::sin(w * x.z()), Cz = std::cos(w * x.z());
      return {w * (r2 - 2. * w * w * r) * Sy * Cz, -(r3 - 2. * w * w * r1) * Cy * Cz, -2. * (r3 - 2. * w * w * r1) * Sy * Sz};
    }

    /// curl(mu^{-1} curl a) for div-free a.
    static Eigen::Vector3d current(const Point3& x)
    {
      return -inverse_mu(x) * laplacian(x) + grad_inverse_mu(x).cross(curl(x));
    }
  };

  /// Azimuthal angle in [0, 2 pi).
  inline double angle(const Point3& x)
  {
    const double t = std::atan2(x.y(), x.x());
    return t < 0. ? t + 2. * std::numbers::pi : t;
  }

  /// grad(rho^{2/3} cos(2 phi / 3)) with phi in [0, 2 pi).
  inline Eigen::Vector3d corner_field(const Point3& x)
  {
    const double rho = cyl_rho(x), phi = angle(x);
    const double a = 2. / 3. * std::pow(rho, -1. / 3.);
    return a * (std::cos(2. * phi / 3.) * rho_hat(x) - std::sin(2. * phi / 3.) * phi_hat(x));
  }

  inline double corner_potential(const Point3& x)
  {
    return std::pow(cyl_rho(x), 2. / 3.) * std::cos(2. * angle(x) / 3.);
  }

} // namespace solutions

inline TestCase testcase_torus_field()
{
  TestCase t;
  t.name = "torus_field";
  t.description = "field scheme, toroidal field on the punched box";
  t.scheme = SchemeKind::field;
  t.mesh = generate_punched_box;
  t.resolutions = {1, 2, 3};
  const solutions::Toroidal tor;
  t.exact = [tor](const Point3& x) { return tor.field(x); };
  t.current = [tor](const Point3& x) { return tor.curl(x); };
  t.boundary_field = t.exact;
  t.curl = CurlVariant::broken;
  t.face_space = FaceSpace::rot;
  return t;
}

inline TestCase testcase_harmonic_field()
{
  TestCase t;
  t.name = "harmonic_field";
  t.description = "field scheme, j = 0, winding field grad(theta/2pi) on the punched box";
  t.scheme = SchemeKind::field;
  t.mesh = generate_punched_box;
  t.resolutions = {2, 3, 4};
  t.exact = solutions::winding_field;
  t.boundary_field = t.exact;
  t.pressure_stabilization = true;
  t.potential = [](const Point3& x) { return solutions::angle(x) / (2. * std::numbers::pi); };
  return t;
}

inline TestCase testcase_hollow_potential()
{
  TestCase t;
  t.name = "hollow_potential";
  t.description = "vecpot scheme, dipole potential z x / r^4 on the cavity box";
  t.scheme = SchemeKind::vecpot;
  t.mesh = generate_cavity_box;
  t.resolutions = {1, 2, 3};
  t.exact = solutions::dipole_potential;
  t.current = solutions::dipole_current;
  t.boundary_field = t.exact;
  return t;
}

inline TestCase testcase_variable_mu()
{
  TestCase t;
  t.name = "variable_mu";
  t.description = "vecpot scheme on the unit cube with mu^{-1} = 1 + x^2 y^2";
  t.scheme = SchemeKind::vecpot;
  t.mesh = [](int n) { return generate_box_tet(n, n, n); };
  t.resolutions = {4, 8, 12};
  t.exact = solutions::CubePotential::potential;
  t.current = solutions::CubePotential::current;
  t.boundary_field = t.exact;
  t.inverse_mu = solutions::CubePotential::inverse_mu;
  t.extra_quadrature = 2;
  return t;
}

inline TestCase testcase_singular_field()
{
  TestCase t;
  t.name = "singular_field";
  t.description = "field scheme, corner singularity grad(rho^{2/3} cos(2 phi/3)) on the reentrant prism";
  t.scheme = SchemeKind::field;
  t.mesh = generate_reentrant_prism;
  t.resolutions = {2, 3, 4, 6};
  t.exact = solutions::corner_field;
  t.boundary_field = t.exact;
  t.pressure_stabilization = true;
  t.potential = solutions::corner_potential;
  return t;
}

/// Linear div-free potential reproduced exactly for k >= 1.
inline TestCase testcase_poly_vecpot_linear()
{
  TestCase t;
  t.name = "poly_vecpot_linear";
  t.description = "vecpot scheme, a = (2y+z, 3z-x, x+4y) on 1x1x1 and 2x2x2 tet cubes";
  t.scheme = SchemeKind::vecpot;
  t.mesh = [](int n) { return generate_box_tet(n, n, n); };
  t.resolutions = {1, 2};
  t.exact = [](const Point3& x) { return Eigen::Vector3d(2. * x.y() + x.z(), 3. * x.z() - x.x(), x.x() + 4. * x.y()); };
  t.current = [](const Point3&) { return Eigen::Vector3d::Zero().eval(); };
  t.boundary_field = t.exact;
  return t;
}

/// Quadratic div-free potential reproduced exactly for k >= 2.
inline TestCase testcase_poly_vecpot_quadratic()
{
  TestCase t;
  t.name = "poly_vecpot_quadratic";
  t.description = "vecpot scheme, a = (y^2+yz, z^2+x^2, xy+x) on 1x1x1 and 2x2x2 tet cubes";
  t.scheme = SchemeKind::vecpot;
  t.mesh = [](int n) { return generate_box_tet(n, n, n); };
  t.resolutions = {1, 2};
  t.exact = [](const Point3& x) {
    return Eigen::Vector3d(x.y() * x.y() + x.y() * x.z(), x.z() * x.z() + x.x() * x.x(), x.x() * x.y() + x.x());
  };
  t.current = [](const Point3&) { return Eigen::Vector3d(-2., -4., 0.); };
  t.boundary_field = t.exact;
  return t;
}

/// Scheme switches of a case on a given mesh.
inline SchemeOptions scheme_options(const TestCase& t, const PolyMesh& m)
{
  SchemeOptions o = SchemeOptions::experiment_defaults(m, t.curl);
  if (t.pressure_stabilization) o.pressure_stabilization = *t.pressure_stabilization;
  o.inverse_mu = t.inverse_mu;
  return o;
}

inline std::vector<TestCase> all_testcases()
{
  return {testcase_torus_field(),        testcase_harmonic_field(),    testcase_hollow_potential(),
          testcase_variable_mu(),        testcase_singular_field(),    testcase_poly_vecpot_linear(),
          testcase_poly_vecpot_quadratic()};
}

inline TestCase find_testcase(const std::string& name)
{
  std::string names;
  for (auto& t : all_testcases()) {
    if (t.name == name) return t;
    names += (names.empty() ? "" : ", ") + t.name;
  }
  throw std::invalid_argument("unknown case '" + name + "'; available: " + names);
}

} // namespace hhomag

#endif
