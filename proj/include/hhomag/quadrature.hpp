// Composite quadrature on tetrahedra and triangles (collapsed Gauss-Legendre rules).

#ifndef HHOMAG_QUADRATURE_HPP
#define HHOMAG_QUADRATURE_HPP

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hhomag {

using Point3 = Eigen::Vector3d;

/// Points and positive weights over a region, exact on polynomials up to `degree`.
struct QuadratureRule
{
  std::vector<Point3> points;
  std::vector<double> weights;
  int degree = 0;

  std::size_t size() const { return points.size(); }

  double total_weight() const
  {
    double s = 0.;
    for (double w : weights) s += w;
    return s;
  }

  void append(const QuadratureRule& other)
  {
    points.insert(points.end(), other.points.begin(), other.points.end());
    weights.insert(weights.end(), other.weights.begin(), other.weights.end());
  }
};

inline constexpr int max_quadrature_degree = 40;

namespace detail {

  // Gauss-Legendre nodes/weights on [0,1].
  inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre01(int n)
  {
    std::vector<double> x(n), w(n);
    for (int i = 0; i < n; ++i) {
      double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double dp = 0.;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1., p1 = 0.;
        for (int j = 1; j <= n; ++j) {
          double p2 = p1;
          p1 = p0;
          p0 = ((2. * j - 1.) * z * p1 - (j - 1.) * p2) / j;
        }
        dp = n * (z * p0 - p1) / (z * z - 1.);
        double dz = p0 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-16) break;
      }
      {
        double p0 = 1., p1 = 0.;
        for (int j = 1; j <= n; ++j) {
          double p2 = p1;
          p1 = p0;
          p0 = ((2. * j - 1.) * z * p1 - (j - 1.) * p2) / j;
        }
        dp = n * (z * p0 - p1) / (z * z - 1.);
      }
      x[i] = 0.5 * (1. - z);
      w[i] = 1. / ((1. - z * z) * dp * dp);
    }
    return {x, w};
  }

  struct RefRule
  {
    std::vector<std::array<double, 3>> bary;  // reference coordinates
    std::vector<double> weights;              // sum = reference measure
  };

  // Reference tetrahedron {x,y,z >= 0, x+y+z <= 1}, volume 1/6.
  inline RefRule make_ref_tet(int degree)
  {
    const int nu = (degree + 3) / 2 + 1, nv = (degree + 2) / 2 + 1, nw = (degree + 1) / 2 + 1;
    auto [xu, wu] = gauss_legendre01(nu);
    auto [xv, wv] = gauss_legendre01(nv);
    auto [xw, ww] = gauss_legendre01(nw);
    RefRule r;
    for (int a = 0; a < nu; ++a)
      for (int b = 0; b < nv; ++b)
        for (int c = 0; c < nw; ++c) {
          const double u = xu[a], v = xv[b], s = xw[c];
          r.bary.push_back({u, v * (1. - u), s * (1. - u) * (1. - v)});
          r.weights.push_back(wu[a] * wv[b] * ww[c] * (1. - u) * (1. - u) * (1. - v));
        }
    return r;
  }

  // Reference triangle {x,y >= 0, x+y <= 1}, area 1/2.
  inline RefRule make_ref_tri(int degree)
  {
    const int nu = (degree + 2) / 2 + 1, nv = (degree + 1) / 2 + 1;
    auto [xu, wu] = gauss_legendre01(nu);
    auto [xv, wv] = gauss_legendre01(nv);
    RefRule r;
    for (int a = 0; a < nu; ++a)
      for (int b = 0; b < nv; ++b) {
        const double u = xu[a], v = xv[b];
        r.bary.push_back({u, v * (1. - u), 0.});
        r.weights.push_back(wu[a] * wv[b] * (1. - u));
      }
    return r;
  }

  inline const RefRule& ref_rule(int dim, int degree)
  {
    static const auto tables = [] {
      std::array<std::vector<RefRule>, 2> t;
      for (int d = 0; d <= max_quadrature_degree; ++d) {
        t[0].push_back(make_ref_tri(d));
        t[1].push_back(make_ref_tet(d));
      }
      return t;
    }();
    if (degree < 0) degree = 0;
    if (degree > max_quadrature_degree)
      throw std::invalid_argument("quadrature degree " + std::to_string(degree) + " exceeds supported maximum "
                                  + std::to_string(max_quadrature_degree));
    return tables[dim == 3 ? 1 : 0][degree];
  }

} // namespace detail

/// Rule on the tetrahedron with vertices a, b, c, d.
inline QuadratureRule tetrahedron_quadrature(const Point3& a, const Point3& b, const Point3& c, const Point3& d,
                                             int degree)
{
  const auto& ref = detail::ref_rule(3, degree);
  const Eigen::Vector3d e1 = b - a, e2 = c - a, e3 = d - a;
  const double jac = std::abs(e1.dot(e2.cross(e3)));
  QuadratureRule q;
  q.degree = degree;
  q.points.reserve(ref.weights.size());
  q.weights.reserve(ref.weights.size());
  for (std::size_t i = 0; i < ref.weights.size(); ++i) {
    const auto& r = ref.bary[i];
    q.points.push_back(a + r[0] * e1 + r[1] * e2 + r[2] * e3);
    q.weights.push_back(ref.weights[i] * jac);
  }
  return q;
}

/// Rule on the triangle with vertices a, b, c (embedded in 3D).
inline QuadratureRule triangle_quadrature(const Point3& a, const Point3& b, const Point3& c, int degree)
{
  const auto& ref = detail::ref_rule(2, degree);
  const Eigen::Vector3d e1 = b - a, e2 = c - a;
  const double jac = e1.cross(e2).norm();
  QuadratureRule q;
  q.degree = degree;
  q.points.reserve(ref.weights.size());
  q.weights.reserve(ref.weights.size());
  for (std::size_t i = 0; i < ref.weights.size(); ++i) {
    const auto& r = ref.bary[i];
    q.points.push_back(a + r[0] * e1 + r[1] * e2);
    q.weights.push_back(ref.weights[i] * jac);
  }
  return q;
}

} // namespace hhomag

#endif
