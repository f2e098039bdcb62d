// Polyhedral mesh with triangle/tetrahedron subtessellations and geometric metadata.

#ifndef HHOMAG_MESH_HPP
#define HHOMAG_MESH_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "quadrature.hpp"

namespace hhomag {

class MeshError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

namespace geom {

  inline double tet_signed_volume(const Point3& a, const Point3& b, const Point3& c, const Point3& d)
  {
    return (b - a).dot((c - a).cross(d - a)) / 6.;
  }

  inline Eigen::Vector3d triangle_area_vector(const Point3& a, const Point3& b, const Point3& c)
  {
    return 0.5 * (b - a).cross(c - a);
  }

  /// Incenter and inradius of a triangle.
  inline std::pair<Point3, double> triangle_incircle(const Point3& a, const Point3& b, const Point3& c)
  {
    const double la = (b - c).norm(), lb = (c - a).norm(), lc = (a - b).norm();
    const double per = la + lb + lc;
    const double area = triangle_area_vector(a, b, c).norm();
    return {(la * a + lb * b + lc * c) / per, 2. * area / per};
  }

  /// Incenter and inradius of a tetrahedron.
  inline std::pair<Point3, double> tet_insphere(const Point3& a, const Point3& b, const Point3& c, const Point3& d)
  {
    // face opposite to each vertex weights that vertex
    const double sa = triangle_area_vector(b, c, d).norm();
    const double sb = triangle_area_vector(a, c, d).norm();
    const double sc = triangle_area_vector(a, b, d).norm();
    const double sd = triangle_area_vector(a, b, c).norm();
    const double s = sa + sb + sc + sd;
    const double vol = std::abs(tet_signed_volume(a, b, c, d));
    return {(sa * a + sb * b + sc * c + sd * d) / s, 3. * vol / s};
  }

  inline double max_pairwise_distance(const std::vector<Point3>& pts)
  {
    double d = 0.;
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t j = i + 1; j < pts.size(); ++j) d = std::max(d, (pts[i] - pts[j]).norm());
    return d;
  }

} // namespace geom

struct Face
{
  std::vector<int> vertices;                  // oriented loop, right-hand rule gives normal
  std::vector<std::array<int, 3>> triangles;  // oriented like the loop
  int cell_plus = -1;                         // cell with eps = +1
  int cell_minus = -1;                        // -1 for boundary faces

  // filled by PolyMesh::update_geometry
  Eigen::Vector3d normal = Eigen::Vector3d::Zero();
  Point3 center = Point3::Zero();
  double diameter = 0.;
  double area = 0.;
  double inradius = 0.;

  bool is_boundary() const { return cell_minus < 0; }
};

struct CellFace
{
  int face;
  int sign;  // eps_{T,F}
};

struct Cell
{
  std::vector<CellFace> faces;
  std::vector<std::array<int, 4>> tets;  // positively oriented

  Point3 center = Point3::Zero();
  double diameter = 0.;
  double volume = 0.;
  double inradius = 0.;

  int local_index(int face) const
  {
    for (std::size_t i = 0; i < faces.size(); ++i)
      if (faces[i].face == face) return static_cast<int>(i);
    return -1;
  }
};

class PolyMesh
{
public:
  std::vector<Point3> vertices;
  std::vector<Face> faces;
  std::vector<Cell> cells;
  std::vector<double> mu;  // per-cell permeability, defaults to 1

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_faces() const { return static_cast<int>(faces.size()); }
  int num_cells() const { return static_cast<int>(cells.size()); }

  double mu_of(int c) const { return mu.empty() ? 1. : mu[c]; }

  std::vector<int> interface_faces() const
  {
    std::vector<int> r;
    for (int f = 0; f < num_faces(); ++f)
      if (!faces[f].is_boundary()) r.push_back(f);
    return r;
  }

  std::vector<int> boundary_faces() const
  {
    std::vector<int> r;
    for (int f = 0; f < num_faces(); ++f)
      if (faces[f].is_boundary()) r.push_back(f);
    return r;
  }

  double mesh_size() const
  {
    double h = 0.;
    for (const auto& c : cells) h = std::max(h, c.diameter);
    return h;
  }

  double total_volume() const
  {
    double v = 0.;
    for (const auto& c : cells) v += c.volume;
    return v;
  }

  bool all_tetrahedral() const
  {
    for (const auto& c : cells)
      if (c.faces.size() != 4 || c.tets.size() != 1) return false;
    return true;
  }

  /// Vertex indices touched by a cell (sorted, unique).
  std::vector<int> cell_vertices(int c) const
  {
    std::vector<int> v;
    for (const auto& cf : cells[c].faces)
      for (int i : faces[cf.face].vertices) v.push_back(i);
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
  }

  /// Composite rule over the cell subtessellation.
  QuadratureRule cell_quadrature(int c, int degree) const
  {
    QuadratureRule q;
    q.degree = degree;
    for (const auto& t : cells[c].tets)
      q.append(tetrahedron_quadrature(vertices[t[0]], vertices[t[1]], vertices[t[2]], vertices[t[3]], degree));
    return q;
  }

  /// Composite rule over the face subtessellation.
  QuadratureRule face_quadrature(int f, int degree) const
  {
    QuadratureRule q;
    q.degree = degree;
    for (const auto& t : faces[f].triangles)
      q.append(triangle_quadrature(vertices[t[0]], vertices[t[1]], vertices[t[2]], degree));
    return q;
  }

  /// Reverse the orientation of a face: loop, triangles, normal, and cell signs.
  void flip_face(int f)
  {
    Face& F = faces[f];
    if (F.is_boundary()) throw MeshError("cannot flip boundary face " + std::to_string(f));
    std::reverse(F.vertices.begin(), F.vertices.end());
    for (auto& t : F.triangles) std::swap(t[1], t[2]);
    F.normal = -F.normal;
    std::swap(F.cell_plus, F.cell_minus);
    for (int c : {F.cell_plus, F.cell_minus})
      for (auto& cf : cells[c].faces)
        if (cf.face == f) cf.sign = -cf.sign;
  }

  /// Fill normals, centers, diameters, areas and volumes; then check consistency.
  void update_geometry()
  {
    for (int f = 0; f < num_faces(); ++f) {
      Face& F = faces[f];
      if (F.vertices.size() < 3) throw MeshError("face " + std::to_string(f) + " has fewer than 3 vertices");
      if (F.triangles.empty()) {
        for (std::size_t i = 1; i + 1 < F.vertices.size(); ++i)
          F.triangles.push_back({F.vertices[0], F.vertices[i], F.vertices[i + 1]});
      }
      Eigen::Vector3d av = Eigen::Vector3d::Zero();
      double best = -1.;
      F.area = 0.;
      for (const auto& t : F.triangles) {
        const auto a = geom::triangle_area_vector(vertices[t[0]], vertices[t[1]], vertices[t[2]]);
        av += a;
        F.area += a.norm();
        auto [ic, r] = geom::triangle_incircle(vertices[t[0]], vertices[t[1]], vertices[t[2]]);
        if (r > best) {
          best = r;
          F.center = ic;
        }
      }
      F.inradius = best;
      if (av.norm() <= 0.) throw MeshError("face " + std::to_string(f) + " has zero area");
      F.normal = av.normalized();
      std::vector<Point3> pts;
      for (int v : F.vertices) pts.push_back(vertices[v]);
      F.diameter = geom::max_pairwise_distance(pts);
      for (const auto& p : pts) {
        if (std::abs((p - pts[0]).dot(F.normal)) > 1e-9 * F.diameter)
          throw MeshError("face " + std::to_string(f) + " is not planar");
      }
      // triangles must share the face orientation and tile the face without overlap
      double tri_signed = 0.;
      for (const auto& t : F.triangles)
        tri_signed += geom::triangle_area_vector(vertices[t[0]], vertices[t[1]], vertices[t[2]]).dot(F.normal);
      if (std::abs(tri_signed - F.area) > 1e-12 * std::max(1., F.area))
        throw MeshError("face " + std::to_string(f) + " subtessellation is not consistently oriented");
    }
    for (int c = 0; c < num_cells(); ++c) {
      Cell& C = cells[c];
      if (C.faces.empty()) throw MeshError("cell " + std::to_string(c) + " has no faces");
      std::vector<Point3> pts;
      for (int v : cell_vertices(c)) pts.push_back(vertices[v]);
      C.diameter = geom::max_pairwise_distance(pts);
      if (C.tets.empty()) build_pyramids(c);
      C.volume = 0.;
      double best = -1.;
      for (auto& t : C.tets) {
        double v = geom::tet_signed_volume(vertices[t[0]], vertices[t[1]], vertices[t[2]], vertices[t[3]]);
        if (v < 0.) {
          std::swap(t[2], t[3]);
          v = -v;
        }
        C.volume += v;
        auto [ic, r] = geom::tet_insphere(vertices[t[0]], vertices[t[1]], vertices[t[2]], vertices[t[3]]);
        if (r > best) {
          best = r;
          C.center = ic;
        }
      }
      C.inradius = best;
      if (!(C.volume > 0.)) throw MeshError("cell " + std::to_string(c) + " has zero volume");
    }
    if (mu.empty()) mu.assign(cells.size(), 1.);
    check();
  }

  /// Structural and geometric consistency checks; throws MeshError on violation.
  void check() const
  {
    std::vector<int> seen(faces.size(), 0);
    for (int c = 0; c < num_cells(); ++c) {
      const Cell& C = cells[c];
      Eigen::Vector3d closure = Eigen::Vector3d::Zero();
      double scale = 0.;
      double boundary_flux = 0.;  // sum eps |F| n_F . (x_F - x_T) = 3 |T|
      for (const auto& cf : C.faces) {
        if (cf.face < 0 || cf.face >= num_faces())
          throw MeshError("cell " + std::to_string(c) + " references missing face " + std::to_string(cf.face));
        const Face& F = faces[cf.face];
        ++seen[cf.face];
        const int expect = F.cell_plus == c ? 1 : (F.cell_minus == c ? -1 : 0);
        if (expect == 0 || expect != cf.sign)
          throw MeshError("cell " + std::to_string(c) + ": inconsistent orientation of face " + std::to_string(cf.face));
        closure += cf.sign * F.area * F.normal;
        scale += F.area;
        for (const auto& t : F.triangles) {
          const auto a = geom::triangle_area_vector(vertices[t[0]], vertices[t[1]], vertices[t[2]]);
          boundary_flux += cf.sign * a.dot((vertices[t[0]] + vertices[t[1]] + vertices[t[2]]) / 3.);
        }
      }
      if (closure.norm() > 1e-12 * std::max(1., scale))
        throw MeshError("cell " + std::to_string(c) + " boundary is not closed");
      if (std::abs(boundary_flux - 3. * C.volume) > 1e-9 * std::max(1., std::abs(3. * C.volume)))
        throw MeshError("cell " + std::to_string(c) + " has inward-pointing face normals");
    }
    for (int f = 0; f < num_faces(); ++f) {
      const int expect = faces[f].is_boundary() ? 1 : 2;
      if (seen[f] != expect)
        throw MeshError("face " + std::to_string(f) + " is referenced by " + std::to_string(seen[f]) + " cells");
    }
  }

private:
  // Fallback subtessellation when none is given: cone from one cell vertex (valid for convex cells).
  void build_pyramids(int c)
  {
    Cell& C = cells[c];
    const int apex = cell_vertices(c).front();
    for (const auto& cf : C.faces)
      for (const auto& t : faces[cf.face].triangles) {
        if (t[0] == apex || t[1] == apex || t[2] == apex) continue;
        const double v = geom::tet_signed_volume(vertices[t[0]], vertices[t[1]], vertices[t[2]], vertices[apex]);
        const double h = faces[cf.face].diameter;
        if (std::abs(v) <= 1e-14 * h * h * h) continue;
        C.tets.push_back({t[0], t[1], t[2], apex});
      }
  }
};

} // namespace hhomag

#endif
