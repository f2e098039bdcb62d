// Structured tetrahedral generators for the test geometries, and random agglomeration.

#ifndef HHOMAG_MESH_GENERATORS_HPP
#define HHOMAG_MESH_GENERATORS_HPP

#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "mesh.hpp"

namespace hhomag {

/// Build a conforming mesh from tetrahedra given by vertex quadruples.
inline PolyMesh mesh_from_tets(std::vector<Point3> vertices, const std::vector<std::array<int, 4>>& tets)
{
  PolyMesh m;
  m.vertices = std::move(vertices);
  std::map<std::array<int, 3>, int> face_of;
  for (int c = 0; c < static_cast<int>(tets.size()); ++c) {
    auto t = tets[c];
    const auto& V = m.vertices;
    if (geom::tet_signed_volume(V[t[0]], V[t[1]], V[t[2]], V[t[3]]) < 0.) std::swap(t[2], t[3]);
    Cell cell;
    cell.tets.push_back(t);
    // outward-oriented facets of a positive tet
    const std::array<std::array<int, 3>, 4> facets{{{t[1], t[2], t[3]}, {t[0], t[3], t[2]}, {t[0], t[1], t[3]}, {t[0], t[2], t[1]}}};
    for (const auto& fv : facets) {
      std::array<int, 3> key = fv;
      std::sort(key.begin(), key.end());
      auto it = face_of.find(key);
      if (it == face_of.end()) {
        Face F;
        F.vertices = {fv[0], fv[1], fv[2]};
        F.triangles.push_back(fv);
        F.cell_plus = c;
        const int f = m.num_faces();
        m.faces.push_back(F);
        face_of.emplace(key, f);
        cell.faces.push_back({f, 1});
      } else {
        Face& F = m.faces[it->second];
        if (F.cell_minus >= 0) throw MeshError("non-manifold facet shared by three tetrahedra");
        F.cell_minus = c;
        cell.faces.push_back({it->second, -1});
      }
    }
    m.cells.push_back(std::move(cell));
  }
  m.update_geometry();
  return m;
}

/// Axis-aligned box bounds.
struct Box
{
  Point3 lo = Point3::Zero();
  Point3 hi = Point3::Ones();
};

/// Kuhn-split structured grid; cubes with `keep(center) == false` are omitted.
inline PolyMesh generate_grid_tet(int nx, int ny, int nz, const Box& box,
                                  const std::function<bool(const Point3&)>& keep = {})
{
  if (nx < 1 || ny < 1 || nz < 1) throw MeshError("grid counts must be at least 1");
  const Eigen::Vector3d ext = box.hi - box.lo;
  if (!(ext.minCoeff() > 0.)) throw MeshError("degenerate box bounds");
  auto vid = [&](int i, int j, int k) { return i + (nx + 1) * (j + (ny + 1) * k); };
  std::vector<Point3> verts((nx + 1) * (ny + 1) * (nz + 1));
  for (int k = 0; k <= nz; ++k)
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i <= nx; ++i)
        verts[vid(i, j, k)] = box.lo + Point3(ext.x() * i / nx, ext.y() * j / ny, ext.z() * k / nz);

  std::vector<std::array<int, 4>> tets;
  static const std::array<std::array<int, 3>, 6> perms{{{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const Point3 mid = 0.5 * (verts[vid(i, j, k)] + verts[vid(i + 1, j + 1, k + 1)]);
        if (keep && !keep(mid)) continue;
        for (const auto& p : perms) {
          std::array<int, 3> ijk{i, j, k};
          std::array<int, 4> t;
          t[0] = vid(ijk[0], ijk[1], ijk[2]);
          for (int s = 0; s < 3; ++s) {
            ++ijk[p[s]];
            t[s + 1] = vid(ijk[0], ijk[1], ijk[2]);
          }
          tets.push_back(t);
        }
      }

  // drop unreferenced vertices
  std::vector<int> remap(verts.size(), -1);
  std::vector<Point3> used;
  for (auto& t : tets)
    for (int& v : t) {
      if (remap[v] < 0) {
        remap[v] = static_cast<int>(used.size());
        used.push_back(verts[v]);
      }
      v = remap[v];
    }
  return mesh_from_tets(std::move(used), tets);
}

inline PolyMesh generate_box_tet(int nx, int ny, int nz, const Box& box = {})
{
  return generate_grid_tet(nx, ny, nz, box);
}

/// [-2,2]^2 x [-1/2,1/2] with the through-hole [-1,1]^2 around the z-axis; `resolution` cubes per unit length.
inline PolyMesh generate_punched_box(int resolution)
{
  if (resolution < 1) throw MeshError("punched box needs resolution >= 1");
  const int n = resolution;
  return generate_grid_tet(4 * n, 4 * n, n, Box{{-2., -2., -0.5}, {2., 2., 0.5}},
                           [](const Point3& x) { return std::max(std::abs(x.x()), std::abs(x.y())) > 1.; });
}

/// [-2,2]^3 with the closed cavity [-1,1]^3 removed.
inline PolyMesh generate_cavity_box(int resolution)
{
  if (resolution < 1) throw MeshError("cavity box needs resolution >= 1");
  const int n = resolution;
  return generate_grid_tet(4 * n, 4 * n, 4 * n, Box{{-2., -2., -2.}, {2., 2., 2.}},
                           [](const Point3& x) { return x.cwiseAbs().maxCoeff() > 1.; });
}

/// [-1,1]^2 x [0,1] minus the quarter {x > 0, y < 0}; reentrant edge on the z-axis.
inline PolyMesh generate_reentrant_prism(int resolution)
{
  if (resolution < 1) throw MeshError("reentrant prism needs resolution >= 1");
  const int n = resolution;
  return generate_grid_tet(2 * n, 2 * n, n, Box{{-1., -1., 0.}, {1., 1., 1.}},
                           [](const Point3& x) { return !(x.x() > 0. && x.y() < 0.); });
}

/// [0,5] x [0,3] x [0,1] pierced by two vertical holes: two independent tunnels.
inline PolyMesh generate_two_handle_box(int resolution)
{
  if (resolution < 1) throw MeshError("two-handle box needs resolution >= 1");
  const int n = resolution;
  return generate_grid_tet(5 * n, 3 * n, n, Box{{0., 0., 0.}, {5., 3., 1.}}, [](const Point3& x) {
    const bool in_y = x.y() > 1. && x.y() < 2.;
    return !(in_y && ((x.x() > 1. && x.x() < 2.) || (x.x() > 3. && x.x() < 4.)));
  });
}

struct AgglomerationStats
{
  int selected = 0;
  int rejected = 0;
};

/// Merge the tetrahedral stars of randomly selected vertices into polyhedral cells.
/// Roughly `target_fraction` of the vertices are tried in a seeded random order; a vertex
/// is accepted only when none of its surrounding tetrahedra has been merged yet.
inline PolyMesh agglomerate_random(const PolyMesh& mesh, unsigned seed, double target_fraction,
                                   AgglomerationStats* stats = nullptr)
{
  if (!(target_fraction > 0. && target_fraction <= 1.)) throw MeshError("target fraction must lie in (0,1]");
  for (const auto& c : mesh.cells)
    if (c.tets.size() != 1 || c.faces.size() != 4) throw MeshError("agglomeration expects a tetrahedral mesh");

  const int nv = mesh.num_vertices();
  std::vector<std::vector<int>> star(nv);
  for (int c = 0; c < mesh.num_cells(); ++c)
    for (int v : mesh.cells[c].tets[0]) star[v].push_back(c);

  // std::shuffle is implementation-defined; a hand-rolled Fisher-Yates keeps runs reproducible
  std::vector<int> order(nv);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937 rng(seed);
  for (int i = nv - 1; i > 0; --i) {
    const int j = static_cast<int>(rng() % static_cast<unsigned>(i + 1));
    std::swap(order[i], order[j]);
  }
  const int tries = static_cast<int>(std::floor(target_fraction * nv));

  std::vector<int> group(mesh.num_cells(), -1);
  int ngroups = 0;
  AgglomerationStats st;
  for (int t = 0; t < tries; ++t) {
    const int v = order[t];
    bool free = star[v].size() > 1;
    for (int c : star[v]) free = free && group[c] < 0;
    if (!free) {
      ++st.rejected;
      continue;
    }
    // face-connectivity of the star
    std::set<int> members(star[v].begin(), star[v].end());
    std::vector<int> stack{star[v].front()};
    std::set<int> reached{star[v].front()};
    while (!stack.empty()) {
      const int c = stack.back();
      stack.pop_back();
      for (const auto& cf : mesh.cells[c].faces) {
        const Face& F = mesh.faces[cf.face];
        const int o = F.cell_plus == c ? F.cell_minus : F.cell_plus;
        if (o >= 0 && members.count(o) && !reached.count(o)) {
          reached.insert(o);
          stack.push_back(o);
        }
      }
    }
    if (reached.size() != members.size()) {
      ++st.rejected;
      continue;
    }
    for (int c : star[v]) group[c] = ngroups;
    ++ngroups;
    ++st.selected;
  }
  for (int c = 0; c < mesh.num_cells(); ++c)
    if (group[c] < 0) group[c] = ngroups++;
  if (stats) *stats = st;

  // renumber groups by their first tetrahedron so that output order follows input order
  std::vector<int> rename(ngroups, -1);
  int next = 0;
  for (int c = 0; c < mesh.num_cells(); ++c)
    if (rename[group[c]] < 0) rename[group[c]] = next++;

  PolyMesh out;
  out.vertices = mesh.vertices;
  out.cells.resize(next);
  out.mu.assign(next, 0.);
  std::vector<double> vol(next, 0.);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const int g = rename[group[c]];
    out.cells[g].tets.push_back(mesh.cells[c].tets[0]);
    out.mu[g] += mesh.mu_of(c) * mesh.cells[c].volume;
    vol[g] += mesh.cells[c].volume;
  }
  for (int g = 0; g < next; ++g) out.mu[g] /= vol[g];
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Face& F = mesh.faces[f];
    const int gp = rename[group[F.cell_plus]];
    const int gm = F.is_boundary() ? -1 : rename[group[F.cell_minus]];
    if (gp == gm) continue;
    Face G;
    G.vertices = F.vertices;
    G.triangles = F.triangles;
    G.cell_plus = gp;
    G.cell_minus = gm;
    const int nf = out.num_faces();
    out.faces.push_back(G);
    out.cells[gp].faces.push_back({nf, 1});
    if (gm >= 0) out.cells[gm].faces.push_back({nf, -1});
  }
  out.update_geometry();
  return out;
}

/// Named geometry families; `resolution` is the number of cubes per unit length.
struct Geometry
{
  std::string name;
  std::string description;
  std::function<PolyMesh(int)> generate;
};

inline std::vector<Geometry> geometries()
{
  return {
    {"box", "unit cube", [](int n) { return generate_box_tet(n, n, n); }},
    {"punched_box", "box with a through-hole, one tunnel", generate_punched_box},
    {"cavity_box", "box with a closed cavity, one void", generate_cavity_box},
    {"reentrant_prism", "three-quarter prism with a reentrant edge", generate_reentrant_prism},
    {"two_handle_box", "slab with two through-holes", generate_two_handle_box},
  };
}

inline Geometry find_geometry(const std::string& name)
{
  std::string names;
  for (auto& g : geometries()) {
    if (g.name == name) return g;
    names += (names.empty() ? "" : ", ") + g.name;
  }
  throw std::invalid_argument("unknown geometry '" + name + "'; available: " + names);
}

} // namespace hhomag

#endif
