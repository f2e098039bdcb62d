// Betti numbers, boundary components and cutting surfaces of a polyhedral mesh.

#ifndef HHOMAG_TOPOLOGY_HPP
#define HHOMAG_TOPOLOGY_HPP

#include <deque>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <unordered_map>

#include "mesh.hpp"

namespace hhomag {

class TopologyError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

namespace detail {

  class DisjointSets
  {
  public:
    explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
    int find(int i)
    {
      while (parent_[i] != i) {
        parent_[i] = parent_[parent_[i]];
        i = parent_[i];
      }
      return i;
    }
    void unite(int a, int b)
    {
      a = find(a);
      b = find(b);
      if (a == b) return;
      if (a < b) std::swap(a, b);
      parent_[a] = b;  // smallest index is the representative
    }
    int count_roots()
    {
      int n = 0;
      for (int i = 0; i < static_cast<int>(parent_.size()); ++i) n += find(i) == i;
      return n;
    }

  private:
    std::vector<int> parent_;
  };

} // namespace detail

/// Edges of the polyhedral complex and their incidence with face loops.
struct EdgeComplex
{
  std::vector<std::array<int, 2>> edges;                // (lo, hi) vertex pair
  std::vector<std::vector<std::pair<int, int>>> face_edges;  // per face: (edge, +1 if traversed lo->hi)
  std::vector<std::vector<int>> edge_faces;
  std::vector<char> on_boundary;                        // edge touches a boundary face

  explicit EdgeComplex(const PolyMesh& m)
  {
    std::map<std::array<int, 2>, int> id;
    face_edges.resize(m.num_faces());
    for (int f = 0; f < m.num_faces(); ++f) {
      const auto& loop = m.faces[f].vertices;
      for (std::size_t i = 0; i < loop.size(); ++i) {
        const int a = loop[i], b = loop[(i + 1) % loop.size()];
        const std::array<int, 2> key{std::min(a, b), std::max(a, b)};
        auto [it, fresh] = id.try_emplace(key, static_cast<int>(edges.size()));
        if (fresh) {
          edges.push_back(key);
          edge_faces.emplace_back();
        }
        face_edges[f].push_back({it->second, a < b ? 1 : -1});
        edge_faces[it->second].push_back(f);
      }
    }
    on_boundary.assign(edges.size(), 0);
    for (int f = 0; f < m.num_faces(); ++f)
      if (m.faces[f].is_boundary())
        for (auto [e, s] : face_edges[f]) on_boundary[e] = 1;
  }

  int incidence(int f, int e) const
  {
    for (auto [g, s] : face_edges[f])
      if (g == e) return s;
    return 0;
  }
};

struct BoundaryComponent
{
  int index = 0;
  std::vector<int> faces;
  double area = 0.;
  Point3 lo, hi;  // bounding box
};

/// A set of interfaces whose normals all agree with the surface normal.
struct CuttingSurface
{
  int index = 0;
  std::vector<int> faces;
};

struct TopologyInfo
{
  int beta0 = 1;
  int beta1 = 0;
  int beta2 = 0;
  int euler = 0;
  std::vector<BoundaryComponent> boundary;  // boundary[0] is the outer component
  std::vector<CuttingSurface> surfaces;

  /// Component index per face (-1 for interfaces).
  std::vector<int> boundary_index(const PolyMesh& m) const
  {
    std::vector<int> r(m.num_faces(), -1);
    for (const auto& b : boundary)
      for (int f : b.faces) r[f] = b.index;
    return r;
  }

  /// Surface index per face (-1 if the face is not on a cutting surface).
  std::vector<int> surface_index(const PolyMesh& m) const
  {
    std::vector<int> r(m.num_faces(), -1);
    for (const auto& s : surfaces)
      for (int f : s.faces) r[f] = s.index;
    return r;
  }
};

/// Topological summary of the complex obtained by cutting along a set of interfaces.
struct CutComplexSummary
{
  int vertices = 0, edges = 0, faces = 0, cells = 0;
  int euler = 0;
  int components = 0;
  int boundary_components = 0;
  int beta1 = 0, beta2 = 0;
};

/// Duplicates every cut face (and the vertices/edges that get separated) and counts.
inline CutComplexSummary cut_complex_summary(const PolyMesh& m, const EdgeComplex& ec, const std::vector<char>& cut)
{
  const int nc = m.num_cells();
  // (cell, vertex) and (cell, edge) slots
  std::vector<std::vector<int>> cverts(nc), cedges(nc);
  std::vector<int> voff(nc + 1, 0), eoff(nc + 1, 0);
  for (int c = 0; c < nc; ++c) {
    cverts[c] = m.cell_vertices(c);
    for (const auto& cf : m.cells[c].faces)
      for (auto [e, s] : ec.face_edges[cf.face]) cedges[c].push_back(e);
    std::sort(cedges[c].begin(), cedges[c].end());
    cedges[c].erase(std::unique(cedges[c].begin(), cedges[c].end()), cedges[c].end());
    voff[c + 1] = voff[c] + static_cast<int>(cverts[c].size());
    eoff[c + 1] = eoff[c] + static_cast<int>(cedges[c].size());
  }
  auto vslot = [&](int c, int v) {
    auto it = std::lower_bound(cverts[c].begin(), cverts[c].end(), v);
    return voff[c] + static_cast<int>(it - cverts[c].begin());
  };
  auto eslot = [&](int c, int e) {
    auto it = std::lower_bound(cedges[c].begin(), cedges[c].end(), e);
    return eoff[c] + static_cast<int>(it - cedges[c].begin());
  };

  detail::DisjointSets vs(voff[nc]), es(eoff[nc]), cs(nc);
  int nfaces = 0;
  for (int f = 0; f < m.num_faces(); ++f) {
    const Face& F = m.faces[f];
    if (F.is_boundary() || cut[f]) {
      nfaces += F.is_boundary() ? 1 : 2;
      continue;
    }
    ++nfaces;
    const int a = F.cell_plus, b = F.cell_minus;
    cs.unite(a, b);
    for (int v : F.vertices) vs.unite(vslot(a, v), vslot(b, v));
    for (auto [e, s] : ec.face_edges[f]) es.unite(eslot(a, e), eslot(b, e));
  }

  CutComplexSummary r;
  r.vertices = vs.count_roots();
  r.edges = es.count_roots();
  r.faces = nfaces;
  r.cells = nc;
  r.euler = r.vertices - r.edges + r.faces - r.cells;
  r.components = cs.count_roots();

  // boundary face copies glued along shared edge classes
  std::vector<std::pair<int, int>> copies;  // (face, cell)
  for (int f = 0; f < m.num_faces(); ++f) {
    const Face& F = m.faces[f];
    if (F.is_boundary()) copies.push_back({f, F.cell_plus});
    else if (cut[f]) {
      copies.push_back({f, F.cell_plus});
      copies.push_back({f, F.cell_minus});
    }
  }
  detail::DisjointSets bs(copies.size());
  std::unordered_map<int, int> first_copy;  // edge class -> copy
  for (int i = 0; i < static_cast<int>(copies.size()); ++i) {
    auto [f, c] = copies[i];
    for (auto [e, s] : ec.face_edges[f]) {
      const int cls = es.find(eslot(c, e));
      auto [it, fresh] = first_copy.try_emplace(cls, i);
      if (!fresh) bs.unite(it->second, i);
    }
  }
  r.boundary_components = bs.count_roots();
  r.beta2 = r.boundary_components - r.components;
  r.beta1 = r.components + r.beta2 - r.euler;
  return r;
}

/// Connected components of the boundary; component 0 has the outermost bounding box.
inline std::vector<BoundaryComponent> boundary_components(const PolyMesh& m, const EdgeComplex& ec)
{
  const auto bfaces = m.boundary_faces();
  if (bfaces.empty()) throw TopologyError("mesh has an empty boundary");
  std::vector<int> pos(m.num_faces(), -1);
  for (int i = 0; i < static_cast<int>(bfaces.size()); ++i) pos[bfaces[i]] = i;
  detail::DisjointSets ds(bfaces.size());
  for (std::size_t e = 0; e < ec.edges.size(); ++e) {
    int first = -1;
    for (int f : ec.edge_faces[e])
      if (pos[f] >= 0) {
        if (first < 0) first = pos[f];
        else ds.unite(first, pos[f]);
      }
  }
  std::map<int, int> comp_of_root;
  std::vector<BoundaryComponent> comps;
  for (int i = 0; i < static_cast<int>(bfaces.size()); ++i) {
    const int r = ds.find(i);
    auto [it, fresh] = comp_of_root.try_emplace(r, static_cast<int>(comps.size()));
    if (fresh) {
      BoundaryComponent bc;
      bc.lo = Point3::Constant(std::numeric_limits<double>::infinity());
      bc.hi = -bc.lo;
      comps.push_back(bc);
    }
    auto& bc = comps[it->second];
    const Face& F = m.faces[bfaces[i]];
    bc.faces.push_back(bfaces[i]);
    bc.area += F.area;
    for (int v : F.vertices) {
      bc.lo = bc.lo.cwiseMin(m.vertices[v]);
      bc.hi = bc.hi.cwiseMax(m.vertices[v]);
    }
  }
  auto box_volume = [](const BoundaryComponent& b) { return (b.hi - b.lo).prod(); };
  std::size_t outer = 0;
  for (std::size_t i = 1; i < comps.size(); ++i)
    if (box_volume(comps[i]) > box_volume(comps[outer])) outer = i;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    if (i == outer) continue;
    const bool inside = (comps[i].lo.array() >= comps[outer].lo.array()).all()
                        && (comps[i].hi.array() <= comps[outer].hi.array()).all();
    if (!inside) throw TopologyError("boundary components are not nested; cannot identify the outer one");
  }
  std::rotate(comps.begin(), comps.begin() + outer, comps.begin() + outer + 1);
  for (std::size_t i = 0; i < comps.size(); ++i) comps[i].index = static_cast<int>(i);
  return comps;
}

/// Betti numbers and boundary components (no cutting surfaces).
inline TopologyInfo betti_numbers(const PolyMesh& m)
{
  EdgeComplex ec(m);
  TopologyInfo info;
  const auto s = cut_complex_summary(m, ec, std::vector<char>(m.num_faces(), 0));
  if (s.components != 1) throw TopologyError("mesh is not connected (" + std::to_string(s.components) + " pieces)");
  info.boundary = boundary_components(m, ec);
  info.beta0 = 1;
  info.euler = s.euler;
  info.beta2 = static_cast<int>(info.boundary.size()) - 1;
  info.beta1 = 1 + info.beta2 - info.euler;
  return info;
}

namespace detail {

  using SymExpr = std::map<int, double>;  // free variable -> coefficient

  inline void axpy(SymExpr& y, double a, const SymExpr& x)
  {
    for (auto [k, v] : x) {
      double& t = y[k];
      t += a * v;
      if (t == 0.) y.erase(k);
    }
  }

  // One integer-valued cocycle on the cut dual complex, or empty when none is left.
  inline std::vector<int> next_cocycle(const PolyMesh& m, const EdgeComplex& ec, const std::vector<char>& cut)
  {
    const int nf = m.num_faces(), nc = m.num_cells();
    // spanning tree of the dual graph by breadth-first search
    std::vector<char> tree(nf, 0), seen(nc, 0);
    std::deque<int> q{0};
    seen[0] = 1;
    int reached = 1;
    while (!q.empty()) {
      const int c = q.front();
      q.pop_front();
      for (const auto& cf : m.cells[c].faces) {
        const Face& F = m.faces[cf.face];
        if (F.is_boundary() || cut[cf.face]) continue;
        const int o = F.cell_plus == c ? F.cell_minus : F.cell_plus;
        if (seen[o]) continue;
        seen[o] = 1;
        tree[cf.face] = 1;
        ++reached;
        q.push_back(o);
      }
    }
    if (reached != nc) throw TopologyError("cut domain is disconnected");

    std::vector<int> unknown(nf, 0);
    for (int f = 0; f < nf; ++f) unknown[f] = !m.faces[f].is_boundary() && !cut[f] && !tree[f];

    std::vector<int> rings;
    for (int e = 0; e < static_cast<int>(ec.edges.size()); ++e) {
      if (ec.on_boundary[e]) continue;
      bool ok = true;
      for (int f : ec.edge_faces[e]) ok = ok && !cut[f];
      if (ok) rings.push_back(e);
    }
    std::vector<std::vector<int>> face_rings(nf);
    std::vector<int> pending(rings.size(), 0);
    for (int r = 0; r < static_cast<int>(rings.size()); ++r)
      for (int f : ec.edge_faces[rings[r]])
        if (unknown[f]) {
          face_rings[f].push_back(r);
          ++pending[r];
        }

    std::vector<SymExpr> expr(nf);
    std::vector<char> known(nf, 0);
    for (int f = 0; f < nf; ++f) known[f] = !unknown[f];
    std::deque<int> ready;
    for (int r = 0; r < static_cast<int>(rings.size()); ++r)
      if (pending[r] == 1) ready.push_back(r);
    int nvars = 0;
    int next_free = 0;
    auto settle = [&](int f) {
      known[f] = 1;
      for (int r : face_rings[f])
        if (--pending[r] == 1) ready.push_back(r);
    };
    for (;;) {
      while (!ready.empty()) {
        const int r = ready.front();
        ready.pop_front();
        if (pending[r] != 1) continue;
        const int e = rings[r];
        int target = -1;
        SymExpr sum;
        for (int f : ec.edge_faces[e]) {
          if (!known[f]) target = f;
          else axpy(sum, ec.incidence(f, e), expr[f]);
        }
        // inc(target) * x_target + sum = 0
        expr[target].clear();
        axpy(expr[target], -1. / ec.incidence(target, e), sum);
        settle(target);
      }
      while (next_free < nf && known[next_free]) ++next_free;
      if (next_free == nf) break;
      expr[next_free] = {{nvars++, 1.}};
      settle(next_free);
    }
    if (nvars == 0) return {};

    // residual ring equations restrict the free variables
    std::vector<std::vector<double>> rows;
    for (int e : rings) {
      SymExpr sum;
      for (int f : ec.edge_faces[e]) axpy(sum, ec.incidence(f, e), expr[f]);
      bool nz = false;
      std::vector<double> row(nvars, 0.);
      for (auto [k, v] : sum)
        if (std::abs(v) > 1e-9) {
          row[k] = v;
          nz = true;
        }
      if (nz) rows.push_back(std::move(row));
    }
    // reduced row echelon form
    std::vector<int> pivot_col;
    int rank = 0;
    for (int col = 0; col < nvars && rank < static_cast<int>(rows.size()); ++col) {
      int best = -1;
      for (int i = rank; i < static_cast<int>(rows.size()); ++i)
        if (std::abs(rows[i][col]) > 1e-9 && (best < 0 || std::abs(rows[i][col]) > std::abs(rows[best][col]))) best = i;
      if (best < 0) continue;
      std::swap(rows[rank], rows[best]);
      const double p = rows[rank][col];
      for (double& x : rows[rank]) x /= p;
      for (int i = 0; i < static_cast<int>(rows.size()); ++i)
        if (i != rank && rows[i][col] != 0.) {
          const double a = rows[i][col];
          for (int j = 0; j < nvars; ++j) rows[i][j] -= a * rows[rank][j];
        }
      pivot_col.push_back(col);
      ++rank;
    }
    std::vector<char> is_pivot(nvars, 0);
    for (int c : pivot_col) is_pivot[c] = 1;

    for (int free_col = 0; free_col < nvars; ++free_col) {
      if (is_pivot[free_col]) continue;
      std::vector<double> x(nvars, 0.);
      x[free_col] = 1.;
      for (int i = 0; i < rank; ++i) x[pivot_col[i]] = -rows[i][free_col];
      std::vector<double> z(nf, 0.);
      double smallest = std::numeric_limits<double>::infinity();
      for (int f = 0; f < nf; ++f) {
        for (auto [k, v] : expr[f]) z[f] += v * x[k];
        if (std::abs(z[f]) > 1e-9) smallest = std::min(smallest, std::abs(z[f]));
      }
      if (!std::isfinite(smallest)) continue;
      std::vector<int> zi(nf, 0);
      bool unit = true;
      for (int f = 0; f < nf; ++f) {
        const double s = z[f] / smallest;
        zi[f] = static_cast<int>(std::lround(s));
        unit = unit && std::abs(s - zi[f]) < 1e-9 && std::abs(zi[f]) <= 1;
      }
      if (unit) return zi;
    }
    throw TopologyError("could not extract a unit cocycle for a cutting surface");
  }

} // namespace detail

/// Computes face-disjoint cutting surfaces and orients their faces (flipping mesh faces as needed).
inline std::vector<CuttingSurface> compute_cutting_surfaces(PolyMesh& m, const TopologyInfo& info)
{
  std::vector<CuttingSurface> out;
  if (info.beta1 == 0) return out;
  EdgeComplex ec(m);
  std::vector<char> cut(m.num_faces(), 0);
  for (;;) {
    const auto z = detail::next_cocycle(m, ec, cut);
    if (z.empty()) break;
    CuttingSurface s;
    s.index = static_cast<int>(out.size()) + 1;
    for (int f = 0; f < m.num_faces(); ++f) {
      if (z[f] == 0) continue;
      if (z[f] < 0) m.flip_face(f);
      s.faces.push_back(f);
      cut[f] = 1;
    }
    out.push_back(std::move(s));
    if (static_cast<int>(out.size()) > info.beta1) break;
  }
  if (static_cast<int>(out.size()) != info.beta1)
    throw TopologyError("found " + std::to_string(out.size()) + " cutting surfaces, expected "
                        + std::to_string(info.beta1));
  // flipping changed face loops; edge incidences are rebuilt by callers that need them
  return out;
}

/// First Betti number of the domain cut along the given surfaces.
inline int cut_betti(const PolyMesh& m, const std::vector<CuttingSurface>& surfaces)
{
  EdgeComplex ec(m);
  std::vector<char> cut(m.num_faces(), 0);
  for (const auto& s : surfaces)
    for (int f : s.faces) {
      if (m.faces[f].is_boundary()) throw TopologyError("cutting surface contains boundary face " + std::to_string(f));
      cut[f] = 1;
    }
  return cut_complex_summary(m, ec, cut).beta1;
}

/// Euler characteristic of a face set seen as a 2D complex.
inline int surface_euler(const PolyMesh& m, const std::vector<int>& faces)
{
  std::set<int> verts;
  std::set<std::array<int, 2>> edges;
  for (int f : faces) {
    const auto& loop = m.faces[f].vertices;
    for (std::size_t i = 0; i < loop.size(); ++i) {
      verts.insert(loop[i]);
      const int a = loop[i], b = loop[(i + 1) % loop.size()];
      edges.insert({std::min(a, b), std::max(a, b)});
    }
  }
  return static_cast<int>(verts.size()) - static_cast<int>(edges.size()) + static_cast<int>(faces.size());
}

/// (T+, T-) for each face of a surface: T+ is the side the surface normal points out of.
inline std::vector<std::pair<int, int>> sigma_side_tags(const PolyMesh& m, const CuttingSurface& s)
{
  std::vector<std::pair<int, int>> tags;
  for (int f : s.faces) {
    const Face& F = m.faces[f];
    if (F.is_boundary()) throw TopologyError("cutting surface contains boundary face " + std::to_string(f));
    tags.push_back({F.cell_plus, F.cell_minus});
  }
  return tags;
}

/// Full pipeline: Betti numbers, boundary components, and oriented cutting surfaces.
inline TopologyInfo analyze_topology(PolyMesh& m)
{
  TopologyInfo info = betti_numbers(m);
  info.surfaces = compute_cutting_surfaces(m, info);
  return info;
}

} // namespace hhomag

#endif
