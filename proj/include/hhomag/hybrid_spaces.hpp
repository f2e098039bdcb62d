// Hybrid spaces: local layouts, reductions, seminorms, and skeletal numbering with constraint encodings.

#ifndef HHOMAG_HYBRID_SPACES_HPP
#define HHOMAG_HYBRID_SPACES_HPP

#include <memory>
#include <optional>

#include "poly_basis.hpp"
#include "topology.hpp"

namespace hhomag {

/// Bases and quadrature settings shared by all cells of a mesh.
class Discretization
{
public:
  Discretization(const PolyMesh& mesh, int k, FaceSpace face_space = FaceSpace::trimmed, int extra_quadrature = 0)
    : mesh_(&mesh), k_(k), face_space_(face_space), extra_(extra_quadrature)
  {
    if (k < 1) throw std::invalid_argument("polynomial degree must be at least 1");
    face_bases_.reserve(mesh.num_faces());
    for (int f = 0; f < mesh.num_faces(); ++f) face_bases_.emplace_back(mesh, f, k, face_space);
  }

  const PolyMesh& mesh() const { return *mesh_; }
  int degree() const { return k_; }
  FaceSpace face_space() const { return face_space_; }
  const FaceBasis& face_basis(int f) const { return face_bases_[f]; }
  CellBasis cell_basis(int c) const { return CellBasis(*mesh_, c, k_); }

  int extra_quadrature() const { return extra_; }
  /// Exactness used for projecting non-polynomial data.
  int data_quadrature() const { return 2 * k_ + 2 + extra_; }

  int cell_u_size() const { return 3 * dim_poly3(k_); }
  int face_u_size() const { return face_bases_.empty() ? 0 : face_bases_.front().vector_size(); }
  int cell_p_size() const { return dim_poly3(k_ - 1); }
  int face_p_size() const { return dim_poly2(k_); }

  int local_u_size(int c) const { return cell_u_size() + nfaces(c) * face_u_size(); }
  int local_p_size(int c) const { return cell_p_size() + nfaces(c) * face_p_size(); }
  int u_face_offset(int i) const { return cell_u_size() + i * face_u_size(); }
  int p_face_offset(int i) const { return cell_p_size() + i * face_p_size(); }

private:
  int nfaces(int c) const { return static_cast<int>(mesh_->cells[c].faces.size()); }

  const PolyMesh* mesh_;
  int k_;
  FaceSpace face_space_;
  int extra_;
  std::vector<FaceBasis> face_bases_;
};

/// Hybrid vector: P^k(T)^3 per cell, face space per face (frame coordinates).
struct HybridField
{
  std::vector<Eigen::VectorXd> cell;
  std::vector<Eigen::VectorXd> face;

  static HybridField zero(const Discretization& d)
  {
    HybridField h;
    h.cell.assign(d.mesh().num_cells(), Eigen::VectorXd::Zero(d.cell_u_size()));
    h.face.assign(d.mesh().num_faces(), Eigen::VectorXd::Zero(d.face_u_size()));
    return h;
  }

  Eigen::VectorXd local(const Discretization& d, int c) const
  {
    const auto& C = d.mesh().cells[c];
    Eigen::VectorXd v(d.local_u_size(c));
    v.head(d.cell_u_size()) = cell[c];
    for (std::size_t i = 0; i < C.faces.size(); ++i)
      v.segment(d.u_face_offset(static_cast<int>(i)), d.face_u_size()) = face[C.faces[i].face];
    return v;
  }

  HybridField& operator+=(const HybridField& o)
  {
    for (std::size_t i = 0; i < cell.size(); ++i) cell[i] += o.cell[i];
    for (std::size_t i = 0; i < face.size(); ++i) face[i] += o.face[i];
    return *this;
  }
  HybridField& operator*=(double a)
  {
    for (auto& v : cell) v *= a;
    for (auto& v : face) v *= a;
    return *this;
  }
};

enum class PressureVariant
{
  plain,     // single-valued faces
  cut,       // faces on cutting surfaces carry a constant jump sigma_i
  collapsed  // zero on the outer boundary, one constant per inner boundary component
};

/// Hybrid scalar: P^{k-1}(T) per cell, P^k(F) per face, plus jump scalars on cutting surfaces.
/// On a cut face, `face` stores the trace seen from the minus side; the plus side adds sigma_i.
struct HybridPressure
{
  std::vector<Eigen::VectorXd> cell;
  std::vector<Eigen::VectorXd> face;
  std::vector<double> sigma;         // one per cutting surface
  std::vector<int> face_surface;     // surface index (1-based) per face, or -1
  std::vector<double> gamma;         // one per inner boundary component (collapsed variant)

  static HybridPressure zero(const Discretization& d, const TopologyInfo* topo = nullptr)
  {
    HybridPressure p;
    p.cell.assign(d.mesh().num_cells(), Eigen::VectorXd::Zero(d.cell_p_size()));
    p.face.assign(d.mesh().num_faces(), Eigen::VectorXd::Zero(d.face_p_size()));
    p.face_surface.assign(d.mesh().num_faces(), -1);
    if (topo) {
      p.sigma.assign(topo->surfaces.size(), 0.);
      p.face_surface = topo->surface_index(d.mesh());
      p.gamma.assign(topo->boundary.empty() ? 0 : topo->boundary.size() - 1, 0.);
    }
    return p;
  }

  /// Face trace seen from cell c.
  Eigen::VectorXd face_from(const Discretization& d, int f, int c) const
  {
    Eigen::VectorXd v = face[f];
    const int s = face_surface.empty() ? -1 : face_surface[f];
    if (s > 0 && d.mesh().faces[f].cell_plus == c) v[0] += sigma[s - 1] * std::sqrt(d.mesh().faces[f].area);
    return v;
  }

  Eigen::VectorXd local(const Discretization& d, int c) const
  {
    const auto& C = d.mesh().cells[c];
    Eigen::VectorXd v(d.local_p_size(c));
    v.head(d.cell_p_size()) = cell[c];
    for (std::size_t i = 0; i < C.faces.size(); ++i)
      v.segment(d.p_face_offset(static_cast<int>(i)), d.face_p_size()) = face_from(d, C.faces[i].face, c);
    return v;
  }
};

// ---------------------------------------------------------------------------
// Reductions

/// Local reduction of a vector field: cell projection and rotated-trace projections.
inline Eigen::VectorXd reduce_curl_local(const Discretization& d, int c, const CellBasis& cb, const VectorFunction& v)
{
  const auto& m = d.mesh();
  Eigen::VectorXd r(d.local_u_size(c));
  r.head(d.cell_u_size()) = project_cell_vector(m, c, cb, d.degree(), v, d.data_quadrature());
  const auto& C = m.cells[c];
  for (std::size_t i = 0; i < C.faces.size(); ++i) {
    const int f = C.faces[i].face;
    r.segment(d.u_face_offset(static_cast<int>(i)), d.face_u_size())
        = project_rotated_trace(m, f, d.face_basis(f), v, d.data_quadrature());
  }
  return r;
}

/// Global reduction of a (tangentially continuous) vector field.
inline HybridField reduce_curl(const Discretization& d, const VectorFunction& v)
{
  const auto& m = d.mesh();
  HybridField h = HybridField::zero(d);
  for (int c = 0; c < m.num_cells(); ++c)
    h.cell[c] = project_cell_vector(m, c, d.cell_basis(c), d.degree(), v, d.data_quadrature());
  for (int f = 0; f < m.num_faces(); ++f) h.face[f] = project_rotated_trace(m, f, d.face_basis(f), v, d.data_quadrature());
  return h;
}

/// Global reduction of a scalar field. With `topo` surfaces and a field that is multivalued across them,
/// pass `cell_values` evaluating the branch seen from a given cell; jumps must be constant per surface.
inline HybridPressure reduce_grad(const Discretization& d, const ScalarFunction& q, const TopologyInfo* topo = nullptr,
                                  const std::function<double(int, const Point3&)>& cell_values = {})
{
  const auto& m = d.mesh();
  HybridPressure p = HybridPressure::zero(d, topo);
  auto branch = [&](int c) -> ScalarFunction {
    if (!cell_values) return q;
    return [&, c](const Point3& x) { return cell_values(c, x); };
  };
  for (int c = 0; c < m.num_cells(); ++c)
    p.cell[c] = project_cell(m, c, d.cell_basis(c), d.degree() - 1, branch(c), d.data_quadrature());
  for (int f = 0; f < m.num_faces(); ++f) {
    const Face& F = m.faces[f];
    const int s = p.face_surface.empty() ? -1 : p.face_surface[f];
    if (s <= 0) {
      p.face[f] = project_face(m, f, d.face_basis(f), branch(F.cell_plus), d.data_quadrature());
      continue;
    }
    const Eigen::VectorXd qm = project_face(m, f, d.face_basis(f), branch(F.cell_minus), d.data_quadrature());
    const Eigen::VectorXd qp = project_face(m, f, d.face_basis(f), branch(F.cell_plus), d.data_quadrature());
    Eigen::VectorXd jump = qp - qm;
    const double sj = jump[0] / std::sqrt(F.area);
    jump[0] = 0.;
    if (jump.norm() > 1e-8 * std::max(1., qp.norm()))
      throw std::invalid_argument("jump across a cutting surface is not constant on face " + std::to_string(f));
    p.face[f] = qm;
    p.sigma[s - 1] = sj;
  }
  // consistency of sigma across each surface
  if (topo)
    for (const auto& S : topo->surfaces)
      for (int f : S.faces) {
        const Face& F = m.faces[f];
        const Eigen::VectorXd qp = project_face(m, f, d.face_basis(f), branch(F.cell_plus), d.data_quadrature());
        if (std::abs((qp[0] - p.face[f][0]) / std::sqrt(F.area) - p.sigma[S.index - 1]) > 1e-8 * std::max(1., std::abs(p.sigma[S.index - 1])))
          throw std::invalid_argument("jump differs between faces of cutting surface " + std::to_string(S.index));
      }
  return p;
}

// ---------------------------------------------------------------------------
// Local matrices shared by seminorms and schemes

/// Tabulated cell basis values at cell quadrature nodes.
struct CellTable
{
  QuadratureRule quad;
  std::vector<Eigen::VectorXd> phi;
  std::vector<Eigen::MatrixXd> dphi;

  CellTable(const PolyMesh& m, int c, const CellBasis& b, int degree) : quad(m.cell_quadrature(c, degree))
  {
    phi.reserve(quad.size());
    dphi.reserve(quad.size());
    for (const auto& x : quad.points) {
      phi.push_back(b.values(x));
      dphi.push_back(b.gradients(x));
    }
  }
};

/// Element-wise curl of u_T, expanded in P^{k-1}(T)^3: rows (d, j), columns (c, i) of the cell block.
inline Eigen::MatrixXd broken_curl_matrix(const Discretization& d, const CellTable& t)
{
  const int Nk = dim_poly3(d.degree()), Nl = dim_poly3(d.degree() - 1);
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(3 * Nl, 3 * Nk);
  for (std::size_t q = 0; q < t.quad.size(); ++q) {
    const double w = t.quad.weights[q];
    const auto& phi = t.phi[q];
    const auto& g = t.dphi[q];
    for (int i = 0; i < Nk; ++i)
      for (int c = 0; c < 3; ++c) {
        // curl(phi_i e_c) = grad phi_i x e_c
        Eigen::Vector3d e = Eigen::Vector3d::Zero();
        e[c] = 1.;
        const Eigen::Vector3d cu = Eigen::Vector3d(g.row(i).transpose()).cross(e);
        for (int dd = 0; dd < 3; ++dd) {
          if (cu[dd] == 0.) continue;
          K.block(dd * Nl, c * Nk + i, Nl, 1) += w * cu[dd] * phi.head(Nl);
        }
      }
  }
  return K;
}

/// Projection of (phi_i e_c) x n_F onto the face vector space: rows face basis, columns (c, i).
inline Eigen::MatrixXd rotated_trace_matrix(const Discretization& d, int f, const CellBasis& b,
                                            const ScalarFunction& weight = {})
{
  const auto& m = d.mesh();
  const auto& fb = d.face_basis(f);
  const FaceFrame& fr = fb.frame();
  const int Nk = b.size();
  const auto q = m.face_quadrature(f, 2 * d.degree() + (weight ? 2 + d.extra_quadrature() : 0));
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(fb.vector_size(), 3 * Nk);
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double w = q.weights[i] * (weight ? weight(q.points[i]) : 1.);
    const Eigen::VectorXd phi = b.values(q.points[i]);
    const Eigen::MatrixXd psi = fb.vector_values(q.points[i]);
    for (int c = 0; c < 3; ++c) {
      // (e_c x n) in frame coordinates = (t2_c, -t1_c)
      const Eigen::VectorXd s = psi.col(0) * fr.t2[c] - psi.col(1) * fr.t1[c];
      P.middleCols(c * Nk, Nk).noalias() += w * s * phi.transpose();
    }
  }
  return P;
}

/// Weighted Gram matrix of the face vector basis (identity when unweighted).
inline Eigen::MatrixXd face_vector_mass(const Discretization& d, int f, const ScalarFunction& weight)
{
  const auto& fb = d.face_basis(f);
  if (!weight) return Eigen::MatrixXd::Identity(fb.vector_size(), fb.vector_size());
  const auto q = d.mesh().face_quadrature(f, 2 * d.degree() + 2 + d.extra_quadrature());
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(fb.vector_size(), fb.vector_size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    const Eigen::MatrixXd psi = fb.vector_values(q.points[i]);
    M.noalias() += q.weights[i] * weight(q.points[i]) * psi * psi.transpose();
  }
  return M;
}

/// Weighted Gram matrix of the scalar face basis (identity when unweighted).
inline Eigen::MatrixXd face_scalar_mass(const Discretization& d, int f, const ScalarFunction& weight)
{
  const auto& fb = d.face_basis(f);
  if (!weight) return Eigen::MatrixXd::Identity(fb.scalar_size(), fb.scalar_size());
  const auto q = d.mesh().face_quadrature(f, 2 * d.degree() + 2 + d.extra_quadrature());
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(fb.scalar_size(), fb.scalar_size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    const Eigen::VectorXd chi = fb.scalar_values(q.points[i]);
    M.noalias() += q.weights[i] * weight(q.points[i]) * chi * chi.transpose();
  }
  return M;
}

/// Weighted Gram matrix of the first `n` cell basis functions, replicated over `ncomp` components.
inline Eigen::MatrixXd cell_mass(const PolyMesh& m, int c, const CellBasis& b, int n, int ncomp,
                                 const ScalarFunction& weight, int degree)
{
  if (!weight) return Eigen::MatrixXd::Identity(ncomp * n, ncomp * n);
  const auto q = m.cell_quadrature(c, degree);
  Eigen::MatrixXd M1 = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < q.size(); ++i) {
    const Eigen::VectorXd phi = b.values(q.points[i]).head(n);
    M1.noalias() += q.weights[i] * weight(q.points[i]) * phi * phi.transpose();
  }
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(ncomp * n, ncomp * n);
  for (int k = 0; k < ncomp; ++k) M.block(k * n, k * n, n, n) = M1;
  return M;
}

/// Curl stabilizer  sum_F h_F^{-1} || pi_Q(u_T x n) - u_F ||^2  (optionally weighted).
inline Eigen::MatrixXd curl_stabilizer(const Discretization& d, int c, const CellBasis& b,
                                       const ScalarFunction& weight = {})
{
  const auto& m = d.mesh();
  const auto& C = m.cells[c];
  const int n = d.local_u_size(c), nq = d.face_u_size();
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < C.faces.size(); ++i) {
    const int f = C.faces[i].face;
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(nq, n);
    D.leftCols(d.cell_u_size()) = rotated_trace_matrix(d, f, b);
    D.middleCols(d.u_face_offset(static_cast<int>(i)), nq) = -Eigen::MatrixXd::Identity(nq, nq);
    S.noalias() += D.transpose() * face_vector_mass(d, f, weight) * D / m.faces[f].diameter;
  }
  return S;
}

/// Trace of the cell pressure basis on a face, in the scalar face basis.
inline Eigen::MatrixXd scalar_trace_matrix(const Discretization& d, int f, const CellBasis& b)
{
  const auto& fb = d.face_basis(f);
  const int Nl = d.cell_p_size();
  const auto q = d.mesh().face_quadrature(f, 2 * d.degree());
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(fb.scalar_size(), Nl);
  for (std::size_t i = 0; i < q.size(); ++i)
    T.noalias() += q.weights[i] * fb.scalar_values(q.points[i]) * b.values(q.points[i]).head(Nl).transpose();
  return T;
}

/// Gradient stabilizer  sum_F h_F || q_T - q_F ||^2  (optionally weighted).
inline Eigen::MatrixXd grad_stabilizer(const Discretization& d, int c, const CellBasis& b,
                                       const ScalarFunction& weight = {})
{
  const auto& m = d.mesh();
  const auto& C = m.cells[c];
  const int n = d.local_p_size(c), np = d.face_p_size();
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < C.faces.size(); ++i) {
    const int f = C.faces[i].face;
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(np, n);
    D.leftCols(d.cell_p_size()) = scalar_trace_matrix(d, f, b);
    D.middleCols(d.p_face_offset(static_cast<int>(i)), np) = -Eigen::MatrixXd::Identity(np, np);
    S.noalias() += m.faces[f].diameter * D.transpose() * face_scalar_mass(d, f, weight) * D;
  }
  return S;
}

/// h_T^2 (grad q_T, grad r_T)_T on the cell pressure block (optionally weighted).
inline Eigen::MatrixXd grad_volume_term(const Discretization& d, int c, const CellTable& t,
                                        const ScalarFunction& weight = {})
{
  const int Nl = d.cell_p_size();
  const int n = d.local_p_size(c);
  Eigen::MatrixXd V = Eigen::MatrixXd::Zero(n, n);
  const double h = d.mesh().cells[c].diameter;
  for (std::size_t q = 0; q < t.quad.size(); ++q) {
    const double w = t.quad.weights[q] * (weight ? weight(t.quad.points[q]) : 1.);
    const auto G = t.dphi[q].topRows(Nl);
    V.topLeftCorner(Nl, Nl).noalias() += w * h * h * G * G.transpose();
  }
  return V;
}

// ---------------------------------------------------------------------------
// Seminorms

/// Matrix of |.|_{curl,T}^2 on the local hybrid vector (optionally weighted).
inline Eigen::MatrixXd curl_seminorm_matrix(const Discretization& d, int c, const CellBasis& b,
                                            const ScalarFunction& weight = {})
{
  const int deg = 2 * d.degree() + (weight ? 2 + d.extra_quadrature() : 0);
  const CellTable t(d.mesh(), c, b, deg);
  const Eigen::MatrixXd K = broken_curl_matrix(d, t);
  const Eigen::MatrixXd M = cell_mass(d.mesh(), c, b, d.cell_p_size(), 3, weight, deg);
  Eigen::MatrixXd N = curl_stabilizer(d, c, b, weight);
  N.topLeftCorner(d.cell_u_size(), d.cell_u_size()) += K.transpose() * M * K;
  return N;
}

inline Eigen::MatrixXd grad_seminorm_matrix(const Discretization& d, int c, const CellBasis& b,
                                            const ScalarFunction& weight = {})
{
  const int deg = 2 * d.degree() + (weight ? 2 + d.extra_quadrature() : 0);
  const CellTable t(d.mesh(), c, b, deg);
  return grad_volume_term(d, c, t, weight) + grad_stabilizer(d, c, b, weight);
}

inline double seminorm_curl(const Discretization& d, const HybridField& u)
{
  double s = 0.;
  for (int c = 0; c < d.mesh().num_cells(); ++c) {
    const Eigen::VectorXd v = u.local(d, c);
    s += v.dot(curl_seminorm_matrix(d, c, d.cell_basis(c)) * v);
  }
  return std::sqrt(std::max(0., s));
}

inline double seminorm_grad(const Discretization& d, const HybridPressure& p)
{
  double s = 0.;
  for (int c = 0; c < d.mesh().num_cells(); ++c) {
    const Eigen::VectorXd v = p.local(d, c);
    s += v.dot(grad_seminorm_matrix(d, c, d.cell_basis(c)) * v);
  }
  return std::sqrt(std::max(0., s));
}

// ---------------------------------------------------------------------------
// Skeletal numbering

/// A local unknown expressed through at most two global unknowns plus a fixed offset.
struct DofLink
{
  std::array<int, 2> dof{-1, -1};
  std::array<double, 2> coef{0., 0.};
  double offset = 0.;
};

enum class SchemeKind
{
  field,
  vecpot
};

/// Global numbering of skeletal unknowns for either scheme.
struct DofMap
{
  SchemeKind scheme = SchemeKind::field;
  int face_u = 0, face_p = 0;
  std::vector<int> u_face_first;   // -1: pinned
  std::vector<int> p_face_first;   // -1: pinned or collapsed
  std::vector<int> face_surface;   // 1-based surface index or -1
  std::vector<int> face_component; // boundary component or -1
  int sigma_first = -1, num_sigma = 0;
  int gamma_first = -1, num_gamma = 0;
  int lambda = -1;
  int skeletal = 0;  // count of skeletal unknowns

  /// Unknowns touched by the tangential data of boundary faces in the vecpot scheme are pinned.
  static DofMap build(const Discretization& d, const TopologyInfo& topo, SchemeKind scheme, bool with_sigma = true)
  {
    const auto& m = d.mesh();
    DofMap map;
    map.scheme = scheme;
    map.face_u = d.face_u_size();
    map.face_p = d.face_p_size();
    map.face_surface = topo.surface_index(m);
    map.face_component = topo.boundary_index(m);
    map.u_face_first.assign(m.num_faces(), -1);
    map.p_face_first.assign(m.num_faces(), -1);
    int next = 0;
    for (int f = 0; f < m.num_faces(); ++f) {
      const bool bnd = m.faces[f].is_boundary();
      if (scheme == SchemeKind::field || !bnd) {
        map.u_face_first[f] = next;
        next += map.face_u;
      }
    }
    for (int f = 0; f < m.num_faces(); ++f) {
      const bool bnd = m.faces[f].is_boundary();
      if (scheme == SchemeKind::field || !bnd) {
        map.p_face_first[f] = next;
        next += map.face_p;
      }
    }
    if (scheme == SchemeKind::field) {
      map.num_sigma = with_sigma ? static_cast<int>(topo.surfaces.size()) : 0;
      map.sigma_first = next;
      next += map.num_sigma;
      map.lambda = next++;
    } else {
      map.num_gamma = static_cast<int>(topo.boundary.size()) - 1;
      map.gamma_first = next;
      next += map.num_gamma;
    }
    map.skeletal = next;
    return map;
  }

  /// Link of pressure face coefficient `a` of face f seen from cell c.
  DofLink pressure_face_link(const PolyMesh& m, int f, int c, int a) const
  {
    DofLink l;
    if (p_face_first[f] >= 0) {
      l.dof[0] = p_face_first[f] + a;
      l.coef[0] = 1.;
      const int s = face_surface[f];
      if (s > 0 && a == 0 && num_sigma > 0 && m.faces[f].cell_plus == c) {
        l.dof[1] = sigma_first + s - 1;
        l.coef[1] = std::sqrt(m.faces[f].area);
      }
    } else if (scheme == SchemeKind::vecpot && face_component[f] > 0 && a == 0) {
      l.dof[0] = gamma_first + face_component[f] - 1;
      l.coef[0] = std::sqrt(m.faces[f].area);
    }
    return l;
  }
};

} // namespace hhomag

#endif
