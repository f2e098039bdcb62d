// Global saddle-point assembly with static condensation, sparse direct solve, recovery, and error measures.

#ifndef HHOMAG_ASSEMBLY_HPP
#define HHOMAG_ASSEMBLY_HPP

#include <chrono>
#include <sstream>

#include <Eigen/LU>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#ifdef HHOMAG_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#endif

#include "local_ops.hpp"

namespace hhomag {

/// Data of a magnetostatic problem.
/// field:  current j, boundary_field = mu h (normal data and surface fluxes).
/// vecpot: current j, boundary_field = a (tangential data and boundary-component fluxes).
struct SourceData
{
  VectorFunction current;
  VectorFunction boundary_field;
  /// Fluxes through the cutting surfaces (field) or inner boundary components (vecpot);
  /// computed from boundary_field by quadrature when empty.
  std::vector<double> fluxes;
};

struct AssemblyOptions
{
  SchemeOptions scheme;
  bool condense = true;
  bool with_sigma = true;  // false drops the cutting-surface jumps (singular when beta1 > 0)
  double condense_rcond = 1e-12;
};

class SingularSystemError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Assembled (condensed) system over the global unknowns.
struct SaddleSystem
{
  SchemeKind scheme = SchemeKind::field;
  DofMap map;
  Eigen::SparseMatrix<double> matrix;
  Eigen::VectorXd rhs;
  std::vector<int> cell_first;                 // global index of a cell's interior unknowns, -1 when condensed
  std::vector<Eigen::VectorXd> pinned_u;       // tangential data on pinned faces (vecpot)
  std::vector<double> fluxes;                  // imposed fluxes actually used
  int uncondensed_cells = 0;

  int size() const { return static_cast<int>(rhs.size()); }
  /// Unknowns after condensation.
  int ndof() const { return size(); }
};

// ---------------------------------------------------------------------------
// Flux helpers

/// sum over the faces of `surface` of  int_F v . n_F.
inline double face_set_flux(const Discretization& d, const std::vector<int>& faces, const VectorFunction& v)
{
  double s = 0.;
  for (int f : faces) {
    const auto q = d.mesh().face_quadrature(f, d.data_quadrature());
    const Eigen::Vector3d n = d.mesh().faces[f].normal;
    for (std::size_t i = 0; i < q.size(); ++i) s += q.weights[i] * v(q.points[i]).dot(n);
  }
  return s;
}

inline std::vector<double> default_fluxes(const Discretization& d, const TopologyInfo& topo, SchemeKind scheme,
                                          const VectorFunction& v)
{
  std::vector<double> phi;
  if (scheme == SchemeKind::field) {
    for (const auto& S : topo.surfaces) phi.push_back(v ? face_set_flux(d, S.faces, v) : 0.);
  } else {
    for (std::size_t j = 1; j < topo.boundary.size(); ++j)
      phi.push_back(v ? face_set_flux(d, topo.boundary[j].faces, v) : 0.);
  }
  return phi;
}

namespace detail {

  inline std::vector<int> interior_indices(const Discretization& d, const LocalSystem& ls)
  {
    std::vector<int> idx;
    for (int i = 0; i < d.cell_u_size(); ++i) idx.push_back(i);
    for (int i = 0; i < d.cell_p_size(); ++i) idx.push_back(ls.nu + i);
    return idx;
  }

  inline std::vector<int> skeletal_indices(const Discretization& d, const LocalSystem& ls)
  {
    std::vector<int> idx;
    for (int i = d.cell_u_size(); i < ls.nu; ++i) idx.push_back(i);
    for (int i = ls.nu + d.cell_p_size(); i < ls.size(); ++i) idx.push_back(i);
    return idx;
  }

  /// Links of every local unknown of cell c (cell unknowns get -1 unless uncondensed).
  inline std::vector<DofLink> local_links(const Discretization& d, const SaddleSystem& sys, int c, const LocalSystem& ls)
  {
    const auto& m = d.mesh();
    const auto& C = m.cells[c];
    const auto& map = sys.map;
    std::vector<DofLink> links(ls.size());
    const int cu = d.cell_u_size(), cp = d.cell_p_size();
    if (sys.cell_first[c] >= 0) {
      for (int i = 0; i < cu; ++i) links[i] = {{sys.cell_first[c] + i, -1}, {1., 0.}, 0.};
      for (int i = 0; i < cp; ++i) links[ls.nu + i] = {{sys.cell_first[c] + cu + i, -1}, {1., 0.}, 0.};
    }
    for (std::size_t fi = 0; fi < C.faces.size(); ++fi) {
      const int f = C.faces[fi].face;
      const int uo = d.u_face_offset(static_cast<int>(fi));
      for (int a = 0; a < d.face_u_size(); ++a) {
        DofLink& l = links[uo + a];
        if (map.u_face_first[f] >= 0) {
          l.dof[0] = map.u_face_first[f] + a;
          l.coef[0] = 1.;
        } else {
          l.offset = sys.pinned_u[f].size() ? sys.pinned_u[f][a] : 0.;
        }
      }
      const int po = ls.nu + d.p_face_offset(static_cast<int>(fi));
      for (int a = 0; a < d.face_p_size(); ++a) links[po + a] = map.pressure_face_link(m, f, c, a);
    }
    if (ls.has_lambda) links[ls.lambda_index()] = {{map.lambda, -1}, {1., 0.}, 0.};
    return links;
  }

  struct Condensed
  {
    bool ok = false;
    Eigen::MatrixXd K;       // Schur complement on skeletal local unknowns
    Eigen::VectorXd rhs;
    Eigen::FullPivLU<Eigen::MatrixXd> lu;
  };

  inline Condensed condense(const LocalSystem& ls, const std::vector<int>& I, const std::vector<int>& S, double tol)
  {
    Condensed out;
    const Eigen::MatrixXd KII = ls.K(I, I);
    out.lu.compute(KII);
    if (out.lu.rank() < static_cast<Eigen::Index>(I.size()) || out.lu.rcond() < tol) return out;
    const Eigen::MatrixXd KIS = ls.K(I, S);
    const Eigen::MatrixXd X = out.lu.solve(KIS);
    out.K = ls.K(S, S) - ls.K(S, I) * X;
    out.rhs = ls.rhs(S) - ls.K(S, I) * out.lu.solve(ls.rhs(I));
    out.ok = true;
    return out;
  }

  /// Scatter E^T K E and E^T (b - K x0) for local unknowns with links.
  inline void scatter(const Eigen::MatrixXd& K, const Eigen::VectorXd& b, const std::vector<DofLink>& links,
                      std::vector<Eigen::Triplet<double>>& trip, Eigen::VectorXd& rhs)
  {
    const int n = static_cast<int>(links.size());
    Eigen::VectorXd x0(n);
    for (int i = 0; i < n; ++i) x0[i] = links[i].offset;
    const Eigen::VectorXd r = b - K * x0;
    for (int i = 0; i < n; ++i)
      for (int s = 0; s < 2; ++s) {
        const int gi = links[i].dof[s];
        if (gi < 0) continue;
        const double ci = links[i].coef[s];
        rhs[gi] += ci * r[i];
        for (int j = 0; j < n; ++j)
          for (int t = 0; t < 2; ++t) {
            const int gj = links[j].dof[t];
            if (gj < 0 || K(i, j) == 0.) continue;
            trip.emplace_back(gi, gj, ci * links[j].coef[t] * K(i, j));
          }
      }
  }

  inline Eigen::VectorXd gather(const std::vector<DofLink>& links, const Eigen::VectorXd& x)
  {
    Eigen::VectorXd v(links.size());
    for (std::size_t i = 0; i < links.size(); ++i) {
      double s = links[i].offset;
      for (int t = 0; t < 2; ++t)
        if (links[i].dof[t] >= 0) s += links[i].coef[t] * x[links[i].dof[t]];
      v[i] = s;
    }
    return v;
  }

} // namespace detail

/// Assemble the global system of either scheme.
inline SaddleSystem assemble(const Discretization& d, const TopologyInfo& topo, SchemeKind scheme, const SourceData& data,
                             const AssemblyOptions& opt = {})
{
  const auto& m = d.mesh();
  if (scheme == SchemeKind::field && topo.beta1 > 0 && topo.surfaces.size() != static_cast<std::size_t>(topo.beta1))
    throw std::invalid_argument("cutting surfaces are required when beta1 > 0");
  if (scheme == SchemeKind::field && opt.scheme.inverse_mu)
    throw std::invalid_argument("smooth permeability is only supported by the vecpot scheme");

  SaddleSystem sys;
  sys.scheme = scheme;
  sys.map = DofMap::build(d, topo, scheme, opt.with_sigma);
  sys.cell_first.assign(m.num_cells(), -1);
  sys.pinned_u.assign(m.num_faces(), Eigen::VectorXd());
  if (scheme == SchemeKind::vecpot)
    for (int f = 0; f < m.num_faces(); ++f)
      if (m.faces[f].is_boundary())
        sys.pinned_u[f] = data.boundary_field ? project_rotated_trace(m, f, d.face_basis(f), data.boundary_field, d.data_quadrature())
                                              : Eigen::VectorXd::Zero(d.face_u_size());

  sys.fluxes = data.fluxes.empty() ? default_fluxes(d, topo, scheme, data.boundary_field) : data.fluxes;
  const std::size_t expected = scheme == SchemeKind::field ? topo.surfaces.size() : topo.boundary.size() - 1;
  if (sys.fluxes.size() != expected) throw std::invalid_argument("flux data does not match the topology");

  // The size grows when cells stay uncondensed; collect triplets first.
  int next = sys.map.skeletal;
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(sys.map.skeletal + m.num_cells() * (d.cell_u_size() + d.cell_p_size()));
  const int cell_block = d.cell_u_size() + d.cell_p_size();

  for (int c = 0; c < m.num_cells(); ++c) {
    const LocalSystem ls = local_system(d, c, scheme, opt.scheme, data.current);
    const auto I = detail::interior_indices(d, ls);
    const auto S = detail::skeletal_indices(d, ls);
    detail::Condensed cd;
    if (opt.condense) cd = detail::condense(ls, I, S, opt.condense_rcond);
    if (cd.ok) {
      const auto links = detail::local_links(d, sys, c, ls);
      std::vector<DofLink> sl;
      for (int i : S) sl.push_back(links[i]);
      detail::scatter(cd.K, cd.rhs, sl, trip, rhs);
    } else {
      sys.cell_first[c] = next;
      next += cell_block;
      if (opt.condense) ++sys.uncondensed_cells;
      const auto links = detail::local_links(d, sys, c, ls);
      detail::scatter(ls.K, ls.rhs, links, trip, rhs);
    }
  }
  rhs.conservativeResize(next);

  // nonhomogeneous constraint data
  if (scheme == SchemeKind::field) {
    if (data.boundary_field)
      for (int f = 0; f < m.num_faces(); ++f) {
        if (!m.faces[f].is_boundary()) continue;
        const Eigen::Vector3d n = m.faces[f].normal;
        const VectorFunction& v = data.boundary_field;
        const Eigen::VectorXd g = project_face(m, f, d.face_basis(f), [&](const Point3& x) { return v(x).dot(n); },
                                               d.data_quadrature());
        rhs.segment(sys.map.p_face_first[f], d.face_p_size()) += g;
      }
    for (int i = 0; i < sys.map.num_sigma; ++i) rhs[sys.map.sigma_first + i] += sys.fluxes[i];
  } else {
    for (int j = 0; j < sys.map.num_gamma; ++j) rhs[sys.map.gamma_first + j] += sys.fluxes[j];
  }

  sys.matrix.resize(next, next);
  sys.matrix.setFromTriplets(trip.begin(), trip.end());
  sys.matrix.makeCompressed();
  sys.rhs = std::move(rhs);
  return sys;
}

/// Human-readable name of a global unknown.
inline std::string describe_unknown(const Discretization& d, const SaddleSystem& sys, int g)
{
  const auto& map = sys.map;
  std::ostringstream os;
  for (int f = 0; f < d.mesh().num_faces(); ++f) {
    if (map.u_face_first[f] >= 0 && g >= map.u_face_first[f] && g < map.u_face_first[f] + map.face_u) {
      os << "tangential unknown " << g - map.u_face_first[f] << " of face " << f;
      return os.str();
    }
    if (map.p_face_first[f] >= 0 && g >= map.p_face_first[f] && g < map.p_face_first[f] + map.face_p) {
      os << "pressure unknown " << g - map.p_face_first[f] << " of face " << f;
      return os.str();
    }
  }
  if (map.num_sigma > 0 && g >= map.sigma_first && g < map.sigma_first + map.num_sigma)
    os << "jump across cutting surface " << g - map.sigma_first + 1;
  else if (map.num_gamma > 0 && g >= map.gamma_first && g < map.gamma_first + map.num_gamma)
    os << "trace on boundary component " << g - map.gamma_first + 1;
  else if (g == map.lambda)
    os << "mean-value multiplier";
  else
    for (int c = 0; c < d.mesh().num_cells(); ++c)
      if (sys.cell_first[c] >= 0 && g >= sys.cell_first[c] && g < sys.cell_first[c] + d.cell_u_size() + d.cell_p_size())
        os << "cell unknown " << g - sys.cell_first[c] << " of cell " << c;
  return os.str().empty() ? "unknown " + std::to_string(g) : os.str();
}

struct SolveReport
{
  std::string backend;
  double residual = 0.;     // ||Ax - b|| / ||b|| (absolute when b = 0)
  double rcond = -1.;       // reciprocal pivot ratio when available
  double factor_seconds = 0.;
};

namespace detail {

#ifdef HHOMAG_HAVE_UMFPACK
  class UmfPackWithInfo : public Eigen::UmfPackLU<Eigen::SparseMatrix<double>>
  {
  public:
    double rcond() const { return m_umfpackInfo[UMFPACK_RCOND]; }
    int status() const { return m_fact_errorCode; }
  };
#endif

  // Column with the smallest pivot in a factor U, mapped back to the original numbering.
  template <class UMat, class Perm>
  int weakest_column(const UMat& U, const Perm& colperm)
  {
    int worst = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < std::min(U.rows(), U.cols()); ++j) {
      const double p = std::abs(U.coeff(j, j));
      if (p < best) {
        best = p;
        worst = j;
      }
    }
    return colperm[worst];
  }

} // namespace detail

/// Sparse direct solve with residual check; throws SingularSystemError naming the weakest unknown.
/// UMFPACK is tried first when available; Eigen's SparseLU takes over if its residual is off.
inline Eigen::VectorXd solve_system(const Discretization& d, const SaddleSystem& sys, SolveReport* report = nullptr,
                                    double residual_tol = 1e-9, double rcond_tol = 1e-13)
{
  SolveReport rep;
  const auto t0 = std::chrono::steady_clock::now();
  const double bn = sys.rhs.norm();
  auto residual = [&](const Eigen::VectorXd& x) {
    return x.allFinite() ? (sys.matrix * x - sys.rhs).norm() / (bn > 0. ? bn : 1.) : std::numeric_limits<double>::infinity();
  };
  auto finish = [&](const Eigen::VectorXd& x) {
    rep.factor_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rep.residual = residual(x);
    if (report) *report = rep;
    return x;
  };
  auto fail = [&](int col, const std::string& why) {
    throw SingularSystemError("singular system (" + why + "); weakest pivot at " + describe_unknown(d, sys, col));
  };
#ifdef HHOMAG_HAVE_UMFPACK
  {
    detail::UmfPackWithInfo lu;
    // nested dissection on the symmetric pattern keeps the fill of 3D skeletal systems low
    lu.umfpackControl()(UMFPACK_STRATEGY) = UMFPACK_STRATEGY_SYMMETRIC;
    lu.umfpackControl()(UMFPACK_ORDERING) = UMFPACK_ORDERING_METIS;
    lu.compute(sys.matrix);
    if (lu.status() == UMFPACK_ERROR_out_of_memory)
      throw std::runtime_error("sparse factorization ran out of memory (" + std::to_string(sys.size()) + " unknowns)");
    rep.backend = "umfpack";
    rep.rcond = lu.rcond();
    if (lu.status() < 0) throw std::runtime_error("sparse factorization failed with status " + std::to_string(lu.status()));
    if (lu.info() != Eigen::Success || !(rep.rcond >= rcond_tol)) {
      const Eigen::SparseMatrix<double> U = lu.matrixU();
      fail(detail::weakest_column(U, lu.permutationQ()), "rcond " + std::to_string(rep.rcond));
    }
    const Eigen::VectorXd x = lu.solve(sys.rhs);
    if (residual(x) <= residual_tol) return finish(x);
    rep.backend = "umfpack residual " + std::to_string(residual(x)) + ", sparselu";
  }
#else
  rep.backend = "sparselu";
#endif
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.analyzePattern(sys.matrix);
  lu.factorize(sys.matrix);
  if (lu.info() != Eigen::Success) {
    // the message ends with the offending column
    const std::string msg = lu.lastErrorMessage();
    const auto pos = msg.find_last_not_of("0123456789");
    const int col = pos + 1 < msg.size() ? std::stoi(msg.substr(pos + 1)) : 0;
    fail(std::min(col, sys.size() - 1), msg);
  }
  const Eigen::VectorXd x = lu.solve(sys.rhs);
  finish(x);
  if (rep.residual > residual_tol)
    throw SingularSystemError("linear solve residual " + std::to_string(rep.residual) + " exceeds tolerance");
  return x;
}

/// Discrete solution with recovered cell unknowns.
struct Solution
{
  HybridField u;
  HybridPressure p;
  double lambda = 0.;
  Eigen::VectorXd global;   // solution of the assembled system
  SolveReport report;
  int ndof = 0;
  int uncondensed_cells = 0;
};

/// Rebuild every cell's unknowns from the global solution.
inline Solution recover(const Discretization& d, const TopologyInfo& topo, const SaddleSystem& sys, const SourceData& data,
                        const AssemblyOptions& opt, const Eigen::VectorXd& x)
{
  const auto& m = d.mesh();
  Solution sol;
  sol.global = x;
  sol.ndof = sys.size();
  sol.uncondensed_cells = sys.uncondensed_cells;
  sol.u = HybridField::zero(d);
  sol.p = HybridPressure::zero(d, &topo);
  const auto& map = sys.map;

  for (int f = 0; f < m.num_faces(); ++f) {
    if (map.u_face_first[f] >= 0) sol.u.face[f] = x.segment(map.u_face_first[f], map.face_u);
    else if (sys.pinned_u[f].size()) sol.u.face[f] = sys.pinned_u[f];
    if (map.p_face_first[f] >= 0) sol.p.face[f] = x.segment(map.p_face_first[f], map.face_p);
    else if (map.scheme == SchemeKind::vecpot && map.face_component[f] > 0)
      sol.p.face[f][0] = x[map.gamma_first + map.face_component[f] - 1] * std::sqrt(m.faces[f].area);
  }
  for (int i = 0; i < map.num_sigma; ++i) sol.p.sigma[i] = x[map.sigma_first + i];
  if (map.num_sigma == 0) std::fill(sol.p.face_surface.begin(), sol.p.face_surface.end(), -1);
  for (int j = 0; j < map.num_gamma; ++j) sol.p.gamma[j] = x[map.gamma_first + j];
  if (map.lambda >= 0) sol.lambda = x[map.lambda];

  const int cu = d.cell_u_size(), cp = d.cell_p_size();
  for (int c = 0; c < m.num_cells(); ++c) {
    if (sys.cell_first[c] >= 0) {
      sol.u.cell[c] = x.segment(sys.cell_first[c], cu);
      sol.p.cell[c] = x.segment(sys.cell_first[c] + cu, cp);
      continue;
    }
    const LocalSystem ls = local_system(d, c, sys.scheme, opt.scheme, data.current);
    const auto I = detail::interior_indices(d, ls);
    const auto S = detail::skeletal_indices(d, ls);
    const auto links = detail::local_links(d, sys, c, ls);
    std::vector<DofLink> sl;
    for (int i : S) sl.push_back(links[i]);
    const Eigen::VectorXd xs = detail::gather(sl, x);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(ls.K(I, I));
    const Eigen::VectorXd xi = lu.solve(ls.rhs(I) - ls.K(I, S) * xs);
    sol.u.cell[c] = xi.head(cu);
    sol.p.cell[c] = xi.tail(cp);
  }
  return sol;
}

/// Assemble, solve and recover.
inline Solution solve(const Discretization& d, const TopologyInfo& topo, SchemeKind scheme, const SourceData& data,
                      const AssemblyOptions& opt = {})
{
  const SaddleSystem sys = assemble(d, topo, scheme, data, opt);
  SolveReport rep;
  const Eigen::VectorXd x = solve_system(d, sys, &rep);
  Solution sol = recover(d, topo, sys, data, opt, x);
  sol.report = rep;
  return sol;
}

// ---------------------------------------------------------------------------
// Error measures

struct ErrorReport
{
  double energy = 0.;  // relative hybrid curl-seminorm error
  double l2 = 0.;      // relative cell L2 error
};

/// Relative errors against the reduction of `exact`. The energy error weights each cell by 1/eta;
/// `inverse_eta` (pointwise) overrides the piecewise constant `eta_per_cell` when given.
inline ErrorReport compute_errors(const Discretization& d, const HybridField& u, const VectorFunction& exact,
                                  const std::vector<double>& eta_per_cell = {}, const ScalarFunction& inverse_eta = {})
{
  const auto& m = d.mesh();
  const HybridField I = reduce_curl(d, exact);
  double en = 0., en_ref = 0., l2 = 0., l2_ref = 0.;
  for (int c = 0; c < m.num_cells(); ++c) {
    const CellBasis b = d.cell_basis(c);
    Eigen::MatrixXd N = curl_seminorm_matrix(d, c, b, inverse_eta);
    if (!inverse_eta && !eta_per_cell.empty()) N /= eta_per_cell[c];
    const Eigen::VectorXd iu = I.local(d, c);
    const Eigen::VectorXd e = u.local(d, c) - iu;
    en += e.dot(N * e);
    en_ref += iu.dot(N * iu);
    l2 += (u.cell[c] - I.cell[c]).squaredNorm();
    l2_ref += I.cell[c].squaredNorm();
  }
  ErrorReport r;
  r.energy = en_ref > 0. ? std::sqrt(std::max(0., en) / en_ref) : std::sqrt(std::max(0., en));
  r.l2 = l2_ref > 0. ? std::sqrt(l2 / l2_ref) : std::sqrt(l2);
  return r;
}

/// L2 norm of the cell part of a pressure.
inline double pressure_cell_norm(const HybridPressure& p)
{
  double s = 0.;
  for (const auto& v : p.cell) s += v.squaredNorm();
  return std::sqrt(s);
}

/// Integral of the cell part of a pressure over the (cut) domain.
inline double pressure_cell_mean(const PolyMesh& m, const HybridPressure& p)
{
  double s = 0.;
  for (int c = 0; c < m.num_cells(); ++c) s += p.cell[c][0] * std::sqrt(m.cells[c].volume);
  return s;
}

} // namespace hhomag

#endif
