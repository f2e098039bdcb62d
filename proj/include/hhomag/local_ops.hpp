// Per-cell reconstructions, stabilizers and the local saddle-point blocks of both schemes.

#ifndef HHOMAG_LOCAL_OPS_HPP
#define HHOMAG_LOCAL_OPS_HPP

#include "hybrid_spaces.hpp"

namespace hhomag {

enum class CurlVariant
{
  reconstruction, // C_T
  broken          // element-wise curl of u_T; needs the rot face space
};

/// (C_T u, z) = (u_T, curl z) - sum_F eps_TF (u_F, z_t)_F  for z in P^{k-1}(T)^3.
inline Eigen::MatrixXd curl_reconstruction(const Discretization& d, int c, const CellBasis& b, const CellTable& t)
{
  const auto& m = d.mesh();
  const auto& C = m.cells[c];
  const int Nl = d.cell_p_size();
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(3 * Nl, d.local_u_size(c));

  const int Nk = dim_poly3(d.degree());
  for (std::size_t p = 0; p < t.quad.size(); ++p) {
    const double w = t.quad.weights[p];
    for (int j = 0; j < Nl; ++j)
      for (int dd = 0; dd < 3; ++dd) {
        // curl(phi_j e_dd) = grad phi_j x e_dd
        const Eigen::Vector3d cz = Eigen::Vector3d(t.dphi[p].row(j).transpose()).cross(Eigen::Vector3d::Unit(dd));
        for (int cc = 0; cc < 3; ++cc)
          if (cz[cc] != 0.) R.block(dd * Nl + j, cc * Nk, 1, Nk) += w * cz[cc] * t.phi[p].transpose();
      }
  }

  for (std::size_t i = 0; i < C.faces.size(); ++i) {
    const int f = C.faces[i].face;
    const double eps = C.faces[i].sign;
    const auto& fb = d.face_basis(f);
    const FaceFrame& fr = fb.frame();
    const auto q = m.face_quadrature(f, 2 * d.degree());
    const int off = d.u_face_offset(static_cast<int>(i));
    for (std::size_t p = 0; p < q.size(); ++p) {
      const Eigen::VectorXd phi = b.values(q.points[p]).head(Nl);
      const Eigen::MatrixXd psi = fb.vector_values(q.points[p]);
      for (int dd = 0; dd < 3; ++dd) {
        // tangential part of e_dd in frame coordinates
        const Eigen::VectorXd s = psi.col(0) * fr.t1[dd] + psi.col(1) * fr.t2[dd];
        R.block(dd * Nl, off, Nl, fb.vector_size()).noalias() -= eps * q.weights[p] * phi * s.transpose();
      }
    }
  }
  return R;
}

/// (G_T q, z) = -(q_T, div z) + sum_F (q_F, z.n_TF)_F  for z in P^k(T)^3.
inline Eigen::MatrixXd grad_reconstruction(const Discretization& d, int c, const CellBasis& b, const CellTable& t)
{
  const auto& m = d.mesh();
  const auto& C = m.cells[c];
  const int Nk = dim_poly3(d.degree()), Nl = d.cell_p_size();
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(3 * Nk, d.local_p_size(c));
  for (std::size_t p = 0; p < t.quad.size(); ++p) {
    const double w = t.quad.weights[p];
    const Eigen::VectorXd phi = t.phi[p].head(Nl);
    for (int dd = 0; dd < 3; ++dd)
      G.block(dd * Nk, 0, Nk, Nl).noalias() -= w * t.dphi[p].col(dd) * phi.transpose();
  }
  for (std::size_t i = 0; i < C.faces.size(); ++i) {
    const int f = C.faces[i].face;
    const Eigen::Vector3d n = C.faces[i].sign * m.faces[f].normal;
    const auto& fb = d.face_basis(f);
    const auto q = m.face_quadrature(f, 2 * d.degree());
    const int off = d.p_face_offset(static_cast<int>(i));
    for (std::size_t p = 0; p < q.size(); ++p) {
      const Eigen::MatrixXd vc = q.weights[p] * b.values(q.points[p]) * fb.scalar_values(q.points[p]).transpose();
      for (int dd = 0; dd < 3; ++dd) G.block(dd * Nk, off, Nk, fb.scalar_size()) += n[dd] * vc;
    }
  }
  return G;
}

/// Unweighted local operators of one cell.
struct LocalOperators
{
  Eigen::MatrixXd curl;        // 3 dim P^{k-1} x local U
  Eigen::MatrixXd curl_stab;   // local U x local U
  Eigen::MatrixXd grad;        // 3 dim P^k x local P
  Eigen::MatrixXd grad_stab;   // local P x local P
  Eigen::MatrixXd grad_volume; // h_T^2 (grad q_T, grad r_T)
};

inline LocalOperators local_operators(const Discretization& d, int c, const CellBasis& b,
                                      CurlVariant variant = CurlVariant::reconstruction)
{
  const bool leaner = d.face_space() == FaceSpace::rot || (d.face_space() == FaceSpace::trimmed && d.degree() == 1);
  if (variant == CurlVariant::broken && !leaner)
    throw std::invalid_argument("the broken-curl variant requires the rot face space");
  const CellTable t(d.mesh(), c, b, 2 * d.degree());
  LocalOperators ops;
  if (variant == CurlVariant::broken) {
    ops.curl = Eigen::MatrixXd::Zero(3 * d.cell_p_size(), d.local_u_size(c));
    ops.curl.leftCols(d.cell_u_size()) = broken_curl_matrix(d, t);
  } else {
    ops.curl = curl_reconstruction(d, c, b, t);
  }
  ops.curl_stab = curl_stabilizer(d, c, b);
  ops.grad = grad_reconstruction(d, c, b, t);
  ops.grad_stab = grad_stabilizer(d, c, b);
  ops.grad_volume = grad_volume_term(d, c, t);
  return ops;
}

/// Switches of the discrete schemes.
struct SchemeOptions
{
  CurlVariant curl = CurlVariant::reconstruction;
  bool pressure_volume = true;        // h_T^2 (grad r_T, grad q_T)
  bool pressure_stabilization = true; // face part of S_T
  ScalarFunction inverse_mu;          // smooth mu^{-1}(x); empty means piecewise constant mesh.mu

  /// Pressure stabilization used in the experiments: none on tetrahedral meshes, face part only otherwise.
  static SchemeOptions experiment_defaults(const PolyMesh& m, CurlVariant curl = CurlVariant::reconstruction)
  {
    SchemeOptions o;
    o.curl = curl;
    o.pressure_volume = false;
    o.pressure_stabilization = !m.all_tetrahedral();
    return o;
  }
};

/// Local saddle-point block ordered [u_T | u_F... | p_T | p_F... | lambda].
struct LocalSystem
{
  Eigen::MatrixXd K;
  Eigen::VectorXd rhs;
  int nu = 0, np = 0;
  bool has_lambda = false;

  int size() const { return static_cast<int>(K.rows()); }
  int p_offset() const { return nu; }
  int lambda_index() const { return nu + np; }
};

namespace detail {

  inline Eigen::MatrixXd weighted_curl_mass(const Discretization& d, int c, const CellBasis& b, const ScalarFunction& w)
  {
    return cell_mass(d.mesh(), c, b, d.cell_p_size(), 3, w, 2 * d.degree() + 2 + d.extra_quadrature());
  }

} // namespace detail

/// Local blocks of either scheme. `source` may be empty (zero current).
inline LocalSystem local_system(const Discretization& d, int c, SchemeKind scheme, const SchemeOptions& opt,
                                const VectorFunction& source = {})
{
  const auto& m = d.mesh();
  const CellBasis b = d.cell_basis(c);
  const LocalOperators ops = local_operators(d, c, b, opt.curl);
  const double mu = m.mu_of(c);
  if (!(mu > 0.)) throw std::invalid_argument("permeability must be positive in cell " + std::to_string(c));

  LocalSystem s;
  s.nu = d.local_u_size(c);
  s.np = d.local_p_size(c);
  s.has_lambda = scheme == SchemeKind::field;
  const int n = s.nu + s.np + (s.has_lambda ? 1 : 0);
  s.K = Eigen::MatrixXd::Zero(n, n);
  s.rhs = Eigen::VectorXd::Zero(n);

  const bool smooth = static_cast<bool>(opt.inverse_mu);
  if (smooth && scheme == SchemeKind::field) throw std::invalid_argument("smooth permeability is only supported by the vecpot scheme");

  Eigen::MatrixXd A, S = Eigen::MatrixXd::Zero(s.np, s.np);
  double bscale = 1.;
  if (scheme == SchemeKind::field) {
    A = ops.curl.transpose() * ops.curl + ops.curl_stab;
    bscale = mu;
    if (opt.pressure_volume) S += mu * mu * ops.grad_volume;
    if (opt.pressure_stabilization) S += mu * mu * ops.grad_stab;
  } else if (!smooth) {
    A = (ops.curl.transpose() * ops.curl + ops.curl_stab) / mu;
    if (opt.pressure_volume) S += mu * ops.grad_volume;
    if (opt.pressure_stabilization) S += mu * ops.grad_stab;
  } else {
    const ScalarFunction& wu = opt.inverse_mu;
    const ScalarFunction wp = [&](const Point3& x) { return 1. / wu(x); };
    A = ops.curl.transpose() * detail::weighted_curl_mass(d, c, b, wu) * ops.curl + curl_stabilizer(d, c, b, wu);
    if (opt.pressure_volume) {
      const CellTable t(m, c, b, 2 * d.degree() + 2 + d.extra_quadrature());
      S += grad_volume_term(d, c, t, wp);
    }
    if (opt.pressure_stabilization) S += grad_stabilizer(d, c, b, wp);
  }

  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(s.np, s.nu);
  B.leftCols(d.cell_u_size()) = bscale * ops.grad.transpose();

  s.K.topLeftCorner(s.nu, s.nu) = A;
  s.K.block(s.nu, 0, s.np, s.nu) = B;
  s.K.block(0, s.nu, s.nu, s.np) = B.transpose();
  s.K.block(s.nu, s.nu, s.np, s.np) = -S;
  if (s.has_lambda) {
    const double mean = std::sqrt(m.cells[c].volume);  // integral of p_T picks its constant mode
    s.K(s.nu, s.nu + s.np) = mean;
    s.K(s.nu + s.np, s.nu) = mean;
  }

  if (source) {
    if (scheme == SchemeKind::field) {
      const Eigen::VectorXd J = project_cell_vector(m, c, b, d.degree() - 1, source, d.data_quadrature());
      s.rhs.head(s.nu) = ops.curl.transpose() * J;
    } else {
      s.rhs.head(d.cell_u_size()) = project_cell_vector(m, c, b, d.degree(), source, d.data_quadrature());
    }
  }
  return s;
}

} // namespace hhomag

#endif
