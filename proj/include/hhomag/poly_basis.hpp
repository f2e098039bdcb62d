// Scaled monomials, orthonormal cell/face bases, the trimmed face space, and L2 projectors.

#ifndef HHOMAG_POLY_BASIS_HPP
#define HHOMAG_POLY_BASIS_HPP

#include <functional>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "mesh.hpp"

namespace hhomag {

inline constexpr int dim_poly3(int l) { return l < 0 ? 0 : (l + 1) * (l + 2) * (l + 3) / 6; }
inline constexpr int dim_poly2(int l) { return l < 0 ? 0 : (l + 1) * (l + 2) / 2; }
/// rot_F P^{l+1}(F)
inline constexpr int dim_rot_face(int l) { return l < 0 ? 0 : dim_poly2(l + 1) - 1; }
/// P^{l-1}(F) (x - x_F)
inline constexpr int dim_koszul_face(int l) { return dim_poly2(l - 1); }
/// Trimmed face space R^k + Rc^{k-1}
inline constexpr int dim_trimmed_face(int k) { return dim_rot_face(k) + dim_koszul_face(k - 1); }
/// grad P^{l+1}(T)
inline constexpr int dim_grad_cell(int l) { return l < 0 ? 0 : dim_poly3(l + 1) - 1; }
/// P^{l-1}(T)^3 x (x - x_T)
inline constexpr int dim_koszul_cell(int l) { return 3 * dim_poly3(l) - dim_grad_cell(l); }

using Exponent3 = std::array<int, 3>;
using Exponent2 = std::array<int, 2>;

/// 3-variate exponents ordered by total degree.
inline std::vector<Exponent3> exponents3(int degree)
{
  std::vector<Exponent3> e;
  for (int d = 0; d <= degree; ++d)
    for (int a = d; a >= 0; --a)
      for (int b = d - a; b >= 0; --b) e.push_back({a, b, d - a - b});
  return e;
}

inline int exponent_index3(const Exponent3& e)
{
  const int d = e[0] + e[1] + e[2];
  return dim_poly3(d - 1) + (d - e[0]) * (d - e[0] + 1) / 2 + (d - e[0] - e[1]);
}

inline std::vector<Exponent2> exponents2(int degree)
{
  std::vector<Exponent2> e;
  for (int d = 0; d <= degree; ++d)
    for (int a = d; a >= 0; --a) e.push_back({a, d - a});
  return e;
}

inline int exponent_index2(const Exponent2& e)
{
  const int d = e[0] + e[1];
  return dim_poly2(d - 1) + (d - e[0]);
}

namespace detail {

  inline void powers(double x, int n, double* out)
  {
    out[0] = 1.;
    for (int i = 1; i <= n; ++i) out[i] = out[i - 1] * x;
  }

  // Orthonormalize columns of a value table w.r.t. weights; returns the lower-triangular change
  // of basis C with  phi = C * raw. Two passes for stability.
  inline Eigen::MatrixXd orthonormalizer(const Eigen::MatrixXd& raw_vals, const Eigen::VectorXd& w, int ncomp)
  {
    // raw_vals: (ncomp * npts) x n, component-major blocks
    const int n = static_cast<int>(raw_vals.cols());
    const int np = static_cast<int>(w.size());
    Eigen::MatrixXd C = Eigen::MatrixXd::Identity(n, n);
    for (int pass = 0; pass < 2; ++pass) {
      const Eigen::MatrixXd V = raw_vals * C.transpose();
      Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
      for (int c = 0; c < ncomp; ++c) {
        const auto B = V.middleRows(c * np, np);
        G.noalias() += B.transpose() * w.asDiagonal() * B;
      }
      Eigen::LLT<Eigen::MatrixXd> llt(G);
      if (llt.info() != Eigen::Success) throw std::runtime_error("basis Gram matrix is not positive definite");
      const Eigen::MatrixXd Linv = llt.matrixL().solve(Eigen::MatrixXd::Identity(n, n));
      C = Linv * C;
    }
    return C;
  }

} // namespace detail

/// Monomials ((x - center)/scale)^alpha with |alpha| <= degree.
class ScaledMonomials3
{
public:
  ScaledMonomials3() = default;
  ScaledMonomials3(const Point3& center, double scale, int degree)
    : center_(center), scale_(scale), degree_(degree), exps_(exponents3(degree))
  {}

  int size() const { return static_cast<int>(exps_.size()); }
  int degree() const { return degree_; }
  const Point3& center() const { return center_; }
  double scale() const { return scale_; }
  const std::vector<Exponent3>& exponents() const { return exps_; }

  Eigen::VectorXd values(const Point3& x) const
  {
    std::array<std::array<double, 16>, 3> p;
    const Eigen::Vector3d y = (x - center_) / scale_;
    for (int d = 0; d < 3; ++d) detail::powers(y[d], degree_, p[d].data());
    Eigen::VectorXd v(size());
    for (int i = 0; i < size(); ++i) v[i] = p[0][exps_[i][0]] * p[1][exps_[i][1]] * p[2][exps_[i][2]];
    return v;
  }

  /// Rows are monomials, columns are d/dx, d/dy, d/dz.
  Eigen::MatrixXd gradients(const Point3& x) const
  {
    std::array<std::array<double, 16>, 3> p;
    const Eigen::Vector3d y = (x - center_) / scale_;
    for (int d = 0; d < 3; ++d) detail::powers(y[d], degree_, p[d].data());
    Eigen::MatrixXd g(size(), 3);
    for (int i = 0; i < size(); ++i) {
      const auto& e = exps_[i];
      for (int d = 0; d < 3; ++d) {
        if (e[d] == 0) {
          g(i, d) = 0.;
          continue;
        }
        double t = e[d] / scale_;
        for (int q = 0; q < 3; ++q) t *= p[q][q == d ? e[q] - 1 : e[q]];
        g(i, d) = t;
      }
    }
    return g;
  }

private:
  Point3 center_ = Point3::Zero();
  double scale_ = 1.;
  int degree_ = 0;
  std::vector<Exponent3> exps_;
};

/// Orthonormal tangent frame of a face with t1 x t2 = n.
struct FaceFrame
{
  Point3 origin = Point3::Zero();
  Eigen::Vector3d t1 = Eigen::Vector3d::UnitX(), t2 = Eigen::Vector3d::UnitY(), n = Eigen::Vector3d::UnitZ();
  double scale = 1.;

  FaceFrame() = default;
  FaceFrame(const PolyMesh& m, int f)
  {
    const Face& F = m.faces[f];
    origin = F.center;
    scale = F.diameter;
    n = F.normal;
    Eigen::Vector3d e = m.vertices[F.vertices[1]] - m.vertices[F.vertices[0]];
    e -= e.dot(n) * n;
    t1 = e.normalized();
    t2 = n.cross(t1);
  }
  FaceFrame(const Point3& o, const Eigen::Vector3d& tangent, const Eigen::Vector3d& normal, double h)
    : origin(o), n(normal.normalized()), scale(h)
  {
    t1 = (tangent - tangent.dot(n) * n).normalized();
    t2 = n.cross(t1);
  }

  /// Scaled in-plane coordinates.
  Eigen::Vector2d local(const Point3& x) const { return {(x - origin).dot(t1) / scale, (x - origin).dot(t2) / scale}; }
  /// Tangential component in frame coordinates.
  Eigen::Vector2d tangential(const Eigen::Vector3d& v) const { return {v.dot(t1), v.dot(t2)}; }
  /// Frame coordinates of v x n.
  Eigen::Vector2d rotated_trace(const Eigen::Vector3d& v) const { return {v.dot(t2), -v.dot(t1)}; }
  /// Lift frame coordinates back to a 3D tangent vector.
  Eigen::Vector3d lift(const Eigen::Vector2d& a) const { return a[0] * t1 + a[1] * t2; }
};

class ScaledMonomials2
{
public:
  ScaledMonomials2() = default;
  ScaledMonomials2(const FaceFrame& frame, int degree) : frame_(frame), degree_(degree), exps_(exponents2(degree)) {}

  int size() const { return static_cast<int>(exps_.size()); }
  int degree() const { return degree_; }
  const FaceFrame& frame() const { return frame_; }
  const std::vector<Exponent2>& exponents() const { return exps_; }

  Eigen::VectorXd values(const Point3& x) const
  {
    std::array<std::array<double, 16>, 2> p;
    const Eigen::Vector2d y = frame_.local(x);
    for (int d = 0; d < 2; ++d) detail::powers(y[d], degree_, p[d].data());
    Eigen::VectorXd v(size());
    for (int i = 0; i < size(); ++i) v[i] = p[0][exps_[i][0]] * p[1][exps_[i][1]];
    return v;
  }

private:
  FaceFrame frame_;
  int degree_ = 0;
  std::vector<Exponent2> exps_;
};

/// Orthonormal hierarchical basis of P^degree(T); the first dim_poly3(l) functions span P^l(T).
class CellBasis
{
public:
  CellBasis() = default;
  CellBasis(const PolyMesh& m, int c, int degree)
    : mono_(m.cells[c].center, m.cells[c].diameter, degree)
  {
    const auto q = m.cell_quadrature(c, 2 * degree);
    Eigen::MatrixXd raw(q.size(), mono_.size());
    Eigen::VectorXd w(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
      raw.row(i) = mono_.values(q.points[i]).transpose();
      w[i] = q.weights[i];
    }
    coef_ = detail::orthonormalizer(raw, w, 1);
  }

  int degree() const { return mono_.degree(); }
  int size() const { return mono_.size(); }
  int size(int l) const { return dim_poly3(l); }
  const ScaledMonomials3& monomials() const { return mono_; }
  /// phi = coef * monomials (lower triangular)
  const Eigen::MatrixXd& coefficients() const { return coef_; }

  Eigen::VectorXd values(const Point3& x) const { return coef_ * mono_.values(x); }
  Eigen::MatrixXd gradients(const Point3& x) const { return coef_ * mono_.gradients(x); }

  /// Expansion of a polynomial given by monomial coefficients.
  Eigen::VectorXd from_monomials(const Eigen::VectorXd& mc) const
  {
    return coef_.transpose().triangularView<Eigen::Upper>().solve(mc);
  }

private:
  ScaledMonomials3 mono_;
  Eigen::MatrixXd coef_;
};

enum class FaceSpace
{
  trimmed,  // R^k + Rc^{k-1}
  rot,      // R^k
  full      // P^k(F)^2
};

/// Generators of vector face spaces as monomial coefficients, component-major (2 * dim_poly2(k) rows).
inline Eigen::MatrixXd face_rot_generators(int l, int kmax)
{
  // rot_F y^(a,b) = (d/dy2, -d/dy1)
  const int N = dim_poly2(kmax);
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(2 * N, dim_rot_face(l));
  int j = 0;
  for (const auto& e : exponents2(l + 1)) {
    if (e[0] + e[1] == 0) continue;
    if (e[1] > 0) R(exponent_index2({e[0], e[1] - 1}), j) = e[1];
    if (e[0] > 0) R(N + exponent_index2({e[0] - 1, e[1]}), j) = -e[0];
    ++j;
  }
  return R;
}

inline Eigen::MatrixXd face_koszul_generators(int l, int kmax)
{
  const int N = dim_poly2(kmax);
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(2 * N, dim_koszul_face(l));
  int j = 0;
  for (const auto& e : exponents2(l - 1)) {
    K(exponent_index2({e[0] + 1, e[1]}), j) = 1.;
    K(N + exponent_index2({e[0], e[1] + 1}), j) = 1.;
    ++j;
  }
  return K;
}

inline Eigen::MatrixXd face_space_generators(FaceSpace space, int k)
{
  const int N = dim_poly2(k);
  switch (space) {
  case FaceSpace::rot: return face_rot_generators(k, k);
  case FaceSpace::full: return Eigen::MatrixXd::Identity(2 * N, 2 * N);
  case FaceSpace::trimmed:
  default: {
    const auto R = face_rot_generators(k, k);
    const auto K = face_koszul_generators(k - 1, k);
    Eigen::MatrixXd Q(2 * N, R.cols() + K.cols());
    Q << R, K;
    return Q;
  }
  }
}

/// Generators of grad P^{l+1}(T) and P^{l-1}(T)^3 x (x - x_T) in scaled monomial coefficients (3 * dim_poly3(l) rows).
inline Eigen::MatrixXd cell_grad_generators(int l)
{
  const int N = dim_poly3(l);
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(3 * N, dim_grad_cell(l));
  int j = 0;
  for (const auto& e : exponents3(l + 1)) {
    if (e[0] + e[1] + e[2] == 0) continue;
    for (int d = 0; d < 3; ++d)
      if (e[d] > 0) {
        Exponent3 f = e;
        --f[d];
        G(d * N + exponent_index3(f), j) = e[d];
      }
    ++j;
  }
  return G;
}

inline Eigen::MatrixXd cell_koszul_generators(int l)
{
  const int N = dim_poly3(l);
  std::vector<Eigen::VectorXd> cols;
  for (const auto& e : exponents3(l - 1))
    for (int c = 0; c < 3; ++c) {
      // (y^e e_c) x y
      Eigen::VectorXd v = Eigen::VectorXd::Zero(3 * N);
      const int a = (c + 1) % 3, b = (c + 2) % 3;
      // e_c x y = y_a e_b - y_b e_a  (cyclic)
      Exponent3 fa = e, fb = e;
      ++fa[a];
      ++fb[b];
      v(b * N + exponent_index3(fa)) += 1.;
      v(a * N + exponent_index3(fb)) -= 1.;
      cols.push_back(v);
    }
  // keep an independent subset of size dim_koszul_cell(l)
  Eigen::MatrixXd M(3 * N, cols.size());
  for (std::size_t i = 0; i < cols.size(); ++i) M.col(i) = cols[i];
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(M);
  const int r = static_cast<int>(qr.rank());
  Eigen::MatrixXd K(3 * N, r);
  for (int i = 0; i < r; ++i) K.col(i) = M.col(qr.colsPermutation().indices()[i]);
  return K;
}

/// Orthonormal bases attached to a face: scalar P^k(F) and a vector space in frame coordinates.
class FaceBasis
{
public:
  FaceBasis() = default;
  FaceBasis(const PolyMesh& m, int f, int k, FaceSpace space = FaceSpace::trimmed)
    : FaceBasis(m, f, FaceFrame(m, f), k, space)
  {}
  FaceBasis(const PolyMesh& m, int f, const FaceFrame& frame, int k, FaceSpace space)
    : mono_(frame, k), space_(space)
  {
    const auto q = m.face_quadrature(f, 2 * k);
    const int np = static_cast<int>(q.size()), N = mono_.size();
    Eigen::MatrixXd raw(np, N);
    Eigen::VectorXd w(np);
    for (int i = 0; i < np; ++i) {
      raw.row(i) = mono_.values(q.points[i]).transpose();
      w[i] = q.weights[i];
    }
    scalar_coef_ = detail::orthonormalizer(raw, w, 1);

    const Eigen::MatrixXd gen = face_space_generators(space, k);  // 2N x d
    Eigen::MatrixXd vraw(2 * np, gen.cols());
    vraw.topRows(np) = raw * gen.topRows(N);
    vraw.bottomRows(np) = raw * gen.bottomRows(N);
    vector_coef_ = gen * detail::orthonormalizer(vraw, w, 2).transpose();  // 2N x d
  }

  int degree() const { return mono_.degree(); }
  FaceSpace space() const { return space_; }
  const FaceFrame& frame() const { return mono_.frame(); }
  int scalar_size() const { return mono_.size(); }
  int vector_size() const { return static_cast<int>(vector_coef_.cols()); }

  Eigen::VectorXd scalar_values(const Point3& x) const { return scalar_coef_ * mono_.values(x); }

  /// Row j = frame coordinates of vector basis function j at x.
  Eigen::MatrixXd vector_values(const Point3& x) const
  {
    const Eigen::VectorXd mv = mono_.values(x);
    const int N = mono_.size();
    Eigen::MatrixXd v(vector_size(), 2);
    v.col(0) = vector_coef_.topRows(N).transpose() * mv;
    v.col(1) = vector_coef_.bottomRows(N).transpose() * mv;
    return v;
  }

  /// Vector basis functions as monomial coefficients (component-major).
  const Eigen::MatrixXd& vector_coefficients() const { return vector_coef_; }
  const Eigen::MatrixXd& scalar_coefficients() const { return scalar_coef_; }

  /// Coefficient of the constant function 1 in the scalar basis (only entry 0 is nonzero).
  double constant_coefficient(double area) const { return std::sqrt(area); }

private:
  ScaledMonomials2 mono_;
  FaceSpace space_ = FaceSpace::trimmed;
  Eigen::MatrixXd scalar_coef_;
  Eigen::MatrixXd vector_coef_;
};

// ---------------------------------------------------------------------------
// L2 projections

using ScalarFunction = std::function<double(const Point3&)>;
using VectorFunction = std::function<Eigen::Vector3d(const Point3&)>;

/// Coefficients of the L2 projection of f onto P^l(T) (orthonormal basis).
inline Eigen::VectorXd project_cell(const PolyMesh& m, int c, const CellBasis& b, int l, const ScalarFunction& f,
                                    int quad_degree)
{
  const auto q = m.cell_quadrature(c, quad_degree);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(b.size(l));
  for (std::size_t i = 0; i < q.size(); ++i) r += q.weights[i] * f(q.points[i]) * b.values(q.points[i]).head(b.size(l));
  return r;
}

/// Projection of a vector field onto P^l(T)^3; layout component * dim + index.
inline Eigen::VectorXd project_cell_vector(const PolyMesh& m, int c, const CellBasis& b, int l, const VectorFunction& f,
                                           int quad_degree)
{
  const auto q = m.cell_quadrature(c, quad_degree);
  const int N = b.size(l);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(3 * N);
  for (std::size_t i = 0; i < q.size(); ++i) {
    const Eigen::VectorXd phi = b.values(q.points[i]).head(N);
    const Eigen::Vector3d v = f(q.points[i]);
    for (int d = 0; d < 3; ++d) r.segment(d * N, N) += q.weights[i] * v[d] * phi;
  }
  return r;
}

/// Projection of a scalar trace onto P^k(F).
inline Eigen::VectorXd project_face(const PolyMesh& m, int f, const FaceBasis& b, const ScalarFunction& g,
                                    int quad_degree)
{
  const auto q = m.face_quadrature(f, quad_degree);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(b.scalar_size());
  for (std::size_t i = 0; i < q.size(); ++i) r += q.weights[i] * g(q.points[i]) * b.scalar_values(q.points[i]);
  return r;
}

/// Projection onto the face vector space of a tangential field given in frame coordinates.
inline Eigen::VectorXd project_face_vector(const PolyMesh& m, int f, const FaceBasis& b,
                                           const std::function<Eigen::Vector2d(const Point3&)>& g, int quad_degree)
{
  const auto q = m.face_quadrature(f, quad_degree);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(b.vector_size());
  for (std::size_t i = 0; i < q.size(); ++i) r += q.weights[i] * b.vector_values(q.points[i]) * g(q.points[i]);
  return r;
}

/// Projection of v x n_F (the rotated tangential trace) onto the face vector space.
inline Eigen::VectorXd project_rotated_trace(const PolyMesh& m, int f, const FaceBasis& b, const VectorFunction& v,
                                             int quad_degree)
{
  const FaceFrame& fr = b.frame();
  return project_face_vector(m, f, b, [&](const Point3& x) { return fr.rotated_trace(v(x)); }, quad_degree);
}

/// Numerical rank of {grad p |_F x n_F : p in P^{k+1}(T)} for every face of a cell.
inline std::vector<int> rotated_trace_ranks(const PolyMesh& m, int c, int k)
{
  std::vector<int> ranks;
  const ScaledMonomials3 mono(m.cells[c].center, m.cells[c].diameter, k + 1);
  for (const auto& cf : m.cells[c].faces) {
    const FaceFrame fr(m, cf.face);
    const auto q = m.face_quadrature(cf.face, 2 * k + 2);
    const int np = static_cast<int>(q.size());
    Eigen::MatrixXd S(2 * np, mono.size());
    for (int i = 0; i < np; ++i) {
      const Eigen::MatrixXd g = mono.gradients(q.points[i]);
      const double sw = std::sqrt(q.weights[i]);
      for (int j = 0; j < mono.size(); ++j) {
        const Eigen::Vector2d t = fr.rotated_trace(g.row(j).transpose());
        S(i, j) = sw * t[0];
        S(np + i, j) = sw * t[1];
      }
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(S);
    qr.setThreshold(1e-10);
    ranks.push_back(static_cast<int>(qr.rank()));
  }
  return ranks;
}

} // namespace hhomag

#endif
