// Self-checks shared by the `verify` command and the acceptance runner.

#ifndef HHOMAG_CHECKS_HPP
#define HHOMAG_CHECKS_HPP

#include <cstdio>
#include <random>

#include "convergence.hpp"

namespace hhomag {

struct CheckResult
{
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.;
};

namespace detail {

  inline std::string fmt(const char* f, double v)
  {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
  }

  inline std::string sci(double v) { return fmt("%.2e", v); }
  inline std::string fix(double v) { return fmt("%.3f", v); }

  /// Runs `body`, records the wall time and turns exceptions into failures.
  inline CheckResult timed(int id, std::string name, const std::function<bool(std::string&)>& body)
  {
    CheckResult r;
    r.id = id;
    r.name = std::move(name);
    const auto t0 = std::chrono::steady_clock::now();
    try {
      r.passed = body(r.detail);
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail += (r.detail.empty() ? "" : "; ") + std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
  }

  /// Random polynomial scalar and vector fields of a given degree.
  class RandomPolynomial
  {
  public:
    RandomPolynomial(int degree, std::mt19937& rng) : exps_(exponents3(degree))
    {
      std::uniform_real_distribution<double> u(-1., 1.);
      for (std::size_t i = 0; i < exps_.size(); ++i) {
        vec_.emplace_back(u(rng), u(rng), u(rng));
        sca_.push_back(u(rng));
      }
    }

    double scalar(const Point3& x) const
    {
      double r = 0.;
      for (std::size_t i = 0; i < exps_.size(); ++i) r += sca_[i] * monomial(exps_[i], x);
      return r;
    }

    Eigen::Vector3d gradient(const Point3& x) const
    {
      Eigen::Vector3d r = Eigen::Vector3d::Zero();
      for (std::size_t i = 0; i < exps_.size(); ++i) r += sca_[i] * monomial_gradient(exps_[i], x);
      return r;
    }

    Eigen::Vector3d vector(const Point3& x) const
    {
      Eigen::Vector3d r = Eigen::Vector3d::Zero();
      for (std::size_t i = 0; i < exps_.size(); ++i) r += vec_[i] * monomial(exps_[i], x);
      return r;
    }

    // curl(m c) = grad m x c
    Eigen::Vector3d curl(const Point3& x) const
    {
      Eigen::Vector3d r = Eigen::Vector3d::Zero();
      for (std::size_t i = 0; i < exps_.size(); ++i) r += monomial_gradient(exps_[i], x).cross(vec_[i]);
      return r;
    }

    double divergence(const Point3& x) const
    {
      double r = 0.;
      for (std::size_t i = 0; i < exps_.size(); ++i) r += monomial_gradient(exps_[i], x).dot(vec_[i]);
      return r;
    }

  private:
    static double monomial(const Exponent3& e, const Point3& x)
    {
      return std::pow(x.x(), e[0]) * std::pow(x.y(), e[1]) * std::pow(x.z(), e[2]);
    }

    static Eigen::Vector3d monomial_gradient(const Exponent3& e, const Point3& x)
    {
      Eigen::Vector3d g = Eigen::Vector3d::Zero();
      for (int d = 0; d < 3; ++d) {
        if (e[d] == 0) continue;
        Exponent3 f = e;
        --f[d];
        g[d] = e[d] * monomial(f, x);
      }
      return g;
    }

    std::vector<Exponent3> exps_;
    std::vector<Eigen::Vector3d> vec_;
    std::vector<double> sca_;
  };

  /// A single tetrahedron and the largest cell of a randomly agglomerated cube.
  inline std::vector<std::pair<std::string, std::pair<PolyMesh, int>>> sample_cells()
  {
    PolyMesh tet = generate_box_tet(1, 1, 1);
    PolyMesh agg = agglomerate_random(generate_box_tet(3, 3, 3), 1, 0.3);
    int big = 0;
    for (int c = 0; c < agg.num_cells(); ++c)
      if (agg.cells[c].tets.size() > agg.cells[big].tets.size()) big = c;
    return {{"tetrahedron", {std::move(tet), 0}}, {"agglomerated cell", {std::move(agg), big}}};
  }

  /// Generic smooth data used where only the linear algebra matters.
  inline SourceData generic_data()
  {
    SourceData s;
    s.current = [](const Point3& x) { return Eigen::Vector3d(std::sin(x.y()), std::cos(x.z()), x.x() * x.y()); };
    s.boundary_field = [](const Point3& x) { return Eigen::Vector3d(x.y() + x.z() * x.z(), std::cos(x.x()), x.x() - x.y()); };
    return s;
  }

} // namespace detail

struct CommutationDefect
{
  double curl = 0.;  // max over samples of |C_T I v - pi_{k-1} curl v| / |v|
  double grad = 0.;  // max over samples of |G_T I q - pi_k grad q| / |q|
};

/// Commutation defects of the reconstructions on one cell, over random polynomials of degree k+2.
inline CommutationDefect commutation_defect(const PolyMesh& m, int c, int k, int samples, unsigned seed)
{
  std::mt19937 rng(seed);
  const Discretization d(m, k);
  const CellBasis b = d.cell_basis(c);
  const LocalOperators ops = local_operators(d, c, b);
  const int qdeg = 2 * k + 6;
  CommutationDefect out;
  for (int s = 0; s < samples; ++s) {
    const detail::RandomPolynomial p(k + 2, rng);
    const VectorFunction v = [&](const Point3& x) { return p.vector(x); };
    const Eigen::VectorXd Iv = reduce_curl_local(d, c, b, v);
    const Eigen::VectorXd curl_ref = project_cell_vector(m, c, b, k - 1, [&](const Point3& x) { return p.curl(x); }, qdeg);
    const double vnorm = project_cell_vector(m, c, b, k + 2, v, qdeg).norm();
    out.curl = std::max(out.curl, (ops.curl * Iv - curl_ref).norm() / vnorm);

    const HybridPressure Iq = reduce_grad(d, [&](const Point3& x) { return p.scalar(x); });
    const Eigen::VectorXd grad_ref = project_cell_vector(m, c, b, k, [&](const Point3& x) { return p.gradient(x); }, qdeg);
    const double qnorm = project_cell(m, c, b, k + 2, [&](const Point3& x) { return p.scalar(x); }, qdeg).norm();
    out.grad = std::max(out.grad, (ops.grad * Iq.local(d, c) - grad_ref).norm() / qnorm);
  }
  return out;
}

/// Largest relative L2 residual of projecting P^{k-1}(F)^2 onto the face space, over the faces of a cell.
inline double face_containment_residual(const PolyMesh& m, int c, int k, FaceSpace space = FaceSpace::trimmed)
{
  const Discretization d(m, k, space);
  double worst = 0.;
  for (const auto& cf : m.cells[c].faces) {
    const auto& fb = d.face_basis(cf.face);
    const FaceFrame& fr = fb.frame();
    const auto q = m.face_quadrature(cf.face, 2 * k + 2);
    for (const auto& e : exponents2(k - 1))
      for (int comp = 0; comp < 2; ++comp) {
        auto g = [&](const Point3& x) {
          const Eigen::Vector2d y = fr.local(x);
          Eigen::Vector2d r = Eigen::Vector2d::Zero();
          r[comp] = std::pow(y[0], e[0]) * std::pow(y[1], e[1]);
          return r;
        };
        const Eigen::VectorXd pc = project_face_vector(m, cf.face, fb, g, 2 * k + 2);
        double r2 = 0., n2 = 0.;
        for (std::size_t i = 0; i < q.size(); ++i) {
          const Eigen::Vector2d gi = g(q.points[i]);
          r2 += q.weights[i] * (fb.vector_values(q.points[i]).transpose() * pc - gi).squaredNorm();
          n2 += q.weights[i] * gi.squaredNorm();
        }
        worst = std::max(worst, std::sqrt(r2 / n2));
      }
  }
  return worst;
}

/// Largest closure defect over cells: |sum_F eps |F| n_F| / |T|^(2/3) and the divergence theorem for a
/// random quadratic field, relative to its boundary flux magnitude.
inline std::pair<double, double> divergence_closure(const PolyMesh& m, unsigned seed)
{
  std::mt19937 rng(seed);
  const detail::RandomPolynomial p(2, rng);
  double normals = 0., flux = 0.;
  for (int c = 0; c < m.num_cells(); ++c) {
    const Cell& C = m.cells[c];
    Eigen::Vector3d s = Eigen::Vector3d::Zero();
    double boundary = 0., scale = 0.;
    for (const auto& cf : C.faces) {
      const Face& F = m.faces[cf.face];
      s += cf.sign * F.area * F.normal;
      const auto q = m.face_quadrature(cf.face, 2);
      for (std::size_t i = 0; i < q.size(); ++i) {
        const double vn = cf.sign * p.vector(q.points[i]).dot(F.normal);
        boundary += q.weights[i] * vn;
        scale += q.weights[i] * std::abs(vn);
      }
    }
    const auto q = m.cell_quadrature(c, 1);
    double volume = 0.;
    for (std::size_t i = 0; i < q.size(); ++i) volume += q.weights[i] * p.divergence(q.points[i]);
    normals = std::max(normals, s.norm() / std::pow(C.volume, 2. / 3.));
    flux = std::max(flux, std::abs(volume - boundary) / scale);
  }
  return {normals, flux};
}

// ---------------------------------------------------------------------------
// Criteria

/// 1. Polynomial potentials are reproduced by the vecpot scheme.
inline CheckResult check_polynomial_exactness()
{
  return detail::timed(1, "vecpot polynomial exactness", [](std::string& out) {
    bool ok = true;
    const std::pair<TestCase, int> runs[] = {{testcase_poly_vecpot_linear(), 1}, {testcase_poly_vecpot_quadratic(), 2}};
    for (const auto& [t, k] : runs) {
      RunOptions opt;
      opt.degree = k;
      opt.resolutions = {2};
      const ConvergenceReport r = run_convergence(t, opt);
      if (!r.complete()) throw std::runtime_error(r.error);
      const auto& row = r.rows.front();
      ok = ok && row.en_err < 1e-8 && row.l2_err < 1e-8;
      out += (out.empty() ? "" : "; ") + std::string("k=") + std::to_string(k) + " en " + detail::sci(row.en_err) + " l2 "
             + detail::sci(row.l2_err);
    }
    return ok;
  });
}

/// 2. C_T I = pi curl and G_T I = pi grad on a tetrahedron and an agglomerated cell.
inline CheckResult check_commutation(int samples = 20)
{
  return detail::timed(2, "commutation of the reconstructions", [samples](std::string& out) {
    double curl = 0., grad = 0.;
    for (const auto& [name, cell] : detail::sample_cells())
      for (int k = 1; k <= 3; ++k) {
        const CommutationDefect e = commutation_defect(cell.first, cell.second, k, samples, 7u + k);
        curl = std::max(curl, e.curl);
        grad = std::max(grad, e.grad);
      }
    out = "max curl defect " + detail::sci(curl) + ", max grad defect " + detail::sci(grad) + " (k=1..3, "
          + std::to_string(samples) + " samples per shape)";
    return curl <= 1e-10 && grad <= 1e-10;
  });
}

/// 3. Variable permeability cube, k = 1 and 2. Levels whose skeletal system exceeds `max_unknowns`
/// are refused, which fails the criterion.
inline CheckResult check_variable_mu(int max_unknowns = 200000, double budget_s = 300.)
{
  return detail::timed(3, "variable permeability convergence", [=](std::string& out) {
    bool ok = true;
    const auto t0 = std::chrono::steady_clock::now();
    for (int k = 1; k <= 2; ++k) {
      RunOptions opt;
      opt.degree = k;
      opt.resolutions = {4, 8, 16};
      opt.max_unknowns = max_unknowns;
      const ConvergenceReport r = run_convergence(testcase_variable_mu(), opt);
      const double en = r.fitted_rate(&LevelResult::en_err), l2 = r.fitted_rate(&LevelResult::l2_err);
      ok = ok && r.complete() && en >= k - 0.2 && l2 >= k + 0.7;
      out += (out.empty() ? "" : "; ") + std::string("k=") + std::to_string(k) + " slopes en " + detail::fix(en) + " l2 "
             + detail::fix(l2) + " over " + std::to_string(r.rows.size()) + " levels";
      if (!r.complete()) out += " (" + r.error + ")";
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return ok && s <= budget_s;
  });
}

/// 4. Betti numbers and cutting surfaces.
inline CheckResult check_topology()
{
  return detail::timed(4, "topology pipeline", [](std::string& out) {
    PolyMesh punched = generate_punched_box(1), cavity = generate_cavity_box(1);
    const TopologyInfo a = analyze_topology(punched), b = analyze_topology(cavity);
    const int cut = cut_betti(punched, a.surfaces);
    out = "punched box (" + std::to_string(a.beta1) + "," + std::to_string(a.beta2) + "), cavity box ("
          + std::to_string(b.beta1) + "," + std::to_string(b.beta2) + "), cut beta1 " + std::to_string(cut);
    return a.beta1 == 1 && a.beta2 == 0 && b.beta1 == 0 && b.beta2 == 1 && cut == 0;
  });
}

/// 5. Harmonic field on the punched box: L2 and pressure decay.
inline CheckResult check_harmonic_field()
{
  return detail::timed(5, "harmonic field with cutting-surface flux", [](std::string& out) {
    RunOptions opt;
    opt.degree = 1;
    const ConvergenceReport r = run_convergence(testcase_harmonic_field(), opt);
    if (!r.complete()) throw std::runtime_error(r.error);
    const double l2 = r.fitted_rate(&LevelResult::l2_err), p = r.fitted_rate(&LevelResult::pressure_norm);
    out = "slopes l2 " + detail::fix(l2) + ", pressure " + detail::fix(p) + " over " + std::to_string(r.rows.size())
          + " levels";
    return l2 >= 1.4 && p >= 0.8;
  });
}

/// Skeletal and cell unknowns of condensed and monolithic solves; returns the relative difference.
inline double condensation_difference(const PolyMesh& mesh, SchemeKind scheme, int k = 1)
{
  PolyMesh m = mesh;
  const TopologyInfo topo = analyze_topology(m);
  const Discretization d(m, k);
  const SourceData data = detail::generic_data();
  AssemblyOptions opt;
  opt.scheme = SchemeOptions::experiment_defaults(m);
  const Solution a = solve(d, topo, scheme, data, opt);
  opt.condense = false;
  const Solution b = solve(d, topo, scheme, data, opt);
  const int n = a.ndof;
  double diff = (a.global - b.global.head(n)).squaredNorm(), ref = b.global.head(n).squaredNorm();
  for (int c = 0; c < m.num_cells(); ++c) {
    diff += (a.u.cell[c] - b.u.cell[c]).squaredNorm() + (a.p.cell[c] - b.p.cell[c]).squaredNorm();
    ref += b.u.cell[c].squaredNorm() + b.p.cell[c].squaredNorm();
  }
  return std::sqrt(diff / ref);
}

/// 6. Static condensation agrees with the monolithic solve on every geometry.
inline CheckResult check_condensation()
{
  return detail::timed(6, "static condensation equivalence", [](std::string& out) {
    double worst = 0.;
    auto meshes = geometries();
    meshes.push_back({"agglomerated box", "", [](int) { return agglomerate_random(generate_box_tet(2, 2, 2), 3, 0.5); }});
    for (const auto& g : meshes)
      for (SchemeKind s : {SchemeKind::field, SchemeKind::vecpot}) worst = std::max(worst, condensation_difference(g.generate(1), s));
    out = "max relative difference " + detail::sci(worst) + " over " + std::to_string(meshes.size()) + " geometries x 2 schemes";
    return worst <= 1e-8;
  });
}

/// 7. Reentrant edge: L2 converges near 2/3 with C_T, not with the broken curl; energy does not converge.
inline CheckResult check_singular_field()
{
  return detail::timed(7, "singular solution at a reentrant edge", [](std::string& out) {
    const TestCase t = testcase_singular_field();
    RunOptions opt;
    opt.degree = 1;
    const ConvergenceReport r = run_convergence(t, opt);
    if (!r.complete()) throw std::runtime_error(r.error);
    RunOptions broken = opt;
    broken.curl = CurlVariant::broken;
    broken.face_space = FaceSpace::rot;
    const ConvergenceReport rb = run_convergence(t, broken);
    if (!rb.complete()) throw std::runtime_error(rb.error);

    const double l2 = r.fitted_rate(&LevelResult::l2_err), en = r.fitted_rate(&LevelResult::en_err);
    const double l2b = rb.fitted_rate(&LevelResult::l2_err);
    const double floor = 0.5;
    double en_min = std::numeric_limits<double>::infinity();
    for (const auto& row : r.rows) en_min = std::min(en_min, row.en_err);
    const auto pairs = r.pair_rates(&LevelResult::l2_err);
    out = "C_T slopes l2 " + detail::fix(l2) + " (last " + detail::fix(pairs.back()) + "), energy " + detail::fix(en)
          + " with min error " + detail::fix(en_min) + "; broken-curl l2 slope " + detail::fix(l2b);
    return l2 >= 0.5 && l2 <= 0.85 && en <= 0.1 && en_min >= floor && l2b < 0.1;
  });
}

/// 8. Zero data gives the zero solution on every geometry, for both schemes.
inline CheckResult check_zero_data()
{
  return detail::timed(8, "zero-data well-posedness", [](std::string& out) {
    double worst = 0., residual = 0.;
    int runs = 0;
    for (const auto& g : geometries()) {
      PolyMesh m = g.generate(1);
      const TopologyInfo topo = analyze_topology(m);
      const Discretization d(m, 1);
      for (SchemeKind s : {SchemeKind::field, SchemeKind::vecpot}) {
        AssemblyOptions opt;
        opt.scheme = SchemeOptions::experiment_defaults(m);
        const Solution sol = solve(d, topo, s, SourceData{}, opt);
        worst = std::max(worst, sol.global.cwiseAbs().maxCoeff());
        for (int c = 0; c < m.num_cells(); ++c)
          worst = std::max({worst, sol.u.cell[c].cwiseAbs().maxCoeff(), sol.p.cell[c].cwiseAbs().maxCoeff()});
        residual = std::max(residual, sol.report.residual);
        ++runs;
      }
    }
    out = std::to_string(runs) + " solves, max |x| " + detail::sci(worst) + ", max residual " + detail::sci(residual);
    return worst < 1e-10 && residual < 1e-10;
  });
}

/// 9. Face-space dimensions, containment of P^{k-1}(F)^2 and divergence-theorem closure.
inline CheckResult check_basis()
{
  return detail::timed(9, "quadrature and basis suite", [](std::string& out) {
    const int expected[] = {5, 10, 17};
    bool dims = true;
    double contain = 0.;
    for (int k = 1; k <= 3; ++k) {
      dims = dims && dim_trimmed_face(k) == expected[k - 1];
      for (const auto& [name, cell] : detail::sample_cells())
        contain = std::max(contain, face_containment_residual(cell.first, cell.second, k));
    }
    double normals = 0., flux = 0.;
    for (const PolyMesh& m : {generate_punched_box(1), agglomerate_random(generate_box_tet(3, 3, 3), 5, 0.5)}) {
      const auto [a, b] = divergence_closure(m, 11);
      normals = std::max(normals, a);
      flux = std::max(flux, b);
    }
    out = std::string("dim Q = ") + std::to_string(dim_trimmed_face(1)) + "/" + std::to_string(dim_trimmed_face(2)) + "/"
          + std::to_string(dim_trimmed_face(3)) + ", containment " + detail::sci(contain) + ", closure "
          + detail::sci(normals) + " (normals) " + detail::sci(flux) + " (flux)";
    return dims && contain < 1e-10 && normals < 1e-12 && flux < 1e-12;
  });
}

/// The quick property suites.
inline std::vector<CheckResult> run_verify_suites()
{
  return {check_polynomial_exactness(), check_commutation(), check_topology(), check_condensation(), check_zero_data(),
          check_basis()};
}

} // namespace hhomag

#endif
