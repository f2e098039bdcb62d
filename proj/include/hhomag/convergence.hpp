// Convergence studies over a mesh sequence, with rate fits and CSV/table output.

#ifndef HHOMAG_CONVERGENCE_HPP
#define HHOMAG_CONVERGENCE_HPP

#include <chrono>
#include <cmath>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "testcases.hpp"
#include "topology.hpp"

namespace hhomag {

struct LevelResult
{
  int level = 0;
  int resolution = 0;
  double h = 0.;
  int cells = 0;
  int ndof = 0;
  double en_err = 0.;
  double l2_err = 0.;
  double pressure_norm = 0.;
  double residual = 0.;
  double runtime_s = 0.;
  std::string backend;
};

struct RunOptions
{
  int degree = 1;
  std::vector<int> resolutions;  // empty: the case's own sequence
  int levels = 0;                // keep the first `levels` resolutions; 0 keeps all
  std::optional<CurlVariant> curl;
  std::optional<FaceSpace> face_space;
  std::optional<bool> pressure_stabilization;
  std::optional<bool> pressure_volume;
  bool condense = true;
  double agglomerate = 0.;  // fraction of vertices whose stars are merged; 0 keeps the tetrahedra
  unsigned seed = 1;
  int max_unknowns = 0;  // refuse levels whose skeletal system is larger; 0 means no limit
  std::function<void(const LevelResult&)> on_level;
};

/// Errors below this are reported as exact and excluded from rate fits.
inline constexpr double exact_threshold = 1e-9;

struct ConvergenceReport
{
  std::string case_name;
  int degree = 1;
  std::vector<LevelResult> rows;
  std::string error;  // set when a level failed; rows hold the levels that finished

  bool complete() const { return error.empty(); }

  /// log(e_{i-1}/e_i) / log(h_{i-1}/h_i) for consecutive rows; NaN when either error is exact.
  std::vector<double> pair_rates(double LevelResult::*err) const
  {
    std::vector<double> r;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const double a = rows[i - 1].*err, b = rows[i].*err;
      if (a < exact_threshold || b < exact_threshold) r.push_back(std::nan(""));
      else r.push_back(std::log(a / b) / std::log(rows[i - 1].h / rows[i].h));
    }
    return r;
  }

  /// Least-squares slope of log(err) against log(h); NaN with fewer than two usable rows.
  double fitted_rate(double LevelResult::*err) const
  {
    std::vector<std::pair<double, double>> pts;
    for (const auto& row : rows)
      if (row.*err >= exact_threshold) pts.push_back({std::log(row.h), std::log(row.*err)});
    if (pts.size() < 2) return std::nan("");
    double sx = 0., sy = 0.;
    for (auto [x, y] : pts) sx += x, sy += y;
    const double n = static_cast<double>(pts.size()), mx = sx / n, my = sy / n;
    double sxy = 0., sxx = 0.;
    for (auto [x, y] : pts) sxy += (x - mx) * (y - my), sxx += (x - mx) * (x - mx);
    return sxy / sxx;
  }

  bool all_exact() const
  {
    for (const auto& row : rows)
      if (row.en_err >= exact_threshold || row.l2_err >= exact_threshold) return false;
    return !rows.empty();
  }

  void write_csv(std::ostream& os) const
  {
    os << "level,h,ndof,en_err,l2_err,runtime_s\n";
    os << std::setprecision(10);
    for (const auto& r : rows)
      os << r.level << ',' << r.h << ',' << r.ndof << ',' << r.en_err << ',' << r.l2_err << ',' << r.runtime_s << '\n';
  }

  void print_table(std::ostream& os) const
  {
    const auto en = pair_rates(&LevelResult::en_err), l2 = pair_rates(&LevelResult::l2_err);
    auto rate = [](const std::vector<double>& v, std::size_t i) {
      std::ostringstream s;
      if (i == 0) s << "-";
      else if (std::isnan(v[i - 1])) s << "exact";
      else s << std::fixed << std::setprecision(2) << v[i - 1];
      return s.str();
    };
    os << case_name << ", k = " << degree << '\n';
    os << std::setw(5) << "level" << std::setw(11) << "h" << std::setw(9) << "#DoF" << std::setw(12) << "en_err"
       << std::setw(7) << "rate" << std::setw(12) << "l2_err" << std::setw(7) << "rate" << std::setw(12) << "|p_T|"
       << std::setw(10) << "time[s]" << '\n';
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      os << std::setw(5) << r.level << std::scientific << std::setprecision(3) << std::setw(11) << r.h << std::setw(9)
         << r.ndof << std::setw(12) << r.en_err << std::setw(7) << rate(en, i) << std::setw(12) << r.l2_err
         << std::setw(7) << rate(l2, i) << std::setw(12) << r.pressure_norm << std::defaultfloat << std::fixed
         << std::setprecision(2) << std::setw(10) << r.runtime_s << std::defaultfloat << '\n';
    }
    if (all_exact()) os << "rates: exact\n";
    else
      os << "least-squares rates: energy " << std::setprecision(3) << fitted_rate(&LevelResult::en_err) << ", L2 "
         << fitted_rate(&LevelResult::l2_err) << '\n';
    if (!error.empty()) os << "aborted: " << error << '\n';
  }
};

/// Mesh of one level, agglomerated when requested.
inline PolyMesh level_mesh(const TestCase& t, int resolution, const RunOptions& opt)
{
  PolyMesh m = t.mesh(resolution);
  if (opt.agglomerate > 0.) m = agglomerate_random(m, opt.seed, opt.agglomerate);
  return m;
}

/// Scheme switches of a case after applying the run's overrides.
inline SchemeOptions scheme_options(const TestCase& t, const PolyMesh& m, const RunOptions& opt)
{
  TestCase u = t;
  if (opt.curl) u.curl = *opt.curl;
  if (opt.pressure_stabilization) u.pressure_stabilization = *opt.pressure_stabilization;
  SchemeOptions o = scheme_options(u, m);
  if (opt.pressure_volume) o.pressure_volume = *opt.pressure_volume;
  return o;
}

/// Solves one level and measures it against the exact solution.
inline LevelResult run_level(const TestCase& t, int resolution, const RunOptions& opt)
{
  const auto t0 = std::chrono::steady_clock::now();
  PolyMesh m = level_mesh(t, resolution, opt);
  const TopologyInfo topo = analyze_topology(m);
  const Discretization d(m, opt.degree, opt.face_space.value_or(t.face_space), t.extra_quadrature);

  if (opt.max_unknowns > 0) {
    const int n = DofMap::build(d, topo, t.scheme).skeletal;
    if (n > opt.max_unknowns)
      throw std::length_error(std::to_string(n) + " skeletal unknowns exceed the limit of " + std::to_string(opt.max_unknowns));
  }

  AssemblyOptions aopt;
  aopt.scheme = scheme_options(t, m, opt);
  aopt.condense = opt.condense;
  const SourceData data{t.current, t.boundary_field, {}};
  const Solution s = solve(d, topo, t.scheme, data, aopt);

  std::vector<double> eta;
  ScalarFunction inverse_eta;
  if (t.scheme == SchemeKind::vecpot) {
    if (t.inverse_mu) inverse_eta = t.inverse_mu;
    else eta = m.mu;
  }
  const ErrorReport e = compute_errors(d, s.u, t.exact, eta, inverse_eta);

  LevelResult r;
  r.resolution = resolution;
  r.h = m.mesh_size();
  r.cells = m.num_cells();
  r.ndof = s.ndof;
  r.en_err = e.energy;
  r.l2_err = e.l2;
  r.pressure_norm = pressure_cell_norm(s.p);
  r.residual = s.report.residual;
  r.backend = s.report.backend;
  r.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

/// Runs the levels in order. A failing level stops the study and is recorded in `error`.
inline ConvergenceReport run_convergence(const TestCase& t, const RunOptions& opt = {})
{
  std::vector<int> res = opt.resolutions.empty() ? t.resolutions : opt.resolutions;
  if (opt.levels > 0) {
    if (opt.levels > static_cast<int>(res.size()))
      throw std::invalid_argument("case " + t.name + " has only " + std::to_string(res.size()) + " levels");
    res.resize(opt.levels);
  }
  if (res.empty()) throw std::invalid_argument("no levels to run");
  if (opt.degree < 1) throw std::invalid_argument("polynomial degree must be at least 1");

  ConvergenceReport rep;
  rep.case_name = t.name;
  rep.degree = opt.degree;
  for (std::size_t i = 0; i < res.size(); ++i) {
    try {
      LevelResult r = run_level(t, res[i], opt);
      r.level = static_cast<int>(i) + 1;
      rep.rows.push_back(r);
      if (opt.on_level) opt.on_level(r);
    } catch (const std::exception& e) {
      rep.error = "level " + std::to_string(i + 1) + " (resolution " + std::to_string(res[i]) + "): " + e.what();
      break;
    } catch (...) {
      rep.error = "level " + std::to_string(i + 1) + ": unknown failure";
      break;
    }
  }
  return rep;
}

} // namespace hhomag

#endif
