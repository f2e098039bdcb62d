// Command-line driver: meshes, topology, convergence runs and self-checks.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include <hhomag/hhomag.hpp>

using namespace hhomag;

namespace {

/// A geometry name or a mesh file.
PolyMesh load_mesh(const std::string& source, int resolution)
{
  for (const auto& g : geometries())
    if (g.name == source) return g.generate(resolution);
  if (std::ifstream(source).good()) return read_mesh(source);
  find_geometry(source);  // throws with the list of names
  return {};
}

void print_mesh_info(const PolyMesh& m, std::ostream& os)
{
  std::size_t fmin = std::numeric_limits<std::size_t>::max(), fmax = 0;
  for (const auto& c : m.cells) {
    fmin = std::min(fmin, c.faces.size());
    fmax = std::max(fmax, c.faces.size());
  }
  os << "vertices " << m.num_vertices() << "\nfaces " << m.num_faces() << " (" << m.boundary_faces().size()
     << " on the boundary)\ncells " << m.num_cells() << " (" << fmin << " to " << fmax << " faces each"
     << (m.all_tetrahedral() ? ", all tetrahedra" : "") << ")\nh " << m.mesh_size() << "\nvolume " << m.total_volume()
     << '\n';
}

int cmd_topo(const std::string& source, int resolution, const std::string& faceset_out)
{
  PolyMesh m = load_mesh(source, resolution);
  const TopologyInfo info = analyze_topology(m);
  std::cout << "beta0 " << info.beta0 << "\nbeta1 " << info.beta1 << "\nbeta2 " << info.beta2 << "\neuler "
            << info.euler << '\n';
  for (const auto& b : info.boundary)
    std::cout << "boundary component " << b.index << ": " << b.faces.size() << " faces, area " << b.area << '\n';
  for (const auto& s : info.surfaces)
    std::cout << "cutting surface " << s.index << ": " << s.faces.size() << " faces, euler "
              << surface_euler(m, s.faces) << '\n';
  std::cout << "cut beta1 " << cut_betti(m, info.surfaces) << '\n';
  if (!faceset_out.empty()) {
    std::vector<FaceSet> sets;
    for (const auto& s : info.surfaces) sets.push_back({"sigma_" + std::to_string(s.index), s.faces, {}});
    for (const auto& b : info.boundary) sets.push_back({"gamma_" + std::to_string(b.index), b.faces, {}});
    write_mesh(faceset_out, m, sets);
    std::cout << "wrote " << faceset_out << '\n';
  }
  return 0;
}

struct RunArgs
{
  std::string case_name;
  int k = 1;
  int levels = 0;
  std::vector<int> resolutions;
  std::string variant;
  std::string face_space;
  std::string pressure_stabilization = "auto";
  bool pressure_volume = false;
  bool no_condense = false;
  double agglomerate = 0.;
  unsigned seed = 1;
  int max_unknowns = 0;
  std::string out;
};

int cmd_run(const RunArgs& a)
{
  const TestCase t = find_testcase(a.case_name);
  RunOptions opt;
  opt.degree = a.k;
  opt.levels = a.levels;
  opt.resolutions = a.resolutions;
  if (a.variant == "broken") opt.curl = CurlVariant::broken;
  else if (a.variant == "reconstruction") opt.curl = CurlVariant::reconstruction;
  if (a.face_space == "trimmed") opt.face_space = FaceSpace::trimmed;
  else if (a.face_space == "rot") opt.face_space = FaceSpace::rot;
  else if (a.face_space == "full") opt.face_space = FaceSpace::full;
  if (a.pressure_stabilization != "auto") opt.pressure_stabilization = a.pressure_stabilization == "on";
  if (a.pressure_volume) opt.pressure_volume = true;
  opt.condense = !a.no_condense;
  opt.agglomerate = a.agglomerate;
  opt.seed = a.seed;
  opt.max_unknowns = a.max_unknowns;
  opt.on_level = [](const LevelResult& r) {
    std::cerr << "level " << r.level << ": " << r.ndof << " unknowns, " << r.runtime_s << " s\n";
  };

  const ConvergenceReport rep = run_convergence(t, opt);
  rep.print_table(std::cout);
  if (!a.out.empty()) {
    std::ofstream os(a.out);
    if (!os) throw std::runtime_error("cannot write " + a.out);
    rep.write_csv(os);
  }
  return rep.complete() ? 0 : 1;
}

int cmd_verify()
{
  bool ok = true;
  for (const auto& r : run_verify_suites()) {
    std::cout << (r.passed ? "PASS" : "FAIL") << "  " << r.name << ": " << r.detail << " [" << detail::fix(r.seconds)
              << " s]" << std::endl;
    ok = ok && r.passed;
  }
  return ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Hybrid high-order magnetostatics on polyhedral meshes"};
  app.require_subcommand(1);

  // mesh
  auto* mesh = app.add_subcommand("mesh", "generate, agglomerate or inspect meshes");
  mesh->require_subcommand(1);
  std::string geometry, input, output;
  int resolution = 1;
  double fraction = 0.;
  unsigned seed = 1;

  auto* gen = mesh->add_subcommand("gen", "generate a tetrahedral mesh of a named geometry");
  gen->add_option("geometry", geometry, "geometry name")->required();
  gen->add_option("-n,--resolution", resolution, "cubes per unit length")->check(CLI::PositiveNumber);
  gen->add_option("--agglomerate", fraction, "merge random vertex stars (fraction of vertices tried)")->check(CLI::Range(0., 1.));
  gen->add_option("--seed", seed, "agglomeration seed");
  gen->add_option("-o,--out", output, "output mesh file")->required();

  auto* agg = mesh->add_subcommand("agglomerate", "merge random vertex stars of a tetrahedral mesh");
  agg->add_option("input", input, "input mesh file")->required()->check(CLI::ExistingFile);
  agg->add_option("--fraction", fraction, "fraction of vertices tried")->required()->check(CLI::Range(0., 1.));
  agg->add_option("--seed", seed, "random seed");
  agg->add_option("-o,--out", output, "output mesh file")->required();

  auto* info = mesh->add_subcommand("info", "print mesh statistics");
  info->add_option("source", input, "mesh file or geometry name")->required();
  info->add_option("-n,--resolution", resolution, "resolution for a geometry name")->check(CLI::PositiveNumber);

  // topo
  auto* topo = app.add_subcommand("topo", "Betti numbers, boundary components and cutting surfaces");
  std::string faceset_out;
  topo->add_option("source", input, "mesh file or geometry name")->required();
  topo->add_option("-n,--resolution", resolution, "resolution for a geometry name")->check(CLI::PositiveNumber);
  topo->add_option("--faceset", faceset_out, "write the mesh with cutting surfaces and boundary components as face sets");

  // run
  auto* run = app.add_subcommand("run", "convergence study of a manufactured case");
  RunArgs ra;
  run->add_option("case", ra.case_name, "case name")->required();
  run->add_option("--k", ra.k, "polynomial degree")->check(CLI::PositiveNumber);
  run->add_option("--levels", ra.levels, "number of refinement levels")->check(CLI::PositiveNumber);
  run->add_option("--resolutions", ra.resolutions, "explicit resolution sequence")->delimiter(',');
  run->add_option("--variant", ra.variant, "rotational operator")->check(CLI::IsMember({"reconstruction", "broken"}));
  run->add_option("--face-space", ra.face_space, "magnetic face space")->check(CLI::IsMember({"trimmed", "rot", "full"}));
  run->add_option("--pressure-stabilization", ra.pressure_stabilization, "face part of the pressure stabilization")
    ->check(CLI::IsMember({"auto", "on", "off"}));
  run->add_flag("--pressure-volume", ra.pressure_volume, "keep the volumetric pressure term");
  run->add_flag("--no-condense", ra.no_condense, "solve the monolithic system");
  run->add_option("--agglomerate", ra.agglomerate, "agglomerate each level")->check(CLI::Range(0., 1.));
  run->add_option("--seed", ra.seed, "agglomeration seed");
  run->add_option("--max-unknowns", ra.max_unknowns, "refuse levels with more skeletal unknowns");
  run->add_option("-o,--out", ra.out, "CSV output");

  auto* cases = app.add_subcommand("cases", "list the manufactured cases");
  auto* verify = app.add_subcommand("verify", "run the property suites");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      PolyMesh m = find_geometry(geometry).generate(resolution);
      if (fraction > 0.) m = agglomerate_random(m, seed, fraction);
      write_mesh(output, m);
      print_mesh_info(m, std::cout);
      return 0;
    }
    if (agg->parsed()) {
      AgglomerationStats st;
      const PolyMesh m = agglomerate_random(read_mesh(input), seed, fraction, &st);
      write_mesh(output, m);
      std::cout << "merged " << st.selected << " stars, rejected " << st.rejected << '\n';
      print_mesh_info(m, std::cout);
      return 0;
    }
    if (info->parsed()) {
      print_mesh_info(load_mesh(input, resolution), std::cout);
      return 0;
    }
    if (topo->parsed()) return cmd_topo(input, resolution, faceset_out);
    if (run->parsed()) return cmd_run(ra);
    if (cases->parsed()) {
      for (const auto& t : all_testcases()) std::cout << t.name << ": " << t.description << '\n';
      return 0;
    }
    if (verify->parsed()) return cmd_verify();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
