// ASCII mesh format.
//
//   polymesh 1
//   vertices N        then N lines "x y z"
//   faces M           then M lines "n v_1 ... v_n"         (0-based vertex indices, oriented loop)
//   cells K           then K lines "m s_1 ... s_m"         (s = +(f+1) if eps_{T,F} = +1, -(f+1) otherwise)
//   tetrahedra K      optional; K lines "t a_1 b_1 c_1 d_1 ... a_t b_t c_t d_t"
//   permeability K    optional; K lines "mu_T"
//   faceset NAME L    optional, repeatable; L lines "s" (signed face reference as above)
//
// Blank lines and lines starting with '#' are ignored.

#ifndef HHOMAG_MESH_IO_HPP
#define HHOMAG_MESH_IO_HPP

#include <fstream>
#include <iomanip>
#include <sstream>

#include "mesh.hpp"

namespace hhomag {

/// Named list of signed face references, written after the mesh blocks.
struct FaceSet
{
  std::string name;
  std::vector<int> faces;
  std::vector<int> signs;
};

class MeshParseError : public MeshError
{
public:
  MeshParseError(int line, const std::string& what)
    : MeshError("line " + std::to_string(line) + ": " + what), line_(line)
  {}
  int line() const { return line_; }

private:
  int line_;
};

namespace detail {

  class LineReader
  {
  public:
    explicit LineReader(std::istream& in) : in_(in) {}

    // Next non-empty, non-comment line split into tokens; false at end of input.
    bool next(std::vector<std::string>& tok)
    {
      std::string line;
      while (std::getline(in_, line)) {
        ++lineno_;
        const auto p = line.find_first_not_of(" \t\r");
        if (p == std::string::npos || line[p] == '#') continue;
        std::istringstream ss(line);
        tok.clear();
        for (std::string t; ss >> t;) tok.push_back(t);
        return true;
      }
      return false;
    }

    std::vector<std::string> expect(const char* what)
    {
      std::vector<std::string> tok;
      if (!next(tok)) throw MeshParseError(lineno_ + 1, std::string("unexpected end of file, expected ") + what);
      return tok;
    }

    int line() const { return lineno_; }

    long to_int(const std::string& s) const
    {
      std::size_t pos = 0;
      long v = 0;
      try {
        v = std::stol(s, &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      if (pos != s.size()) throw MeshParseError(lineno_, "expected an integer, got '" + s + "'");
      return v;
    }

    double to_real(const std::string& s) const
    {
      std::size_t pos = 0;
      double v = 0.;
      try {
        v = std::stod(s, &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      if (pos != s.size() || !std::isfinite(v)) throw MeshParseError(lineno_, "expected a finite real, got '" + s + "'");
      return v;
    }

    int count_header(const std::vector<std::string>& tok, const std::string& key) const
    {
      if (tok.size() != 2 || tok[0] != key) throw MeshParseError(lineno_, "expected '" + key + " <count>'");
      const long n = to_int(tok[1]);
      if (n < 0) throw MeshParseError(lineno_, "negative count");
      return static_cast<int>(n);
    }

  private:
    std::istream& in_;
    int lineno_ = 0;
  };

} // namespace detail

inline PolyMesh read_mesh(std::istream& in, std::vector<FaceSet>* facesets = nullptr)
{
  detail::LineReader r(in);
  std::vector<std::string> tok;
  if (!r.next(tok)) throw MeshParseError(1, "empty mesh file");
  if (tok.size() != 2 || tok[0] != "polymesh" || tok[1] != "1")
    throw MeshParseError(r.line(), "expected header 'polymesh 1'");

  PolyMesh m;
  const int nv = r.count_header(r.expect("vertices block"), "vertices");
  m.vertices.resize(nv);
  for (int i = 0; i < nv; ++i) {
    tok = r.expect("vertex coordinates");
    if (tok.size() != 3) throw MeshParseError(r.line(), "vertex line needs 3 coordinates");
    m.vertices[i] = Point3(r.to_real(tok[0]), r.to_real(tok[1]), r.to_real(tok[2]));
  }

  const int nf = r.count_header(r.expect("faces block"), "faces");
  m.faces.resize(nf);
  for (int f = 0; f < nf; ++f) {
    tok = r.expect("face");
    const long n = r.to_int(tok[0]);
    if (n < 3 || static_cast<long>(tok.size()) != n + 1)
      throw MeshParseError(r.line(), "face " + std::to_string(f) + ": bad vertex count");
    for (long i = 1; i <= n; ++i) {
      const long v = r.to_int(tok[i]);
      if (v < 0 || v >= nv)
        throw MeshParseError(r.line(), "face " + std::to_string(f) + " references missing vertex " + std::to_string(v));
      m.faces[f].vertices.push_back(static_cast<int>(v));
    }
  }

  const int nc = r.count_header(r.expect("cells block"), "cells");
  m.cells.resize(nc);
  for (int c = 0; c < nc; ++c) {
    tok = r.expect("cell");
    const long n = r.to_int(tok[0]);
    if (n < 4 || static_cast<long>(tok.size()) != n + 1)
      throw MeshParseError(r.line(), "cell " + std::to_string(c) + ": bad face count");
    for (long i = 1; i <= n; ++i) {
      const long s = r.to_int(tok[i]);
      const long f = std::abs(s) - 1;
      if (s == 0 || f >= nf)
        throw MeshParseError(r.line(), "cell " + std::to_string(c) + " references dangling face " + std::to_string(f));
      Face& F = m.faces[f];
      int& slot = s > 0 ? F.cell_plus : F.cell_minus;
      if (slot >= 0)
        throw MeshParseError(r.line(), "face " + std::to_string(f) + " already has a cell on this side");
      slot = c;
      m.cells[c].faces.push_back({static_cast<int>(f), s > 0 ? 1 : -1});
    }
  }

  while (r.next(tok)) {
    if (tok.size() == 2 && tok[0] == "tetrahedra") {
      if (r.count_header(tok, "tetrahedra") != nc) throw MeshParseError(r.line(), "tetrahedra block size mismatch");
      for (int c = 0; c < nc; ++c) {
        tok = r.expect("tetrahedra line");
        const long t = r.to_int(tok[0]);
        if (t < 1 || static_cast<long>(tok.size()) != 4 * t + 1)
          throw MeshParseError(r.line(), "cell " + std::to_string(c) + ": bad tetrahedra line");
        for (long i = 0; i < t; ++i) {
          std::array<int, 4> q;
          for (int j = 0; j < 4; ++j) {
            const long v = r.to_int(tok[1 + 4 * i + j]);
            if (v < 0 || v >= nv) throw MeshParseError(r.line(), "tetrahedron references missing vertex");
            q[j] = static_cast<int>(v);
          }
          m.cells[c].tets.push_back(q);
        }
      }
    } else if (tok.size() == 2 && tok[0] == "permeability") {
      if (r.count_header(tok, "permeability") != nc) throw MeshParseError(r.line(), "permeability block size mismatch");
      m.mu.resize(nc);
      for (int c = 0; c < nc; ++c) {
        tok = r.expect("permeability value");
        m.mu[c] = r.to_real(tok.at(0));
        if (!(m.mu[c] > 0.)) throw MeshParseError(r.line(), "permeability must be positive");
      }
    } else if (tok.size() == 3 && tok[0] == "faceset") {
      FaceSet fs;
      fs.name = tok[1];
      const long n = r.to_int(tok[2]);
      for (long i = 0; i < n; ++i) {
        tok = r.expect("faceset entry");
        const long s = r.to_int(tok.at(0));
        if (s == 0 || std::abs(s) > nf) throw MeshParseError(r.line(), "faceset references dangling face");
        fs.faces.push_back(static_cast<int>(std::abs(s) - 1));
        fs.signs.push_back(s > 0 ? 1 : -1);
      }
      if (facesets) facesets->push_back(std::move(fs));
    } else {
      throw MeshParseError(r.line(), "unknown block '" + tok[0] + "'");
    }
  }

  for (int f = 0; f < nf; ++f)
    if (m.faces[f].cell_plus < 0)
      throw MeshError("face " + std::to_string(f) + " has no cell on its positive side");
  m.update_geometry();
  return m;
}

inline PolyMesh read_mesh(const std::string& path, std::vector<FaceSet>* facesets = nullptr)
{
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open " + path);
  return read_mesh(in, facesets);
}

inline void write_mesh(std::ostream& out, const PolyMesh& m, const std::vector<FaceSet>& facesets = {})
{
  out << "polymesh 1\n";
  out << "vertices " << m.num_vertices() << "\n" << std::setprecision(17);
  for (const auto& v : m.vertices) out << v.x() << " " << v.y() << " " << v.z() << "\n";
  out << "faces " << m.num_faces() << "\n";
  for (const auto& F : m.faces) {
    out << F.vertices.size();
    for (int v : F.vertices) out << " " << v;
    out << "\n";
  }
  out << "cells " << m.num_cells() << "\n";
  for (const auto& C : m.cells) {
    out << C.faces.size();
    for (const auto& cf : C.faces) out << " " << cf.sign * (cf.face + 1);
    out << "\n";
  }
  out << "tetrahedra " << m.num_cells() << "\n";
  for (const auto& C : m.cells) {
    out << C.tets.size();
    for (const auto& t : C.tets) out << " " << t[0] << " " << t[1] << " " << t[2] << " " << t[3];
    out << "\n";
  }
  if (!m.mu.empty()) {
    out << "permeability " << m.num_cells() << "\n";
    for (double x : m.mu) out << x << "\n";
  }
  for (const auto& fs : facesets) {
    out << "faceset " << fs.name << " " << fs.faces.size() << "\n";
    for (std::size_t i = 0; i < fs.faces.size(); ++i)
      out << (fs.signs.empty() ? 1 : fs.signs[i]) * (fs.faces[i] + 1) << "\n";
  }
}

inline void write_mesh(const std::string& path, const PolyMesh& m, const std::vector<FaceSet>& facesets = {})
{
  std::ofstream out(path);
  if (!out) throw MeshError("cannot write " + path);
  write_mesh(out, m, facesets);
}

} // namespace hhomag

#endif
