#include "ptrack/mesh_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace ptrack {

namespace {

struct LineReader {
  std::ifstream in;
  std::string path;
  int lineno = 0;

  explicit LineReader(const std::string& p) : in(p), path(p) {
    if (!in) throw std::runtime_error("load_gmsh: cannot open '" + p + "'");
  }

  bool next(std::string& line) {
    if (!std::getline(in, line)) return false;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  }

  std::string expect() {
    std::string line;
    if (!next(line)) fail("unexpected end of file");
    return line;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw std::runtime_error("load_gmsh: " + path + ":" + std::to_string(lineno) + ": " + msg);
  }
};

struct RawElement {
  int type = 0;
  int tag = 0;
  std::array<long, 4> nodes{-1, -1, -1, -1};
};

int nodes_of_type(int type) {
  switch (type) {
    case 1: return 2;   // line
    case 2: return 3;   // triangle
    case 4: return 4;   // tetrahedron
    case 15: return 1;  // point
    default: return 0;
  }
}

void skip_section(LineReader& r, const std::string& end_marker) {
  std::string line;
  while (r.next(line))
    if (line.rfind(end_marker, 0) == 0) return;
  r.fail("missing " + end_marker);
}

SimplicialMesh assemble_mesh(LineReader& r, const std::map<long, Vec3>& nodes_by_tag,
                             const std::vector<RawElement>& elements) {
  bool has_tet = false, has_tri = false;
  for (const auto& e : elements) {
    if (e.type == 4) has_tet = true;
    if (e.type == 2) has_tri = true;
  }
  if (!has_tet && !has_tri) r.fail("no triangle or tetrahedron elements found");

  SimplicialMesh mesh;
  std::map<long, int> index_of;
  mesh.vertices.reserve(nodes_by_tag.size());
  for (const auto& [tag, p] : nodes_by_tag) {
    index_of[tag] = static_cast<int>(mesh.vertices.size());
    mesh.vertices.push_back(p);
  }

  const int cell_type = has_tet ? 4 : 2;
  const int facet_type = has_tet ? 2 : 1;
  mesh.dim_cell = has_tet ? 3 : 2;

  if (has_tet) {
    mesh.dim_ambient = 3;
  } else {
    double zmin = 1e300, zmax = -1e300;
    for (const auto& p : mesh.vertices) {
      zmin = std::min(zmin, p.z());
      zmax = std::max(zmax, p.z());
    }
    double diag = mesh.bbox_diagonal();
    mesh.dim_ambient = (zmax - zmin) <= 1e-12 * std::max(diag, 1.0) ? 2 : 3;
    if (mesh.dim_ambient == 2)
      for (auto& p : mesh.vertices) p.z() = 0.0;
  }

  for (const auto& e : elements) {
    if (e.type == 15) continue;
    if (e.type != cell_type && e.type != facet_type)
      r.fail("mixed or unsupported element layout: element type " + std::to_string(e.type));
    std::array<int, 4> ids{-1, -1, -1, -1};
    for (int k = 0; k < nodes_of_type(e.type); ++k) {
      auto it = index_of.find(e.nodes[k]);
      if (it == index_of.end()) r.fail("element references unknown node " + std::to_string(e.nodes[k]));
      ids[k] = it->second;
    }
    if (e.type == cell_type) {
      mesh.cells.push_back(ids);
    } else {
      mesh.marked_facets.push_back({{ids[0], ids[1], ids[2]}, e.tag});
    }
  }

  mesh.finalize();
  return mesh;
}

SimplicialMesh load_v22(LineReader& r) {
  std::map<long, Vec3> nodes;
  std::vector<RawElement> elements;
  std::string line;
  while (r.next(line)) {
    if (line.rfind("$Nodes", 0) == 0) {
      long n = std::stol(r.expect());
      for (long i = 0; i < n; ++i) {
        std::istringstream ss(r.expect());
        long tag;
        double x, y, z;
        if (!(ss >> tag >> x >> y >> z)) r.fail("malformed node line");
        nodes[tag] = Vec3(x, y, z);
      }
      if (r.expect().rfind("$EndNodes", 0) != 0) r.fail("missing $EndNodes");
    } else if (line.rfind("$Elements", 0) == 0) {
      long n = std::stol(r.expect());
      for (long i = 0; i < n; ++i) {
        std::istringstream ss(r.expect());
        long id;
        int type, ntags;
        if (!(ss >> id >> type >> ntags)) r.fail("malformed element line");
        int nn = nodes_of_type(type);
        if (nn == 0) r.fail("unsupported element type " + std::to_string(type));
        RawElement e;
        e.type = type;
        for (int t = 0; t < ntags; ++t) {
          long tag;
          if (!(ss >> tag)) r.fail("malformed element tags");
          if (t == 0) e.tag = static_cast<int>(tag);  // physical tag
        }
        for (int k = 0; k < nn; ++k)
          if (!(ss >> e.nodes[k])) r.fail("malformed element connectivity");
        elements.push_back(e);
      }
      if (r.expect().rfind("$EndElements", 0) != 0) r.fail("missing $EndElements");
    } else if (!line.empty() && line[0] == '$' && line.rfind("$End", 0) != 0) {
      skip_section(r, "$End");
    }
  }
  return assemble_mesh(r, nodes, elements);
}

SimplicialMesh load_v41(LineReader& r) {
  std::map<long, Vec3> nodes;
  std::vector<RawElement> elements;
  std::string line;
  while (r.next(line)) {
    if (line.rfind("$Nodes", 0) == 0) {
      std::istringstream hs(r.expect());
      long nblocks, nnodes, mintag, maxtag;
      if (!(hs >> nblocks >> nnodes >> mintag >> maxtag)) r.fail("malformed $Nodes header");
      for (long b = 0; b < nblocks; ++b) {
        std::istringstream bs(r.expect());
        int edim, etag, parametric;
        long count;
        if (!(bs >> edim >> etag >> parametric >> count)) r.fail("malformed node block header");
        std::vector<long> tags(count);
        for (long i = 0; i < count; ++i) tags[i] = std::stol(r.expect());
        for (long i = 0; i < count; ++i) {
          std::istringstream cs(r.expect());
          double x, y, z;
          if (!(cs >> x >> y >> z)) r.fail("malformed node coordinates");
          nodes[tags[i]] = Vec3(x, y, z);
        }
      }
      if (r.expect().rfind("$EndNodes", 0) != 0) r.fail("missing $EndNodes");
    } else if (line.rfind("$Elements", 0) == 0) {
      std::istringstream hs(r.expect());
      long nblocks, nelems, mintag, maxtag;
      if (!(hs >> nblocks >> nelems >> mintag >> maxtag)) r.fail("malformed $Elements header");
      for (long b = 0; b < nblocks; ++b) {
        std::istringstream bs(r.expect());
        int edim, etag, etype;
        long count;
        if (!(bs >> edim >> etag >> etype >> count)) r.fail("malformed element block header");
        int nn = nodes_of_type(etype);
        if (nn == 0) r.fail("unsupported element type " + std::to_string(etype));
        for (long i = 0; i < count; ++i) {
          std::istringstream es(r.expect());
          long id;
          if (!(es >> id)) r.fail("malformed element line");
          RawElement e;
          e.type = etype;
          e.tag = etag;  // entity tag; physical groups are not resolved
          for (int k = 0; k < nn; ++k)
            if (!(es >> e.nodes[k])) r.fail("malformed element connectivity");
          elements.push_back(e);
        }
      }
      if (r.expect().rfind("$EndElements", 0) != 0) r.fail("missing $EndElements");
    } else if (!line.empty() && line[0] == '$' && line.rfind("$End", 0) != 0) {
      skip_section(r, "$End");
    }
  }
  return assemble_mesh(r, nodes, elements);
}

void fmt_double(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

}  // namespace

SimplicialMesh load_gmsh(const std::string& path) {
  LineReader r(path);
  std::string line = r.expect();
  if (line.rfind("$MeshFormat", 0) != 0) r.fail("expected $MeshFormat");
  std::istringstream fs(r.expect());
  double version;
  int filetype, datasize;
  if (!(fs >> version >> filetype >> datasize)) r.fail("malformed $MeshFormat");
  if (filetype != 0) r.fail("binary MSH files are not supported");
  if (r.expect().rfind("$EndMeshFormat", 0) != 0) r.fail("missing $EndMeshFormat");
  if (version >= 4.0 && version < 4.2) return load_v41(r);
  if (version >= 2.0 && version < 3.0) return load_v22(r);
  r.fail("unsupported MSH version " + std::to_string(version));
}

void write_gmsh(const SimplicialMesh& mesh, const std::string& path) {
  std::string out;
  out += "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n";
  out += std::to_string(mesh.n_vertices());
  out += "\n";
  for (int i = 0; i < mesh.n_vertices(); ++i) {
    out += std::to_string(i + 1);
    for (int k = 0; k < 3; ++k) {
      out += ' ';
      fmt_double(out, mesh.vertices[i][k]);
    }
    out += '\n';
  }
  out += "$EndNodes\n$Elements\n";
  out += std::to_string(mesh.n_cells() + static_cast<int>(mesh.marked_facets.size()));
  out += "\n";
  long id = 1;
  const int facet_type = mesh.dim_cell == 3 ? 2 : 1;
  const int facet_nodes = mesh.dim_cell == 3 ? 3 : 2;
  for (const auto& [f, tag] : mesh.marked_facets) {
    out += std::to_string(id++) + " " + std::to_string(facet_type) + " 2 " + std::to_string(tag) +
           " " + std::to_string(tag);
    for (int k = 0; k < facet_nodes; ++k) out += " " + std::to_string(f[k] + 1);
    out += '\n';
  }
  const int cell_type = mesh.dim_cell == 3 ? 4 : 2;
  for (const auto& c : mesh.cells) {
    out += std::to_string(id++) + " " + std::to_string(cell_type) + " 2 0 0";
    for (int k = 0; k < mesh.verts_per_cell(); ++k) out += " " + std::to_string(c[k] + 1);
    out += '\n';
  }
  out += "$EndElements\n";

  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("write_gmsh: cannot open '" + path + "'");
  f << out;
  if (!f) throw std::runtime_error("write_gmsh: write failure on '" + path + "'");
}

void write_vtk(const SimplicialMesh& mesh, const std::vector<Vec3>& positions,
               const std::vector<NamedField>& fields, const std::string& path) {
  if (static_cast<int>(positions.size()) != mesh.n_vertices())
    throw std::runtime_error("write_vtk: position count mismatch");
  for (const auto& f : fields) {
    size_t want = f.per_cell ? mesh.n_cells() : mesh.n_vertices();
    if (f.values.size() != want)
      throw std::runtime_error("write_vtk: field '" + f.name + "' length mismatch");
  }

  std::string out;
  out += "# vtk DataFile Version 3.0\nptrack output\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out += "POINTS " + std::to_string(mesh.n_vertices()) + " double\n";
  for (const auto& p : positions) {
    fmt_double(out, p.x());
    out += ' ';
    fmt_double(out, p.y());
    out += ' ';
    fmt_double(out, p.z());
    out += '\n';
  }
  const int m = mesh.verts_per_cell();
  out += "CELLS " + std::to_string(mesh.n_cells()) + " " +
         std::to_string(static_cast<long>(mesh.n_cells()) * (m + 1)) + "\n";
  for (const auto& c : mesh.cells) {
    out += std::to_string(m);
    for (int k = 0; k < m; ++k) out += " " + std::to_string(c[k]);
    out += '\n';
  }
  out += "CELL_TYPES " + std::to_string(mesh.n_cells()) + "\n";
  const char* vtk_type = mesh.dim_cell == 3 ? "10" : "5";
  for (int i = 0; i < mesh.n_cells(); ++i) {
    out += vtk_type;
    out += '\n';
  }

  bool wrote_point_header = false, wrote_cell_header = false;
  for (const auto& f : fields) {
    if (!f.per_cell) {
      if (!wrote_point_header) {
        out += "POINT_DATA " + std::to_string(mesh.n_vertices()) + "\n";
        wrote_point_header = true;
      }
      out += "SCALARS " + f.name + " double 1\nLOOKUP_TABLE default\n";
      for (double v : f.values) {
        fmt_double(out, v);
        out += '\n';
      }
    }
  }
  for (const auto& f : fields) {
    if (f.per_cell) {
      if (!wrote_cell_header) {
        out += "CELL_DATA " + std::to_string(mesh.n_cells()) + "\n";
        wrote_cell_header = true;
      }
      out += "SCALARS " + f.name + " double 1\nLOOKUP_TABLE default\n";
      for (double v : f.values) {
        fmt_double(out, v);
        out += '\n';
      }
    }
  }

  std::ofstream out_file(path, std::ios::binary);
  if (!out_file) throw std::runtime_error("write_vtk: cannot open '" + path + "'");
  out_file << out;
  if (!out_file) throw std::runtime_error("write_vtk: write failure on '" + path + "'");
}

}  // namespace ptrack
