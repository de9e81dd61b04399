#pragma once

#include <string>
#include <vector>

#include "ptrack/mesh.hpp"

namespace ptrack {

// Reads a Gmsh MSH file, ASCII, format 2.2 or 4.1. Supported element types:
// points, lines, triangles, tetrahedra. If tetrahedra are present they form
// the cells and triangles become marked facets; otherwise triangles form the
// cells and lines become marked facets. The ambient dimension for pure
// triangle meshes is inferred from the z extent. Errors carry the offending
// line number.
SimplicialMesh load_gmsh(const std::string& path);

// Gmsh MSH 2.2 ASCII writer (used by the mesh generators).
void write_gmsh(const SimplicialMesh& mesh, const std::string& path);

struct NamedField {
  std::string name;
  bool per_cell = false;  // false: per vertex
  std::vector<double> values;
};

// Legacy ASCII VTK unstructured-grid writer. Output is deterministic for
// identical inputs. Field lengths must match n_vertices / n_cells.
void write_vtk(const SimplicialMesh& mesh, const std::vector<Vec3>& positions,
               const std::vector<NamedField>& fields, const std::string& path);

inline void write_vtk(const SimplicialMesh& mesh, const std::vector<NamedField>& fields,
                      const std::string& path) {
  write_vtk(mesh, mesh.vertices, fields, path);
}

}  // namespace ptrack
