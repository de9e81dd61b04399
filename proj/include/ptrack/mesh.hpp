#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace ptrack {

using Vec3 = Eigen::Vector3d;

// Simplicial mesh of triangles or tetrahedra. Triangles may live in the
// plane (dim_ambient == 2, a codimension-0 volume mesh) or in space
// (dim_ambient == 3, a surface mesh); tetrahedra are always volume cells.
//
// After finalize():
//   - volume cells are positively oriented,
//   - surface cells are consistently oriented (outward for closed surfaces),
//   - boundary_vertices holds exactly the vertices incident to facets shared
//     by at most one cell (empty for closed surfaces),
//   - no degenerate cells remain (volume above 1e-14 * diag^dim_cell).
struct SimplicialMesh {
  int dim_cell = 2;     // 2 = triangles, 3 = tetrahedra
  int dim_ambient = 2;  // 2 or 3
  std::vector<Vec3> vertices;             // z = 0 when dim_ambient == 2
  std::vector<std::array<int, 4>> cells;  // first dim_cell+1 entries used; rest -1
  std::vector<int> boundary_vertices;     // sorted, unique
  std::vector<char> vertex_on_boundary;   // size n_vertices
  // Lower-dimensional elements carried by the input file (facet, tag). Facet
  // arrays use the first dim_cell entries (edges for 2D meshes, triangles
  // for 3D meshes); unused entries are -1.
  std::vector<std::pair<std::array<int, 3>, int>> marked_facets;

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_cells() const { return static_cast<int>(cells.size()); }
  int verts_per_cell() const { return dim_cell + 1; }
  bool is_surface() const { return dim_cell < dim_ambient; }

  double bbox_diagonal() const;

  // Orientation repair, boundary extraction, validation. Throws
  // std::runtime_error on degenerate cells, bad indices, or non-orientable
  // surface connectivity.
  void finalize();
};

// Per-cell geometric data. The frame spans the cell's plane (dim_cell
// orthonormal vectors from Gram-Schmidt on the edge vectors); for surface
// cells (frame[0], frame[1], normal) is right-handed and consistent with the
// cell's orientation.
struct CellGeometry {
  double volume = 0.0;  // area for triangles, volume for tetrahedra
  Vec3 centroid = Vec3::Zero();
  std::array<Vec3, 3> frame{Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
  Vec3 normal = Vec3::Zero();  // surface cells only
};

CellGeometry cell_geometry(const SimplicialMesh& mesh, int cell);
CellGeometry cell_geometry_at(const SimplicialMesh& mesh, int cell,
                              const std::vector<Vec3>& positions);

// Area-weighted average of incident cell normals, unit length. Surface
// meshes only; throws on fold-over geometry (zero-length average).
std::vector<Vec3> vertex_normals(const SimplicialMesh& mesh);
std::vector<Vec3> vertex_normals_at(const SimplicialMesh& mesh,
                                    const std::vector<Vec3>& positions);

// ---- simplex-level helpers -------------------------------------------------

// Signed volume for volume cells (positive when positively oriented);
// unsigned area for surface triangles.
double simplex_volume(int dim_cell, int dim_ambient, const Vec3* p);

// Unnormalized triangle normal (p1-p0) x (p2-p0); carries orientation.
Vec3 triangle_normal_raw(const Vec3& p0, const Vec3& p1, const Vec3& p2);

// In-plane gradients of the barycentric hat functions; for volume cells this
// is the ordinary P1 gradient, for surface triangles the tangential gradient
// lying in the cell plane. Fills G[0..dim_cell].
void hat_gradients(int dim_cell, const Vec3* p, Vec3* G);

// Gram-Schmidt frame on the edge vectors. Surface triangles get a frame
// right-handed with the raw vertex-order normal; planar (2D volume)
// triangles get a frame right-handed with +z, and tetrahedra a det +1
// frame, so the covariant determinant keeps the inversion sign for volume
// cells. Fills frame[0..dim_cell-1].
void gram_schmidt_frame(int dim_cell, int dim_ambient, const Vec3* p, Vec3* frame);

// Determinant of the map between two simplex configurations expressed in the
// given orthonormal frames. Equals the (signed, frame-orientation relative)
// volume ratio cur/ref.
double covariant_det(int dim_cell, const Vec3* ref, const Vec3* cur, const Vec3* frame_ref,
                     const Vec3* frame_cur);

// Radius ratio quality, normalized so the regular simplex scores 1.
double cell_quality(const SimplicialMesh& mesh, int cell);

}  // namespace ptrack
