#pragma once

#include <cstdint>
#include <functional>

#include "ptrack/mesh.hpp"

namespace ptrack {
namespace meshgen {

// Facet tag used for the embedded shape surface in generated volume meshes.
constexpr int kShapeTag = 1;

// Structured triangulation of [x0,x1] x [y0,y1], nx x ny quads split into
// two triangles each. alternate flips the diagonal in a checkerboard
// pattern; either way all cells have equal area.
SimplicialMesh square_structured(int nx, int ny, double x0 = 0.0, double x1 = 1.0,
                                 double y0 = 0.0, double y1 = 1.0, bool alternate = true);

// Delaunay triangulation of the unit square: boundary_per_side points on
// each edge (corners shared) plus a cols x rows jittered interior grid. Any
// such point set yields exactly 2*n_v - n_boundary - 2 triangles.
SimplicialMesh square_delaunay(int boundary_per_side, int interior_cols, int interior_rows,
                               uint64_t seed);

// Latitude/longitude sphere surface mesh: sectors around, stacks from pole
// to pole. n_v = sectors*(stacks-1) + 2, n_cells = 2*sectors*(stacks-1).
SimplicialMesh sphere_uv(int sectors, int stacks, const Vec3& center, double radius);

SimplicialMesh icosahedron(const Vec3& center, double radius);

// Open upper hemisphere cap, boundary at the equator.
SimplicialMesh hemisphere_cap(int sectors, int stacks, double radius);

// Open cylinder barrel (no caps), boundary at both rims.
SimplicialMesh cylinder(int sectors, int stacks, double radius, double height);

// Flat disk in the z = 0 plane, ambient dimension 3.
SimplicialMesh disk3d(int rings, int sectors, double radius);

// Surface of revolution r(z) for z in [z0, z1], boundary at both rims.
SimplicialMesh revolved_surface(int sectors, int stacks, double z0, double z1,
                                const std::function<double(double)>& radius_of_z);

// Conforming tetrahedral mesh of the unit cube with an embedded sphere
// surface (center, radius): radial shells of the uv-sphere connectivity,
// prisms split into tetrahedra, a vertex at the center. The sphere triangles
// are recorded as marked facets with kShapeTag. Checked to tile the cube
// exactly (total volume 1).
SimplicialMesh sphere_in_box(int sectors, int stacks, const Vec3& center, double radius,
                             int inner_layers = 2, int outer_layers = 4);

}  // namespace meshgen
}  // namespace ptrack
