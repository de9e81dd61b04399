#include "ptrack/mesh.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <vector>

namespace ptrack {

namespace {

std::array<int, 3> sorted_facet(std::array<int, 3> f) {
  std::sort(f.begin(), f.end());
  return f;
}

}  // namespace

double SimplicialMesh::bbox_diagonal() const {
  if (vertices.empty()) return 0.0;
  Vec3 lo = vertices[0], hi = vertices[0];
  for (const Vec3& p : vertices) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return (hi - lo).norm();
}

double simplex_volume(int dim_cell, int dim_ambient, const Vec3* p) {
  if (dim_cell == 2) {
    Vec3 n = (p[1] - p[0]).cross(p[2] - p[0]);
    if (dim_ambient == 2) return 0.5 * n.z();  // signed
    return 0.5 * n.norm();                     // unsigned
  }
  Eigen::Matrix3d e;
  e.col(0) = p[1] - p[0];
  e.col(1) = p[2] - p[0];
  e.col(2) = p[3] - p[0];
  return e.determinant() / 6.0;  // signed
}

Vec3 triangle_normal_raw(const Vec3& p0, const Vec3& p1, const Vec3& p2) {
  return (p1 - p0).cross(p2 - p0);
}

void hat_gradients(int dim_cell, const Vec3* p, Vec3* G) {
  if (dim_cell == 2) {
    Vec3 n = triangle_normal_raw(p[0], p[1], p[2]);
    double twice_area_sq = n.squaredNorm();
    // grad lambda_k = n x e_k / |n|^2 with e_k the edge opposite vertex k,
    // oriented so that <grad lambda_k, p_k - p_j> = 1.
    G[0] = n.cross(p[2] - p[1]) / twice_area_sq;
    G[1] = n.cross(p[0] - p[2]) / twice_area_sq;
    G[2] = n.cross(p[1] - p[0]) / twice_area_sq;
    return;
  }
  Eigen::Matrix3d e;
  e.col(0) = p[1] - p[0];
  e.col(1) = p[2] - p[0];
  e.col(2) = p[3] - p[0];
  Eigen::Matrix3d inv = e.inverse();
  G[1] = inv.row(0);
  G[2] = inv.row(1);
  G[3] = inv.row(2);
  G[0] = -(G[1] + G[2] + G[3]);
}

void gram_schmidt_frame(int dim_cell, int dim_ambient, const Vec3* p, Vec3* frame) {
  if (dim_cell == 2) {
    Vec3 e1 = p[1] - p[0], e2 = p[2] - p[0];
    frame[0] = e1.normalized();
    Vec3 f2 = e2 - e2.dot(frame[0]) * frame[0];
    frame[1] = f2.normalized();
    // planar cells orient with +z (the mesh orientation), surface cells with
    // their own vertex-order normal
    Vec3 n = dim_ambient == 2 ? Vec3(0, 0, 1) : triangle_normal_raw(p[0], p[1], p[2]);
    if (frame[0].cross(frame[1]).dot(n) < 0.0) frame[1] = -frame[1];
    return;
  }
  Vec3 e1 = p[1] - p[0], e2 = p[2] - p[0], e3 = p[3] - p[0];
  frame[0] = e1.normalized();
  Vec3 f2 = e2 - e2.dot(frame[0]) * frame[0];
  frame[1] = f2.normalized();
  Vec3 f3 = e3 - e3.dot(frame[0]) * frame[0] - e3.dot(frame[1]) * frame[1];
  frame[2] = f3.normalized();
  if (frame[0].cross(frame[1]).dot(frame[2]) < 0.0) frame[2] = -frame[2];
}

double covariant_det(int dim_cell, const Vec3* ref, const Vec3* cur, const Vec3* frame_ref,
                     const Vec3* frame_cur) {
  // D = F_cur^T E_cur (F_ref^T E_ref)^-1 in frame coordinates; its
  // determinant is invariant under rotations of either frame.
  if (dim_cell == 2) {
    Eigen::Matrix2d mr, mc;
    for (int j = 0; j < 2; ++j) {
      Vec3 er = ref[j + 1] - ref[0], ec = cur[j + 1] - cur[0];
      for (int i = 0; i < 2; ++i) {
        mr(i, j) = frame_ref[i].dot(er);
        mc(i, j) = frame_cur[i].dot(ec);
      }
    }
    return mc.determinant() / mr.determinant();
  }
  Eigen::Matrix3d mr, mc;
  for (int j = 0; j < 3; ++j) {
    Vec3 er = ref[j + 1] - ref[0], ec = cur[j + 1] - cur[0];
    for (int i = 0; i < 3; ++i) {
      mr(i, j) = frame_ref[i].dot(er);
      mc(i, j) = frame_cur[i].dot(ec);
    }
  }
  return mc.determinant() / mr.determinant();
}

CellGeometry cell_geometry_at(const SimplicialMesh& mesh, int cell,
                              const std::vector<Vec3>& positions) {
  if (cell < 0 || cell >= mesh.n_cells()) throw std::runtime_error("cell_geometry: bad cell index");
  const auto& c = mesh.cells[cell];
  const int m = mesh.verts_per_cell();
  Vec3 p[4];
  for (int k = 0; k < m; ++k) p[k] = positions[c[k]];

  CellGeometry g;
  g.centroid.setZero();
  for (int k = 0; k < m; ++k) g.centroid += p[k];
  g.centroid /= m;

  double vol = simplex_volume(mesh.dim_cell, mesh.dim_ambient, p);
  g.volume = std::abs(vol);
  double scale = mesh.bbox_diagonal();
  double tol = 1e-14 * std::pow(std::max(scale, 1e-300), mesh.dim_cell);
  if (g.volume <= tol)
    throw std::runtime_error("cell_geometry: degenerate cell " + std::to_string(cell));

  gram_schmidt_frame(mesh.dim_cell, mesh.dim_ambient, p, g.frame.data());
  if (mesh.is_surface()) g.normal = triangle_normal_raw(p[0], p[1], p[2]).normalized();
  return g;
}

CellGeometry cell_geometry(const SimplicialMesh& mesh, int cell) {
  return cell_geometry_at(mesh, cell, mesh.vertices);
}

std::vector<Vec3> vertex_normals_at(const SimplicialMesh& mesh,
                                    const std::vector<Vec3>& positions) {
  if (!mesh.is_surface()) throw std::runtime_error("vertex_normals: not a surface mesh");
  std::vector<Vec3> acc(mesh.n_vertices(), Vec3::Zero());
  for (const auto& c : mesh.cells) {
    Vec3 n = triangle_normal_raw(positions[c[0]], positions[c[1]], positions[c[2]]);
    // |n| = 2*area, so summing raw normals is the area weighting
    for (int k = 0; k < 3; ++k) acc[c[k]] += n;
  }
  for (int i = 0; i < mesh.n_vertices(); ++i) {
    double len = acc[i].norm();
    if (len <= 0.0)
      throw std::runtime_error("vertex_normals: zero-length average at vertex " +
                               std::to_string(i) + " (fold-over geometry)");
    acc[i] /= len;
  }
  return acc;
}

std::vector<Vec3> vertex_normals(const SimplicialMesh& mesh) {
  return vertex_normals_at(mesh, mesh.vertices);
}

void SimplicialMesh::finalize() {
  const int m = verts_per_cell();
  const int nv = n_vertices();
  for (const auto& c : cells)
    for (int k = 0; k < m; ++k)
      if (c[k] < 0 || c[k] >= nv) throw std::runtime_error("mesh: cell index out of range");

  if (is_surface()) {
    // consistent orientation by breadth-first propagation from cell 0
    std::map<std::array<int, 2>, std::vector<int>> edge_cells;
    auto edge_key = [](int a, int b) {
      return std::array<int, 2>{std::min(a, b), std::max(a, b)};
    };
    for (int ci = 0; ci < n_cells(); ++ci) {
      const auto& c = cells[ci];
      for (int k = 0; k < 3; ++k) edge_cells[edge_key(c[k], c[(k + 1) % 3])].push_back(ci);
    }
    for (const auto& [e, cs] : edge_cells)
      if (cs.size() > 2)
        throw std::runtime_error("mesh: non-manifold edge (" + std::to_string(e[0]) + "," +
                                 std::to_string(e[1]) + ")");

    auto directed_edges = [](const std::array<int, 4>& c) {
      return std::array<std::array<int, 2>, 3>{
          {{c[0], c[1]}, {c[1], c[2]}, {c[2], c[0]}}};
    };
    std::vector<int> state(n_cells(), 0);  // 0 unvisited, 1 fixed
    std::vector<int> queue;
    for (int seed = 0; seed < n_cells(); ++seed) {
      if (state[seed]) continue;
      state[seed] = 1;
      queue.push_back(seed);
      while (!queue.empty()) {
        int ci = queue.back();
        queue.pop_back();
        for (auto [a, b] : directed_edges(cells[ci])) {
          for (int cj : edge_cells[edge_key(a, b)]) {
            if (cj == ci) continue;
            // consistent orientation: neighbor must traverse (b, a)
            bool has_ab = false;
            for (auto [u, v] : directed_edges(cells[cj]))
              if (u == a && v == b) has_ab = true;
            if (state[cj] == 0) {
              if (has_ab) std::swap(cells[cj][1], cells[cj][2]);
              state[cj] = 1;
              queue.push_back(cj);
            } else if (has_ab) {
              throw std::runtime_error("mesh: non-orientable surface connectivity");
            }
          }
        }
      }
    }
  } else {
    // positive signed volume per cell
    for (auto& c : cells) {
      Vec3 p[4];
      for (int k = 0; k < m; ++k) p[k] = vertices[c[k]];
      if (simplex_volume(dim_cell, dim_ambient, p) < 0.0) std::swap(c[1], c[2]);
    }
  }

  // boundary facets: shared by at most one cell
  std::map<std::array<int, 3>, int> facet_count;
  auto facets_of = [&](const std::array<int, 4>& c) {
    std::vector<std::array<int, 3>> fs;
    if (dim_cell == 2) {
      fs = {{c[0], c[1], -1}, {c[1], c[2], -1}, {c[2], c[0], -1}};
    } else {
      fs = {{c[0], c[1], c[2]}, {c[0], c[1], c[3]}, {c[0], c[2], c[3]}, {c[1], c[2], c[3]}};
    }
    return fs;
  };
  for (const auto& c : cells)
    for (auto f : facets_of(c)) facet_count[sorted_facet(f)]++;

  vertex_on_boundary.assign(nv, 0);
  for (const auto& [f, count] : facet_count) {
    if (count > 1) continue;
    for (int v : f)
      if (v >= 0) vertex_on_boundary[v] = 1;
  }
  boundary_vertices.clear();
  for (int i = 0; i < nv; ++i)
    if (vertex_on_boundary[i]) boundary_vertices.push_back(i);

  if (is_surface() && boundary_vertices.empty() && !cells.empty()) {
    // closed surface: orient outward (positive enclosed volume)
    double enclosed = 0.0;
    for (const auto& c : cells) {
      Eigen::Matrix3d t;
      t.col(0) = vertices[c[0]];
      t.col(1) = vertices[c[1]];
      t.col(2) = vertices[c[2]];
      enclosed += t.determinant() / 6.0;
    }
    if (enclosed < 0.0)
      for (auto& c : cells) std::swap(c[1], c[2]);
  }

  // degeneracy check (throws), and positive orientation sanity
  double scale = bbox_diagonal();
  double tol = 1e-14 * std::pow(std::max(scale, 1e-300), dim_cell);
  for (int ci = 0; ci < n_cells(); ++ci) {
    Vec3 p[4];
    for (int k = 0; k < m; ++k) p[k] = vertices[cells[ci][k]];
    double vol = simplex_volume(dim_cell, dim_ambient, p);
    if (std::abs(vol) <= tol)
      throw std::runtime_error("mesh: degenerate cell " + std::to_string(ci));
  }
}

double cell_quality(const SimplicialMesh& mesh, int cell) {
  const auto& c = mesh.cells[cell];
  if (mesh.dim_cell == 2) {
    Vec3 p0 = mesh.vertices[c[0]], p1 = mesh.vertices[c[1]], p2 = mesh.vertices[c[2]];
    double a = (p1 - p2).norm(), b = (p2 - p0).norm(), d = (p0 - p1).norm();
    double s = 0.5 * (a + b + d);
    double area = 0.5 * triangle_normal_raw(p0, p1, p2).norm();
    double r_in = area / s;
    double r_circ = a * b * d / (4.0 * area);
    return 2.0 * r_in / r_circ;
  }
  Vec3 p[4];
  for (int k = 0; k < 4; ++k) p[k] = mesh.vertices[c[k]];
  double vol = std::abs(simplex_volume(3, 3, p));
  double face_area = 0.0;
  int faces[4][3] = {{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}};
  for (auto& f : faces)
    face_area += 0.5 * triangle_normal_raw(p[f[0]], p[f[1]], p[f[2]]).norm();
  double r_in = 3.0 * vol / face_area;
  // circumradius via the Cayley-Menger-free formula
  Vec3 e1 = p[1] - p[0], e2 = p[2] - p[0], e3 = p[3] - p[0];
  Eigen::Matrix3d A;
  A.row(0) = 2.0 * e1;
  A.row(1) = 2.0 * e2;
  A.row(2) = 2.0 * e3;
  Vec3 rhs(e1.squaredNorm(), e2.squaredNorm(), e3.squaredNorm());
  Vec3 center_off = A.colPivHouseholderQr().solve(rhs);
  double r_circ = center_off.norm();
  return 3.0 * r_in / r_circ;
}

}  // namespace ptrack
