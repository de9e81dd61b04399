#include "ptrack/meshgen.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace ptrack {
namespace meshgen {

namespace {

void push_cell(SimplicialMesh& m, int a, int b, int c, int d = -1) {
  m.cells.push_back({a, b, c, d});
}

}  // namespace

SimplicialMesh square_structured(int nx, int ny, double x0, double x1, double y0, double y1,
                                 bool alternate) {
  SimplicialMesh m;
  m.dim_cell = 2;
  m.dim_ambient = 2;
  auto vid = [&](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      m.vertices.emplace_back(x0 + (x1 - x0) * i / nx, y0 + (y1 - y0) * j / ny, 0.0);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      int a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1), d = vid(i, j + 1);
      bool flip = alternate && ((i + j) % 2 == 1);
      if (!flip) {
        push_cell(m, a, b, c);
        push_cell(m, a, c, d);
      } else {
        push_cell(m, a, b, d);
        push_cell(m, b, c, d);
      }
    }
  }
  m.finalize();
  return m;
}

// ---- Bowyer-Watson Delaunay -------------------------------------------------

namespace {

struct DelTri {
  int v[3];
  bool alive = true;
};

bool in_circumcircle(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& p) {
  // positive determinant test for counterclockwise (a, b, c)
  long double ax = a.x() - p.x(), ay = a.y() - p.y();
  long double bx = b.x() - p.x(), by = b.y() - p.y();
  long double cx = c.x() - p.x(), cy = c.y() - p.y();
  long double det = (ax * ax + ay * ay) * (bx * cy - cx * by) -
                    (bx * bx + by * by) * (ax * cy - cx * ay) +
                    (cx * cx + cy * cy) * (ax * by - bx * ay);
  return det > 0.0L;
}

double orient2d(const Vec3& a, const Vec3& b, const Vec3& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

std::vector<std::array<int, 3>> delaunay(const std::vector<Vec3>& pts) {
  const int n = static_cast<int>(pts.size());
  std::vector<Vec3> all = pts;
  // super-triangle well outside the unit square
  all.emplace_back(-40.0, -40.0, 0.0);
  all.emplace_back(80.0, -40.0, 0.0);
  all.emplace_back(0.5, 80.0, 0.0);
  std::vector<DelTri> tris;
  tris.push_back({{n, n + 1, n + 2}, true});

  std::vector<int> bad;
  std::vector<std::array<int, 2>> boundary;
  for (int ip = 0; ip < n; ++ip) {
    const Vec3& p = all[ip];
    bad.clear();
    for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
      if (!tris[t].alive) continue;
      if (in_circumcircle(all[tris[t].v[0]], all[tris[t].v[1]], all[tris[t].v[2]], p))
        bad.push_back(t);
    }
    // boundary of the cavity: edges appearing in exactly one bad triangle
    boundary.clear();
    for (int t : bad) {
      for (int k = 0; k < 3; ++k) {
        int a = tris[t].v[k], b = tris[t].v[(k + 1) % 3];
        bool shared = false;
        for (int u : bad) {
          if (u == t) continue;
          for (int k2 = 0; k2 < 3; ++k2) {
            int a2 = tris[u].v[k2], b2 = tris[u].v[(k2 + 1) % 3];
            if ((a == a2 && b == b2) || (a == b2 && b == a2)) shared = true;
          }
        }
        if (!shared) boundary.push_back({a, b});
      }
    }
    for (int t : bad) tris[t].alive = false;
    for (auto [a, b] : boundary) tris.push_back({{a, b, ip}, true});
  }

  std::vector<std::array<int, 3>> out;
  for (const auto& t : tris) {
    if (!t.alive) continue;
    if (t.v[0] >= n || t.v[1] >= n || t.v[2] >= n) continue;
    std::array<int, 3> c{t.v[0], t.v[1], t.v[2]};
    if (orient2d(all[c[0]], all[c[1]], all[c[2]]) < 0.0) std::swap(c[1], c[2]);
    out.push_back(c);
  }
  return out;
}

}  // namespace

SimplicialMesh square_delaunay(int boundary_per_side, int interior_cols, int interior_rows,
                               uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);

  std::vector<Vec3> pts;
  const int nb = boundary_per_side;
  // boundary points: corners exact, edge points jittered along the edge to
  // avoid cocircular degeneracies
  auto edge_param = [&](int k) {
    double t = static_cast<double>(k) / nb;
    if (k > 0 && k < nb) t += 0.25 * unif(rng) / nb;
    return t;
  };
  for (int k = 0; k < nb; ++k) pts.emplace_back(edge_param(k), 0.0, 0.0);
  for (int k = 0; k < nb; ++k) pts.emplace_back(1.0, edge_param(k), 0.0);
  for (int k = 0; k < nb; ++k) pts.emplace_back(1.0 - edge_param(k), 1.0, 0.0);
  for (int k = 0; k < nb; ++k) pts.emplace_back(0.0, 1.0 - edge_param(k), 0.0);

  const double hx = 1.0 / (interior_cols + 1);
  const double hy = 1.0 / (interior_rows + 1);
  for (int j = 1; j <= interior_rows; ++j) {
    for (int i = 1; i <= interior_cols; ++i) {
      double x = i * hx + 0.35 * hx * unif(rng);
      double y = j * hy + 0.35 * hy * unif(rng);
      pts.emplace_back(x, y, 0.0);
    }
  }

  SimplicialMesh m;
  m.dim_cell = 2;
  m.dim_ambient = 2;
  m.vertices = pts;
  for (const auto& c : delaunay(pts)) m.cells.push_back({c[0], c[1], c[2], -1});
  m.finalize();
  return m;
}

SimplicialMesh sphere_uv(int sectors, int stacks, const Vec3& center, double radius) {
  if (sectors < 3 || stacks < 2) throw std::runtime_error("sphere_uv: too coarse");
  SimplicialMesh m;
  m.dim_cell = 2;
  m.dim_ambient = 3;
  int north = 0;
  m.vertices.push_back(center + Vec3(0, 0, radius));
  auto ring_vid = [&](int j, int i) { return 1 + (j - 1) * sectors + (i % sectors); };
  for (int j = 1; j < stacks; ++j) {
    double theta = M_PI * j / stacks;
    for (int i = 0; i < sectors; ++i) {
      double phi = 2.0 * M_PI * i / sectors;
      m.vertices.push_back(center + radius * Vec3(std::sin(theta) * std::cos(phi),
                                                  std::sin(theta) * std::sin(phi),
                                                  std::cos(theta)));
    }
  }
  int south = static_cast<int>(m.vertices.size());
  m.vertices.push_back(center + Vec3(0, 0, -radius));

  for (int i = 0; i < sectors; ++i) push_cell(m, north, ring_vid(1, i), ring_vid(1, i + 1));
  for (int j = 1; j < stacks - 1; ++j) {
    for (int i = 0; i < sectors; ++i) {
      int a = ring_vid(j, i), b = ring_vid(j, i + 1);
      int c = ring_vid(j + 1, i), d = ring_vid(j + 1, i + 1);
      push_cell(m, a, c, d);
      push_cell(m, a, d, b);
    }
  }
  for (int i = 0; i < sectors; ++i)
    push_cell(m, south, ring_vid(stacks - 1, i + 1), ring_vid(stacks - 1, i));
  m.finalize();
  return m;
}

SimplicialMesh icosahedron(const Vec3& center, double radius) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0},
                         {0, -1, t}, {0, 1, t}, {0, -1, -t}, {0, 1, -t},
                         {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  int faces[20][3] = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  SimplicialMesh m;
  m.dim_cell = 2;
  m.dim_ambient = 3;
  for (const auto& p : v) m.vertices.push_back(center + radius * p.normalized());
  for (auto& f : faces) push_cell(m, f[0], f[1], f[2]);
  m.finalize();
  return m;
}

SimplicialMesh hemisphere_cap(int sectors, int stacks, double radius) {
  SimplicialMesh m;
  m.dim_cell = 2;
  m.dim_ambient = 3;
  int pole = 0;
  m.vertices.emplace_back(0, 0, radius);
  auto ring_vid = [&](int j, int i) { return 1 + (j - 1) * sectors + (i % sectors); };
  for (int j = 1; j <= stacks; ++j) {
    double theta = 0.5 * M_PI * j / stacks;
    for (int i = 0; i < sectors; ++i) {
      double phi = 2.0 * M_PI * i / sectors;
      m.vertices.emplace_back(radius * std::sin(theta) * std::cos(phi),
                              radius * std::sin(theta) * std::sin(phi),
                              radius * std::cos(theta));
    }
  }
  for (int i = 0; i < sectors; ++i) push_cell(m, pole, ring_vid(1, i), ring_vid(1, i + 1));
  for (int j = 1; j < stacks; ++j) {
    for (int i = 0; i < sectors; ++i) {
      int a = ring_vid(j, i), b = ring_vid(j, i + 1);
      int c = ring_vid(j + 1, i), d = ring_vid(j + 1, i + 1);
      push_cell(m, a, c, d);
      push_cell(m, a, d, b);
    }
  }
  m.finalize();
  return m;
}

SimplicialMesh revolved_surface(int sectors, int stacks, double z0, double z1,
                                const std::function<double(double)>& radius_of_z) {
  SimplicialMesh m;
  m.dim_cell = 2;
  m.dim_ambient = 3;
  auto vid = [&](int j, int i) { return j * sectors + (i % sectors); };
  for (int j = 0; j <= stacks; ++j) {
    double z = z0 + (z1 - z0) * j / stacks;
    double r = radius_of_z(z);
    for (int i = 0; i < sectors; ++i) {
      double phi = 2.0 * M_PI * i / sectors;
      m.vertices.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
    }
  }
  for (int j = 0; j < stacks; ++j) {
    for (int i = 0; i < sectors; ++i) {
      int a = vid(j, i), b = vid(j, i + 1), c = vid(j + 1, i), d = vid(j + 1, i + 1);
      push_cell(m, a, b, d);
      push_cell(m, a, d, c);
    }
  }
  m.finalize();
  return m;
}

SimplicialMesh cylinder(int sectors, int stacks, double radius, double height) {
  return revolved_surface(sectors, stacks, 0.0, height, [radius](double) { return radius; });
}

SimplicialMesh disk3d(int rings, int sectors, double radius) {
  SimplicialMesh m;
  m.dim_cell = 2;
  m.dim_ambient = 3;
  int center = 0;
  m.vertices.emplace_back(0, 0, 0);
  auto ring_vid = [&](int j, int i) { return 1 + (j - 1) * sectors + (i % sectors); };
  for (int j = 1; j <= rings; ++j) {
    double r = radius * j / rings;
    for (int i = 0; i < sectors; ++i) {
      double phi = 2.0 * M_PI * i / sectors;
      m.vertices.emplace_back(r * std::cos(phi), r * std::sin(phi), 0.0);
    }
  }
  for (int i = 0; i < sectors; ++i) push_cell(m, center, ring_vid(1, i), ring_vid(1, i + 1));
  for (int j = 1; j < rings; ++j) {
    for (int i = 0; i < sectors; ++i) {
      int a = ring_vid(j, i), b = ring_vid(j, i + 1);
      int c = ring_vid(j + 1, i), d = ring_vid(j + 1, i + 1);
      push_cell(m, a, c, d);
      push_cell(m, a, d, b);
    }
  }
  m.finalize();
  return m;
}

// ---- sphere in box ----------------------------------------------------------

namespace {

// Prism (v0 v1 v2 bottom, v3 v4 v5 top) into three tetrahedra, with the
// diagonal choices driven by global vertex ids so neighboring prisms agree.
void split_prism(SimplicialMesh& m, const std::array<int, 6>& p) {
  static const int perms[6][6] = {{0, 1, 2, 3, 4, 5}, {1, 2, 0, 4, 5, 3}, {2, 0, 1, 5, 3, 4},
                                  {3, 5, 4, 0, 2, 1}, {4, 3, 5, 1, 0, 2}, {5, 4, 3, 2, 1, 0}};
  int best = 0;
  for (int k = 1; k < 6; ++k)
    if (p[perms[k][0]] < p[perms[best][0]]) best = k;
  int q[6];
  for (int k = 0; k < 6; ++k) q[k] = p[perms[best][k]];
  if (std::min(q[1], q[5]) < std::min(q[2], q[4])) {
    push_cell(m, q[0], q[1], q[2], q[5]);
    push_cell(m, q[0], q[1], q[5], q[4]);
    push_cell(m, q[0], q[4], q[5], q[3]);
  } else {
    push_cell(m, q[0], q[1], q[2], q[4]);
    push_cell(m, q[0], q[4], q[2], q[5]);
    push_cell(m, q[0], q[4], q[5], q[3]);
  }
}

}  // namespace

SimplicialMesh sphere_in_box(int sectors, int stacks, const Vec3& center, double radius,
                             int inner_layers, int outer_layers) {
  SimplicialMesh sphere = sphere_uv(sectors, stacks, center, radius);
  const int nsv = sphere.n_vertices();

  SimplicialMesh m;
  m.dim_cell = 3;
  m.dim_ambient = 3;

  // shell 0 .. inner_layers-1: scaled-down copies; shell inner_layers: the
  // sphere itself; then outer_layers shells interpolating to the cube along
  // the ray through each sphere vertex.
  const int n_shells = inner_layers + 1 + outer_layers;
  for (int s = 0; s < n_shells; ++s) {
    for (int k = 0; k < nsv; ++k) {
      Vec3 d = sphere.vertices[k] - center;
      Vec3 p;
      if (s <= inner_layers) {
        double f = static_cast<double>(s + 1) / (inner_layers + 1);
        p = center + f * d;
      } else {
        Vec3 dir = d / radius;
        double m_inf = dir.cwiseAbs().maxCoeff();
        Vec3 cube_pt = center + 0.5 * dir / m_inf;  // central projection onto the unit cube
        double t = static_cast<double>(s - inner_layers) / outer_layers;
        p = sphere.vertices[k] + t * (cube_pt - sphere.vertices[k]);
      }
      m.vertices.push_back(p);
    }
  }
  const int center_vid = static_cast<int>(m.vertices.size());
  m.vertices.push_back(center);

  auto shell_vid = [&](int s, int k) { return s * nsv + k; };

  // core: innermost shell to the center vertex
  for (const auto& c : sphere.cells)
    push_cell(m, center_vid, shell_vid(0, c[0]), shell_vid(0, c[1]), shell_vid(0, c[2]));
  // prisms between consecutive shells
  for (int s = 0; s + 1 < n_shells; ++s) {
    for (const auto& c : sphere.cells) {
      split_prism(m, {shell_vid(s, c[0]), shell_vid(s, c[1]), shell_vid(s, c[2]),
                      shell_vid(s + 1, c[0]), shell_vid(s + 1, c[1]), shell_vid(s + 1, c[2])});
    }
  }

  // the sphere shell's triangles, as marked facets
  for (const auto& c : sphere.cells)
    m.marked_facets.push_back(
        {{shell_vid(inner_layers, c[0]), shell_vid(inner_layers, c[1]),
          shell_vid(inner_layers, c[2])},
         kShapeTag});

  // Every tetrahedron must come out of the radial construction positively
  // oriented; a sign flip here would mean an overlapping fill.
  for (int ci = 0; ci < m.n_cells(); ++ci) {
    Vec3 p[4];
    for (int k = 0; k < 4; ++k) p[k] = m.vertices[m.cells[ci][k]];
    if (simplex_volume(3, 3, p) <= 0.0)
      throw std::runtime_error("sphere_in_box: inverted tetrahedron in the radial fill");
  }
  m.finalize();

  // The outer boundary is the radial projection of the sphere triangulation
  // onto the cube, so the corners are chamfered at coarse resolutions; the
  // boundary vertex count catches gaps, the volume bound gross defects.
  if (m.boundary_vertices.size() != static_cast<size_t>(nsv))
    throw std::runtime_error("sphere_in_box: unexpected boundary (gaps in the tetrahedral fill)");
  double total = 0.0;
  for (int ci = 0; ci < m.n_cells(); ++ci) {
    Vec3 p[4];
    for (int k = 0; k < 4; ++k) p[k] = m.vertices[m.cells[ci][k]];
    total += std::abs(simplex_volume(3, 3, p));
  }
  if (total < 0.7 || total > 1.0 + 1e-9)
    throw std::runtime_error("sphere_in_box: tetrahedra do not tile the box (volume " +
                             std::to_string(total) + ")");
  return m;
}

}  // namespace meshgen
}  // namespace ptrack
