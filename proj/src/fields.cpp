#include "ptrack/fields.hpp"

#include <cmath>
#include <stdexcept>

namespace ptrack {

double integrate_nodal_at(const SimplicialMesh& mesh, const std::vector<Vec3>& positions,
                          const NodalField& f) {
  if (f.values.size() != static_cast<size_t>(mesh.n_vertices()))
    throw std::runtime_error("integrate_nodal: field length mismatch");
  const int m = mesh.verts_per_cell();
  double total = 0.0;
  for (const auto& c : mesh.cells) {
    Vec3 p[4];
    double mean = 0.0;
    for (int k = 0; k < m; ++k) {
      p[k] = positions[c[k]];
      mean += f.values[c[k]];
    }
    mean /= m;
    total += std::abs(simplex_volume(mesh.dim_cell, mesh.dim_ambient, p)) * mean;
  }
  return total;
}

double integrate_nodal(const SimplicialMesh& mesh, const NodalField& f) {
  return integrate_nodal_at(mesh, mesh.vertices, f);
}

NodalField estimate_gm(const SimplicialMesh& mesh) {
  const int m = mesh.verts_per_cell();
  std::vector<double> inv_vol_sum(mesh.n_vertices(), 0.0);
  std::vector<int> incidence(mesh.n_vertices(), 0);
  for (const auto& c : mesh.cells) {
    Vec3 p[4];
    for (int k = 0; k < m; ++k) p[k] = mesh.vertices[c[k]];
    double vol = std::abs(simplex_volume(mesh.dim_cell, mesh.dim_ambient, p));
    for (int k = 0; k < m; ++k) {
      inv_vol_sum[c[k]] += 1.0 / vol;
      incidence[c[k]] += 1;
    }
  }
  NodalField g;
  g.values.resize(mesh.n_vertices());
  for (int i = 0; i < mesh.n_vertices(); ++i) {
    if (incidence[i] == 0) throw std::runtime_error("estimate_gm: isolated vertex " + std::to_string(i));
    g.values[i] = inv_vol_sum[i] / incidence[i];
  }
  double total = integrate_nodal(mesh, g);
  for (double& v : g.values) v /= total;
  return g;
}

NodalField uniform_gm(const SimplicialMesh& mesh) {
  const int m = mesh.verts_per_cell();
  double total = 0.0;
  for (const auto& c : mesh.cells) {
    Vec3 p[4];
    for (int k = 0; k < m; ++k) p[k] = mesh.vertices[c[k]];
    total += std::abs(simplex_volume(mesh.dim_cell, mesh.dim_ambient, p));
  }
  NodalField g;
  g.values.assign(mesh.n_vertices(), 1.0 / total);
  return g;
}

}  // namespace ptrack
