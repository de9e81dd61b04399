#include "ptrack/state.hpp"

#include <cmath>
#include <stdexcept>

namespace ptrack {

void PreShapeState::set_positions(const std::vector<Vec3>& p, bool enforce_boundary) {
  if (p.size() != static_cast<size_t>(mesh->n_vertices()))
    throw std::runtime_error("state: position count mismatch");
  if (enforce_boundary) {
    for (int i : mesh->boundary_vertices)
      if (p[i] != mesh->vertices[i])
        throw std::runtime_error("state: boundary vertex " + std::to_string(i) + " moved");
  }
  positions = p;
  refresh();
}

void PreShapeState::refresh() {
  const SimplicialMesh& M = *mesh;
  const int nc = M.n_cells();
  const int m = M.verts_per_cell();
  vol_cur.resize(nc);
  det_tau.resize(nc);
  centroid_cur.resize(nc);
  frame_cur.resize(nc);
  hatgrad_cur.resize(nc);
  if (M.is_surface()) normal_cur.resize(nc);

  for (int ci = 0; ci < nc; ++ci) {
    const auto& c = M.cells[ci];
    Vec3 p[4];
    for (int k = 0; k < m; ++k) p[k] = positions[c[k]];
    double sv = simplex_volume(M.dim_cell, M.dim_ambient, p);
    vol_cur[ci] = std::abs(sv);
    Vec3 cen = Vec3::Zero();
    for (int k = 0; k < m; ++k) cen += p[k];
    centroid_cur[ci] = cen / m;
    hat_gradients(M.dim_cell, p, hatgrad_cur[ci].data());
    gram_schmidt_frame(M.dim_cell, M.dim_ambient, p, frame_cur[ci].data());
    if (M.is_surface()) normal_cur[ci] = triangle_normal_raw(p[0], p[1], p[2]).normalized();
  }
  recompute_det_from_frames();
  if (M.is_surface()) vertex_normal_cur = vertex_normals_at(M, positions);
}

void PreShapeState::recompute_det_from_frames() {
  const SimplicialMesh& M = *mesh;
  const int m = M.verts_per_cell();
  det_tau.resize(M.n_cells());
  for (int ci = 0; ci < M.n_cells(); ++ci) {
    const auto& c = M.cells[ci];
    Vec3 pr[4], pc[4];
    for (int k = 0; k < m; ++k) {
      pr[k] = M.vertices[c[k]];
      pc[k] = positions[c[k]];
    }
    double det = covariant_det(M.dim_cell, pr, pc, frame_ref[ci].data(), frame_cur[ci].data());
    if (M.is_surface()) {
      // the frames are each oriented with their own vertex-order normal
      // (making the frame determinant positive), so the fold sign comes
      // from the normal agreement
      if (normal_cur[ci].dot(normal_ref[ci]) < 0.0) det = -det;
    }
    det_tau[ci] = det;
  }
}

int PreShapeState::first_inverted_cell() const {
  for (int ci = 0; ci < n_cells(); ++ci)
    if (det_tau[ci] <= 0.0) return ci;
  return -1;
}

PreShapeState make_state(std::shared_ptr<const SimplicialMesh> mesh, NodalField gm) {
  if (gm.values.size() != static_cast<size_t>(mesh->n_vertices()))
    throw std::runtime_error("make_state: gm length mismatch");
  PreShapeState s;
  s.mesh = std::move(mesh);
  s.gm = std::move(gm);
  s.positions = s.mesh->vertices;
  s.gm_integral = integrate_nodal(*s.mesh, s.gm);

  const SimplicialMesh& M = *s.mesh;
  const int nc = M.n_cells();
  const int m = M.verts_per_cell();
  s.vol_ref.resize(nc);
  s.gm_cell.resize(nc);
  s.frame_ref.resize(nc);
  if (M.is_surface()) s.normal_ref.resize(nc);
  for (int ci = 0; ci < nc; ++ci) {
    const auto& c = M.cells[ci];
    Vec3 p[4];
    double mean = 0.0;
    for (int k = 0; k < m; ++k) {
      p[k] = M.vertices[c[k]];
      mean += s.gm.values[c[k]];
    }
    s.vol_ref[ci] = std::abs(simplex_volume(M.dim_cell, M.dim_ambient, p));
    s.gm_cell[ci] = mean / m;
    gram_schmidt_frame(M.dim_cell, M.dim_ambient, p, s.frame_ref[ci].data());
    if (M.is_surface()) s.normal_ref[ci] = triangle_normal_raw(p[0], p[1], p[2]).normalized();
  }
  s.refresh();
  return s;
}

PreShapeState make_state_uniform_gm(std::shared_ptr<const SimplicialMesh> mesh) {
  NodalField gm = uniform_gm(*mesh);
  return make_state(std::move(mesh), std::move(gm));
}

CellField current_density(const PreShapeState& state) {
  CellField rho;
  rho.values.resize(state.n_cells());
  for (int ci = 0; ci < state.n_cells(); ++ci) {
    if (state.det_tau[ci] <= 0.0)
      throw std::runtime_error("current_density: inverted cell " + std::to_string(ci));
    rho.values[ci] = state.gm_cell[ci] / state.det_tau[ci];
  }
  return rho;
}

TargetEval evaluate_target(const TargetSpec& spec, const PreShapeState& state) {
  const int nc = state.n_cells();
  TargetEval out;
  out.f.values.resize(nc);
  out.q_centroid.assign(nc, 1.0);
  out.gradq_centroid.assign(nc, Vec3::Zero());

  if (spec.kind == TargetSpec::Kind::Analytic) {
    for (int ci = 0; ci < nc; ++ci) {
      Vec3 grad;
      double q = spec.q.eval_with_gradient(state.centroid_cur[ci], grad);
      if (!(q > 0.0))
        throw std::runtime_error("target: nonpositive q sample at cell " + std::to_string(ci));
      out.q_centroid[ci] = q;
      out.gradq_centroid[ci] = grad;
    }
  }
  double Q = 0.0;
  for (int ci = 0; ci < nc; ++ci) Q += out.q_centroid[ci] * state.vol_cur[ci];
  out.q_integral = Q;
  const double scale = state.gm_integral / Q;
  for (int ci = 0; ci < nc; ++ci) out.f.values[ci] = scale * out.q_centroid[ci];
  return out;
}

CellField build_target(const TargetSpec& spec, const PreShapeState& state) {
  return evaluate_target(spec, state).f;
}

}  // namespace ptrack
