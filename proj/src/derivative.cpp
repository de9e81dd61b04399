#include "ptrack/derivative.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ptrack {

double DerivativeCovector::max_norm() const {
  double m = 0.0;
  for (const auto& v : d) m = std::max(m, v.norm());
  return m;
}

double pair_covector(const DerivativeCovector& c, const std::vector<Vec3>& V) {
  if (V.size() != c.d.size()) throw std::runtime_error("pair_covector: size mismatch");
  double s = 0.0;
  for (size_t i = 0; i < V.size(); ++i) s += c.d[i].dot(V[i]);
  return s;
}

double objective(const PreShapeState& state, const CellField& target) {
  if (target.values.size() != static_cast<size_t>(state.n_cells()))
    throw std::runtime_error("objective: target length mismatch");
  double J = 0.0;
  for (int ci = 0; ci < state.n_cells(); ++ci) {
    if (state.det_tau[ci] <= 0.0)
      throw std::runtime_error("objective: inverted cell " + std::to_string(ci));
    double rho = state.gm_cell[ci] / state.det_tau[ci];
    double r = rho - target.values[ci];
    J += 0.5 * r * r * state.vol_cur[ci];
  }
  return J;
}

double objective_at(const PreShapeState& state, const TargetSpec& spec,
                    const std::vector<Vec3>& positions) {
  const SimplicialMesh& M = *state.mesh;
  const int nc = M.n_cells();
  const int m = M.verts_per_cell();
  std::vector<double> vol(nc), det(nc), qc(nc, 1.0);
  std::vector<Vec3> cen(nc);
  for (int ci = 0; ci < nc; ++ci) {
    const auto& c = M.cells[ci];
    Vec3 p[4];
    for (int k = 0; k < m; ++k) p[k] = positions[c[k]];
    double sv = simplex_volume(M.dim_cell, M.dim_ambient, p);
    double d = sv / state.vol_ref[ci];
    if (M.is_surface()) {
      Vec3 n = triangle_normal_raw(p[0], p[1], p[2]);
      d = std::abs(d) * (n.dot(state.normal_ref[ci]) >= 0.0 ? 1.0 : -1.0);
    }
    if (d <= 0.0) return std::numeric_limits<double>::infinity();
    vol[ci] = std::abs(sv);
    det[ci] = d;
    Vec3 s = Vec3::Zero();
    for (int k = 0; k < m; ++k) s += p[k];
    cen[ci] = s / m;
  }
  double Q = 0.0;
  if (spec.kind == TargetSpec::Kind::Analytic) {
    for (int ci = 0; ci < nc; ++ci) {
      qc[ci] = spec.q.eval(cen[ci]);
      if (!(qc[ci] > 0.0)) return std::numeric_limits<double>::infinity();
      Q += qc[ci] * vol[ci];
    }
  } else {
    for (int ci = 0; ci < nc; ++ci) Q += vol[ci];
  }
  const double scale = state.gm_integral / Q;
  double J = 0.0;
  for (int ci = 0; ci < nc; ++ci) {
    double r = state.gm_cell[ci] / det[ci] - scale * qc[ci];
    J += 0.5 * r * r * vol[ci];
  }
  return J;
}

namespace {

DerivativeCovector assemble_full(const PreShapeState& state, const TargetEval& te) {
  const SimplicialMesh& M = *state.mesh;
  const int nc = M.n_cells();
  const int m = M.verts_per_cell();
  const double Ig = state.gm_integral;
  const double Q = te.q_integral;

  // S carries the variation of the renormalization factor Ig/Q: the
  // objective's f-sensitivity sums to S * dQ[V].
  double S = 0.0;
  std::vector<double> rho(nc), resid(nc);
  for (int ci = 0; ci < nc; ++ci) {
    if (state.det_tau[ci] <= 0.0)
      throw std::runtime_error("assemble_derivative: inverted cell " + std::to_string(ci));
    rho[ci] = state.gm_cell[ci] / state.det_tau[ci];
    resid[ci] = rho[ci] - te.f.values[ci];
    S += state.vol_cur[ci] * resid[ci] * te.f.values[ci];
  }
  S /= Q;

  DerivativeCovector out;
  out.component = Component::Full;
  out.d.assign(M.n_vertices(), Vec3::Zero());
  for (int ci = 0; ci < nc; ++ci) {
    const auto& c = M.cells[ci];
    const double vol = state.vol_cur[ci];
    const double div_coef = -0.5 * (rho[ci] * rho[ci] - te.f.values[ci] * te.f.values[ci]) +
                            S * te.q_centroid[ci];
    const Vec3 grad_coef =
        (-resid[ci] * (Ig / Q) + S) * te.gradq_centroid[ci] / static_cast<double>(m);
    for (int k = 0; k < m; ++k)
      out.d[c[k]] += vol * (div_coef * state.hatgrad_cur[ci][k] + grad_coef);
  }
  return out;
}

}  // namespace

DerivativeCovector assemble_derivative(const PreShapeState& state, const TargetEval& target,
                                       Component component) {
  DerivativeCovector full = assemble_full(state, target);
  if (component == Component::Full) return full;
  if (!state.is_surface()) {
    if (component == Component::Normal)
      throw std::runtime_error(
          "assemble_derivative: no normal component on a codimension-0 mesh");
    full.component = Component::Tangential;  // coincides with Full
    return full;
  }
  DerivativeCovector out;
  out.component = component;
  out.d.resize(full.d.size());
  for (size_t i = 0; i < full.d.size(); ++i) {
    const Vec3& n = state.vertex_normal_cur[i];
    Vec3 dn = full.d[i].dot(n) * n;
    out.d[i] = component == Component::Normal ? dn : full.d[i] - dn;
  }
  return out;
}

DerivativeCovector assemble_derivative(const PreShapeState& state, const TargetSpec& spec,
                                       Component component) {
  return assemble_derivative(state, evaluate_target(spec, state), component);
}

CellField material_derivative_target(const PreShapeState& state, const TargetSpec& spec,
                                     const std::vector<Vec3>& V) {
  if (V.size() != static_cast<size_t>(state.n_vertices()))
    throw std::runtime_error("material_derivative_target: direction length mismatch");
  TargetEval te = evaluate_target(spec, state);
  const SimplicialMesh& M = *state.mesh;
  const int m = M.verts_per_cell();
  const double Ig = state.gm_integral;
  const double Q = te.q_integral;

  // dQ[V] = sum_cells vol * (grad q . Vbar + q * div V); exactly the
  // derivative of the discrete quadrature of q, and for a fixed-boundary
  // volume mesh it telescopes to zero.
  double Qdot = 0.0;
  std::vector<double> vbar_gradq(M.n_cells()), divV(M.n_cells());
  for (int ci = 0; ci < M.n_cells(); ++ci) {
    const auto& c = M.cells[ci];
    Vec3 vbar = Vec3::Zero();
    double div = 0.0;
    for (int k = 0; k < m; ++k) {
      vbar += V[c[k]];
      div += V[c[k]].dot(state.hatgrad_cur[ci][k]);
    }
    vbar /= m;
    vbar_gradq[ci] = te.gradq_centroid[ci].dot(vbar);
    divV[ci] = div;
    Qdot += state.vol_cur[ci] * (vbar_gradq[ci] + te.q_centroid[ci] * div);
  }

  CellField out;
  out.values.resize(M.n_cells());
  for (int ci = 0; ci < M.n_cells(); ++ci)
    out.values[ci] = -(Ig / (Q * Q)) * te.q_centroid[ci] * Qdot + (Ig / Q) * vbar_gradq[ci];
  return out;
}

std::vector<double> vertex_areas(const PreShapeState& state) {
  const SimplicialMesh& M = *state.mesh;
  const int m = M.verts_per_cell();
  std::vector<double> area(M.n_vertices(), 0.0);
  for (int ci = 0; ci < M.n_cells(); ++ci)
    for (int k = 0; k < m; ++k) area[M.cells[ci][k]] += state.vol_cur[ci] / m;
  return area;
}

DerivativeCovector area_derivative(const PreShapeState& state) {
  const SimplicialMesh& M = *state.mesh;
  const int m = M.verts_per_cell();
  DerivativeCovector out;
  out.component = Component::Full;
  out.d.assign(M.n_vertices(), Vec3::Zero());
  for (int ci = 0; ci < M.n_cells(); ++ci)
    for (int k = 0; k < m; ++k)
      out.d[M.cells[ci][k]] += state.vol_cur[ci] * state.hatgrad_cur[ci][k];
  return out;
}

NodalField mean_curvature(const PreShapeState& state) {
  if (!state.is_surface()) throw std::runtime_error("mean_curvature: surface meshes only");
  DerivativeCovector agrad = area_derivative(state);
  std::vector<double> area = vertex_areas(state);
  NodalField kappa;
  kappa.values.assign(state.n_vertices(), 0.0);
  const double dim = state.mesh->dim_cell;
  for (int i = 0; i < state.n_vertices(); ++i) {
    if (state.mesh->vertex_on_boundary[i]) continue;
    kappa.values[i] = agrad.d[i].dot(state.vertex_normal_cur[i]) / (dim * area[i]);
  }
  return kappa;
}

DerivativeCovector minimal_surface_descent_direction(const PreShapeState& state) {
  if (!state.is_surface())
    throw std::runtime_error("minimal_surface_descent_direction: surface meshes only");
  if (state.mesh->boundary_vertices.empty())
    throw std::runtime_error(
        "minimal_surface_descent_direction: closed surface, Plateau problem undefined");
  NodalField kappa = mean_curvature(state);
  std::vector<double> area = vertex_areas(state);
  const SimplicialMesh& M = *state.mesh;

  // Area-weighted vertex average of (det^-1)^2. The square makes the weight
  // orientation-free, which keeps the flow well defined when cells rotate
  // far from the reference configuration.
  std::vector<double> w(M.n_vertices(), 0.0);
  for (int ci = 0; ci < M.n_cells(); ++ci) {
    double det = std::abs(state.det_tau[ci]);
    if (det <= 0.0)
      throw std::runtime_error("minimal_surface_descent_direction: degenerate cell " +
                               std::to_string(ci));
    double inv_det_sq = 1.0 / (det * det);
    for (int k = 0; k < 3; ++k) w[M.cells[ci][k]] += (state.vol_cur[ci] / 3.0) * inv_det_sq;
  }
  DerivativeCovector out;
  out.component = Component::Normal;
  out.d.assign(M.n_vertices(), Vec3::Zero());
  const double dim = M.dim_cell;
  for (int i = 0; i < M.n_vertices(); ++i) {
    if (M.vertex_on_boundary[i]) continue;
    double rho_sq = w[i] / area[i];
    out.d[i] = -(dim / 2.0) * rho_sq * kappa.values[i] * area[i] * state.vertex_normal_cur[i];
  }
  return out;
}

}  // namespace ptrack
