#include "ptrack/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>

namespace ptrack {

namespace {

double now_seconds() {
  using clock = std::chrono::steady_clock;
  static const clock::time_point origin = clock::now();
  return std::chrono::duration<double>(clock::now() - origin).count();
}

}  // namespace

void OptimizerConfig::validate() const {
  if (!(initial_scale > 0.0)) throw std::runtime_error("optimizer config: initial_scale <= 0");
  if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0))
    throw std::runtime_error("optimizer config: backtrack_factor outside (0,1)");
  if (max_backtracks < 0 || max_iters < 0)
    throw std::runtime_error("optimizer config: negative iteration budget");
  bool any_stop = grad_tol > 0.0 || grad_tol_rel > 0.0 || residual_tol > 0.0 ||
                  residual_tol_frac > 0.0 || max_iters >= 0;
  if (!any_stop) throw std::runtime_error("optimizer config: no stopping criterion active");
}

const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Converged: return "Converged";
    case RunStatus::MaxIters: return "MaxIters";
    case RunStatus::Stagnated: return "Stagnated";
  }
  return "?";
}

int Problem::first_inverted_holdall_cell(const std::vector<Vec3>& positions) const {
  const int m = holdall->verts_per_cell();
  for (int ci = 0; ci < holdall->n_cells(); ++ci) {
    Vec3 p[4];
    for (int k = 0; k < m; ++k) p[k] = positions[holdall->cells[ci][k]];
    if (simplex_volume(holdall->dim_cell, holdall->dim_ambient, p) <= 0.0) return ci;
  }
  return -1;
}

Problem make_volume_problem(std::shared_ptr<const SimplicialMesh> mesh, NodalField gm) {
  if (mesh->is_surface())
    throw std::runtime_error("make_volume_problem: mesh is a surface; use the surface problem");
  Problem p;
  p.holdall = mesh;
  p.holdall_positions = mesh->vertices;
  p.state = make_state(mesh, std::move(gm));
  p.shape_to_holdall.resize(mesh->n_vertices());
  for (int i = 0; i < mesh->n_vertices(); ++i) p.shape_to_holdall[i] = i;
  p.codim0 = true;
  return p;
}

SimplicialMesh extract_marked_surface(const SimplicialMesh& holdall, int tag,
                                      std::vector<int>& surface_to_holdall) {
  if (holdall.dim_cell != 3)
    throw std::runtime_error("extract_marked_surface: hold-all must be tetrahedral");
  std::map<int, int> local;
  SimplicialMesh surf;
  surf.dim_cell = 2;
  surf.dim_ambient = 3;
  surface_to_holdall.clear();
  for (const auto& [f, t] : holdall.marked_facets) {
    if (t != tag) continue;
    std::array<int, 4> cell{-1, -1, -1, -1};
    for (int k = 0; k < 3; ++k) {
      auto it = local.find(f[k]);
      if (it == local.end()) {
        it = local.emplace(f[k], static_cast<int>(surf.vertices.size())).first;
        surf.vertices.push_back(holdall.vertices[f[k]]);
        surface_to_holdall.push_back(f[k]);
      }
      cell[k] = it->second;
    }
    surf.cells.push_back(cell);
  }
  if (surf.cells.empty())
    throw std::runtime_error("extract_marked_surface: no facets with tag " + std::to_string(tag));
  surf.finalize();
  return surf;
}

Problem make_surface_problem(std::shared_ptr<const SimplicialMesh> holdall, int shape_tag,
                             bool uniform_gm) {
  Problem p;
  p.holdall = holdall;
  p.holdall_positions = holdall->vertices;
  std::vector<int> map;
  auto surf = std::make_shared<SimplicialMesh>(extract_marked_surface(*holdall, shape_tag, map));
  p.shape_to_holdall = std::move(map);
  p.state = uniform_gm ? make_state_uniform_gm(surf) : make_state(surf);
  p.codim0 = false;
  return p;
}

namespace {

std::vector<Vec3> gather_shape_positions(const Problem& p, const std::vector<Vec3>& holdall_pos) {
  std::vector<Vec3> out(p.shape_to_holdall.size());
  for (size_t i = 0; i < p.shape_to_holdall.size(); ++i) out[i] = holdall_pos[p.shape_to_holdall[i]];
  return out;
}

}  // namespace

StepResult step(Problem& problem, const TargetSpec& target, const MetricConfig& metric_cfg,
                const OptimizerConfig& opt_cfg, int iter, double grad_tol_abs,
                double residual_tol_abs, double wall_origin) {
  const SimplicialMesh& holdall = *problem.holdall;
  PreShapeState& state = problem.state;

  TargetEval te = evaluate_target(target, state);
  const double J = objective(state, te.f);

  double residual_max = 0.0;
  for (int ci = 0; ci < state.n_cells(); ++ci)
    residual_max =
        std::max(residual_max, std::abs(state.gm_cell[ci] / state.det_tau[ci] - te.f.values[ci]));

  DerivativeCovector d = assemble_derivative(state, te, opt_cfg.component);

  // right-hand side on the hold-all: the negative covector injected at the
  // (conforming) shape vertices
  std::vector<Vec3> rhs(holdall.n_vertices(), Vec3::Zero());
  for (size_t i = 0; i < problem.shape_to_holdall.size(); ++i)
    rhs[problem.shape_to_holdall[i]] = -d.d[i];

  NodalField mu;
  if (problem.codim0) {
    // the shape boundary is the outer boundary; the two Dirichlet values
    // must agree for the field to be well-posed
    if (metric_cfg.mu_max != metric_cfg.mu_min)
      throw std::runtime_error("step: codimension-0 problems need mu_max == mu_min");
    mu = solve_mu(holdall, problem.holdall_positions, holdall.boundary_vertices, metric_cfg);
  } else {
    mu = solve_mu(holdall, problem.holdall_positions, problem.shape_to_holdall, metric_cfg);
  }
  GradientField U =
      represent_gradient(holdall, problem.holdall_positions, mu, metric_cfg, rhs);
  const double grad_l2 = l2_norm(holdall, problem.holdall_positions, U);

  // descent check: the representation of -d must pair negatively with d
  std::vector<Vec3> U_shape(problem.shape_to_holdall.size());
  for (size_t i = 0; i < problem.shape_to_holdall.size(); ++i)
    U_shape[i] = U.u[problem.shape_to_holdall[i]];
  const double slope = pair_covector(d, U_shape);
  if (slope > 1e-14 * std::max(1.0, std::abs(J)))
    throw std::runtime_error("step: representation is not a descent direction");

  StepResult out;
  out.record.iter = iter;
  out.record.objective = J;
  out.record.grad_l2 = grad_l2;
  out.record.residual_max = residual_max;
  out.record.wall_time = now_seconds() - wall_origin;

  if ((grad_tol_abs > 0.0 && grad_l2 <= grad_tol_abs) ||
      (residual_tol_abs > 0.0 && residual_max <= residual_tol_abs)) {
    out.converged = true;
    return out;
  }

  double s = opt_cfg.initial_scale;
  for (int bt = 0; bt <= opt_cfg.max_backtracks; ++bt, s *= opt_cfg.backtrack_factor) {
    std::vector<Vec3> cand(problem.holdall_positions.size());
    for (size_t i = 0; i < cand.size(); ++i) cand[i] = problem.holdall_positions[i] + s * U.u[i];
    if (problem.first_inverted_holdall_cell(cand) >= 0) continue;  // failed backtrack
    std::vector<Vec3> cand_shape = gather_shape_positions(problem, cand);
    double Jc = objective_at(state, target, cand_shape);
    if (Jc < J + opt_cfg.armijo * s * slope && std::isfinite(Jc)) {
      problem.holdall_positions = std::move(cand);
      state.set_positions(cand_shape);
      out.stepped = true;
      out.record.step_scale = s;
      out.record.backtracks = bt;
      out.record.wall_time = now_seconds() - wall_origin;
      return out;
    }
  }
  return out;  // stagnated: no decrease within the backtracking budget
}

RunStatus run(Problem& problem, const TargetSpec& target, const MetricConfig& metric_cfg,
              const OptimizerConfig& opt_cfg, const RecordSink& sink,
              const SnapshotSink& snapshots) {
  opt_cfg.validate();
  metric_cfg.validate();
  const double wall_origin = now_seconds();

  double grad_tol_abs = opt_cfg.grad_tol;
  double residual_tol_abs = opt_cfg.residual_tol;

  for (int iter = 0; iter < opt_cfg.max_iters; ++iter) {
    // the relative residual default resolves against the mean target value
    if (iter == 0 && residual_tol_abs <= 0.0 && opt_cfg.residual_tol_frac > 0.0) {
      TargetEval te = evaluate_target(target, problem.state);
      double vol_total = 0.0, f_mean = 0.0;
      for (int ci = 0; ci < problem.state.n_cells(); ++ci) {
        vol_total += problem.state.vol_cur[ci];
        f_mean += te.f.values[ci] * problem.state.vol_cur[ci];
      }
      residual_tol_abs = opt_cfg.residual_tol_frac * f_mean / vol_total;
    }

    StepResult r = step(problem, target, metric_cfg, opt_cfg, iter, grad_tol_abs,
                        residual_tol_abs, wall_origin);
    if (iter == 0 && opt_cfg.grad_tol <= 0.0 && opt_cfg.grad_tol_rel > 0.0)
      grad_tol_abs = opt_cfg.grad_tol_rel * r.record.grad_l2;

    if (sink) sink(r.record);
    if (r.converged) return RunStatus::Converged;
    if (!r.stepped) return RunStatus::Stagnated;
    if (snapshots && opt_cfg.snapshot_every > 0 && (iter + 1) % opt_cfg.snapshot_every == 0)
      snapshots(iter + 1, problem);
  }
  return RunStatus::MaxIters;
}

std::string csv_header() {
  return "iter,objective,grad_l2,residual_max,step_scale,backtracks,wall_time";
}

std::string csv_row(const IterationRecord& r, bool with_wall_time) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g,%d,%.6f", r.iter, r.objective,
                r.grad_l2, r.residual_max, r.step_scale, r.backtracks,
                with_wall_time ? r.wall_time : 0.0);
  return buf;
}

}  // namespace ptrack
