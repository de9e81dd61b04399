#pragma once

#include <functional>
#include <memory>
#include <string>

#include "ptrack/metric.hpp"
#include "ptrack/state.hpp"

namespace ptrack {

struct OptimizerConfig {
  double initial_scale = 0.01;    // c: scale of the represented gradient
  double backtrack_factor = 0.5;  // halving
  int max_backtracks = 30;
  int max_iters = 200;
  // Absolute tolerances win when positive; otherwise the relative defaults
  // apply (fraction of the initial gradient norm / of the mean target).
  double grad_tol = -1.0;
  double grad_tol_rel = 1e-3;
  double residual_tol = -1.0;
  double residual_tol_frac = 0.01;
  double armijo = 0.0;  // 0 = plain strict decrease
  Component component = Component::Tangential;
  int snapshot_every = 0;

  void validate() const;
};

struct IterationRecord {
  int iter = 0;
  double objective = 0.0;
  double grad_l2 = 0.0;
  double residual_max = 0.0;
  double step_scale = 0.0;
  int backtracks = 0;
  double wall_time = 0.0;  // seconds since the start of the run
};

enum class RunStatus { Converged, MaxIters, Stagnated };
const char* to_string(RunStatus s);

// Optimization problem: the shape state whose parameterization is tracked,
// and the hold-all volume mesh carrying the gradient representation. For
// codimension-0 problems the shape is the hold-all itself; for surface
// problems the surface vertices are a subset of the hold-all vertices
// (conforming) and the whole hold-all mesh moves with the gradient.
struct Problem {
  std::shared_ptr<const SimplicialMesh> holdall;
  std::vector<Vec3> holdall_positions;
  PreShapeState state;
  std::vector<int> shape_to_holdall;  // shape vertex -> hold-all vertex
  bool codim0 = true;

  int first_inverted_holdall_cell(const std::vector<Vec3>& positions) const;
};

Problem make_volume_problem(std::shared_ptr<const SimplicialMesh> mesh, NodalField gm);
inline Problem make_volume_problem(std::shared_ptr<const SimplicialMesh> mesh) {
  NodalField gm = estimate_gm(*mesh);
  return make_volume_problem(std::move(mesh), std::move(gm));
}

// Extracts the marked surface (facet tag) from a tetrahedral hold-all mesh.
SimplicialMesh extract_marked_surface(const SimplicialMesh& holdall, int tag,
                                      std::vector<int>& surface_to_holdall);

Problem make_surface_problem(std::shared_ptr<const SimplicialMesh> holdall, int shape_tag,
                             bool uniform_gm);

using RecordSink = std::function<void(const IterationRecord&)>;
using SnapshotSink = std::function<void(int iter, const Problem&)>;

// One descent iteration: assemble, represent, line-search, update.
// Returns the record; converged/stepped describe what happened.
struct StepResult {
  IterationRecord record;
  bool converged = false;
  bool stepped = false;
};

StepResult step(Problem& problem, const TargetSpec& target, const MetricConfig& metric_cfg,
                const OptimizerConfig& opt_cfg, int iter = 0, double grad_tol_abs = -1.0,
                double residual_tol_abs = -1.0, double wall_origin = 0.0);

RunStatus run(Problem& problem, const TargetSpec& target, const MetricConfig& metric_cfg,
              const OptimizerConfig& opt_cfg, const RecordSink& sink = {},
              const SnapshotSink& snapshots = {});

std::string csv_header();
std::string csv_row(const IterationRecord& r, bool with_wall_time);

}  // namespace ptrack
