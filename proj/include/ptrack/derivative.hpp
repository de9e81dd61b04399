#pragma once

#include "ptrack/state.hpp"

namespace ptrack {

enum class Component { Full, Tangential, Normal };

// Discrete covector of the tracking functional on piecewise-linear vector
// fields: pairing with V is sum_i <d[i], V(p_i)>. Entries at boundary
// vertices are reported but the gradient representation never uses them.
struct DerivativeCovector {
  Component component = Component::Full;
  std::vector<Vec3> d;

  double max_norm() const;
};

double pair_covector(const DerivativeCovector& c, const std::vector<Vec3>& V);

// 1/2 sum_cells (density - target)^2 * vol_cur. Throws on inverted cells.
double objective(const PreShapeState& state, const CellField& target);

// Objective at candidate positions with the target renormalization rebuilt
// there; leaves the state untouched. Returns +inf if a cell inverts.
double objective_at(const PreShapeState& state, const TargetSpec& spec,
                    const std::vector<Vec3>& positions);

// Pre-shape derivative of the tracking functional as a vertex covector.
// The assembly is the exact gradient of the discrete objective: the
// determinant/divergence part integrates exactly (everything is piecewise
// constant), and the target material derivative carries the variation of the
// renormalization through the discrete quadrature of q. Tangential and
// Normal split the Full covector by vertex-normal projection, so the
// decomposition is exact; Normal is rejected on codimension-0 meshes, where
// Tangential coincides with Full.
DerivativeCovector assemble_derivative(const PreShapeState& state, const TargetSpec& spec,
                                       Component component);
DerivativeCovector assemble_derivative(const PreShapeState& state, const TargetEval& target,
                                       Component component);

// Material derivative of the target density in direction V, per cell.
CellField material_derivative_target(const PreShapeState& state, const TargetSpec& spec,
                                     const std::vector<Vec3>& V);

// Discrete mean curvature from the area gradient (the cotangent Laplacian
// applied to the coordinates): kappa_i = <grad_i A, n_i> / (dim * A_i) with
// barycentric vertex areas. Sphere of radius r with outward normals gets
// +1/r; boundary vertices get zero.
NodalField mean_curvature(const PreShapeState& state);

// Barycentric vertex areas (volumes) of the current configuration.
std::vector<double> vertex_areas(const PreShapeState& state);

// Derivative covector of the current area/volume functional:
// dA[V] = sum_cells vol * div(V).
DerivativeCovector area_derivative(const PreShapeState& state);

// Normal covector of the tracking functional for the minimal-surface case
// (target 0, unit initial density): pairs as
// -(dim/2) * integral (det^-1)^2 * kappa * <V,n>. An ascent direction of the
// tracking functional; the induced flow is a weighted mean-curvature flow.
// Requires a surface with nonempty fixed boundary.
DerivativeCovector minimal_surface_descent_direction(const PreShapeState& state);

}  // namespace ptrack
