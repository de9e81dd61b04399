#pragma once

#include <vector>

#include "ptrack/derivative.hpp"
#include "ptrack/fields.hpp"
#include "ptrack/mesh.hpp"

namespace ptrack {

struct MetricConfig {
  double alpha_le = 1.0;  // weight of the elasticity form
  double alpha_l2 = 0.0;  // weight of the L2 mass term
  double mu_max = 1.0;    // second Lame parameter on the shape
  double mu_min = 1.0;    // second Lame parameter on the outer boundary

  void validate() const;
};

// Gradient vector field on the hold-all mesh; zero on the outer boundary.
struct GradientField {
  std::vector<Vec3> u;
};

// P1 solution of -laplace(mu) = 0 with mu = mu_max on shape_vertices and
// mu = mu_min on the mesh boundary (shape values win where the sets meet).
NodalField solve_mu(const SimplicialMesh& mesh, const std::vector<Vec3>& positions,
                    const std::vector<int>& shape_vertices, const MetricConfig& cfg);

// Same assembly with explicit Dirichlet sets (mu_max on set_max, mu_min on
// set_min); solve_mu forwards here.
NodalField solve_mu_sets(const SimplicialMesh& mesh, const std::vector<Vec3>& positions,
                         const std::vector<int>& set_max, const std::vector<int>& set_min,
                         const MetricConfig& cfg);

// Solves alpha_le * int mu eps(U):eps(V) + alpha_l2 * (U,V)_L2 = rhs(V) for
// P1 fields V vanishing on the mesh boundary. Only the shear part of the
// linear elasticity enters; the system is symmetric positive definite.
// Relative algebraic residual is checked against 1e-10.
GradientField represent_gradient(const SimplicialMesh& mesh, const std::vector<Vec3>& positions,
                                 const NodalField& mu, const MetricConfig& cfg,
                                 const std::vector<Vec3>& rhs);

// Consistent-mass L2 norm of a P1 vector field over the mesh.
double l2_norm(const SimplicialMesh& mesh, const std::vector<Vec3>& positions,
               const GradientField& field);
double l2_norm_nodal(const SimplicialMesh& mesh, const std::vector<Vec3>& positions,
                     const std::vector<Vec3>& field);

}  // namespace ptrack
