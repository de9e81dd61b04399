#pragma once

#include <string>
#include <vector>

#include "ptrack/expr.hpp"
#include "ptrack/mesh.hpp"

namespace ptrack {

// Piecewise-linear scalar data on vertices.
struct NodalField {
  std::vector<double> values;
};

// Piecewise-constant scalar data on cells.
struct CellField {
  std::vector<double> values;
};

// P1 quadrature: sum over cells of volume * vertex-average.
double integrate_nodal(const SimplicialMesh& mesh, const NodalField& f);
double integrate_nodal_at(const SimplicialMesh& mesh, const std::vector<Vec3>& positions,
                          const NodalField& f);

// Initial node density: per vertex the average of inverses of surrounding
// cell volumes, rescaled so the P1 integral over the mesh is 1. All values
// strictly positive.
NodalField estimate_gm(const SimplicialMesh& mesh);

// Constant density 1/|M|; integrates to 1 like the estimate.
NodalField uniform_gm(const SimplicialMesh& mesh);

// Target density description. Uniform tracks equal cell volumes; Analytic
// uses a closed-form q(x) > 0, rescaled each evaluation so the target
// integral matches the integral of the initial density.
struct TargetSpec {
  enum class Kind { Uniform, Analytic };
  Kind kind = Kind::Uniform;
  Expression q;

  static TargetSpec uniform() { return {}; }
  static TargetSpec analytic(const std::string& expression) {
    TargetSpec s;
    s.kind = Kind::Analytic;
    s.q = Expression::parse(expression);
    return s;
  }
};

}  // namespace ptrack
