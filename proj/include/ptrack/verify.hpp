#pragma once

#include <cstdint>
#include <functional>

#include "ptrack/derivative.hpp"
#include "ptrack/state.hpp"

namespace ptrack {

// ---- polygonal circle oracles -----------------------------------------------
//
// Closed-form derivative pairings for the embedding-tracking functional
// 1/2 integral |phi - phi_target|^2 ds on the unit circle with identity
// parameterization, for rescaled, rotated, and translated targets. The
// closed forms use exact analytic normals/tangents; the assembled version
// uses the polygon covector, so their difference isolates the polygonal
// quadrature error (second order in the segment count).

struct CircleOracle {
  enum class Kind { Rescale, Rotate, Translate };
  Kind kind = Kind::Rescale;
  double alpha = 1.0;                          // Rescale (> 0) / Rotate ([0, 2pi))
  Eigen::Vector2d z = Eigen::Vector2d::Zero();  // Translate
};

struct CirclePairing {
  double normal = 0.0;
  double tangential = 0.0;
  double full() const { return normal + tangential; }
};

using CircleField = std::function<Eigen::Vector2d(const Eigen::Vector2d&)>;

CirclePairing circle_closed_form(const CircleOracle& oracle, int segments, const CircleField& V);
CirclePairing circle_assembled(const CircleOracle& oracle, int segments, const CircleField& V);

// ---- finite-difference consistency -------------------------------------------

struct FdDirection {
  double pairing = 0.0;   // assembled directional derivative
  double best_error = 0.0;  // min over the h sweep, relative when pairing != 0
  double best_h = 0.0;
  double slope = 0.0;  // log-log slope of the error curve before rounding
  bool slope_valid = false;
};

struct FdReport {
  std::vector<FdDirection> directions;
  uint64_t seed = 0;
  double max_best_error() const;
  double median_slope() const;
};

// Central differences of the objective (with the target renormalization
// rebuilt inside each evaluation) against the assembled pairing, for random
// interior unit-L2 P1 directions.
FdReport fd_check(const PreShapeState& state, const TargetSpec& spec, int n_directions,
                  double h_max, int h_count, uint64_t seed, bool negate_assembly = false);

// Random P1 direction vanishing on the boundary, L2-normalized.
std::vector<Vec3> random_direction(const PreShapeState& state, uint64_t seed);

// ---- structural audits --------------------------------------------------------

struct AuditReport {
  uint64_t seed = 0;
  double mass_defect = 0.0;           // |sum rho vol - integral gm|
  double decomposition_defect = 0.0;  // relative, over random directions
  double frame_defect = 0.0;          // covector change under random frame rotations
  double area_nullity = 0.0;          // |<dA, tangential V>| over unit-L2 tangential fields
  bool has_decomposition = false;     // surfaces only
  bool has_nullity = false;
};

AuditReport audit(const PreShapeState& state, const TargetSpec& spec, uint64_t seed,
                  int n_directions = 20);

}  // namespace ptrack
