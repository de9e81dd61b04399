#pragma once

#include <memory>
#include <vector>

#include "ptrack/fields.hpp"
#include "ptrack/mesh.hpp"

namespace ptrack {

// Reference configuration plus current vertex positions, with the per-cell
// geometric quantities the tracking functional needs. Boundary vertices of a
// valid state coincide with the reference positions; set_positions enforces
// this unless told not to (oracle tests move boundary vertices on purpose).
//
// The covariant determinant per cell is computed from the Gram-Schmidt
// frames of the reference and current cell; for these affine simplex maps it
// equals the volume ratio cur/ref, signed against the reference orientation
// for surface cells.
struct PreShapeState {
  std::shared_ptr<const SimplicialMesh> mesh;  // reference configuration
  std::vector<Vec3> positions;                 // current configuration
  NodalField gm;                               // initial density on the reference mesh
  double gm_integral = 0.0;                    // P1 integral of gm over the reference

  // reference caches (fixed)
  std::vector<double> vol_ref;
  std::vector<double> gm_cell;  // vertex-average of gm per cell
  std::vector<std::array<Vec3, 3>> frame_ref;
  std::vector<Vec3> normal_ref;  // surface only

  // current caches (refreshed after position changes)
  std::vector<double> vol_cur;
  std::vector<double> det_tau;
  std::vector<Vec3> centroid_cur;
  std::vector<std::array<Vec3, 3>> frame_cur;
  std::vector<Vec3> normal_cur;                 // surface only
  std::vector<std::array<Vec3, 4>> hatgrad_cur;
  std::vector<Vec3> vertex_normal_cur;          // surface only

  bool is_surface() const { return mesh->is_surface(); }
  int n_vertices() const { return mesh->n_vertices(); }
  int n_cells() const { return mesh->n_cells(); }

  void set_positions(const std::vector<Vec3>& p, bool enforce_boundary = true);
  // Recompute the current-configuration caches, including det_tau from the
  // stored frames. Does not throw on inverted cells; det_tau goes negative.
  void refresh();
  // Recompute det_tau only, from (possibly externally replaced) frames.
  void recompute_det_from_frames();

  int first_inverted_cell() const;  // -1 if none
};

PreShapeState make_state(std::shared_ptr<const SimplicialMesh> mesh, NodalField gm);
inline PreShapeState make_state(std::shared_ptr<const SimplicialMesh> mesh) {
  NodalField gm = estimate_gm(*mesh);
  return make_state(std::move(mesh), std::move(gm));
}
// gm identically 1 / |M|, which satisfies the unit-integral normalization.
PreShapeState make_state_uniform_gm(std::shared_ptr<const SimplicialMesh> mesh);

// Node density of the current configuration: per cell the vertex-averaged
// initial density divided by the covariant determinant (volume ratio).
// Throws on inverted cells, naming the first one.
CellField current_density(const PreShapeState& state);

// Target evaluation at the current configuration: values, normalization
// data, and the centroid samples of q and grad q the derivative needs.
struct TargetEval {
  CellField f;
  double q_integral = 0.0;  // current-configuration quadrature of q
  std::vector<double> q_centroid;
  std::vector<Vec3> gradq_centroid;
};

TargetEval evaluate_target(const TargetSpec& spec, const PreShapeState& state);
CellField build_target(const TargetSpec& spec, const PreShapeState& state);

}  // namespace ptrack
