#include "ptrack/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "ptrack/metric.hpp"

namespace ptrack {

namespace {

using Vec2 = Eigen::Vector2d;

Vec2 circle_target(const CircleOracle& o, const Vec2& p) {
  switch (o.kind) {
    case CircleOracle::Kind::Rescale: return o.alpha * p;
    case CircleOracle::Kind::Rotate: {
      double c = std::cos(o.alpha), s = std::sin(o.alpha);
      return Vec2(c * p.x() - s * p.y(), s * p.x() + c * p.y());
    }
    case CircleOracle::Kind::Translate: return p + o.z;
  }
  return p;
}

void check_oracle(const CircleOracle& o) {
  if (o.kind == CircleOracle::Kind::Rescale && !(o.alpha > 0.0))
    throw std::runtime_error("circle oracle: rescale factor must be positive");
  if (o.kind == CircleOracle::Kind::Rotate && (o.alpha < 0.0 || o.alpha >= 2.0 * M_PI))
    throw std::runtime_error("circle oracle: rotation angle outside [0, 2pi)");
}

}  // namespace

CirclePairing circle_closed_form(const CircleOracle& oracle, int segments, const CircleField& V) {
  check_oracle(oracle);
  // Periodic trapezoid rule on the exact circle, analytic n and tau. The
  // integrands come from the derivative integral <phi - target, V> of the
  // embedding-tracking functional: the rescale family gets (1-alpha)<n,V>,
  // the rotation family (1-cos a)<n,V> - sin(a)<tau,V>, the translation
  // family -<n,z><n,V> - <tau,z><tau,V>.
  CirclePairing out;
  const double w = 2.0 * M_PI / segments;
  for (int i = 0; i < segments; ++i) {
    double theta = 2.0 * M_PI * i / segments;
    Vec2 n(std::cos(theta), std::sin(theta));
    Vec2 tau(-n.y(), n.x());
    Vec2 v = V(n);  // point on the unit circle is its own normal
    switch (oracle.kind) {
      case CircleOracle::Kind::Rescale:
        out.normal += w * (1.0 - oracle.alpha) * n.dot(v);
        break;
      case CircleOracle::Kind::Rotate:
        out.normal += w * (1.0 - std::cos(oracle.alpha)) * n.dot(v);
        out.tangential -= w * std::sin(oracle.alpha) * tau.dot(v);
        break;
      case CircleOracle::Kind::Translate:
        out.normal -= w * n.dot(oracle.z) * n.dot(v);
        out.tangential -= w * tau.dot(oracle.z) * tau.dot(v);
        break;
    }
  }
  return out;
}

CirclePairing circle_assembled(const CircleOracle& oracle, int segments, const CircleField& V) {
  check_oracle(oracle);
  // polygon covector d_i = w_i (p_i - target(p_i)) with lumped chord weights;
  // split against the exact normals/tangents
  std::vector<Vec2> pts(segments);
  for (int i = 0; i < segments; ++i) {
    double theta = 2.0 * M_PI * i / segments;
    pts[i] = Vec2(std::cos(theta), std::sin(theta));
  }
  CirclePairing out;
  for (int i = 0; i < segments; ++i) {
    const Vec2& p = pts[i];
    double chord_prev = (p - pts[(i + segments - 1) % segments]).norm();
    double chord_next = (pts[(i + 1) % segments] - p).norm();
    double w = 0.5 * (chord_prev + chord_next);
    Vec2 d = w * (p - circle_target(oracle, p));
    Vec2 n = p;  // unit circle
    Vec2 tau(-n.y(), n.x());
    Vec2 v = V(p);
    out.normal += d.dot(n) * n.dot(v);
    out.tangential += d.dot(tau) * tau.dot(v);
  }
  return out;
}

std::vector<Vec3> random_direction(const PreShapeState& state, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const SimplicialMesh& M = *state.mesh;
  std::vector<Vec3> V(M.n_vertices(), Vec3::Zero());
  for (int i = 0; i < M.n_vertices(); ++i) {
    if (M.vertex_on_boundary[i]) continue;
    for (int a = 0; a < M.dim_ambient; ++a) V[i][a] = gauss(rng);
  }
  double norm = l2_norm_nodal(M, state.positions, V);
  if (norm <= 0.0) throw std::runtime_error("random_direction: degenerate direction");
  for (auto& v : V) v /= norm;
  return V;
}

double FdReport::max_best_error() const {
  double m = 0.0;
  for (const auto& d : directions) m = std::max(m, d.best_error);
  return m;
}

double FdReport::median_slope() const {
  std::vector<double> slopes;
  for (const auto& d : directions)
    if (d.slope_valid) slopes.push_back(d.slope);
  if (slopes.empty()) return 0.0;
  std::sort(slopes.begin(), slopes.end());
  return slopes[slopes.size() / 2];
}

FdReport fd_check(const PreShapeState& state, const TargetSpec& spec, int n_directions,
                  double h_max, int h_count, uint64_t seed, bool negate_assembly) {
  FdReport report;
  report.seed = seed;
  DerivativeCovector d = assemble_derivative(state, spec, Component::Full);
  if (negate_assembly)
    for (auto& v : d.d) v = -v;

  for (int k = 0; k < n_directions; ++k) {
    std::vector<Vec3> V = random_direction(state, seed + 1000 * k);
    double pairing = pair_covector(d, V);

    FdDirection dir;
    dir.pairing = pairing;
    std::vector<double> hs, errs;
    double h = h_max;
    for (int j = 0; j < h_count; ++j, h *= 0.5) {
      std::vector<Vec3> plus = state.positions, minus = state.positions;
      for (int i = 0; i < state.n_vertices(); ++i) {
        plus[i] += h * V[i];
        minus[i] -= h * V[i];
      }
      double jp = objective_at(state, spec, plus);
      double jm = objective_at(state, spec, minus);
      if (!std::isfinite(jp) || !std::isfinite(jm)) continue;
      double fd = (jp - jm) / (2.0 * h);
      double err = std::abs(fd - pairing);
      if (std::abs(pairing) > 1e-14) err /= std::abs(pairing);
      hs.push_back(h);
      errs.push_back(err);
    }
    if (errs.empty()) throw std::runtime_error("fd_check: objective not evaluable on the sweep");
    size_t best = 0;
    for (size_t j = 1; j < errs.size(); ++j)
      if (errs[j] < errs[best]) best = j;
    dir.best_error = errs[best];
    dir.best_h = hs[best];

    // slope fit on the clean part of the curve, two octaves above the floor
    if (best >= 3) {
      size_t hi = best - 2;
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      int n = 0;
      for (size_t j = 0; j <= hi; ++j) {
        if (errs[j] <= 0.0) continue;
        double x = std::log(hs[j]), y = std::log(errs[j]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
      }
      if (n >= 3) {
        dir.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        dir.slope_valid = true;
      }
    }
    report.directions.push_back(dir);
  }
  return report;
}

AuditReport audit(const PreShapeState& state, const TargetSpec& spec, uint64_t seed,
                  int n_directions) {
  AuditReport report;
  report.seed = seed;
  TargetEval te = evaluate_target(spec, state);

  // discrete normalization: sum rho * vol == integral of the initial density
  double mass = 0.0;
  for (int ci = 0; ci < state.n_cells(); ++ci)
    mass += (state.gm_cell[ci] / state.det_tau[ci]) * state.vol_cur[ci];
  report.mass_defect = std::abs(mass - state.gm_integral);

  DerivativeCovector full = assemble_derivative(state, te, Component::Full);

  if (state.is_surface()) {
    DerivativeCovector tang = assemble_derivative(state, te, Component::Tangential);
    DerivativeCovector norm = assemble_derivative(state, te, Component::Normal);
    double worst = 0.0;
    for (int k = 0; k < n_directions; ++k) {
      std::vector<Vec3> V = random_direction(state, seed + 7919 * (k + 1));
      double pf = pair_covector(full, V);
      double pt = pair_covector(tang, V);
      double pn = pair_covector(norm, V);
      double denom = std::max({std::abs(pf), std::abs(pt) + std::abs(pn), 1e-30});
      worst = std::max(worst, std::abs(pf - pt - pn) / denom);
    }
    report.decomposition_defect = worst;
    report.has_decomposition = true;
  }

  // frame independence: rotate every cell frame (reference and current,
  // independently) and reassemble via the frame determinants
  {
    PreShapeState rotated = state;
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
    auto rotate_frame = [&](std::array<Vec3, 3>& f, int dim, const Vec3& axis_hint) {
      if (dim == 2) {
        double a = angle(rng);
        Vec3 f0 = f[0], f1 = f[1];
        f[0] = std::cos(a) * f0 + std::sin(a) * f1;
        f[1] = -std::sin(a) * f0 + std::cos(a) * f1;
      } else {
        Eigen::AngleAxisd rot(angle(rng), axis_hint.normalized());
        for (int k = 0; k < 3; ++k) f[k] = rot * f[k];
        // a second rotation about a different axis for generality
        Eigen::AngleAxisd rot2(angle(rng), (axis_hint + Vec3(0.3, -0.7, 0.51)).normalized());
        for (int k = 0; k < 3; ++k) f[k] = rot2 * f[k];
      }
    };
    for (int ci = 0; ci < state.n_cells(); ++ci) {
      rotate_frame(rotated.frame_ref[ci], state.mesh->dim_cell, Vec3(1, 0.2, 0.4));
      rotate_frame(rotated.frame_cur[ci], state.mesh->dim_cell, Vec3(0.2, 1, 0.1));
    }
    rotated.recompute_det_from_frames();
    DerivativeCovector rotated_full = assemble_derivative(rotated, spec, Component::Full);
    double worst = 0.0, scale = std::max(full.max_norm(), 1e-30);
    for (int i = 0; i < state.n_vertices(); ++i)
      worst = std::max(worst, (rotated_full.d[i] - full.d[i]).norm());
    report.frame_defect = worst / scale;
  }

  // shape functionality of the area functional: its derivative must not see
  // tangential directions (up to the O(h^2) projection consistency)
  if (state.is_surface()) {
    DerivativeCovector da = area_derivative(state);
    double worst = 0.0;
    for (int k = 0; k < n_directions; ++k) {
      std::vector<Vec3> V = random_direction(state, seed + 104729 * (k + 1));
      for (int i = 0; i < state.n_vertices(); ++i) {
        const Vec3& n = state.vertex_normal_cur[i];
        V[i] -= V[i].dot(n) * n;
      }
      double norm = l2_norm_nodal(*state.mesh, state.positions, V);
      if (norm <= 0.0) continue;
      for (auto& v : V) v /= norm;
      worst = std::max(worst, std::abs(pair_covector(da, V)));
    }
    report.area_nullity = worst;
    report.has_nullity = true;
  }
  return report;
}

}  // namespace ptrack
