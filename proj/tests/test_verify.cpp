#include <doctest.h>

#include <cmath>
#include <memory>

#include "ptrack/meshgen.hpp"
#include "ptrack/verify.hpp"

using namespace ptrack;

namespace {

const CircleField smooth_field = [](const Eigen::Vector2d& p) {
  return Eigen::Vector2d(std::sin(2.0 * p.x() + p.y()), std::cos(p.y() - 0.3 * p.x()));
};

}  // namespace

TEST_CASE("circle closed forms") {
  SUBCASE("identity rescale target has zero derivative") {
    CircleOracle o{CircleOracle::Kind::Rescale, 1.0, {}};
    CirclePairing p = circle_closed_form(o, 256, smooth_field);
    CHECK(std::abs(p.normal) < 1e-14);
    CHECK(std::abs(p.tangential) < 1e-14);
    CirclePairing a = circle_assembled(o, 256, smooth_field);
    CHECK(std::abs(a.full()) < 1e-14);
  }
  SUBCASE("rotation by pi has no tangential part") {
    CircleOracle o{CircleOracle::Kind::Rotate, M_PI, {}};
    for (const CircleField& V : {smooth_field, CircleField([](const Eigen::Vector2d& p) {
                                   return Eigen::Vector2d(p.y(), p.x() * p.x());
                                 })}) {
      CHECK(std::abs(circle_closed_form(o, 512, V).tangential) < 1e-13);
      CHECK(std::abs(circle_assembled(o, 512, V).tangential) < 1e-13);
    }
  }
  SUBCASE("translation paired with the translation field integrates cos^2") {
    CircleOracle o{CircleOracle::Kind::Translate, 0.0, Eigen::Vector2d(1.0, 0.0)};
    CirclePairing p =
        circle_closed_form(o, 256, [](const Eigen::Vector2d&) { return Eigen::Vector2d(1, 0); });
    // the normal part integrates <n,z>^2 = cos^2, magnitude pi; it pairs
    // negatively because moving toward the target lowers the objective
    CHECK(std::abs(p.normal) == doctest::Approx(M_PI).epsilon(1e-12));
    CHECK(p.normal < 0.0);
    CHECK(std::abs(p.tangential) == doctest::Approx(M_PI).epsilon(1e-12));  // sin^2
  }
  SUBCASE("rescale has no tangential pairing, assembled included") {
    CircleOracle o{CircleOracle::Kind::Rescale, 1.7, {}};
    CirclePairing a = circle_assembled(o, 256, smooth_field);
    CHECK(std::abs(a.tangential) < 1e-13);
  }
}

TEST_CASE("assembled circle derivative converges at second order") {
  for (CircleOracle o : {CircleOracle{CircleOracle::Kind::Rescale, 1.7, {}},
                         CircleOracle{CircleOracle::Kind::Rotate, 0.8, {}},
                         CircleOracle{CircleOracle::Kind::Translate, 0.0, {0.6, -0.3}}}) {
    CirclePairing exact = circle_closed_form(o, 4096, smooth_field);
    double prev_err = -1.0;
    for (int segs : {64, 128, 256, 512}) {
      CirclePairing a = circle_assembled(o, segs, smooth_field);
      double err = std::abs(a.full() - exact.full());
      if (prev_err > 0.0) {
        double ratio = prev_err / err;
        CHECK(ratio > 3.5);
        CHECK(ratio < 4.5);
      }
      prev_err = err;
    }
    // 1024 segments match the closed form to one part in a thousand
    CirclePairing fine = circle_assembled(o, 1024, smooth_field);
    CHECK(std::abs(fine.full() - exact.full()) <
          1e-3 * std::max(std::abs(exact.full()), 1e-12));
  }
}

TEST_CASE("fd_check behaves as an oracle") {
  auto m = std::make_shared<SimplicialMesh>(meshgen::square_structured(4, 4));
  PreShapeState s = make_state(m);
  std::vector<Vec3> p = s.positions;
  for (int i = 0; i < m->n_vertices(); ++i)
    if (!m->vertex_on_boundary[i]) p[i] += Vec3(0.02 * std::sin(5 * p[i].y()), -0.02 * std::cos(4 * p[i].x()), 0);
  s.set_positions(p);

  SUBCASE("clean quadratic error decay") {
    FdReport r = fd_check(s, TargetSpec::uniform(), 8, 1e-1, 16, 2024);
    CHECK(r.max_best_error() < 1e-5);
    CHECK(r.median_slope() == doctest::Approx(2.0).epsilon(0.1));
  }
  SUBCASE("negated assembly is caught") {
    FdReport r = fd_check(s, TargetSpec::uniform(), 4, 1e-1, 16, 2024, /*negate=*/true);
    CHECK(r.max_best_error() > 0.5);
  }
  SUBCASE("exact solution: both sides vanish") {
    auto flat = std::make_shared<SimplicialMesh>(meshgen::square_structured(4, 4));
    PreShapeState exact = make_state(flat);
    FdReport r = fd_check(exact, TargetSpec::uniform(), 4, 1e-1, 20, 2025);
    for (const auto& d : r.directions) {
      CHECK(std::abs(d.pairing) < 1e-9);
      CHECK(d.best_error < 1e-9);  // absolute: the pairing is zero
    }
  }
}

TEST_CASE("audit on the identity sphere state") {
  auto m = std::make_shared<SimplicialMesh>(meshgen::sphere_uv(20, 10, Vec3(0.5, 0.5, 0.5), 0.3));
  PreShapeState s = make_state_uniform_gm(m);
  AuditReport a = audit(s, TargetSpec::analytic("1 + 0.5*sin(2*pi*x)"), 31337);
  CHECK(a.mass_defect < 1e-10);
  CHECK(a.decomposition_defect < 1e-10);
  CHECK(a.frame_defect < 1e-12);
  CHECK(a.has_nullity);
  CHECK(a.area_nullity < 0.1);  // resolution dependent, small on this mesh
  CHECK(a.seed == 31337);
}

TEST_CASE("audit on a codimension-zero mesh skips the surface-only defects") {
  auto m = std::make_shared<SimplicialMesh>(meshgen::square_delaunay(8, 6, 6, 91));
  PreShapeState s = make_state(m);
  AuditReport a = audit(s, TargetSpec::uniform(), 1);
  CHECK(a.mass_defect < 1e-10);
  CHECK(a.frame_defect < 1e-12);
  CHECK_FALSE(a.has_decomposition);
  CHECK_FALSE(a.has_nullity);
}
