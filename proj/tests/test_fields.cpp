#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "ptrack/meshgen.hpp"
#include "ptrack/state.hpp"

using namespace ptrack;

namespace {

// triangles (A,B,C) and (A,D,B) sharing edge AB, areas 0.25 and 0.75
std::shared_ptr<SimplicialMesh> lopsided_pair() {
  auto m = std::make_shared<SimplicialMesh>();
  m->dim_cell = 2;
  m->dim_ambient = 2;
  m->vertices = {{0, 0, 0}, {1, 0, 0}, {0.5, 0.5, 0}, {0.5, -1.5, 0}};
  m->cells = {{0, 1, 2, -1}, {0, 3, 1, -1}};
  m->finalize();
  return m;
}

std::shared_ptr<SimplicialMesh> unit_square_diag() {
  auto m = std::make_shared<SimplicialMesh>();
  m->dim_cell = 2;
  m->dim_ambient = 2;
  m->vertices = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
  m->cells = {{0, 1, 2, -1}, {0, 2, 3, -1}};
  m->finalize();
  return m;
}

}  // namespace

TEST_CASE("estimate_gm") {
  SUBCASE("uniform structured mesh gives a constant field") {
    auto m = std::make_shared<SimplicialMesh>(meshgen::square_structured(8, 8));
    NodalField g = estimate_gm(*m);
    for (double v : g.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));  // 1/total_volume
    CHECK(integrate_nodal(*m, g) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("two-triangle oracle, hand quadrature") {
    auto m = lopsided_pair();
    NodalField g = estimate_gm(*m);
    // raw averages of inverse volumes: A,B share both cells -> (4 + 4/3)/2 =
    // 8/3, C -> 4, D -> 4/3; the P1 integral of those values is
    // 0.25*(8/3+8/3+4)/3 + 0.75*(8/3+8/3+4/3)/3 = 22/9
    const double scale = 9.0 / 22.0;
    CHECK(g.values[0] == doctest::Approx(8.0 / 3.0 * scale).epsilon(1e-14));
    CHECK(g.values[1] == doctest::Approx(8.0 / 3.0 * scale).epsilon(1e-14));
    CHECK(g.values[2] == doctest::Approx(4.0 * scale).epsilon(1e-14));
    CHECK(g.values[3] == doctest::Approx(4.0 / 3.0 * scale).epsilon(1e-14));
    CHECK(integrate_nodal(*m, g) == doctest::Approx(1.0).epsilon(1e-13));
  }
  SUBCASE("any mesh integrates to one and stays positive") {
    auto m = std::make_shared<SimplicialMesh>(meshgen::square_delaunay(8, 6, 6, 5));
    NodalField g = estimate_gm(*m);
    CHECK(integrate_nodal(*m, g) == doctest::Approx(1.0).epsilon(1e-12));
    for (double v : g.values) CHECK(v > 0.0);
  }
}

TEST_CASE("current_density") {
  SUBCASE("identity configuration reproduces the cell-averaged density") {
    auto m = std::make_shared<SimplicialMesh>(meshgen::square_delaunay(8, 6, 6, 6));
    PreShapeState s = make_state(m);
    CellField rho = current_density(s);
    for (int ci = 0; ci < s.n_cells(); ++ci)
      CHECK(rho.values[ci] == doctest::Approx(s.gm_cell[ci]).epsilon(1e-14));
  }
  SUBCASE("scaling a free surface by two divides the density by four") {
    auto m = std::make_shared<SimplicialMesh>(meshgen::sphere_uv(16, 8, Vec3(0, 0, 0), 1.0));
    PreShapeState s = make_state_uniform_gm(m);
    CellField before = current_density(s);
    std::vector<Vec3> scaled = s.positions;
    for (auto& p : scaled) p *= 2.0;
    s.set_positions(scaled);
    CellField after = current_density(s);
    for (int ci = 0; ci < s.n_cells(); ++ci)
      CHECK(after.values[ci] == doctest::Approx(before.values[ci] / 4.0).epsilon(1e-12));
  }
  SUBCASE("volume-ratio oracle on the diagonal square") {
    auto m = unit_square_diag();
    NodalField gm;
    gm.values = {1, 1, 1, 1};
    PreShapeState s = make_state(m, gm);
    CellField before = current_density(s);
    // move the shared diagonal vertex (1,1): cells (0,1,2) and (0,2,3) get
    // volumes 1/6 and 3/2, i.e. ratios 1/3 and 3
    std::vector<Vec3> moved = s.positions;
    moved[2] = Vec3(3.0, 1.0 / 3.0, 0.0);
    s.set_positions(moved, /*enforce_boundary=*/false);
    CellField after = current_density(s);
    CHECK(after.values[0] == doctest::Approx(3.0 * before.values[0]).epsilon(1e-13));
    CHECK(after.values[1] == doctest::Approx(before.values[1] / 3.0).epsilon(1e-13));
  }
  SUBCASE("inverted cell is a hard error naming the cell") {
    auto m = unit_square_diag();
    PreShapeState s = make_state(m);
    std::vector<Vec3> moved = s.positions;
    moved[2] = Vec3(-1.0, -1.0, 0.0);  // flips cell 0
    s.set_positions(moved, /*enforce_boundary=*/false);
    CHECK_THROWS_WITH_AS(current_density(s), doctest::Contains("cell 0"), std::runtime_error);
  }
}

TEST_CASE("build_target") {
  SUBCASE("uniform target on the unit square is the constant one") {
    PreShapeState s = make_state(unit_square_diag());
    CellField f = build_target(TargetSpec::uniform(), s);
    for (double v : f.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-13));
  }
  SUBCASE("constant analytic target equals the uniform target") {
    auto m = std::make_shared<SimplicialMesh>(meshgen::square_delaunay(8, 6, 6, 7));
    PreShapeState s = make_state(m);
    CellField uni = build_target(TargetSpec::uniform(), s);
    CellField seven = build_target(TargetSpec::analytic("7"), s);
    for (int ci = 0; ci < s.n_cells(); ++ci)
      CHECK(seven.values[ci] == doctest::Approx(uni.values[ci]).epsilon(1e-13));
  }
  SUBCASE("positive rescaling of q leaves the target invariant") {
    auto m = std::make_shared<SimplicialMesh>(meshgen::sphere_uv(16, 8, Vec3(0.5, 0.5, 0.5), 0.3));
    PreShapeState s = make_state_uniform_gm(m);
    CellField a = build_target(TargetSpec::analytic("1 + 0.5*sin(2*pi*x)"), s);
    CellField b = build_target(TargetSpec::analytic("13*(1 + 0.5*sin(2*pi*x))"), s);
    for (int ci = 0; ci < s.n_cells(); ++ci)
      CHECK(b.values[ci] == doctest::Approx(a.values[ci]).epsilon(1e-12));
  }
  SUBCASE("sphere target of the third experiment is mean one by symmetry") {
    auto m = std::make_shared<SimplicialMesh>(meshgen::sphere_uv(40, 20, Vec3(0.5, 0.5, 0.5), 0.3));
    PreShapeState s = make_state_uniform_gm(m);
    TargetEval te = evaluate_target(TargetSpec::analytic("1 + 0.5*sin(10*2*pi*x)"), s);
    double area = 0.0;
    for (int ci = 0; ci < s.n_cells(); ++ci) area += s.vol_cur[ci];
    CHECK(te.q_integral / area == doctest::Approx(1.0).epsilon(1e-3));
  }
  SUBCASE("normalization: the target mass matches the initial density mass") {
    auto m = std::make_shared<SimplicialMesh>(meshgen::square_delaunay(8, 6, 6, 8));
    PreShapeState s = make_state(m);
    TargetEval te = evaluate_target(TargetSpec::analytic("2 + cos(2*pi*x)*cos(2*pi*y)"), s);
    double mass = 0.0;
    for (int ci = 0; ci < s.n_cells(); ++ci) mass += te.f.values[ci] * s.vol_cur[ci];
    CHECK(mass == doctest::Approx(s.gm_integral).epsilon(1e-12));
  }
  SUBCASE("nonpositive q sample is rejected") {
    PreShapeState s = make_state(unit_square_diag());
    CHECK_THROWS(build_target(TargetSpec::analytic("x - 10"), s));
  }
}

TEST_CASE("discrete mass conservation under interior motion") {
  auto m = std::make_shared<SimplicialMesh>(meshgen::square_delaunay(8, 6, 6, 9));
  PreShapeState s = make_state(m);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<Vec3> p = m->vertices;
    for (int i = 0; i < m->n_vertices(); ++i) {
      if (m->vertex_on_boundary[i]) continue;
      p[i] += 0.02 * Vec3(u(rng), u(rng), 0.0);
    }
    s.set_positions(p);
    CellField rho = current_density(s);
    double mass = 0.0;
    for (int ci = 0; ci < s.n_cells(); ++ci) mass += rho.values[ci] * s.vol_cur[ci];
    CHECK(std::abs(mass - s.gm_integral) < 1e-10);
  }
}
