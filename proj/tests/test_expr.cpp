#include <doctest.h>

#include <cmath>

#include "ptrack/expr.hpp"

using namespace ptrack;
using Eigen::Vector3d;

TEST_CASE("expression evaluation") {
  CHECK(Expression::parse("1 + 2*3").eval(Vector3d::Zero()) == doctest::Approx(7.0));
  CHECK(Expression::parse("sin(pi/2)").eval(Vector3d::Zero()) == doctest::Approx(1.0));
  CHECK(Expression::parse("2^3^2").eval(Vector3d::Zero()) == doctest::Approx(512.0));  // right assoc
  CHECK(Expression::parse("-x^2").eval(Vector3d(3, 0, 0)) == doctest::Approx(-9.0));
  CHECK(Expression::parse("exp(0) + cos(0)").eval(Vector3d::Zero()) == doctest::Approx(2.0));

  Vector3d p(0.3, 0.7, 0.0);
  double expect = 2.0 + std::cos(5.0 * 2.0 * M_PI * (std::pow(p.x() - 0.35, 2) + 2.0 * std::pow(p.y() - 0.4, 2)));
  CHECK(Expression::parse("2 + cos(5*2*pi*((x-0.35)^2 + 2*(y-0.4)^2))").eval(p) ==
        doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("expression gradient matches finite differences") {
  auto e = Expression::parse("sin(2*x + y) * exp(-z) + x^3 / (1 + y^2)");
  Vector3d p(0.4, -0.8, 0.25);
  Vector3d g = e.gradient(p);
  const double h = 1e-6;
  for (int k = 0; k < 3; ++k) {
    Vector3d lo = p, hi = p;
    lo[k] -= h;
    hi[k] += h;
    double fd = (e.eval(hi) - e.eval(lo)) / (2 * h);
    CHECK(g[k] == doctest::Approx(fd).epsilon(1e-7));
  }
}

TEST_CASE("expression parse errors") {
  CHECK_THROWS(Expression::parse("foo(x)"));
  CHECK_THROWS(Expression::parse("1 + "));
  CHECK_THROWS(Expression::parse("x 1"));
  CHECK_THROWS(Expression::parse("(x"));
}
