#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "bvy/testbench.hpp"

using namespace bvy;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

double line_integral(const std::function<double(double)>& g, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, a, b, 20, 1e-13);
}

Point central_difference(const ScalarField& f, const Point& x, double h = 1e-6) {
  Point g{};
  for (int a = 0; a < f.dim; ++a) {
    Point xp = x, xm = x;
    xp[a] += h;
    xm[a] -= h;
    g[a] = (f.eval(xp) - f.eval(xm)) / (2.0 * h);
  }
  return g;
}

std::vector<ScalarField> zoo() {
  return {make_bump(1, Point{0.3, 0, 0}, 0.8, 1.7),
          make_bump(2, Point{0.1, -0.2, 0}, 1.0, -0.6),
          make_bump(3, Point{0, 0, 0.4}, 1.2, 2.0),
          make_tensor_bump(2, Point{0.2, 0.1, 0}, Point{0.7, 1.1, 0}, 1.3),
          make_smooth_step(-0.5, 1.0),
          make_smooth_step(-1.0, 1.0, 0.3),
          dilate(make_bump(2, Point{0.5, 0.5, 0}, 1.0), 1.7),
          scale(make_bump(1, Point{}, 1.0), -3.0),
          add(make_bump(1, Point{-0.5, 0, 0}, 0.5), make_bump(1, Point{0.6, 0, 0}, 0.4, 2.0))};
}

}  // namespace

TEST_CASE("gradient matches central differences", "[testbench]") {
  std::mt19937_64 rng(11);
  for (const ScalarField& f : zoo()) {
    std::uniform_real_distribution<double> u(-1.2 * f.grad_support_radius, 1.2 * f.grad_support_radius);
    for (int k = 0; k < 200; ++k) {
      Point x{};
      for (int a = 0; a < f.dim; ++a) x[a] = u(rng);
      const Point g = f.grad(x), fd = central_difference(f, x);
      for (int a = 0; a < f.dim; ++a) CHECK_THAT(g[a], WithinAbs(fd[a], 1e-5 * (1.0 + f.grad_bound)));
    }
  }
}

TEST_CASE("certified bounds dominate sampled values", "[testbench]") {
  std::mt19937_64 rng(12);
  for (const ScalarField& f : zoo()) {
    std::uniform_real_distribution<double> u(-1.5 * f.grad_support_radius, 1.5 * f.grad_support_radius);
    for (int k = 0; k < 4000; ++k) {
      Point x{};
      for (int a = 0; a < f.dim; ++a) x[a] = u(rng);
      CHECK(std::abs(f.eval(x)) <= f.sup_abs * (1.0 + 1e-12));
      CHECK(f.grad_norm(x) <= f.grad_bound * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("gradient vanishes and field is constant outside the support radius", "[testbench]") {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> nd;
  for (const ScalarField& f : zoo()) {
    double far_value = 0.0;
    for (int k = 0; k < 100; ++k) {
      Point d{};
      for (int a = 0; a < f.dim; ++a) d[a] = nd(rng);
      d = (1.0 / norm(d)) * d;
      const double r = f.grad_support_radius * (1.0 + 1e-9) + std::abs(nd(rng)) * 3.0;
      const Point x = r * d;
      CHECK(f.grad_norm(x) == 0.0);
      if (f.dim == 1) {
        // both half-lines are constant, possibly with different values
        const Point y = (r + 5.0) * d;
        CHECK(f.eval(x) == f.eval(y));
      } else {
        if (k == 0) far_value = f.eval(x);
        CHECK(f.eval(x) == far_value);
      }
    }
  }
}

TEST_CASE("bump peak and total variation", "[testbench]") {
  const double A = 1.7;
  const ScalarField f = make_bump(1, Point{0.3, 0, 0}, 0.8, A);
  CHECK_THAT(f.eval(Point{0.3, 0, 0}), WithinRel(A / std::exp(1.0), 1e-15));
  CHECK_THAT(f.sup_abs, WithinRel(A / std::exp(1.0), 1e-15));
  // rises from 0 to A/e and back: total variation 2A/e
  const double tv = line_integral([&](double t) { return f.grad_norm(Point{t, 0, 0}); }, -0.5, 0.3) +
                    line_integral([&](double t) { return f.grad_norm(Point{t, 0, 0}); }, 0.3, 1.1);
  CHECK_THAT(tv, WithinRel(2.0 * A / std::exp(1.0), 1e-10));
}

TEST_CASE("smooth step limits, midpoint and unit rise", "[testbench]") {
  for (double gap : {0.0, 0.2}) {
    const ScalarField f = make_smooth_step(-1.0, 2.0, gap);
    CHECK(f.eval(Point{-1.0, 0, 0}) == 0.0);
    CHECK(f.eval(Point{-7.0, 0, 0}) == 0.0);
    CHECK(f.eval(Point{2.0, 0, 0}) == 1.0);
    CHECK(f.eval(Point{9.0, 0, 0}) == 1.0);
    CHECK_THAT(f.eval(Point{0.5, 0, 0}), WithinAbs(0.5, 1e-14));
    const double rise = line_integral([&](double t) { return f.grad(Point{t, 0, 0})[0]; }, -1.0, 2.0);
    CHECK_THAT(rise, WithinRel(1.0, 1e-11));
    // odd symmetry about the midpoint
    for (double t : {0.1, 0.4, 0.77})
      CHECK_THAT(f.eval(Point{0.5 + t, 0, 0}) + f.eval(Point{0.5 - t, 0, 0}), WithinAbs(1.0, 1e-14));
  }
}

TEST_CASE("dilation preserves total variation and scales mass", "[testbench]") {
  const ScalarField f = make_bump(1, Point{0.2, 0, 0}, 1.0);
  const double mass = line_integral([&](double t) { return f.eval(Point{t, 0, 0}); }, -0.8, 1.2);
  const double tv = line_integral([&](double t) { return f.grad_norm(Point{t, 0, 0}); }, -0.8, 1.2);
  for (double delta : {0.5, 1.5, 3.0}) {
    const ScalarField g = dilate(f, delta);
    const double R = g.grad_support_radius;
    CHECK_THAT(g.grad_bound, WithinRel(f.grad_bound / delta, 1e-15));
    CHECK_THAT(line_integral([&](double t) { return g.eval(Point{t, 0, 0}); }, -R, R),
               WithinRel(delta * mass, 1e-9));
    CHECK_THAT(line_integral([&](double t) { return g.grad_norm(Point{t, 0, 0}); }, -R, 0.2 * delta) +
                   line_integral([&](double t) { return g.grad_norm(Point{t, 0, 0}); }, 0.2 * delta, R),
               WithinRel(tv, 1e-9));
  }
}

TEST_CASE("scale and add combine values and bounds", "[testbench]") {
  const ScalarField f = make_bump(2, Point{0.1, 0.2, 0}, 0.9, 1.1);
  const ScalarField h = make_tensor_bump(2, Point{-0.3, 0, 0}, Point{0.5, 0.6, 0}, 0.4);
  const ScalarField s = scale(f, -2.5);
  const ScalarField t = add(f, h);
  const Point x{0.2, 0.1, 0};
  CHECK(s.eval(x) == -2.5 * f.eval(x));
  CHECK(t.eval(x) == f.eval(x) + h.eval(x));
  CHECK(s.sup_abs == 2.5 * f.sup_abs);
  CHECK(t.grad_bound == f.grad_bound + h.grad_bound);
  CHECK(t.grad_support_radius == std::max(f.grad_support_radius, h.grad_support_radius));
  CHECK(t.class_tag == SmoothnessClass::smooth_compact);
  CHECK(add(make_bump(1, Point{}, 1.0), make_smooth_step(-1, 1)).class_tag ==
        SmoothnessClass::smooth_grad_compact);
  CHECK_THROWS_AS(add(f, make_bump(1, Point{}, 1.0)), contract_error);
}

TEST_CASE("factory builds fields by name", "[testbench]") {
  const ScalarField b = make_field("bump", 2, {{"center", {0.5, -0.5}}, {"radius", {2.0}}, {"amplitude", {3.0}}});
  CHECK_THAT(b.eval(Point{0.5, -0.5, 0}), WithinRel(3.0 / std::exp(1.0), 1e-15));
  const ScalarField s = make_field("smooth_step", 1, {{"a", {0.0}}, {"b", {2.0}}});
  CHECK(s.class_tag == SmoothnessClass::smooth_grad_compact);
  CHECK_THAT(s.eval(Point{1.0, 0, 0}), WithinAbs(0.5, 1e-14));
  CHECK_THROWS_AS(make_field("smooth_step", 2, {}), contract_error);
  CHECK_THROWS_AS(make_field("nope", 1, {}), contract_error);
  CHECK_THROWS_AS(make_field("bump", 2, {{"center", {1, 2, 3}}}), contract_error);
  CHECK_THROWS_AS(make_bump(4, Point{}, 1.0), contract_error);
}
