#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "bvy/geometry.hpp"

using namespace bvy;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// f = m * clamp(x_1, -c, c) inside the ball of radius c, zero outside it.
// Linear around the origin, constant past |x| = c.
ScalarField clamped_linear(int dim, double m, double c, double lip_slack = 1.0) {
  ScalarField f;
  f.dim = dim;
  f.eval = [=](const Point& x) { return norm(x) <= c ? m * x[0] : 0.0; };
  f.grad = [=](const Point& x) { return norm(x) <= c ? Point{m, 0, 0} : Point{}; };
  f.grad_support_radius = c;
  f.sup_abs = std::abs(m) * c;
  f.grad_bound = std::abs(m) * lip_slack;
  return f;
}

// Independent ray measure: dense geometric sampling of the level-set
// indicator, exact kernel mass on every sub-interval whose midpoint is in.
double brute_ray_mass(const ScalarField& f, const Point& x, const Point& w, double lambda, double e,
                      double gamma, double r_hi) {
  const double fx = f.eval(x);
  const int n = 600000;
  const double r_lo = r_hi * 1e-20;
  const double ratio = std::pow(r_hi / r_lo, 1.0 / n);
  double s = 0.0, a = r_lo;
  for (int k = 0; k < n; ++k) {
    const double b = a * ratio;
    const double m = std::sqrt(a * b);
    if (std::abs(fx - f.eval(x + m * w)) > lambda * std::pow(m, e))
      s += (std::pow(b, gamma) - std::pow(a, gamma)) / gamma;
    a = b;
  }
  return s;
}

Cube containing_cube(int dim, int j, const Point& x, const Point& alpha) {
  const double side = std::ldexp(1.0, j);
  const double sign = (j % 2 == 0) ? 1.0 : -1.0;
  LatticeIndex k{};
  for (int i = 0; i < dim; ++i)
    k[i] = static_cast<long long>(std::ceil(x[i] / side - sign * alpha[i])) - 1;
  return adjacent_dyadic_cube(dim, j, k, alpha);
}

}  // namespace

TEST_CASE("kappa closed forms", "[geometry]") {
  for (double q : {0.5, 1.0, 2.0, 3.7}) CHECK_THAT(kappa(q, 1), WithinRel(2.0, 1e-14));
  CHECK_THAT(kappa(1.0, 2), WithinRel(4.0, 1e-14));
  CHECK_THAT(kappa(2.0, 2), WithinRel(M_PI, 1e-14));
  CHECK_THAT(kappa(1.0, 3), WithinRel(2.0 * M_PI, 1e-14));
  CHECK_THAT(kappa(2.0, 3), WithinRel(4.0 * M_PI / 3.0, 1e-14));
  CHECK_THAT(kappa(4.0, 2), WithinRel(3.0 * M_PI / 4.0, 1e-14));
  CHECK_THROWS_AS(kappa(0.0, 2), contract_error);
}

TEST_CASE("sphere quadrature weights and moments", "[geometry]") {
  for (int n : {1, 2, 3}) {
    const DirectionSet d = sphere_quadrature(n, 400);
    double total = 0.0;
    for (double w : d.weights) total += w;
    CHECK_THAT(total, WithinRel(sphere_measure(n), 1e-13));
    for (const Point& w : d.directions) CHECK_THAT(norm(w), WithinAbs(1.0, 1e-14));
  }
  // equispaced angles integrate trigonometric polynomials exactly
  const DirectionSet c = sphere_quadrature(2, 64);
  CHECK_THAT(c.integrate([](const Point& w) { return w[0] * w[0]; }), WithinRel(kappa(2.0, 2), 1e-13));
  CHECK_THAT(c.integrate([](const Point& w) { return std::pow(w[1], 4); }), WithinRel(kappa(4.0, 2), 1e-13));
  CHECK_THAT(c.integrate([](const Point& w) { return std::abs(w[0]); }), WithinRel(kappa(1.0, 2), 1e-3));
  const DirectionSet s = sphere_quadrature(3, 4000);
  CHECK_THAT(s.integrate([](const Point& w) { return w[2] * w[2]; }), WithinRel(kappa(2.0, 3), 1e-3));
  CHECK_THAT(s.integrate([](const Point& w) { return std::abs(w[0]); }), WithinRel(kappa(1.0, 3), 1e-3));
  CHECK_THROWS_AS(sphere_quadrature(4, 10), contract_error);
}

TEST_CASE("radial kernel integral of explicit intervals", "[geometry]") {
  RayIntervals r;
  r.intervals = {{1.0, 2.0}, {3.0, 4.0}};
  CHECK_THAT(radial_kernel_integral(r, 1.0), WithinRel(2.0, 1e-15));
  CHECK_THAT(radial_kernel_integral(r, 2.0), WithinRel((4.0 - 1.0 + 16.0 - 9.0) / 2.0, 1e-15));
  CHECK_THAT(radial_kernel_integral(r, -1.0), WithinRel(0.5 + 1.0 / 12.0, 1e-14));
  RayIntervals tail;
  tail.intervals = {{2.0, kInf}};
  CHECK_THAT(radial_kernel_integral(tail, -2.0), WithinRel(0.125, 1e-15));
  CHECK_THROWS_AS(radial_kernel_integral(tail, 1.0), contract_error);
  RayIntervals origin;
  origin.intervals = {{0.0, 1.0}};
  CHECK_THROWS_AS(radial_kernel_integral(origin, -0.5), contract_error);
  CHECK_THAT(radial_kernel_integral(origin, 0.5), WithinRel(2.0, 1e-15));
}

TEST_CASE("ray solver on a clamped linear field", "[geometry]") {
  // |m r| > lambda r^2 exactly for r < m / lambda while the ray stays linear
  const double m = 1.5, c = 5.0;
  const ScalarField f = clamped_linear(1, m, c, 3.0);
  for (double lambda : {0.5, 1.0, 4.0}) {
    const RayIntervals r = ray_transitions(f, Point{}, Point{1, 0, 0}, lambda, 1.0, 1.0);
    REQUIRE(r.intervals.size() == 1);
    CHECK(r.intervals[0].a == 0.0);
    CHECK_THAT(r.intervals[0].b, WithinRel(m / lambda, 1e-9));
    CHECK_FALSE(r.truncated);
  }
  // gamma = 2, q = 4: exponent 3/2, r < (m / lambda)^2
  const RayIntervals r = ray_transitions(f, Point{}, Point{-1, 0, 0}, 1.0, 2.0, 4.0);
  REQUIRE(r.intervals.size() == 1);
  CHECK_THAT(r.intervals[0].b, WithinRel(m * m, 1e-9));
}

TEST_CASE("ray solver agrees with dense sampling", "[geometry][property]") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.5, 1.5), lam(-3.0, 2.0);
  const std::vector<ScalarField> fields = {make_bump(1, Point{0.2, 0, 0}, 1.0, 2.0),
                                           make_smooth_step(-0.7, 0.9, 0.1),
                                           make_bump(2, Point{0.1, 0.3, 0}, 1.1, -1.2),
                                           make_tensor_bump(3, Point{}, Point{0.8, 1.0, 0.6})};
  // (gamma, q) with exponent 1 + gamma / q > 0 so every level set is bounded
  const std::vector<std::pair<double, double>> cases = {{1, 1}, {2, 2}, {1, 3}, {-0.5, 2}, {-2, 3}, {3, 1}};
  std::normal_distribution<double> nd;
  int checked = 0;
  for (const ScalarField& f : fields)
    for (const auto& [gamma, q] : cases)
      for (int trial = 0; trial < 4; ++trial) {
        Point x{}, w{};
        for (int a = 0; a < f.dim; ++a) {
          x[a] = u(rng);
          w[a] = nd(rng);
        }
        w = (1.0 / norm(w)) * w;
        const double lambda = std::pow(10.0, lam(rng));
        const double e = 1.0 + gamma / q;
        const RayIntervals ray = ray_transitions(f, x, w, lambda, gamma, q);
        const double got = radial_kernel_integral(ray, gamma);
        const double hi = std::pow((std::abs(f.eval(x)) + f.sup_abs) / lambda, 1.0 / e) * 1.01;
        const double want = brute_ray_mass(f, x, w, lambda, e, gamma, hi);
        CHECK_THAT(got, WithinAbs(want, 2e-3 * want + 1e-9));
        ++checked;
      }
  CHECK(checked == 96);
}

TEST_CASE("level-set mass is antitone in lambda", "[geometry][property]") {
  const ScalarField f = add(make_bump(1, Point{-0.4, 0, 0}, 0.6, 1.0), make_bump(1, Point{0.5, 0, 0}, 0.5, -2.0));
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> u(-1.2, 1.2);
  for (const auto& [gamma, q] : std::vector<std::pair<double, double>>{{1, 1}, {2, 2}, {-2, 1}, {-0.5, 1}}) {
    for (int trial = 0; trial < 10; ++trial) {
      const Point x{u(rng), 0, 0};
      const Point w{trial % 2 ? 1.0 : -1.0, 0, 0};
      double prev = kInf;
      for (double lambda = 1e-3; lambda < 1e3; lambda *= 1.7) {
        const double v = radial_kernel_integral(ray_transitions(f, x, w, lambda, gamma, q), gamma);
        CHECK(v <= prev * (1.0 + 1e-8));
        prev = v;
      }
    }
  }
}

TEST_CASE("r_max truncation reports a tail bound", "[geometry]") {
  const ScalarField f = make_bump(1, Point{}, 1.0);
  RaySolverOptions opt;
  opt.r_max = 0.05;
  const RayIntervals r = ray_transitions(f, Point{0.5, 0, 0}, f.eval(Point{0.5, 0, 0}), Point{1, 0, 0},
                                         RayProblem{0.01, 2.0, 1.0}, opt);
  CHECK(r.truncated);
  CHECK(r.tail_bound > 0.0);
  for (const auto& iv : r.intervals) CHECK(iv.b <= 0.05);
}

TEST_CASE("half-open cubes and adjacent dyadic systems", "[geometry]") {
  const Cube unit = adjacent_dyadic_cube(1, 0, LatticeIndex{0, 0, 0}, Point{});
  CHECK(unit.lower[0] == 0.0);
  CHECK(unit.side == 1.0);
  CHECK(unit.contains(Point{1.0, 0, 0}));
  CHECK_FALSE(unit.contains(Point{0.0, 0, 0}));
  const Cube shifted = adjacent_dyadic_cube(1, 1, LatticeIndex{0, 0, 0}, Point{1.0 / 3.0, 0, 0});
  CHECK_THAT(shifted.lower[0], WithinAbs(-2.0 / 3.0, 1e-15));
  CHECK(shifted.side == 2.0);
}

TEST_CASE("each adjacent dyadic system is nested", "[geometry][property]") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  std::uniform_int_distribution<int> level(-4, 5);
  for (int dim : {1, 2, 3}) {
    int shifts = 1;
    for (int i = 0; i < dim; ++i) shifts *= 3;
    for (int code = 0; code < shifts; ++code) {
      Point alpha{};
      int rest = code;
      for (int i = 0; i < dim; ++i) {
        alpha[i] = (rest % 3) / 3.0;
        rest /= 3;
      }
      for (int trial = 0; trial < 50; ++trial) {
        Point x{};
        for (int i = 0; i < dim; ++i) x[i] = u(rng);
        const int j = level(rng);
        const Cube child = containing_cube(dim, j - 1, x, alpha);
        const Cube parent = containing_cube(dim, j, x, alpha);
        REQUIRE(child.contains(x));
        REQUIRE(parent.contains(x));
        CHECK(parent.contains(child));
      }
    }
  }
}

TEST_CASE("every ball sits in a comparable adjacent dyadic cube", "[geometry][property]") {
  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> u(-10.0, 10.0), lr(-3.0, 3.0);
  for (int dim : {1, 2, 3})
    for (int trial = 0; trial < 300; ++trial) {
      Point c{};
      for (int i = 0; i < dim; ++i) c[i] = u(rng);
      const double r = std::exp(lr(rng));
      const BallCover b = cube_for_ball(dim, c, r);
      for (int i = 0; i < dim; ++i) {
        CHECK(b.cube.lower[i] < c[i] - r);
        CHECK(b.cube.lower[i] + b.cube.side >= c[i] + r);
      }
      CHECK(b.cube.side <= 6.0 * r);
      CHECK(b.diameter_ratio <= 3.0 * std::sqrt(static_cast<double>(dim)));
    }
}
