#include <doctest.h>

#include <numbers>
#include <random>

#include "hyperrfk/hyperbolic_core.hpp"
#include "oracles.hpp"

using namespace hyperrfk;
using std::numbers::pi;

TEST_CASE("sphere measures") {
  CHECK(sphere_measure(0) == doctest::Approx(2.0));
  CHECK(sphere_measure(1) == doctest::Approx(2.0 * pi));
  CHECK(sphere_measure(2) == doctest::Approx(4.0 * pi));
  CHECK(sphere_measure(3) == doctest::Approx(2.0 * pi * pi));
}

TEST_CASE("dimension rejects n < 2") {
  CHECK_THROWS_AS(Dimension(1), DomainError);
  CHECK(Dimension(2).value() == 2);
}

TEST_CASE("ball volume against closed forms and quadrature") {
  CHECK(oracle::rel_err(ball_volume(Dimension(2), 1.0), 2.0 * pi * (std::cosh(1.0) - 1.0)) < 1e-14);
  CHECK(ball_volume(Dimension(2), 1.0) == doctest::Approx(3.4122762652849023).epsilon(1e-12));
  CHECK(ball_volume(Dimension(3), 1.0) == doctest::Approx(5.1109327057082890).epsilon(1e-12));
  CHECK(oracle::rel_err(ball_volume(Dimension(3), 1.0), pi * (std::sinh(2.0) - 2.0)) < 1e-14);
  CHECK(ball_volume(Dimension(2), 1e-8) < 1e-15);

  for (int n = 2; n <= 6; ++n) {
    for (double r : {0.05, 0.3, 0.9, 1.0, 1.7, 3.0, 4.0}) {
      const double q = sphere_measure(n - 1) *
                       oracle::simpson([n](double t) { return std::pow(std::sinh(t), n - 1); }, 0.0, r);
      CHECK(oracle::rel_err(ball_volume(Dimension(n), r), q) < 1e-12);
    }
  }
  CHECK_THROWS_AS(ball_volume(Dimension(2), 0.0), DomainError);
  CHECK_THROWS_AS(ball_volume(Dimension(3), -1.0), DomainError);
}

TEST_CASE("ball perimeter is the derivative of ball volume") {
  CHECK(ball_perimeter(Dimension(2), 1.0) == doctest::Approx(7.3840068728826453).epsilon(1e-12));
  CHECK(ball_perimeter(Dimension(3), 1.0) == doctest::Approx(17.355387381771437).epsilon(1e-12));
  for (int n = 2; n <= 5; ++n) {
    for (double r : {0.1, 0.5, 1.0, 2.0, 4.0}) {
      const double fd = oracle::fd1([n](double t) { return ball_volume(Dimension(n), t); }, r, 1e-5);
      CHECK(oracle::rel_err(fd, ball_perimeter(Dimension(n), r)) < 1e-6);
    }
  }
  // Isoperimetric equality for discs: P^2 = 4 pi V + V^2.
  for (double r : {0.2, 1.0, 3.0}) {
    const double v = ball_volume(Dimension(2), r), p = ball_perimeter(Dimension(2), r);
    CHECK(oracle::rel_err(p * p, 4.0 * pi * v + v * v) < 1e-13);
  }
}

TEST_CASE("ball quermass vector") {
  const auto q = ball_quermass(Dimension(2), 1.0);
  REQUIRE(q.w.size() == 3);
  CHECK(q[0] == doctest::Approx(3.4122762652849023).epsilon(1e-12));
  CHECK(q[1] == doctest::Approx(3.6920034364413227).epsilon(1e-12));
  CHECK(q[2] == doctest::Approx(pi).epsilon(1e-14));
  CHECK(ball_quermass(Dimension(3), 1.0)[3] == doctest::Approx(4.0 * pi / 3.0));

  SUBCASE("terminal identity closes the recursion") {
    for (int n = 2; n <= 5; ++n) {
      for (double r : {0.1, 0.5, 1.0, 2.0, 4.0}) {
        const double terminal = sphere_measure(n - 1) / n;
        CHECK(std::abs(ball_quermass_entry(Dimension(n), n, r) - terminal) <= 1e-10 * terminal);
      }
    }
  }
  SUBCASE("entries strictly increase with r") {
    for (int n = 2; n <= 5; ++n) {
      for (int j = 0; j <= n - 1; ++j) {
        double prev = 0.0;
        for (double r = 0.05; r < 4.0; r += 0.05) {
          const double w = ball_quermass_entry(Dimension(n), j, r);
          CHECK(w > prev);
          prev = w;
        }
      }
    }
  }
}

TEST_CASE("quermass inverse radius") {
  CHECK(quermass_inverse_radius(Dimension(2), 1, pi * std::sinh(1.0)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(quermass_inverse_radius(Dimension(2), 0, 3.4122762652849023) == doctest::Approx(1.0).epsilon(1e-6));
  const double w = ball_quermass(Dimension(3), 0.7)[2];
  CHECK(quermass_inverse_radius(Dimension(3), 2, w) == doctest::Approx(0.7).epsilon(1e-12));

  for (int n = 2; n <= 5; ++n)
    for (int m = 0; m <= n - 1; ++m)
      for (double r : {0.01, 0.2, 0.9, 2.5, 5.0}) {
        const double back = quermass_inverse_radius(Dimension(n), m, ball_quermass_entry(Dimension(n), m, r));
        CHECK(oracle::rel_err(back, r) < 1e-9);
      }

  CHECK_THROWS_AS(quermass_inverse_radius(Dimension(2), 0, 0.0), DomainError);
  CHECK_THROWS_AS(quermass_inverse_radius(Dimension(2), 2, 1.0), DomainError);
}

TEST_CASE("Poincare distance") {
  const PoincarePoint o(0.0, 0.0);
  CHECK(poincare_distance(o, o) == 0.0);
  CHECK(poincare_distance(o, PoincarePoint(std::tanh(0.5), 0.0)) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(PoincarePoint(0.8, 0.7), DomainError);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-0.7, 0.7);
  auto draw = [&] { return PoincarePoint(u(rng), u(rng)); };
  for (int i = 0; i < 500; ++i) {
    const auto a = draw(), b = draw(), c = draw();
    const double ab = poincare_distance(a, b), bc = poincare_distance(b, c), ac = poincare_distance(a, c);
    CHECK(ab == doctest::Approx(poincare_distance(b, a)).epsilon(1e-14));
    CHECK(ac <= ab + bc + 1e-12);
    CHECK(ab > 0.0);
  }
}
