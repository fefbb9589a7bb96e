#include "flock/dynamics.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

using namespace flock;
using std::numbers::pi;

TEST_CASE("kinematic step") {
  AgentState s = step_kinematic({0, 0, 0}, {1, 0}, 0.1);
  CHECK(s.x == doctest::Approx(0.1));
  CHECK(s.y == doctest::Approx(0.0));
  CHECK(s.theta == doctest::Approx(0.0));

  s = step_kinematic({0, 0, 0}, {1, 1}, 0.1);
  CHECK(s.x == doctest::Approx(0.0998334).epsilon(1e-6));
  CHECK(s.y == doctest::Approx(0.0049958).epsilon(1e-5));
  CHECK(s.theta == doctest::Approx(0.1));
  CHECK(std::abs(s.x - std::sin(0.1)) < 1e-7);
  CHECK(std::abs(s.y - (1 - std::cos(0.1))) < 1e-7);

  s = step_kinematic({1, 2, pi / 2}, {0, 0}, 0.1);
  CHECK(s.x == 1.0);
  CHECK(s.y == 2.0);
  CHECK(s.theta == doctest::Approx(pi / 2));
}

TEST_CASE("kinematic step follows closed-form arcs") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int k = 0; k < 200; ++k) {
    const AgentState s0{u(rng), u(rng), u(rng)};
    const double v = u(rng);
    const double w = u(rng) + (u(rng) > 0 ? 0.1 : -0.1);
    const double dt = 0.05;
    const AgentState s = step_kinematic(s0, {v, w}, dt);
    const double x = s0.x + v / w * (std::sin(s0.theta + w * dt) - std::sin(s0.theta));
    const double y = s0.y - v / w * (std::cos(s0.theta + w * dt) - std::cos(s0.theta));
    CHECK(std::abs(s.x - x) < 1e-7);
    CHECK(std::abs(s.y - y) < 1e-7);
    CHECK(std::abs(wrap_angle(s.theta - (s0.theta + w * dt))) < 1e-12);
  }
}

TEST_CASE("heading stays wrapped") {
  const AgentState s = step_kinematic({0, 0, 3.0}, {0, 2.0}, 0.2);
  CHECK(s.theta > -pi);
  CHECK(s.theta <= pi);
  CHECK(wrap_angle(pi) == doctest::Approx(pi));
  CHECK(wrap_angle(-pi) == doctest::Approx(pi));
}

TEST_CASE("extended step") {
  const ExtendedState s{0, 0, 1, 1, 0};
  ExtendedStep r = step_extended(s, {0, 0}, 0.1);
  CHECK(r.state.x == doctest::Approx(0.1));
  CHECK(r.state.y == doctest::Approx(0.0));
  CHECK(r.state.v == doctest::Approx(1.0));
  CHECK_FALSE(r.clamped);

  r = step_extended(s, {1, 0}, 0.1);
  CHECK(r.state.v == doctest::Approx(1.1));
  CHECK(heading_of(r.state) == doctest::Approx(0.0));
  CHECK(std::abs(r.state.velocity().norm() - 1.1) < 1e-9);

  const double w = 0.7;
  const double dt = 0.01;
  r = step_extended(s, {0, w}, dt);
  CHECK(std::abs(heading_of(r.state) - w * dt) < 1e-10);
  const AgentState k = step_kinematic({0, 0, 0}, {1, w}, dt);
  CHECK(std::abs(r.state.x - k.x) < 1e-10);
  CHECK(std::abs(r.state.y - k.y) < 1e-10);
}

TEST_CASE("extended step clamps at the speed floor") {
  const ExtendedStep r = step_extended({0, 0, 0.05, 0.0, 0.05}, {-10.0, 0.0}, 0.01);
  CHECK(r.clamped);
  CHECK(r.state.v == kDefaultVFloor);
  CHECK(std::abs(r.state.velocity().norm() - kDefaultVFloor) < 1e-12);
  CHECK(heading_of(r.state) == doctest::Approx(pi / 2));
}

TEST_CASE("extended step keeps |velocity| = v") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ExtendedState s = to_extended({0, 0, 0.3}, 1.0);
  for (int k = 0; k < 1000; ++k) {
    s = step_extended(s, {5 * u(rng), 20 * u(rng)}, 0.01).state;
    CHECK(s.v >= kDefaultVFloor);
    CHECK(std::abs(s.velocity().norm() - s.v) < 1e-9);
  }
}

TEST_CASE("state conversions") {
  ExtendedState e = to_extended({0, 0, 0}, 1.0);
  CHECK(e.v == 1.0);
  CHECK(e.xdot == 1.0);
  CHECK(e.ydot == 0.0);
  e = to_extended({0, 0, pi / 2}, 2.0);
  CHECK(std::abs(e.xdot) < 1e-15);
  CHECK(e.ydot == doctest::Approx(2.0));
  e = to_extended({1, 1, pi}, 0.1);
  CHECK(e.xdot == doctest::Approx(-0.1));
  CHECK(std::abs(e.ydot) < 1e-16);
  CHECK_THROWS_AS(to_extended({0, 0, 0}, 0.001), std::invalid_argument);

  CHECK(heading_of({0, 0, 1, 1, 0}) == 0.0);
  CHECK(heading_of({0, 0, 1, 0, 1}) == doctest::Approx(pi / 2));
  CHECK(heading_of({0, 0, 2, -2, 0}) == doctest::Approx(pi));

  const AgentState back = to_pose(to_extended({0.5, -0.5, 1.2}, 3.0));
  CHECK(back.theta == doctest::Approx(1.2));
}

TEST_CASE("offset point") {
  CHECK(offset_point({0, 0, 0}, 0.1).isApprox(Vec2(0.1, 0.0)));
  const Vec2 q = offset_point({0, 0, pi / 2}, 0.1);
  CHECK(std::abs(q.x()) < 1e-15);
  CHECK(q.y() == doctest::Approx(0.1));
  CHECK(offset_point({1, 1, 0.4}, 0.0).isApprox(Vec2(1.0, 1.0)));
}

TEST_CASE("extended vector fields") {
  const ExtendedState s{1, 2, 2, 1.2, 1.6};
  const Vec5 f = extended_drift(s);
  CHECK(f(0) == 1.2);
  CHECK(f(1) == 1.6);
  CHECK(f.tail<3>().isZero());
  const Mat52 g = extended_input_matrix(s);
  CHECK(g(2, 0) == 1.0);
  CHECK(g(3, 0) == doctest::Approx(0.6));
  CHECK(g(4, 0) == doctest::Approx(0.8));
  CHECK(g(3, 1) == -1.6);
  CHECK(g(4, 1) == 1.2);
  CHECK(from_vector(to_vector(s)).xdot == s.xdot);
}
