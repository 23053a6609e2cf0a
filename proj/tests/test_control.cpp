#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "distopt/control.hpp"

using namespace distopt;
using namespace distopt::control;

// ---- PI step ----

TEST_CASE("pure integral accumulates ki*e*dt") {
  PiState s;
  s.ki = 2.0;
  const PiResult r = pi_step(s, 1.0, 0.0, 0.5);  // e = 1
  CHECK(r.state.integral == doctest::Approx(1.0));
  CHECK(r.raw == doctest::Approx(1.0));
  CHECK(r.output == doctest::Approx(1.0));
}

TEST_CASE("proportional path adds kp*e on top of the accumulator") {
  PiState s;
  s.kp = 3.0;
  s.ki = 1.0;
  s.integral = 0.25;
  const PiResult r = pi_step(s, 2.0, 1.0, 1.0);  // e = 1
  CHECK(r.state.integral == doctest::Approx(1.25));
  CHECK(r.output == doctest::Approx(3.0 + 1.25));
}

TEST_CASE("back-calculation pulls the accumulator toward the clamp") {
  PiState s;
  s.kp = 1.0;
  s.ki = 1.0;
  s.kaw = 1.0;
  s.out_max = 0.5;
  const PiResult r = pi_step(s, 1.0, 0.0, 1.0);  // e = 1
  // I -> 1, raw = 2, clamp to 0.5, then I += (0.5 - 2).
  CHECK(r.raw == doctest::Approx(2.0));
  CHECK(r.output == doctest::Approx(0.5));
  CHECK(r.state.integral == doctest::Approx(-0.5));
}

TEST_CASE("kaw = 0 disables tracking and the accumulator winds up") {
  PiState s;
  s.ki = 1.0;
  s.out_max = 0.1;
  double wound = 0.0;
  for (int k = 0; k < 50; ++k) {
    const PiResult r = pi_step(s, 1.0, 0.0, 1.0);
    s = r.state;
    wound = r.state.integral;
  }
  CHECK(wound == doctest::Approx(50.0));  // no anti-windup: integral grows freely
}

TEST_CASE("anti-windup keeps the accumulator bounded under persistent saturation") {
  PiState s;
  s.ki = 1.0;
  s.kaw = 1.0;
  s.out_max = 0.1;
  for (int k = 0; k < 200; ++k) s = pi_step(s, 1.0, 0.0, 1.0).state;
  CHECK(std::fabs(s.integral) <= 0.2);
  // After the error flips, the output leaves the clamp promptly.
  int steps_to_leave = 0;
  PiResult r{};
  do {
    r = pi_step(s, 0.0, 1.0, 1.0);  // e = -1
    s = r.state;
    ++steps_to_leave;
  } while (r.output >= 0.1 && steps_to_leave < 10);
  CHECK(steps_to_leave <= 2);
}

TEST_CASE("pi_track nudges the accumulator toward an externally applied value") {
  PiState s;
  s.kaw = 0.5;
  s.integral = 1.0;
  const PiState t = pi_track(s, 0.2, 1.0, 1.0);
  CHECK(t.integral == doctest::Approx(1.0 + 0.5 * (0.2 - 1.0)));
  // Zero gain leaves the state untouched.
  s.kaw = 0.0;
  CHECK(pi_track(s, 0.2, 1.0, 1.0).integral == doctest::Approx(1.0));
}

TEST_CASE("integral regulation drives a static plant to the setpoint") {
  // Plant y = 4 u; pure integral with ki small enough for contraction.
  PiState s;
  s.ki = 0.1;
  s.out_min = -10.0;
  s.out_max = 10.0;
  double u = 0.0;
  for (int k = 0; k < 300; ++k) {
    const PiResult r = pi_step(s, 2.0, 4.0 * u, 1.0);
    s = r.state;
    u = r.output;
  }
  CHECK(4.0 * u == doctest::Approx(2.0).epsilon(1e-9));
}

// ---- clamped integrator ----

TEST_CASE("clamped_integral_step floors at zero and grows on positive error") {
  const Vec up = clamped_integral_step(Vec{1.0}, Vec{2.0}, Vec{0.5}, 1.0);
  CHECK(up[0] == doctest::Approx(2.0));
  const Vec down = clamped_integral_step(Vec{0.1}, Vec{-1.0}, Vec{0.5}, 1.0);
  CHECK(down[0] == 0.0);
  const Vec two = clamped_integral_step(Vec{0.0, 3.0}, Vec{1.0, -1.0}, Vec{2.0, 2.0}, 0.5);
  CHECK(two[0] == doctest::Approx(1.0));
  CHECK(two[1] == doctest::Approx(2.0));
  CHECK_THROWS_AS(clamped_integral_step(Vec{0.0}, Vec{1.0, 2.0}, Vec{1.0}, 1.0), UsageError);
}

TEST_CASE("clamped integrator output is never negative on any input sequence") {
  Vec v{0.3};
  for (int k = 0; k < 100; ++k) {
    v = clamped_integral_step(v, Vec{(k % 3 == 0) ? 5.0 : -4.0}, Vec{0.7}, 1.0);
    CHECK(v[0] >= 0.0);
  }
}

// ---- override selector ----

TEST_CASE("min_select picks the smaller candidate and attributes ties to the constraint") {
  const SelectResult g = min_select(1.0, 2.0);
  CHECK(g.value == 1.0);
  CHECK(g.branch == Branch::kGradient);

  const SelectResult c = min_select(3.0, 2.0);
  CHECK(c.value == 2.0);
  CHECK(c.branch == Branch::kConstraint);

  const SelectResult tie = min_select(2.0, 2.0);
  CHECK(tie.value == 2.0);
  CHECK(tie.branch == Branch::kConstraint);
}
