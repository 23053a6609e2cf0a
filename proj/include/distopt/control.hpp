#pragma once

// Low-level control primitives: PI with back-calculation anti-windup,
// the non-negative ("clamped") integrator used by price updates, and the
// min selector used by override schemes. All are pure step functions over
// value-type state so callers can snapshot/replay them freely.

#include "distopt/core.hpp"

namespace distopt::control {

struct PiState {
  double kp = 0.0;
  double ki = 0.0;
  double kaw = 0.0;  // back-calculation gain; 0 disables tracking
  double out_min = -1e30;
  double out_max = 1e30;
  double integral = 0.0;
};

struct PiResult {
  double output = 0.0;  // clamped output
  double raw = 0.0;     // pre-clamp output (for selector tracking)
  PiState state;
};

// One PI update: e = setpoint - measurement; the accumulator integrates
// Ki*e*dt first, raw = Kp*e + I, the output is clamped to [out_min,
// out_max], and the accumulator is then corrected by Kaw*(output-raw)*dt.
PiResult pi_step(const PiState& s, double setpoint, double measurement, double dt);

// External anti-windup tracking toward an applied value that differs from
// this controller's own output (override selectors): nudges the
// accumulator by Kaw*(applied - raw)*dt.
PiState pi_track(const PiState& s, double applied, double raw, double dt);

// Entrywise v' = max(0, v + K.*e*dt). Used for multiplier updates, which
// must stay non-negative.
Vec clamped_integral_step(const Vec& v, const Vec& e, const Vec& gain, double dt);

enum class Branch : int {
  kGradient = 0,    // optimality-seeking branch
  kConstraint = 1,  // constraint-override branch
};

struct SelectResult {
  double value = 0.0;
  Branch branch = Branch::kGradient;
};

// Minimum of the two candidate inputs; exact ties resolve to the
// constraint branch so a binding constraint is always attributed.
SelectResult min_select(double u_gradient, double u_constraint);

}  // namespace distopt::control
