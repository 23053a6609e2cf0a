#include "distopt/control.hpp"

#include <algorithm>
#include <cmath>

namespace distopt::control {

PiResult pi_step(const PiState& s, double setpoint, double measurement, double dt) {
  if (!(dt > 0.0)) throw UsageError("pi_step: dt must be positive");
  if (!(s.out_min <= s.out_max)) throw UsageError("pi_step: empty output range");
  const double e = setpoint - measurement;
  if (!std::isfinite(e)) throw FaultError("pi_step: non-finite error signal");

  PiResult r;
  r.state = s;
  r.state.integral += s.ki * e * dt;
  r.raw = s.kp * e + r.state.integral;
  r.output = std::clamp(r.raw, s.out_min, s.out_max);
  r.state.integral += s.kaw * (r.output - r.raw) * dt;
  return r;
}

PiState pi_track(const PiState& s, double applied, double raw, double dt) {
  PiState next = s;
  next.integral += s.kaw * (applied - raw) * dt;
  return next;
}

Vec clamped_integral_step(const Vec& v, const Vec& e, const Vec& gain, double dt) {
  if (v.size() != e.size() || v.size() != gain.size())
    throw UsageError("clamped_integral_step: dimension mismatch");
  Vec out(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    const double next = v[k] + gain[k] * e[k] * dt;
    if (!std::isfinite(next)) throw FaultError("clamped_integral_step: non-finite update");
    out[k] = std::max(0.0, next);
  }
  return out;
}

SelectResult min_select(double u_gradient, double u_constraint) {
  SelectResult r;
  if (u_constraint <= u_gradient) {
    r.value = u_constraint;
    r.branch = Branch::kConstraint;
  } else {
    r.value = u_gradient;
    r.branch = Branch::kGradient;
  }
  return r;
}

}  // namespace distopt::control
