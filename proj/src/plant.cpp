#include "distopt/plant.hpp"

#include <algorithm>

namespace distopt::plant {

namespace {

void check_params(const HouseParams& p) {
  const double vals[] = {p.C_s, p.C_i, p.C_e, p.C_h, p.R_is, p.R_ih,
                         p.R_ie, p.R_ea, p.R_ia};
  for (double v : vals)
    if (!(v > 0.0)) throw InputError("house params: capacitances and resistances must be positive");
  if (p.A_w < 0.0 || p.A_e < 0.0) throw InputError("house params: negative solar area");
}

}  // namespace

HouseState house_derivatives(const HouseState& x, double u, double T_a, double phi,
                             const HouseParams& p) {
  check_params(p);
  const double T_s = x[0], T_r = x[1], T_h = x[2], T_e = x[3];
  HouseState dx{};
  dx[0] = (T_r - T_s) / (p.R_is * p.C_s);
  dx[1] = (T_s - T_r) / (p.R_is * p.C_i) + (T_h - T_r) / (p.R_ih * p.C_i) +
          p.A_w * phi / p.C_i + (T_e - T_r) / (p.R_ie * p.C_i) +
          (T_a - T_r) / (p.R_ia * p.C_i);
  dx[2] = (T_r - T_h) / (p.R_ih * p.C_h) + u / p.C_h;
  dx[3] = (T_r - T_e) / (p.R_ie * p.C_e) + (T_a - T_e) / (p.R_ea * p.C_e) +
          p.A_e * phi / p.C_e;
  return dx;
}

HouseState house_steady_state(double u, double T_a, double phi, const HouseParams& p) {
  check_params(p);
  // Assemble A x = b for the equilibrium of the four node balances,
  // x = [T_s, T_r, T_h, T_e].
  Mat A(4, 4);
  Vec b(4, 0.0);

  A(0, 0) = -1.0 / p.R_is;
  A(0, 1) = 1.0 / p.R_is;

  A(1, 0) = 1.0 / p.R_is;
  A(1, 1) = -(1.0 / p.R_is + 1.0 / p.R_ih + 1.0 / p.R_ie + 1.0 / p.R_ia);
  A(1, 2) = 1.0 / p.R_ih;
  A(1, 3) = 1.0 / p.R_ie;
  b[1] = -(p.A_w * phi + T_a / p.R_ia);

  A(2, 1) = 1.0 / p.R_ih;
  A(2, 2) = -1.0 / p.R_ih;
  b[2] = -u;

  A(3, 1) = 1.0 / p.R_ie;
  A(3, 3) = -(1.0 / p.R_ie + 1.0 / p.R_ea);
  b[3] = -(p.A_e * phi + T_a / p.R_ea);

  const Vec x = solve_linear(A, b);
  return HouseState{x[0], x[1], x[2], x[3]};
}

double house_dc_gain(const HouseParams& p) {
  const HouseState at0 = house_steady_state(0.0, 0.0, 0.0, p);
  const HouseState at1 = house_steady_state(1.0, 0.0, 0.0, p);
  return at1[1] - at0[1];
}

BatteryResult battery_step(double q, double p_solar, double discharge, double dt_h) {
  if (!(dt_h >= 0.0)) throw UsageError("battery_step: negative step");
  if (q < 0.0) throw InputError("battery_step: negative initial level");
  BatteryResult r;
  const double next = q + (p_solar - discharge) * dt_h;
  if (!std::isfinite(next)) throw FaultError("battery_step: non-finite level");
  r.clamped = next < 0.0;
  r.q = std::max(0.0, next);
  return r;
}

double well_admissible_max(const WellParams& p) {
  if (!(p.beta > 0.0) || !(p.alpha > 0.0))
    throw InputError("well params: alpha and beta must be positive");
  return p.alpha / (2.0 * p.beta);
}

static void check_well_inputs(double q_gl, double valve, const WellParams& p) {
  if (q_gl < 0.0 || q_gl > well_admissible_max(p))
    throw InputError("well: injection outside admissible range");
  if (valve < 0.0 || valve > 1.0) throw InputError("well: valve opening outside [0,1]");
}

double well_production(double q_gl, double valve, const WellParams& p) {
  check_well_inputs(q_gl, valve, p);
  return valve * (p.q0 + p.alpha * q_gl - p.beta * q_gl * q_gl);
}

double well_marginal(double q_gl, double valve, const WellParams& p) {
  check_well_inputs(q_gl, valve, p);
  return valve * (p.alpha - 2.0 * p.beta * q_gl);
}

}  // namespace distopt::plant
