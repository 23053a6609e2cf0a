#pragma once

// Physical models: a four-state RC thermal network per house (sensor,
// room, heater, envelope nodes), the hub battery bookkeeping, and the
// static concave lift-gas well map.
//
// House units: capacitances in kWh/degC and resistances in degC/kW, so the
// ODE time unit is HOURS; callers converting from a simulation step in
// seconds must divide by 3600.

#include <array>
#include <cmath>
#include <cstddef>

#include "distopt/core.hpp"

namespace distopt::plant {

struct HouseParams {
  double C_s = 0.0;  // sensor capacitance [kWh/degC]
  double C_i = 0.0;  // room (interior) capacitance
  double C_e = 0.0;  // envelope capacitance
  double C_h = 0.0;  // heater capacitance
  double R_is = 0.0;  // room-sensor resistance [degC/kW]
  double R_ih = 0.0;  // room-heater
  double R_ie = 0.0;  // room-envelope
  double R_ea = 0.0;  // envelope-ambient
  double R_ia = 0.0;  // room-ambient (infiltration)
  double A_w = 0.0;  // window effective solar area [m^2]
  double A_e = 0.0;  // envelope effective solar area [m^2]
  friend bool operator==(const HouseParams&, const HouseParams&) = default;
};

// State order: [T_s, T_r, T_h, T_e].
using HouseState = std::array<double, 4>;

// Right-hand side of the house ODE for heater power u [kW], ambient T_a
// [degC] and solar irradiance phi [kW/m^2]. Rates are degC per HOUR.
HouseState house_derivatives(const HouseState& x, double u, double T_a, double phi,
                             const HouseParams& p);

// Steady state for constant (u, T_a, phi): solves the 4x4 linear balance.
HouseState house_steady_state(double u, double T_a, double phi, const HouseParams& p);

// Steady-state room-temperature sensitivity dT_r/du [degC/kW]; constant
// because the network is linear.
double house_dc_gain(const HouseParams& p);

// One battery bookkeeping step: charge P_s [kW] in, discharge D [kW] out,
// over dt_h HOURS; the level clamps at zero and the clamp is flagged.
struct BatteryResult {
  double q = 0.0;
  bool clamped = false;
};

BatteryResult battery_step(double q, double p_solar, double discharge, double dt_h);

struct WellParams {
  double q0 = 0.0;     // natural flow at zero injection
  double alpha = 0.0;  // linear lift coefficient
  double beta = 0.0;   // quadratic saturation coefficient
  double price = 0.0;  // oil price weight for this well
  friend bool operator==(const WellParams&, const WellParams&) = default;
};

// Admissible injection range is [0, alpha/(2 beta)]: beyond the vertex the
// concave map would turn decreasing, which the rig cannot reach.
double well_admissible_max(const WellParams& p);

// Production Q_l = d*(q0 + alpha*Q_gl - beta*Q_gl^2); d is the valve
// opening in [0, 1]. Throws InputError outside the admissible range.
double well_production(double q_gl, double valve, const WellParams& p);

// dQ_l/dQ_gl = d*(alpha - 2*beta*Q_gl); non-negative on the admissible range.
double well_marginal(double q_gl, double valve, const WellParams& p);

// Classic RK4 over a fixed-size state array. Throws FaultError when the
// right-hand side or the resulting state goes non-finite.
template <std::size_t N, class Rhs>
std::array<double, N> rk4_step(const std::array<double, N>& x, double dt, Rhs&& rhs) {
  auto scaled_add = [](const std::array<double, N>& base, double h,
                       const std::array<double, N>& k) {
    std::array<double, N> out{};
    for (std::size_t i = 0; i < N; ++i) out[i] = base[i] + h * k[i];
    return out;
  };
  const std::array<double, N> k1 = rhs(x);
  const std::array<double, N> k2 = rhs(scaled_add(x, dt / 2.0, k1));
  const std::array<double, N> k3 = rhs(scaled_add(x, dt / 2.0, k2));
  const std::array<double, N> k4 = rhs(scaled_add(x, dt, k3));
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    out[i] = x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    if (!std::isfinite(out[i])) throw FaultError("rk4_step: non-finite state");
  }
  return out;
}

}  // namespace distopt::plant
