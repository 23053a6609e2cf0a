#pragma once

// Scenario definition and (de)serialization. A scenario bundles the case
// kind, plant parameters, piecewise-linear disturbance/limit timelines,
// cadence settings and per-architecture tunings. Loading is strict: any
// unknown key anywhere in the document, or any violated invariant, is a
// ValidationError that lists every problem found.

#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "distopt/core.hpp"
#include "distopt/gradients.hpp"
#include "distopt/plant.hpp"

namespace distopt::scen {

struct Timeline {
  // (time [s], value) breakpoints; strictly increasing times, first at 0,
  // last at or beyond the horizon. Values interpolate linearly.
  std::vector<std::pair<double, double>> points;
  friend bool operator==(const Timeline&, const Timeline&) = default;
};

double timeline_at(const Timeline& tl, double t);

enum class CaseKind {
  kEnergyHub,
  kGasLift,
};

struct PiGains {
  double kp = 0.0;
  double ki = 0.0;
  double kaw = 0.0;
  friend bool operator==(const PiGains&, const PiGains&) = default;
};

struct SubsystemSpec {
  int id = 0;
  std::string type;  // "house" or "well"
  double u_min = 0.0;
  double u_max = 0.0;
  plant::HouseParams house;
  plant::WellParams well;
  friend bool operator==(const SubsystemSpec&, const SubsystemSpec&) = default;
};

struct HubSpec {
  double battery_q0 = 0.0;      // initial battery level [kWh]
  double solar_wattage = 0.0;   // plant power per unit irradiance [kW/(kW/m^2)]
  friend bool operator==(const HubSpec&, const HubSpec&) = default;
};

struct DualTuning {
  Vec coordinator_gain;             // per constraint, per coordinator update
  std::vector<PiGains> local_pi;    // per subsystem
  friend bool operator==(const DualTuning&, const DualTuning&) = default;
};

struct OverrideTuning {
  Vec coordinator_gain;             // per critical subsystem
  std::vector<int> critical;        // subsystem ids running the override pair
  PiGains constraint_pi;
  std::vector<PiGains> local_pi;    // per subsystem (optimality branch)
  friend bool operator==(const OverrideTuning&, const OverrideTuning&) = default;
};

struct PrimalTuning {
  Vec equalizer_gains;  // one per non-closing subsystem, in id order
  double marginal_gain = 0.0;
  int closing = 0;      // subsystem whose allocation closes the budget
  friend bool operator==(const PrimalTuning&, const PrimalTuning&) = default;
};

struct Scenario {
  int schema_version = 1;
  CaseKind kind = CaseKind::kEnergyHub;
  std::string name;
  double horizon_s = 0.0;
  double dt_s = 0.0;
  std::size_t m = 1;  // number of coupling constraints
  int seed = 0;
  int local_period_steps = 1;        // plant steps per local-controller update
  int coordinator_period_locals = 10;  // local updates per coordinator update
  std::vector<SubsystemSpec> subsystems;
  std::map<std::string, Timeline> timelines;
  HubSpec hub;
  DualTuning dual;
  OverrideTuning override_tuning;
  PrimalTuning primal;

  std::size_t n_subsystems() const { return subsystems.size(); }
  friend bool operator==(const Scenario&, const Scenario&) = default;
};

// Strict load/parse: every violated invariant is reported in one
// ValidationError; file-shape problems raise ParseError.
Scenario load_scenario(const std::string& path);
Scenario parse_scenario_json(const std::string& text);
std::string scenario_to_json(const Scenario& s);

// Everything exogenous at time t.
struct DisturbanceState {
  double t = 0.0;
  Vec g_max;                                 // resource limits, one per constraint
  std::vector<grad::LocalConditions> local;  // per subsystem
  double p_solar = 0.0;                      // hub charge power [kW] (energy hub)
};

DisturbanceState disturbance_at(const Scenario& s, double t);

// Coordination-free baseline: an even split of the current limit across
// subsystems (single coupling constraint only).
Vec naive_allocation(const Scenario& s, double t);

// Percentage profit improvement over the baseline.
double profit_diff(double profit, double profit_naive);

std::unique_ptr<grad::SubsystemModel> make_model(const SubsystemSpec& sub);

// Copy of s with every timeline pinned to its value at t_freeze and the
// horizon replaced; used to build steady-state study variants.
Scenario freeze_disturbances(const Scenario& s, double t_freeze, double new_horizon_s);

// Replace a timeline with a constant.
void set_constant_timeline(Scenario& s, const std::string& name, double value);

// Replace a timeline with a step a -> b at t_step (encoded as a one-dt ramp).
void set_step_timeline(Scenario& s, const std::string& name, double before, double after,
                       double t_step);

}  // namespace distopt::scen
