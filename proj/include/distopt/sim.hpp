#pragma once

// In-process simulation harness: deterministic fixed-step loop stepping
// plants, local controllers and the coordinator in a fixed round-robin
// order. One trace row is recorded per plant step, before integration, so
// row k describes the state at t = k*dt and the inputs applied over
// [t, t+dt).
//
// Execution order at a step that is both a local and a coordinator tick:
// the coordinator consumes the subsystems' latest reports (from the
// previous local tick), then every subsystem updates against the fresh
// coordination values. This matches the distributed runtime, where a
// report round-trip completes between coordinator ticks.

#include <string>

#include "distopt/oracle.hpp"
#include "distopt/scenario.hpp"
#include "distopt/trace.hpp"

namespace distopt::sim {

enum class Arch {
  kDual,          // central price, local optimality loops
  kDualOverride,  // price plus fast local constraint override
  kPrimal,        // central resource allocation
  kNaive,         // even split of the limit, no feedback
  kOracleTrack,   // centralized KKT solution applied open-loop
};

Arch arch_from_string(const std::string& name);       // ValidationError on unknown
std::string arch_to_string(Arch arch);

struct RunOptions {
  Arch arch = Arch::kDual;
  // Fraction of the resource limit withheld from the controllers
  // (conservative back-off); the trace still reports the true limit.
  double backoff_fraction = 0.0;
  // Experimental override of the scenario's coordinator cadence (in local
  // ticks); 0 keeps the scenario value. Values below the validated
  // minimum are allowed here on purpose: breaking the timescale
  // separation is itself an experiment worth running.
  int coordinator_period_override = 0;
  grad::GradientOptions gradients;
};

struct RunResult {
  Trace trace;
  std::size_t battery_clamp_events = 0;  // hub battery hit empty
  std::size_t allocation_rescues = 0;    // primal proportional scale-downs
};

RunResult run_simulation(const scen::Scenario& s, const RunOptions& opt);

}  // namespace distopt::sim
