#pragma once

// Distributed runtime: one coordinator process listening on TCP, one
// process per subsystem connecting to it, line-delimited JSON messages
// (see wire.hpp). Rounds run in lockstep: every subsystem sends exactly
// one report per coordinator tick, the coordinator barriers on all N,
// updates, and answers (the answer doubles as the tick acknowledgment).
//
// Between rounds each subsystem integrates its own plant and runs its
// local controller at the local cadence; nobody shares memory. For the
// price schemes the controller trajectories match the in-process harness
// exactly (the coordinator aggregates reports in subsystem-id order); the
// override scheme differs transiently because the critical subsystem sees
// the others' usage only at round boundaries, but converges to the same
// steady state.
//
// Malformed lines are logged and dropped (connection kept alive); a lost
// connection or a report from the future aborts the run with
// ProtocolError, and callers flush whatever trace rows exist.

#include <string>

#include "distopt/scenario.hpp"
#include "distopt/sim.hpp"
#include "distopt/trace.hpp"

namespace distopt::net {

using sim::Trace;

struct NetOptions {
  sim::RunOptions run;  // arch (dual / dual-override / primal only), backoff, cadence
  std::string address = "127.0.0.1";
  int port = 0;  // coordinator: 0 picks an ephemeral port (see Coordinator::port())
};

class Coordinator {
 public:
  // Binds and listens immediately so callers can read port() before any
  // subsystem starts.
  Coordinator(const scen::Scenario& s, const NetOptions& opt);
  ~Coordinator();
  Coordinator(const Coordinator&) = delete;
  Coordinator& operator=(const Coordinator&) = delete;

  int port() const { return port_; }

  // Accepts the N subsystem connections and drives every coordination
  // round over the horizon. Produces one trace row per coordinator tick
  // with the coordinator-visible signals (prices or allocations, reported
  // usage, the limit). The in-place overload keeps whatever rows were
  // completed if the run aborts, so callers can flush a partial trace.
  Trace run();
  void run(Trace& out);

 private:
  scen::Scenario s_;
  NetOptions opt_;
  int listen_fd_ = -1;
  int port_ = 0;
};

// Runs one subsystem agent to completion: connects (with retry while the
// coordinator comes up), then steps its own plant and local controller
// over the full horizon, exchanging one report/answer pair per
// coordinator tick. Returns the agent's local trace (one row per plant
// step); the in-place overload keeps completed rows on abort.
Trace run_subsystem(const scen::Scenario& s, std::size_t subsystem, const NetOptions& opt);
void run_subsystem(const scen::Scenario& s, std::size_t subsystem, const NetOptions& opt,
                   Trace& out);

}  // namespace distopt::net
