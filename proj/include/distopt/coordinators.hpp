#pragma once

// Coordination layers for the three architectures.
//
//  * price (dual): a central integrator raises the shadow price lambda on
//    total over-use; subsystems independently drive Gamma + Phi*lambda -> 0.
//  * price with constraint override: same local optimality loops, but
//    designated "critical" subsystems also run a fast constraint loop and
//    apply the smaller of the two candidate inputs; the coordinator prices
//    the gap between the two candidates.
//  * resource allocation (primal): the coordinator hands out budgets t_i
//    that always sum to at most g_max; integral "equalizers" move budget
//    toward subsystems with higher opportunity cost, and the closing
//    subsystem takes the leftover unless its own marginal candidate is
//    smaller.
//
// All steps are pure (state in, state out) and use per-update gains: one
// call advances one coordination tick regardless of wall-clock period.

#include <vector>

#include "distopt/control.hpp"
#include "distopt/core.hpp"
#include "distopt/gradients.hpp"

namespace distopt::coord {

// ---- dual (price) scheme ----

struct DualCoordinatorState {
  Vec lambda;  // one price per coupling constraint
  Vec gain;    // per-update integral gain per constraint
};

// lambda' = max(0, lambda + gain .* (total_usage - g_max)).
DualCoordinatorState dual_coordinator_step(const DualCoordinatorState& s,
                                           const Vec& total_usage, const Vec& g_max);

struct LocalStepResult {
  Vec u;                                  // applied inputs
  Vec cv;                                 // controlled variable at the previous inputs
  std::vector<control::PiState> pi;       // updated controllers
};

// One local optimality update: evaluates c = Gamma + Phi*lambda at the
// current operating point and lets one PI per input drive it to zero (the
// PI output is the input command, clamped to the actuation range).
LocalStepResult dual_local_step(const grad::SubsystemModel& model, const Vec& u_prev,
                                const grad::LocalConditions& cond, const Vec& lambda,
                                const std::vector<control::PiState>& pi,
                                const grad::GradientOptions& opt);

// ---- dual scheme with constraint override ----

struct OverrideLocalState {
  std::vector<control::PiState> gradient_pi;  // optimality branch (one per input)
  control::PiState constraint_pi;             // feasibility branch (scalar)
};

struct OverrideLocalResult {
  Vec u;
  control::Branch branch = control::Branch::kGradient;
  double u_candidate_gradient = 0.0;
  double u_candidate_constraint = 0.0;
  Vec cv;
  OverrideLocalState state;
};

// Critical-subsystem update (single input, single constraint): the
// optimality branch computes u_c as in dual_local_step, the feasibility
// branch PI drives total usage to g_max, and the applied input is the
// minimum of the two (ties attribute to the constraint branch). The
// unselected optimality branch is anti-windup-tracked toward the applied
// input so it re-takes control bumplessly; the feasibility branch is left
// free to saturate, which keeps the candidate gap (u_c - u_g) meaningful
// as the coordinator's pricing signal.
OverrideLocalResult override_local_step(const grad::SubsystemModel& model,
                                        const Vec& u_prev,
                                        const grad::LocalConditions& cond,
                                        const Vec& lambda, double total_usage,
                                        double g_max, const OverrideLocalState& s,
                                        const grad::GradientOptions& opt);

struct OverrideCoordinatorState {
  Vec lambda;
  Vec gain;
};

// lambda' = max(0, lambda + gain .* (u_c - u_g)), one entry per critical
// subsystem/constraint pair.
OverrideCoordinatorState override_coordinator_step(const OverrideCoordinatorState& s,
                                                   const Vec& u_candidate_gradient,
                                                   const Vec& u_candidate_constraint);

// ---- primal (resource allocation) scheme ----

struct PrimalCoordinatorState {
  std::vector<Vec> alloc;   // N allocations, each sized m
  Vec marginal_alloc;       // closing subsystem's marginal candidate (m)
  std::size_t closing = 0;  // subsystem whose allocation closes the budget
  Vec equalizer_gain;       // per subsystem (closing entry ignored)
  Vec marginal_gain;        // per constraint row
};

struct PrimalStepResult {
  PrimalCoordinatorState state;
  bool scaled = false;  // proportional scale-down hit (feasibility rescue)
  std::vector<control::Branch> closing_branch;  // per row: constraint = leftover taken
};

// One allocation update from the subsystems' opportunity costs:
//   t_i  += K_i .* (lambda_closing - lambda_i)      (i != closing)
//   marg += K_marg .* (0 - lambda_closing)
//   t_closing = min(g_max - sum_{i != closing} t_i, marg)   entrywise
// Allocations clamp to [0, g_max]; if the leftover would go negative the
// other allocations are scaled down proportionally (flagged). The final
// allocations satisfy sum_i t_i <= g_max in floating point exactly.
PrimalStepResult primal_coordinator_step(const PrimalCoordinatorState& s,
                                         const std::vector<Vec>& lambda_all,
                                         const Vec& g_max);

// Shaves the largest allocation per constraint row until the
// floating-point sum is at or below the budget (a few ulps at most).
// primal_coordinator_step applies this to everything it publishes; initial
// even-split allocations need it too.
void enforce_budget(std::vector<Vec>& alloc, const Vec& g_max);

struct PrimalLocalState {
  std::vector<control::PiState> constraint_pi;  // inputs 0..m-1 track g_i -> t_i
  std::vector<control::PiState> reduced_pi;     // inputs m..n-1 drive N^T Gamma -> 0
};

struct PrimalLocalResult {
  Vec u;
  Vec cv;                            // g_i(u) - t_i mismatch per constraint
  MultiplierResult opportunity;      // lambda_i at the new operating point
  PrimalLocalState state;
};

// Local layer under allocation t_i. When the model's usage map is the
// input itself (identity), u = clamp(t_i) directly; otherwise the first m
// inputs regulate g_i(u) -> t_i and the remaining inputs drive the
// reduced gradient to zero.
PrimalLocalResult primal_local_step(const grad::SubsystemModel& model, const Vec& u_prev,
                                    const grad::LocalConditions& cond, const Vec& t_alloc,
                                    const PrimalLocalState& s,
                                    const grad::GradientOptions& opt);

// ---- strictly-local constraints ----

// Price update for a subsystem-private constraint h_i <= 0:
// mu' = max(0, mu + K_h .* h * dt). The local controlled variable then
// gains an extra (dh/du) * mu term, composable via
// local_controlled_variable.
Vec local_constraint_price_update(const Vec& mu, const Vec& h, const Vec& gain, double dt);

}  // namespace distopt::coord
