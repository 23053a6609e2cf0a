#pragma once

// Centralized steady-state reference: solves
//   min sum_i J_i(u_i)  s.t.  sum_i u_i <= g_max, u_i in [u_min, u_max]
// at a frozen disturbance instant by bisecting the scalar multiplier of
// the coupling constraint. Per-subsystem inner minimization is closed-form
// for the linear thermal case and golden-section for the concave well
// case. Optionally cross-checks the result against a brute-force grid
// search and rejects non-convex disagreement.

#include "distopt/scenario.hpp"

namespace distopt::scen {

struct OracleSolution {
  std::vector<Vec> u;       // optimal input per subsystem
  Vec lambda;               // multiplier per coupling constraint
  std::vector<bool> active; // whether each constraint binds
  double objective = 0.0;   // summed steady-state cost at the optimum
  double residual_primal = 0.0;          // max(0, total - g_max)
  double residual_complementarity = 0.0; // |lambda * (total - g_max)|
};

struct OracleOptions {
  bool cross_check = false;   // run the grid search and compare
  double grid_step = 1e-3;    // fine grid resolution
  double agree_tol = 1e-2;    // max |u_grid - u_oracle| allowed
};

// Throws OracleError when KKT residuals exceed 1e-8 or (with cross_check)
// when the grid search disagrees beyond tolerance. Supports one coupling
// constraint; the cross-check supports up to three subsystems.
OracleSolution centralized_oracle(const Scenario& s, double t,
                                  const OracleOptions& opt = {});

}  // namespace distopt::scen
