#include "distopt/coordinators.hpp"

#include <algorithm>
#include <cmath>

namespace distopt::coord {

using control::Branch;
using control::PiResult;
using control::PiState;

DualCoordinatorState dual_coordinator_step(const DualCoordinatorState& s,
                                           const Vec& total_usage, const Vec& g_max) {
  if (s.lambda.size() != s.gain.size() || s.lambda.size() != total_usage.size() ||
      s.lambda.size() != g_max.size())
    throw UsageError("dual_coordinator_step: dimension mismatch");
  Vec e(total_usage.size());
  for (std::size_t k = 0; k < e.size(); ++k) e[k] = total_usage[k] - g_max[k];
  DualCoordinatorState next = s;
  next.lambda = control::clamped_integral_step(s.lambda, e, s.gain, 1.0);
  return next;
}

LocalStepResult dual_local_step(const grad::SubsystemModel& model, const Vec& u_prev,
                                const grad::LocalConditions& cond, const Vec& lambda,
                                const std::vector<PiState>& pi,
                                const grad::GradientOptions& opt) {
  const std::size_t n = model.n_inputs();
  if (pi.size() != n) throw UsageError("dual_local_step: one PI per input required");
  const grad::GradientPair g = grad::local_gradients(model, u_prev, cond, opt);
  LocalStepResult r;
  r.cv = grad::local_controlled_variable(g.gamma, g.phi, lambda);
  r.u.assign(n, 0.0);
  r.pi = pi;
  for (std::size_t j = 0; j < n; ++j) {
    const PiResult step = control::pi_step(pi[j], 0.0, r.cv[j], 1.0);
    r.u[j] = step.output;
    r.pi[j] = step.state;
  }
  return r;
}

OverrideLocalResult override_local_step(const grad::SubsystemModel& model,
                                        const Vec& u_prev,
                                        const grad::LocalConditions& cond,
                                        const Vec& lambda, double total_usage,
                                        double g_max, const OverrideLocalState& s,
                                        const grad::GradientOptions& opt) {
  if (model.n_inputs() != 1 || model.n_constraints() != 1)
    throw UsageError("override_local_step: needs a single-input, single-constraint subsystem");
  if (s.gradient_pi.size() != 1)
    throw UsageError("override_local_step: one optimality PI required");

  const grad::GradientPair g = grad::local_gradients(model, u_prev, cond, opt);
  OverrideLocalResult r;
  r.cv = grad::local_controlled_variable(g.gamma, g.phi, lambda);
  r.state = s;

  const PiResult grad_step = control::pi_step(s.gradient_pi[0], 0.0, r.cv[0], 1.0);
  const PiResult cons_step = control::pi_step(s.constraint_pi, g_max, total_usage, 1.0);
  r.u_candidate_gradient = grad_step.output;
  r.u_candidate_constraint = cons_step.output;
  r.state.gradient_pi[0] = grad_step.state;
  r.state.constraint_pi = cons_step.state;

  const control::SelectResult sel =
      control::min_select(r.u_candidate_gradient, r.u_candidate_constraint);
  r.u = Vec{sel.value};
  r.branch = sel.branch;
  if (r.branch == Branch::kConstraint) {
    // Keep the optimality branch primed at the applied input so it can
    // re-take control without a bump once the price catches up.
    r.state.gradient_pi[0] =
        control::pi_track(r.state.gradient_pi[0], sel.value, grad_step.raw, 1.0);
  }
  return r;
}

OverrideCoordinatorState override_coordinator_step(const OverrideCoordinatorState& s,
                                                   const Vec& u_candidate_gradient,
                                                   const Vec& u_candidate_constraint) {
  if (s.lambda.size() != s.gain.size() ||
      s.lambda.size() != u_candidate_gradient.size() ||
      s.lambda.size() != u_candidate_constraint.size())
    throw UsageError("override_coordinator_step: dimension mismatch");
  Vec e(s.lambda.size());
  for (std::size_t k = 0; k < e.size(); ++k)
    e[k] = u_candidate_gradient[k] - u_candidate_constraint[k];
  OverrideCoordinatorState next = s;
  next.lambda = control::clamped_integral_step(s.lambda, e, s.gain, 1.0);
  return next;
}

PrimalStepResult primal_coordinator_step(const PrimalCoordinatorState& s,
                                         const std::vector<Vec>& lambda_all,
                                         const Vec& g_max) {
  const std::size_t n_sub = s.alloc.size();
  const std::size_t m = g_max.size();
  if (lambda_all.size() != n_sub)
    throw UsageError("primal_coordinator_step: one opportunity cost per subsystem required");
  if (s.closing >= n_sub) throw UsageError("primal_coordinator_step: closing index out of range");
  if (s.equalizer_gain.size() != n_sub || s.marginal_gain.size() != m ||
      s.marginal_alloc.size() != m)
    throw UsageError("primal_coordinator_step: gain/state dimension mismatch");
  for (std::size_t i = 0; i < n_sub; ++i)
    if (s.alloc[i].size() != m || lambda_all[i].size() != m)
      throw UsageError("primal_coordinator_step: allocation dimension mismatch");

  PrimalStepResult r;
  r.state = s;
  const Vec& lam_close = lambda_all[s.closing];

  for (std::size_t i = 0; i < n_sub; ++i) {
    if (i == s.closing) continue;
    for (std::size_t k = 0; k < m; ++k) {
      const double next =
          s.alloc[i][k] + s.equalizer_gain[i] * (lam_close[k] - lambda_all[i][k]);
      if (!std::isfinite(next)) throw FaultError("primal_coordinator_step: non-finite allocation");
      r.state.alloc[i][k] = std::clamp(next, 0.0, g_max[k]);
    }
  }
  for (std::size_t k = 0; k < m; ++k) {
    const double next =
        s.marginal_alloc[k] + s.marginal_gain[k] * (0.0 - lam_close[k]);
    if (!std::isfinite(next)) throw FaultError("primal_coordinator_step: non-finite allocation");
    r.state.marginal_alloc[k] = std::clamp(next, 0.0, g_max[k]);
  }

  r.closing_branch.assign(m, Branch::kGradient);
  for (std::size_t k = 0; k < m; ++k) {
    double others = 0.0;
    for (std::size_t i = 0; i < n_sub; ++i)
      if (i != s.closing) others += r.state.alloc[i][k];
    double leftover = g_max[k] - others;
    if (leftover < 0.0) {
      // Equalizers overshot the budget: shrink everyone proportionally
      // back onto the simplex and hand the closing subsystem zero.
      r.scaled = true;
      const double f = (others > 0.0) ? g_max[k] / others : 0.0;
      for (std::size_t i = 0; i < n_sub; ++i)
        if (i != s.closing) r.state.alloc[i][k] *= f;
      leftover = 0.0;
    }
    const control::SelectResult sel =
        control::min_select(r.state.marginal_alloc[k], leftover);
    r.state.alloc[s.closing][k] = std::max(0.0, sel.value);
    r.closing_branch[k] = sel.branch;
  }

  // Floating-point guard: the published allocations must never sum above
  // the budget, even by rounding.
  enforce_budget(r.state.alloc, g_max);
  return r;
}

void enforce_budget(std::vector<Vec>& alloc, const Vec& g_max) {
  const std::size_t n_sub = alloc.size();
  for (std::size_t k = 0; k < g_max.size(); ++k) {
    for (int iter = 0; iter < 32; ++iter) {
      double total = 0.0;
      for (std::size_t i = 0; i < n_sub; ++i) total += alloc[i][k];
      const double excess = total - g_max[k];
      if (excess <= 0.0) break;
      std::size_t big = 0;
      for (std::size_t i = 1; i < n_sub; ++i)
        if (alloc[i][k] > alloc[big][k]) big = i;
      const double before = alloc[big][k];
      alloc[big][k] = std::max(0.0, before - excess);
      if (alloc[big][k] == before) alloc[big][k] = std::nextafter(before, 0.0);
    }
  }
}

PrimalLocalResult primal_local_step(const grad::SubsystemModel& model, const Vec& u_prev,
                                    const grad::LocalConditions& cond, const Vec& t_alloc,
                                    const PrimalLocalState& s,
                                    const grad::GradientOptions& opt) {
  const std::size_t n = model.n_inputs();
  const std::size_t m = model.n_constraints();
  if (t_alloc.size() != m) throw UsageError("primal_local_step: allocation arity mismatch");
  if (u_prev.size() != n) throw UsageError("primal_local_step: input arity mismatch");

  PrimalLocalResult r;
  r.state = s;

  if (model.identity_usage()) {
    r.u.assign(n, 0.0);
    for (std::size_t j = 0; j < n; ++j)
      r.u[j] = std::clamp(t_alloc[j], model.input_min(j), model.input_max(j));
  } else {
    if (s.constraint_pi.size() != m || s.reduced_pi.size() != n - m)
      throw UsageError("primal_local_step: controller arity mismatch");
    const grad::GradientPair g = grad::local_gradients(model, u_prev, cond, opt);
    const Vec usage = model.steady_constraint(u_prev, cond);
    r.u = u_prev;
    for (std::size_t k = 0; k < m; ++k) {
      const PiResult step = control::pi_step(s.constraint_pi[k], t_alloc[k], usage[k], 1.0);
      r.u[k] = step.output;
      r.state.constraint_pi[k] = step.state;
    }
    if (n > m) {
      const Vec rg = grad::reduced_gradient(g.gamma, g.phi);
      for (std::size_t j = 0; j < n - m; ++j) {
        const PiResult step = control::pi_step(s.reduced_pi[j], 0.0, rg[j], 1.0);
        r.u[m + j] = step.output;
        r.state.reduced_pi[j] = step.state;
      }
    }
  }

  const grad::GradientPair g_new = grad::local_gradients(model, r.u, cond, opt);
  r.opportunity = grad::opportunity_cost(g_new.gamma, g_new.phi);
  const Vec usage_new = model.steady_constraint(r.u, cond);
  r.cv.assign(m, 0.0);
  for (std::size_t k = 0; k < m; ++k) r.cv[k] = usage_new[k] - t_alloc[k];
  return r;
}

Vec local_constraint_price_update(const Vec& mu, const Vec& h, const Vec& gain, double dt) {
  return control::clamped_integral_step(mu, h, gain, dt);
}

}  // namespace distopt::coord
