#include "distopt/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace distopt::scen {

namespace {

// One subsystem reduced to a scalar steady cost curve at frozen conditions.
struct CostCurve {
  double lo = 0.0;
  double hi = 0.0;
  std::function<double(double)> cost;
  std::function<double(double)> argmin_priced;  // u minimizing cost(u) + lambda*u
};

CostCurve build_curve(const Scenario& s, const SubsystemSpec& sub,
                      const grad::LocalConditions& cond) {
  CostCurve c;
  c.lo = sub.u_min;
  c.hi = sub.u_max;
  if (s.kind == CaseKind::kEnergyHub) {
    const plant::HouseState base =
        plant::house_steady_state(0.0, cond.ambient, cond.irradiance, sub.house);
    const double t0 = base[1];
    const double gain = plant::house_dc_gain(sub.house);
    const double tsp = cond.setpoint;
    c.cost = [t0, gain, tsp](double u) {
      const double e = t0 + gain * u - tsp;
      return e * e;
    };
    const double lo = c.lo, hi = c.hi;
    c.argmin_priced = [t0, gain, tsp, lo, hi](double lambda) {
      // d/du [(t0 + G u - tsp)^2 + lambda u] = 0
      const double u = (tsp - t0) / gain - lambda / (2.0 * gain * gain);
      return std::clamp(u, lo, hi);
    };
  } else {
    const plant::WellParams w = sub.well;
    const double valve = cond.valve;
    c.hi = std::min(c.hi, plant::well_admissible_max(w));
    c.cost = [w, valve](double u) { return -w.price * plant::well_production(u, valve, w); };
    const double lo = c.lo, hi = c.hi;
    c.argmin_priced = [w, valve, lo, hi](double lambda) {
      // d/du [-price*valve*(q0 + alpha u - beta u^2) + lambda u] = 0
      const double scale = w.price * valve;
      if (scale <= 0.0) return lo;  // shut valve: only the price term is left
      const double u = (w.alpha - lambda / scale) / (2.0 * w.beta);
      return std::clamp(u, lo, hi);
    };
  }
  return c;
}

// Best grid point of curve.cost on the step lattice within [curve.lo,
// min(curve.hi, budget)]. The curves are unimodal, so checking the lattice
// neighbors of the unconstrained minimizer plus the interval ends is the
// exact lattice argmin.
double grid_argmin(const CostCurve& c, double budget, double step) {
  const double hi = std::min(c.hi, budget);
  if (hi < c.lo) return c.lo;  // caller filters infeasible budgets
  const double u_free = c.argmin_priced(0.0);
  Vec candidates{c.lo, hi};
  const double base = std::floor((u_free - c.lo) / step) * step + c.lo;
  for (int off = -1; off <= 2; ++off) {
    const double u = base + off * step;
    if (u >= c.lo && u <= hi) candidates.push_back(u);
  }
  double best_u = candidates[0];
  double best_f = c.cost(best_u);
  for (double u : candidates) {
    const double f = c.cost(u);
    if (f < best_f) {
      best_f = f;
      best_u = u;
    }
  }
  return best_u;
}

struct GridResult {
  Vec u;
  double objective = 0.0;
};

// Exhaustive search over a lattice: free loops over the first N-1 inputs,
// the last input takes its exact lattice argmin under the leftover budget.
GridResult grid_search(const std::vector<CostCurve>& curves, double g_max, double step,
                       const Vec& center, double window) {
  const std::size_t n = curves.size();
  GridResult best;
  best.u.assign(n, 0.0);
  best.objective = 1e300;

  std::vector<Vec> axes(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double lo = std::max(curves[i].lo, center.empty() ? curves[i].lo : center[i] - window);
    const double hi = std::min(curves[i].hi, center.empty() ? curves[i].hi : center[i] + window);
    for (double u = lo; u <= hi + 1e-12; u += step) axes[i].push_back(std::min(u, hi));
    if (axes[i].empty()) axes[i].push_back(lo);
  }

  Vec point(n, 0.0);
  std::function<void(std::size_t, double, double)> walk = [&](std::size_t i, double used,
                                                              double partial_cost) {
    if (i + 1 == n) {
      const double budget = g_max - used;
      if (budget < curves[i].lo - 1e-12) return;
      const double u_last = grid_argmin(curves[i], budget, step);
      if (u_last > budget + 1e-12) return;
      const double total = partial_cost + curves[i].cost(u_last);
      if (total < best.objective) {
        best.objective = total;
        best.u = point;
        best.u[i] = u_last;
      }
      return;
    }
    for (double u : axes[i]) {
      if (used + u > g_max + 1e-12) continue;
      point[i] = u;
      walk(i + 1, used + u, partial_cost + curves[i].cost(u));
    }
  };
  walk(0, 0.0, 0.0);
  if (best.objective >= 1e300) throw OracleError("oracle grid search: no feasible point");
  return best;
}

}  // namespace

OracleSolution centralized_oracle(const Scenario& s, double t, const OracleOptions& opt) {
  if (s.m != 1)
    throw UsageError("centralized_oracle: supports a single coupling constraint");
  const DisturbanceState d = disturbance_at(s, t);
  const double g_max = d.g_max[0];
  const std::size_t n = s.n_subsystems();

  std::vector<CostCurve> curves;
  curves.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    curves.push_back(build_curve(s, s.subsystems[i], d.local[i]));

  auto usage_at = [&](double lambda, Vec& u_out) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      u_out[i] = curves[i].argmin_priced(lambda);
      total += u_out[i];
    }
    return total;
  };

  Vec u(n, 0.0);
  double lambda = 0.0;
  double total = usage_at(0.0, u);

  if (total > g_max) {
    // Bracket, then bisect: usage is continuous and non-increasing in
    // lambda, and goes to the lower actuation bound for large prices.
    double lo = 0.0, hi = 1.0;
    Vec u_hi(n, 0.0);
    int guard = 0;
    while (usage_at(hi, u_hi) > g_max) {
      hi *= 2.0;
      if (++guard > 200) throw OracleError("centralized_oracle: cannot bracket multiplier");
    }
    const double tol = 1e-11 * std::max(1.0, g_max);
    for (int it = 0; it < 200; ++it) {
      lambda = 0.5 * (lo + hi);
      total = usage_at(lambda, u);
      if (std::fabs(total - g_max) <= tol) break;
      if (total > g_max)
        lo = lambda;
      else
        hi = lambda;
    }
    total = usage_at(lambda, u);
  }

  OracleSolution sol;
  sol.u.resize(n);
  for (std::size_t i = 0; i < n; ++i) sol.u[i] = Vec{u[i]};
  sol.lambda = Vec{lambda};
  sol.active = {lambda > 0.0};
  sol.objective = 0.0;
  for (std::size_t i = 0; i < n; ++i) sol.objective += curves[i].cost(u[i]);
  sol.residual_primal = std::max(0.0, total - g_max);
  sol.residual_complementarity = std::fabs(lambda * (total - g_max));

  if (sol.residual_primal > 1e-8 || sol.residual_complementarity > 1e-8)
    throw OracleError("centralized_oracle: KKT residuals above tolerance");

  if (opt.cross_check) {
    if (n > 3) throw UsageError("centralized_oracle: grid cross-check supports up to 3 subsystems");
    double span = 0.0;
    for (const auto& c : curves) span = std::max(span, c.hi - c.lo);
    const double coarse = std::max(opt.grid_step, span / 256.0);
    const GridResult rough = grid_search(curves, g_max, coarse, {}, 0.0);
    const GridResult fine =
        grid_search(curves, g_max, opt.grid_step, rough.u, 2.5 * coarse);
    for (std::size_t i = 0; i < n; ++i)
      if (std::fabs(fine.u[i] - u[i]) > opt.agree_tol)
        throw OracleError("centralized_oracle: grid search disagrees with KKT point");
    if (fine.objective < sol.objective - 1e-6 * (1.0 + std::fabs(sol.objective)))
      throw OracleError("centralized_oracle: grid search found a better point (non-convex?)");
  }
  return sol;
}

}  // namespace distopt::scen
