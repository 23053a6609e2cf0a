#include "distopt/sim.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "distopt/coordinators.hpp"
#include "distopt/log.hpp"

namespace distopt::sim {

Arch arch_from_string(const std::string& name) {
  if (name == "dual") return Arch::kDual;
  if (name == "dual-override") return Arch::kDualOverride;
  if (name == "primal") return Arch::kPrimal;
  if (name == "naive") return Arch::kNaive;
  if (name == "oracle-track") return Arch::kOracleTrack;
  throw ValidationError("unknown architecture '" + name +
                        "' (expected dual, dual-override, primal, naive, oracle-track)");
}

std::string arch_to_string(Arch arch) {
  switch (arch) {
    case Arch::kDual: return "dual";
    case Arch::kDualOverride: return "dual-override";
    case Arch::kPrimal: return "primal";
    case Arch::kNaive: return "naive";
    case Arch::kOracleTrack: return "oracle-track";
  }
  return "?";
}

namespace {

using control::Branch;
using control::PiState;

PiState make_pi(const scen::PiGains& g, double lo, double hi, double init) {
  PiState s;
  s.kp = g.kp;
  s.ki = g.ki;
  s.kaw = g.kaw;
  s.out_min = lo;
  s.out_max = hi;
  s.integral = init;
  return s;
}

struct SubRuntime {
  std::unique_ptr<grad::SubsystemModel> model;
  Vec u;  // current applied input (single entry for the bundled cases)
  std::vector<PiState> pis;            // dual / override optimality branch
  bool is_critical = false;
  std::size_t critical_slot = 0;
  coord::OverrideLocalState override_state;
  double u_candidate_gradient = 0.0;
  double u_candidate_constraint = 0.0;
  Branch branch = Branch::kGradient;
  coord::PrimalLocalState primal_state;
  Vec opportunity;  // last reported lambda_i
  plant::HouseState x{};  // energy-hub thermal state
};

}  // namespace

RunResult run_simulation(const scen::Scenario& s, const RunOptions& opt) {
  if (s.m != 1)
    throw ValidationError("run_simulation: the harness wires a single coupling constraint");
  if (opt.backoff_fraction < 0.0 || opt.backoff_fraction >= 1.0)
    throw ValidationError("run_simulation: backoff_fraction must lie in [0, 1)");

  const std::size_t n = s.n_subsystems();
  const double dt = s.dt_s;
  const double dt_h = dt / 3600.0;
  const long long steps = std::llround(s.horizon_s / dt);
  if (steps < 1) throw ValidationError("run_simulation: horizon shorter than one step");
  const int local_period = s.local_period_steps;
  const int coord_period = opt.coordinator_period_override > 0
                               ? opt.coordinator_period_override
                               : s.coordinator_period_locals;
  if (opt.coordinator_period_override > 0 &&
      opt.coordinator_period_override < 5)
    log::info("coordinator period override below the validated minimum; "
              "running a timescale-separation experiment");

  const Arch arch = opt.arch;
  const bool price_arch = arch == Arch::kDual || arch == Arch::kDualOverride ||
                          arch == Arch::kOracleTrack;
  const bool energy_hub = s.kind == scen::CaseKind::kEnergyHub;

  const scen::DisturbanceState d0 = scen::disturbance_at(s, 0.0);
  const double backoff_scale = 1.0 - opt.backoff_fraction;

  // Even split of the (effective) starting limit, clamped to actuation.
  Vec u_init(n);
  for (std::size_t i = 0; i < n; ++i)
    u_init[i] = std::clamp(d0.g_max[0] * backoff_scale / static_cast<double>(n),
                           s.subsystems[i].u_min, s.subsystems[i].u_max);

  std::vector<SubRuntime> subs(n);
  for (std::size_t i = 0; i < n; ++i) {
    subs[i].model = scen::make_model(s.subsystems[i]);
    subs[i].u = Vec{u_init[i]};
    subs[i].opportunity = Vec(s.m, 0.0);
    if (energy_hub)
      subs[i].x = plant::house_steady_state(u_init[i], d0.local[i].ambient,
                                            d0.local[i].irradiance, s.subsystems[i].house);
  }

  // Per-architecture controller state.
  coord::DualCoordinatorState dual_state;
  coord::OverrideCoordinatorState override_coord;
  coord::PrimalCoordinatorState primal_state;

  if (arch == Arch::kDual) {
    if (s.dual.local_pi.size() != n)
      throw ValidationError("run_simulation: scenario lacks dual tuning");
    dual_state.lambda = Vec(s.m, 0.0);
    dual_state.gain = s.dual.coordinator_gain;
    for (std::size_t i = 0; i < n; ++i)
      subs[i].pis = {make_pi(s.dual.local_pi[i], s.subsystems[i].u_min,
                             s.subsystems[i].u_max, u_init[i])};
  } else if (arch == Arch::kDualOverride) {
    if (s.override_tuning.local_pi.size() != n)
      throw ValidationError("run_simulation: scenario lacks override tuning");
    override_coord.lambda = Vec(s.override_tuning.critical.size(), 0.0);
    override_coord.gain = s.override_tuning.coordinator_gain;
    for (std::size_t i = 0; i < n; ++i) {
      const PiState grad_pi = make_pi(s.override_tuning.local_pi[i], s.subsystems[i].u_min,
                                      s.subsystems[i].u_max, u_init[i]);
      subs[i].pis = {grad_pi};
    }
    for (std::size_t slot = 0; slot < s.override_tuning.critical.size(); ++slot) {
      const std::size_t i = static_cast<std::size_t>(s.override_tuning.critical[slot]);
      subs[i].is_critical = true;
      subs[i].critical_slot = slot;
      subs[i].override_state.gradient_pi = subs[i].pis;
      subs[i].override_state.constraint_pi =
          make_pi(s.override_tuning.constraint_pi, s.subsystems[i].u_min,
                  s.subsystems[i].u_max, u_init[i]);
    }
  } else if (arch == Arch::kPrimal) {
    if (s.primal.equalizer_gains.size() != n - 1)
      throw ValidationError("run_simulation: scenario lacks primal tuning");
    primal_state.closing = static_cast<std::size_t>(s.primal.closing);
    primal_state.alloc.assign(n, Vec(s.m, 0.0));
    for (std::size_t i = 0; i < n; ++i)
      primal_state.alloc[i][0] = d0.g_max[0] * backoff_scale / static_cast<double>(n);
    coord::enforce_budget(primal_state.alloc, Vec{d0.g_max[0] * backoff_scale});
    primal_state.marginal_alloc = primal_state.alloc[primal_state.closing];
    primal_state.equalizer_gain.assign(n, 0.0);
    std::size_t gi = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == primal_state.closing) continue;
      primal_state.equalizer_gain[i] = s.primal.equalizer_gains[gi++];
    }
    primal_state.marginal_gain = Vec(s.m, s.primal.marginal_gain);
  }

  // Trace columns.
  Trace trace;
  trace.columns.push_back("time");
  auto push_per_sub = [&](const std::string& stem, const std::string& suffix) {
    for (std::size_t i = 0; i < n; ++i)
      trace.columns.push_back(stem + "[" + std::to_string(i) + "]" + suffix);
  };
  push_per_sub("u", "[0]");
  if (arch != Arch::kNaive) push_per_sub("cv", "[0]");
  if (price_arch) trace.columns.push_back("lambda[0]");
  if (arch == Arch::kPrimal) {
    push_per_sub("lambda_i", "[0]");
    push_per_sub("t_alloc", "[0]");
  }
  if (arch == Arch::kDualOverride || arch == Arch::kPrimal) push_per_sub("branch", "");
  trace.columns.push_back("g_total[0]");
  trace.columns.push_back("g_max[0]");
  push_per_sub("cost", "");
  if (energy_hub) {
    push_per_sub("T_r", "");
    trace.columns.push_back("Q");
  } else {
    push_per_sub("Ql", "");
  }
  trace.rows.reserve(static_cast<std::size_t>(steps));

  RunResult result;
  double battery_q = s.hub.battery_q0;
  Vec lambda_report(s.m, 0.0);  // shared price shown in the trace
  std::vector<Branch> primal_closing_branch(s.m, Branch::kGradient);

  scen::OracleOptions oracle_opt;  // fast mode for tracking

  for (long long k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    const scen::DisturbanceState d = scen::disturbance_at(s, t);
    Vec g_eff = d.g_max;
    for (double& v : g_eff) v *= backoff_scale;

    if (k % local_period == 0) {
      const long long ltick = k / local_period;
      const bool coord_tick = (ltick % coord_period == 0);

      double usage_now = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        usage_now += subs[i].model->steady_constraint(subs[i].u, d.local[i])[0];

      switch (arch) {
        case Arch::kDual: {
          if (coord_tick && ltick > 0)
            dual_state = coord::dual_coordinator_step(dual_state, Vec{usage_now}, g_eff);
          lambda_report = dual_state.lambda;
          for (std::size_t i = 0; i < n; ++i) {
            auto r = coord::dual_local_step(*subs[i].model, subs[i].u, d.local[i],
                                            dual_state.lambda, subs[i].pis, opt.gradients);
            subs[i].u = r.u;
            subs[i].pis = r.pi;
          }
          break;
        }
        case Arch::kDualOverride: {
          if (coord_tick && ltick > 0) {
            Vec uc(override_coord.lambda.size()), ug(override_coord.lambda.size());
            for (std::size_t i = 0; i < n; ++i)
              if (subs[i].is_critical) {
                uc[subs[i].critical_slot] = subs[i].u_candidate_gradient;
                ug[subs[i].critical_slot] = subs[i].u_candidate_constraint;
              }
            override_coord = coord::override_coordinator_step(override_coord, uc, ug);
          }
          lambda_report = override_coord.lambda;
          for (std::size_t i = 0; i < n; ++i) {
            if (subs[i].is_critical) {
              auto r = coord::override_local_step(*subs[i].model, subs[i].u, d.local[i],
                                                  override_coord.lambda, usage_now,
                                                  g_eff[0], subs[i].override_state,
                                                  opt.gradients);
              subs[i].u = r.u;
              subs[i].override_state = r.state;
              subs[i].u_candidate_gradient = r.u_candidate_gradient;
              subs[i].u_candidate_constraint = r.u_candidate_constraint;
              subs[i].branch = r.branch;
            } else {
              auto r = coord::dual_local_step(*subs[i].model, subs[i].u, d.local[i],
                                              override_coord.lambda, subs[i].pis,
                                              opt.gradients);
              subs[i].u = r.u;
              subs[i].pis = r.pi;
              subs[i].branch = Branch::kGradient;
            }
          }
          break;
        }
        case Arch::kPrimal: {
          if (coord_tick && ltick > 0) {
            std::vector<Vec> lambda_all(n);
            for (std::size_t i = 0; i < n; ++i) lambda_all[i] = subs[i].opportunity;
            auto r = coord::primal_coordinator_step(primal_state, lambda_all, g_eff);
            primal_state = r.state;
            primal_closing_branch = r.closing_branch;
            if (r.scaled) ++result.allocation_rescues;
          }
          for (std::size_t i = 0; i < n; ++i) {
            auto r = coord::primal_local_step(*subs[i].model, subs[i].u, d.local[i],
                                              primal_state.alloc[i], subs[i].primal_state,
                                              opt.gradients);
            subs[i].u = r.u;
            subs[i].primal_state = r.state;
            subs[i].opportunity = r.opportunity.value;
            subs[i].branch =
                (i == primal_state.closing) ? primal_closing_branch[0] : Branch::kGradient;
          }
          break;
        }
        case Arch::kNaive: {
          const Vec shares = scen::naive_allocation(s, t);
          for (std::size_t i = 0; i < n; ++i)
            subs[i].u = Vec{std::clamp(shares[i], s.subsystems[i].u_min,
                                       s.subsystems[i].u_max)};
          break;
        }
        case Arch::kOracleTrack: {
          if (coord_tick) {
            const scen::OracleSolution sol = scen::centralized_oracle(s, t, oracle_opt);
            lambda_report = sol.lambda;
            for (std::size_t i = 0; i < n; ++i)
              subs[i].u = Vec{std::clamp(sol.u[i][0], s.subsystems[i].u_min,
                                         s.subsystems[i].u_max)};
          }
          break;
        }
      }
    }

    // ---- record the row at time t ----
    Vec row;
    row.reserve(trace.columns.size());
    row.push_back(t);
    for (std::size_t i = 0; i < n; ++i) row.push_back(subs[i].u[0]);
    if (arch != Arch::kNaive) {
      for (std::size_t i = 0; i < n; ++i) {
        if (arch == Arch::kPrimal) {
          const double g_now = subs[i].model->steady_constraint(subs[i].u, d.local[i])[0];
          row.push_back(g_now - primal_state.alloc[i][0]);
        } else {
          const grad::GradientPair g =
              grad::local_gradients(*subs[i].model, subs[i].u, d.local[i], opt.gradients);
          row.push_back(grad::local_controlled_variable(g.gamma, g.phi, lambda_report)[0]);
        }
      }
    }
    if (price_arch) row.push_back(lambda_report[0]);
    if (arch == Arch::kPrimal) {
      for (std::size_t i = 0; i < n; ++i) {
        const grad::GradientPair g =
            grad::local_gradients(*subs[i].model, subs[i].u, d.local[i], opt.gradients);
        row.push_back(grad::opportunity_cost(g.gamma, g.phi).value[0]);
      }
      for (std::size_t i = 0; i < n; ++i) row.push_back(primal_state.alloc[i][0]);
    }
    if (arch == Arch::kDualOverride || arch == Arch::kPrimal)
      for (std::size_t i = 0; i < n; ++i)
        row.push_back(static_cast<double>(static_cast<int>(subs[i].branch)));
    double g_total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      g_total += subs[i].model->steady_constraint(subs[i].u, d.local[i])[0];
    row.push_back(g_total);
    row.push_back(d.g_max[0]);
    for (std::size_t i = 0; i < n; ++i) {
      if (energy_hub) {
        const double e = subs[i].x[1] - d.local[i].setpoint;
        row.push_back(e * e);
      } else {
        row.push_back(-s.subsystems[i].well.price *
                      plant::well_production(subs[i].u[0], d.local[i].valve,
                                             s.subsystems[i].well));
      }
    }
    if (energy_hub) {
      for (std::size_t i = 0; i < n; ++i) row.push_back(subs[i].x[1]);
      row.push_back(battery_q);
    } else {
      for (std::size_t i = 0; i < n; ++i)
        row.push_back(plant::well_production(subs[i].u[0], d.local[i].valve,
                                             s.subsystems[i].well));
    }
    trace.rows.push_back(std::move(row));

    // ---- integrate the plant over [t, t+dt) ----
    if (energy_hub) {
      for (std::size_t i = 0; i < n; ++i) {
        const double u_i = subs[i].u[0];
        const plant::HouseParams& hp = s.subsystems[i].house;
        const double ta = d.local[i].ambient;
        const double phi = d.local[i].irradiance;
        subs[i].x = plant::rk4_step<4>(subs[i].x, dt_h, [&](const plant::HouseState& x) {
          return plant::house_derivatives(x, u_i, ta, phi, hp);
        });
      }
      const plant::BatteryResult br = plant::battery_step(battery_q, d.p_solar, g_total, dt_h);
      if (br.clamped) ++result.battery_clamp_events;
      battery_q = br.q;
    }
  }

  result.trace = std::move(trace);
  return result;
}

}  // namespace distopt::sim
