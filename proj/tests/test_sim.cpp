#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>

#include "distopt/sim.hpp"
#include "distopt/trace.hpp"

using namespace distopt;
using sim::Arch;

namespace {

const std::string kHubPath = DISTOPT_DATA_DIR "/energy_hub.json";
const std::string kGasPath = DISTOPT_DATA_DIR "/gas_lift.json";

// Night-time energy-hub operating point (limit 26 kW, active constraint).
// Optimum for these frozen conditions, cross-checked against the
// centralized solver pins in the oracle tests.
constexpr double kNightLambda = 21.52128411;
constexpr double kNightU0 = 8.6004834294;
constexpr double kNightU1 = 9.7130784563;
constexpr double kNightU2 = 7.6864381143;

scen::Scenario frozen_hub(double horizon_s) {
  const scen::Scenario s = scen::load_scenario(kHubPath);
  return scen::freeze_disturbances(s, 95400.0, horizon_s);
}

scen::Scenario frozen_gas(double horizon_s) {
  const scen::Scenario s = scen::load_scenario(kGasPath);
  return scen::freeze_disturbances(s, 0.0, horizon_s);
}

double last(const sim::Trace& t, const std::string& name) {
  return t.at(t.rows.size() - 1, name);
}

}  // namespace

// ---- architecture names ----

TEST_CASE("architecture names round-trip") {
  for (const char* name : {"dual", "dual-override", "primal", "naive", "oracle-track"})
    CHECK(sim::arch_to_string(sim::arch_from_string(name)) == name);
  CHECK_THROWS_AS((void)sim::arch_from_string("central"), ValidationError);
}

// ---- guardrails ----

TEST_CASE("the harness rejects unsupported configurations") {
  scen::Scenario s = frozen_hub(3600.0);
  sim::RunOptions opt;

  scen::Scenario multi = s;
  multi.m = 2;
  CHECK_THROWS_AS((void)sim::run_simulation(multi, opt), ValidationError);

  opt.backoff_fraction = 1.0;
  CHECK_THROWS_AS((void)sim::run_simulation(s, opt), ValidationError);
  opt.backoff_fraction = -0.1;
  CHECK_THROWS_AS((void)sim::run_simulation(s, opt), ValidationError);
  opt.backoff_fraction = 0.0;

  scen::Scenario tiny = s;
  tiny.horizon_s = 1.0;  // shorter than one plant step
  CHECK_THROWS_AS((void)sim::run_simulation(tiny, opt), ValidationError);
}

// ---- dual architecture on frozen conditions ----

TEST_CASE("dual run settles at the constrained optimum") {
  const scen::Scenario s = frozen_hub(28800.0);
  sim::RunOptions opt;
  opt.arch = Arch::kDual;
  const sim::RunResult r = sim::run_simulation(s, opt);
  const sim::Trace& t = r.trace;

  REQUIRE(t.rows.size() == 480);
  REQUIRE(t.has_col("lambda[0]"));
  REQUIRE(t.has_col("cv[0][0]"));
  REQUIRE(t.has_col("T_r[2]"));
  REQUIRE(t.has_col("Q"));
  CHECK_FALSE(t.has_col("t_alloc[0][0]"));

  CHECK(t.at(0, "time") == 0.0);
  CHECK(t.at(1, "time") == 60.0);
  CHECK(t.at(0, "g_max[0]") == doctest::Approx(26.0));

  CHECK(last(t, "lambda[0]") == doctest::Approx(kNightLambda).epsilon(5e-3));
  CHECK(last(t, "u[0][0]") == doctest::Approx(kNightU0).epsilon(2e-2));
  CHECK(last(t, "u[1][0]") == doctest::Approx(kNightU1).epsilon(2e-2));
  CHECK(last(t, "u[2][0]") == doctest::Approx(kNightU2).epsilon(2e-2));
  CHECK(last(t, "g_total[0]") == doctest::Approx(26.0).epsilon(2e-3));
  for (int i = 0; i < 3; ++i)
    CHECK(std::fabs(last(t, "cv[" + std::to_string(i) + "][0]")) < 0.1);
}

TEST_CASE("identical runs produce byte-identical traces") {
  const scen::Scenario s = frozen_hub(7200.0);
  sim::RunOptions opt;
  opt.arch = Arch::kDual;
  const std::string a = sim::trace_to_csv(sim::run_simulation(s, opt).trace);
  const std::string b = sim::trace_to_csv(sim::run_simulation(s, opt).trace);
  CHECK(a == b);
}

TEST_CASE("resource back-off shifts the operating point, not the reported limit") {
  const scen::Scenario s = frozen_hub(28800.0);
  sim::RunOptions opt;
  opt.arch = Arch::kDual;
  opt.backoff_fraction = 0.25;
  const sim::Trace t = sim::run_simulation(s, opt).trace;
  CHECK(last(t, "g_max[0]") == doctest::Approx(26.0));
  CHECK(last(t, "g_total[0]") == doctest::Approx(26.0 * 0.75).epsilon(2e-3));
}

TEST_CASE("coordinator cadence override changes the price only on its own ticks") {
  const scen::Scenario s = frozen_hub(3600.0);
  sim::RunOptions opt;
  opt.arch = Arch::kDual;
  opt.coordinator_period_override = 3;
  const sim::Trace t = sim::run_simulation(s, opt).trace;
  // local tick every row (local_period_steps = 1): lambda may move only
  // when the row index is a coordinator multiple.
  bool moved = false;
  for (std::size_t r = 1; r < t.rows.size(); ++r) {
    const double prev = t.at(r - 1, "lambda[0]");
    const double cur = t.at(r, "lambda[0]");
    if (r % 3 != 0)
      CHECK(cur == prev);
    else if (cur != prev)
      moved = true;
  }
  CHECK(moved);
}

// ---- override architecture ----

TEST_CASE("override run reaches the same constrained optimum and tags its branch") {
  const scen::Scenario s = frozen_hub(28800.0);
  sim::RunOptions opt;
  opt.arch = Arch::kDualOverride;
  const sim::Trace t = sim::run_simulation(s, opt).trace;

  REQUIRE(t.has_col("branch[0]"));
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const double b = t.at(r, "branch[0]");
    CHECK((b == 0.0 || b == 1.0));
    // only subsystem 0 is critical; the others always report gradient
    CHECK(t.at(r, "branch[1]") == 0.0);
    CHECK(t.at(r, "branch[2]") == 0.0);
  }

  CHECK(last(t, "lambda[0]") == doctest::Approx(kNightLambda).epsilon(2e-2));
  CHECK(last(t, "g_total[0]") == doctest::Approx(26.0).epsilon(2e-3));
  CHECK(last(t, "u[0][0]") == doctest::Approx(kNightU0).epsilon(5e-2));
}

// ---- primal architecture ----

TEST_CASE("primal run never exceeds the limit and equalizes opportunity costs") {
  const scen::Scenario s = frozen_hub(28800.0);
  sim::RunOptions opt;
  opt.arch = Arch::kPrimal;
  const sim::Trace t = sim::run_simulation(s, opt).trace;

  REQUIRE(t.has_col("lambda_i[0][0]"));
  REQUIRE(t.has_col("t_alloc[2][0]"));
  CHECK_FALSE(t.has_col("lambda[0]"));

  double worst = -1e300;
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    worst = std::max(worst, t.at(r, "g_total[0]") - t.at(r, "g_max[0]"));
  CHECK(worst <= 0.0);  // allocation is a hard budget, row by row

  const double l0 = last(t, "lambda_i[0][0]");
  const double l1 = last(t, "lambda_i[1][0]");
  const double l2 = last(t, "lambda_i[2][0]");
  CHECK(l0 == doctest::Approx(kNightLambda).epsilon(2e-2));
  CHECK(std::fabs(l1 - l0) < 0.3);
  CHECK(std::fabs(l2 - l0) < 0.3);
  CHECK(last(t, "g_total[0]") == doctest::Approx(26.0).epsilon(5e-3));
  // the closing subsystem ends on the constraint branch (limit binds)
  CHECK(last(t, "branch[0]") == 1.0);
}

// ---- naive and oracle-track ----

TEST_CASE("naive run applies an even split and carries no coordination columns") {
  const scen::Scenario s = frozen_hub(3600.0);
  sim::RunOptions opt;
  opt.arch = Arch::kNaive;
  const sim::Trace t = sim::run_simulation(s, opt).trace;
  CHECK_FALSE(t.has_col("lambda[0]"));
  CHECK_FALSE(t.has_col("cv[0][0]"));
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    for (int i = 0; i < 3; ++i)
      CHECK(t.at(r, "u[" + std::to_string(i) + "][0]") ==
            doctest::Approx(26.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("oracle-track pins the centralized price and inputs from the first row") {
  const scen::Scenario s = frozen_hub(3600.0);
  sim::RunOptions opt;
  opt.arch = Arch::kOracleTrack;
  const sim::Trace t = sim::run_simulation(s, opt).trace;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    CHECK(t.at(r, "lambda[0]") == doctest::Approx(kNightLambda).epsilon(1e-6));
    CHECK(t.at(r, "u[0][0]") == doctest::Approx(kNightU0).epsilon(1e-6));
    CHECK(t.at(r, "u[1][0]") == doctest::Approx(kNightU1).epsilon(1e-6));
    CHECK(t.at(r, "u[2][0]") == doctest::Approx(kNightU2).epsilon(1e-6));
  }
}

// ---- gas network ----

TEST_CASE("dual run on the gas network settles at its constrained optimum") {
  const scen::Scenario s = frozen_gas(1800.0);
  sim::RunOptions opt;
  opt.arch = Arch::kDual;
  const sim::Trace t = sim::run_simulation(s, opt).trace;

  REQUIRE(t.rows.size() == 18000);
  REQUIRE(t.has_col("Ql[0]"));
  CHECK_FALSE(t.has_col("Q"));

  // optimum for all valves open, limit 10 (oracle pins)
  CHECK(last(t, "lambda[0]") == doctest::Approx(18.37168142).epsilon(1e-2));
  CHECK(last(t, "u[0][0]") == doctest::Approx(2.407079646).epsilon(3e-2));
  CHECK(last(t, "u[1][0]") == doctest::Approx(3.477876106).epsilon(3e-2));
  CHECK(last(t, "u[2][0]") == doctest::Approx(4.115044248).epsilon(3e-2));
  CHECK(last(t, "g_total[0]") == doctest::Approx(10.0).epsilon(2e-3));

  // cost is the negative sales value of the produced gas
  const std::size_t r = t.rows.size() - 1;
  CHECK(t.at(r, "cost[1]") == doctest::Approx(-25.0 * t.at(r, "Ql[1]")).epsilon(1e-9));
}
