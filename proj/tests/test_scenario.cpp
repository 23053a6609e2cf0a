#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>
#include <string>

#include "distopt/scenario.hpp"

using namespace distopt;
using namespace distopt::scen;
using nlohmann::ordered_json;

namespace {

const std::string kHubPath = DISTOPT_DATA_DIR "/energy_hub.json";
const std::string kGasPath = DISTOPT_DATA_DIR "/gas_lift.json";

std::string slurp(const std::string& path) {
  FILE* f = std::fopen(path.c_str(), "rb");
  REQUIRE(f != nullptr);
  std::string out;
  char buf[4096];
  std::size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) out.append(buf, n);
  std::fclose(f);
  return out;
}

}  // namespace

// ---- bundled scenarios ----

TEST_CASE("the bundled energy-hub scenario loads with the expected shape") {
  const Scenario s = load_scenario(kHubPath);
  CHECK(s.kind == CaseKind::kEnergyHub);
  CHECK(s.n_subsystems() == 3);
  CHECK(s.horizon_s == 432000.0);
  CHECK(s.dt_s == 60.0);
  CHECK(s.m == 1);
  CHECK(s.local_period_steps == 1);
  CHECK(s.coordinator_period_locals == 10);
  CHECK(s.hub.battery_q0 == 1200.0);
  CHECK(s.hub.solar_wattage == 100.0);
  CHECK(s.subsystems[2].type == "house");
  CHECK(s.subsystems[2].u_max == 20.0);
  CHECK(s.subsystems[1].house.C_i == doctest::Approx(0.0835));
  CHECK(s.timelines.size() == 6);  // g_max_0, T_a, phi, T_sp_0..2
  CHECK(s.dual.coordinator_gain[0] == doctest::Approx(0.85));
  CHECK(s.dual.local_pi[1].ki == doctest::Approx(0.088));
  REQUIRE(s.override_tuning.critical.size() == 1);
  CHECK(s.override_tuning.critical[0] == 0);
  CHECK(s.override_tuning.constraint_pi.kp == doctest::Approx(0.2));
  CHECK(s.primal.closing == 0);
  CHECK(s.primal.equalizer_gains.size() == 2);
  CHECK(s.primal.marginal_gain == doctest::Approx(-0.1));
}

TEST_CASE("the bundled gas-lift scenario loads with the expected shape") {
  const Scenario s = load_scenario(kGasPath);
  CHECK(s.kind == CaseKind::kGasLift);
  CHECK(s.n_subsystems() == 3);
  CHECK(s.dt_s == doctest::Approx(0.1));
  CHECK(s.local_period_steps == 10);
  CHECK(s.subsystems[0].well.alpha == doctest::Approx(1.4));
  CHECK(s.subsystems[2].well.price == doctest::Approx(30.0));
  CHECK(s.timelines.size() == 4);  // g_max_0 and one valve per well
  CHECK(s.primal.closing == 0);
}

TEST_CASE("scenario JSON round-trips exactly") {
  for (const std::string& path : {kHubPath, kGasPath}) {
    const Scenario s = load_scenario(path);
    const Scenario again = parse_scenario_json(scenario_to_json(s));
    CHECK(again == s);
  }
}

// ---- timelines and disturbances ----

TEST_CASE("timeline_at interpolates linearly between breakpoints") {
  const Scenario s = load_scenario(kHubPath);
  const Timeline& g = s.timelines.at("g_max_0");
  CHECK(timeline_at(g, 0.0) == 32.0);
  CHECK(timeline_at(g, 50000.0) == 32.0);
  CHECK(timeline_at(g, 93540.0) == 32.0);
  CHECK(timeline_at(g, 93570.0) == doctest::Approx(29.0));  // mid-ramp
  CHECK(timeline_at(g, 93600.0) == 26.0);
  CHECK(timeline_at(g, 432000.0) == 26.0);
}

TEST_CASE("disturbance_at assembles per-subsystem conditions") {
  const Scenario s = load_scenario(kHubPath);
  const DisturbanceState d0 = disturbance_at(s, 0.0);
  REQUIRE(d0.local.size() == 3);
  CHECK(d0.g_max[0] == 32.0);
  CHECK(d0.local[0].ambient == doctest::Approx(0.0));
  CHECK(d0.local[0].irradiance == 0.0);
  CHECK(d0.local[0].setpoint == 22.0);
  CHECK(d0.p_solar == 0.0);

  const DisturbanceState noon = disturbance_at(s, 43200.0);
  CHECK(noon.local[1].ambient == doctest::Approx(10.0));
  CHECK(noon.local[1].irradiance == doctest::Approx(0.5));
  CHECK(noon.p_solar == doctest::Approx(50.0));  // wattage * irradiance

  CHECK_THROWS_AS(disturbance_at(s, -1.0), UsageError);

  const Scenario gas = load_scenario(kGasPath);
  const DisturbanceState mid = disturbance_at(gas, 1000.0);
  CHECK(mid.local[0].valve == doctest::Approx(0.7));
  CHECK(mid.local[1].valve == doctest::Approx(1.0));
}

TEST_CASE("naive_allocation splits the current limit evenly") {
  const Scenario s = load_scenario(kHubPath);
  const Vec shares = naive_allocation(s, 0.0);
  REQUIRE(shares.size() == 3);
  for (double v : shares) CHECK(v == doctest::Approx(32.0 / 3.0));
  const Vec later = naive_allocation(s, 200000.0);
  for (double v : later) CHECK(v == doctest::Approx(26.0 / 3.0));
}

TEST_CASE("freeze_disturbances pins every timeline at the chosen instant") {
  const Scenario s = load_scenario(kHubPath);
  const Scenario frozen = freeze_disturbances(s, 95400.0, 3600.0);
  CHECK(frozen.horizon_s == 3600.0);
  const double ta = timeline_at(s.timelines.at("T_a"), 95400.0);
  for (double t : {0.0, 1800.0, 3600.0}) {
    const DisturbanceState d = disturbance_at(frozen, t);
    CHECK(d.local[0].ambient == doctest::Approx(ta).epsilon(1e-12));
    CHECK(d.g_max[0] == 26.0);
    CHECK(d.local[0].irradiance == 0.0);
  }
  CHECK_THROWS_AS(freeze_disturbances(s, 95400.0, -1.0), UsageError);
}

TEST_CASE("set_constant_timeline and set_step_timeline reshape a disturbance") {
  Scenario s = freeze_disturbances(load_scenario(kHubPath), 95400.0, 43200.0);
  set_constant_timeline(s, "g_max_0", 60.0);
  CHECK(timeline_at(s.timelines.at("g_max_0"), 21600.0) == 60.0);
  CHECK_THROWS_AS(set_constant_timeline(s, "no_such", 1.0), UsageError);

  set_step_timeline(s, "g_max_0", 26.0, 21.0, 33600.0);
  CHECK(timeline_at(s.timelines.at("g_max_0"), 0.0) == 26.0);
  CHECK(timeline_at(s.timelines.at("g_max_0"), 33600.0) == 26.0);
  CHECK(timeline_at(s.timelines.at("g_max_0"), 33660.0) == 21.0);  // one dt later
  CHECK(timeline_at(s.timelines.at("g_max_0"), 43200.0) == 21.0);
  CHECK_THROWS_AS(set_step_timeline(s, "g_max_0", 1.0, 2.0, 43200.0), UsageError);
}

// ---- strict parsing ----

namespace {

ordered_json hub_doc() { return ordered_json::parse(slurp(kHubPath)); }
ordered_json gas_doc() { return ordered_json::parse(slurp(kGasPath)); }

void expect_problem(const ordered_json& doc, const std::string& needle) {
  try {
    parse_scenario_json(doc.dump());
    FAIL_CHECK("expected a ValidationError mentioning '" << needle << "'");
  } catch (const ValidationError& e) {
    const std::string what = e.what();
    CHECK_MESSAGE(what.find(needle) != std::string::npos,
                  "missing '" << needle << "' in: " << what);
  }
}

}  // namespace

TEST_CASE("file-shape problems raise ParseError") {
  CHECK_THROWS_AS(parse_scenario_json("{ not json"), ParseError);
  CHECK_THROWS_AS(parse_scenario_json("[1, 2, 3]"), ParseError);
  CHECK_THROWS_AS(load_scenario(DISTOPT_DATA_DIR "/no_such_file.json"), ParseError);
}

TEST_CASE("unknown keys are rejected everywhere") {
  ordered_json doc = hub_doc();
  doc["surprise"] = 1;
  expect_problem(doc, "unknown key 'surprise'");

  doc = hub_doc();
  doc["subsystems"][0]["params"]["R_xx"] = 1.0;
  expect_problem(doc, "unknown key 'R_xx'");

  doc = hub_doc();
  doc["timelines"]["valve_0"] = ordered_json::parse("[[0.0, 1.0], [432000.0, 1.0]]");
  expect_problem(doc, "unknown timeline name");
}

TEST_CASE("structural invariants are enforced") {
  ordered_json doc = hub_doc();
  doc["subsystems"][1]["id"] = 7;
  expect_problem(doc, "contiguous");

  doc = hub_doc();
  doc["coordinator_period_locals"] = 3;
  expect_problem(doc, "timescale separation");

  doc = hub_doc();
  doc["timelines"]["g_max_0"] = ordered_json::parse("[[100.0, 32.0], [432000.0, 32.0]]");
  expect_problem(doc, "first breakpoint must be at t=0");

  doc = hub_doc();
  doc["timelines"]["g_max_0"] = ordered_json::parse("[[0.0, 32.0], [1000.0, 32.0]]");
  expect_problem(doc, "ends before the horizon");

  doc = hub_doc();
  doc["timelines"]["g_max_0"][1] = ordered_json::parse("[50.0, 0.0]");
  expect_problem(doc, "limits must stay positive");

  doc = gas_doc();
  doc["subsystems"][0]["u_max"] = 8.0;  // past alpha/(2 beta) = 7
  expect_problem(doc, "admissible injection range");

  doc = gas_doc();
  doc["timelines"]["valve_0"][1] = ordered_json::parse("[390.0, 1.4]");
  expect_problem(doc, "valve must stay within [0,1]");

  doc = hub_doc();
  doc["tuning"]["primal"]["closing_subsystem"] = 9;
  expect_problem(doc, "closing_subsystem out of range");

  doc = hub_doc();
  doc["tuning"]["override"]["critical_subsystems"] = ordered_json::array({0, 1});
  expect_problem(doc, "one critical subsystem per constraint");
}

TEST_CASE("every problem in a broken document is reported at once") {
  ordered_json doc = hub_doc();
  doc["coordinator_period_locals"] = 2;
  doc["subsystems"][0]["u_min"] = -1.0;
  doc["extra"] = true;
  try {
    parse_scenario_json(doc.dump());
    FAIL_CHECK("expected a ValidationError");
  } catch (const ValidationError& e) {
    const std::string what = e.what();
    CHECK(what.find("3 problems") != std::string::npos);
    CHECK(what.find("timescale separation") != std::string::npos);
    CHECK(what.find("u_min must be non-negative") != std::string::npos);
    CHECK(what.find("unknown key 'extra'") != std::string::npos);
  }
}

TEST_CASE("missing required sections are reported") {
  ordered_json doc = hub_doc();
  doc.erase("tuning");
  expect_problem(doc, "missing required key 'tuning'");

  doc = hub_doc();
  doc["timelines"].erase("phi");
  expect_problem(doc, "missing required timeline 'phi'");
}
