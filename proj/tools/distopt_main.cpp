// distopt: simulate, compare and verify distributed steady-state resource
// coordination on the bundled scenarios.
//
// Exit codes: 0 success; 2 bad usage / invalid input (flags, scenario
// files, misaligned traces); 3 runtime fault (numerical blow-up, lost
// connection, oracle failure).

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "distopt/acceptance.hpp"
#include "distopt/core.hpp"
#include "distopt/net.hpp"
#include "distopt/scenario.hpp"
#include "distopt/sim.hpp"
#include "distopt/trace.hpp"

namespace {

using distopt::scen::Scenario;
using json = nlohmann::ordered_json;

json metrics_to_json(const distopt::sim::Metrics& m, bool with_profit) {
  json j;
  j["violation_integral"] = m.violation_integral;
  j["cumulative_cost"] = m.cumulative_cost;
  if (with_profit) {
    j["cumulative_profit_diff"] = m.cumulative_profit_diff;
    j["profit_samples"] = m.profit_samples;
  }
  json conv = json::array();
  for (const auto& e : m.convergence) {
    json je;
    je["event_time_s"] = e.event_time_s;
    je["converged_time_s"] = e.converged_time_s;
    conv.push_back(je);
  }
  j["convergence"] = conv;
  return j;
}

int run_simulate(const std::string& scenario_path, const std::string& arch_name,
                 const std::string& out_path, int seed, bool seed_set, double backoff,
                 int coordinator_period, const std::string& mode, const std::string& address,
                 int port, int subsystem, bool subsystem_set) {
  Scenario s = distopt::scen::load_scenario(scenario_path);
  if (seed_set) s.seed = seed;

  distopt::sim::RunOptions opt;
  opt.arch = distopt::sim::arch_from_string(arch_name);
  opt.backoff_fraction = backoff;
  opt.coordinator_period_override = coordinator_period;

  if (mode == "in-process") {
    const distopt::sim::RunResult result = distopt::sim::run_simulation(s, opt);
    distopt::sim::write_trace_csv(result.trace, out_path);
    const distopt::sim::Metrics m = distopt::sim::compute_metrics(result.trace, nullptr, &s);
    json j;
    j["scenario"] = s.name;
    j["arch"] = arch_name;
    j["seed"] = s.seed;
    j["rows"] = result.trace.rows.size();
    j["trace"] = out_path;
    j["metrics"] = metrics_to_json(m, false);
    j["battery_clamp_events"] = result.battery_clamp_events;
    j["allocation_rescues"] = result.allocation_rescues;
    std::cout << j.dump(2) << "\n";
    return 0;
  }

  distopt::net::NetOptions nopt;
  nopt.run = opt;
  nopt.address = address;
  nopt.port = port;
  if (port <= 0) throw distopt::UsageError("distributed roles require --port");

  distopt::sim::Trace trace;
  try {
    if (mode == "coordinator") {
      distopt::net::Coordinator coordinator(s, nopt);
      coordinator.run(trace);
    } else {  // subsystem
      if (!subsystem_set)
        throw distopt::UsageError("subsystem mode requires --subsystem <index>");
      distopt::net::run_subsystem(s, static_cast<std::size_t>(subsystem), nopt, trace);
    }
  } catch (...) {
    // Flush whatever completed before the abort, then let the error map
    // to the exit code.
    if (!trace.columns.empty())
      distopt::sim::write_trace_csv(trace, out_path);
    throw;
  }
  distopt::sim::write_trace_csv(trace, out_path);
  json j;
  j["scenario"] = s.name;
  j["arch"] = arch_name;
  j["mode"] = mode;
  j["rows"] = trace.rows.size();
  j["trace"] = out_path;
  std::cout << j.dump(2) << "\n";
  return 0;
}

int run_compare(const std::string& baseline_path, const std::vector<std::string>& trace_paths) {
  const distopt::sim::Trace baseline = distopt::sim::read_trace_csv(baseline_path);
  json out = json::array();
  for (const std::string& path : trace_paths) {
    const distopt::sim::Trace t = distopt::sim::read_trace_csv(path);
    const distopt::sim::Metrics m = distopt::sim::compute_metrics(t, &baseline, nullptr);
    json j;
    j["trace"] = path;
    j["metrics"] = metrics_to_json(m, true);
    out.push_back(j);
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

int run_verify(const std::string& data_dir) {
  const auto results = distopt::accept::run_all(data_dir);
  const int failures = distopt::accept::report(results, std::cout);
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distributed steady-state resource coordination simulator"};
  app.require_subcommand(1);

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "run one architecture on a scenario");
  std::string scenario_path, arch_name, out_path = "trace.csv";
  std::string mode = "in-process", address = "127.0.0.1";
  int seed = 0, coordinator_period = 0, port = 0, subsystem = 0;
  double backoff = 0.0;
  sim_cmd->add_option("--scenario", scenario_path, "scenario JSON file")->required();
  sim_cmd->add_option("--arch", arch_name,
                      "dual | dual-override | primal | naive | oracle-track")
      ->required();
  sim_cmd->add_option("--out", out_path, "output trace CSV path");
  auto* seed_opt = sim_cmd->add_option("--seed", seed, "override the scenario seed");
  sim_cmd->add_option("--backoff", backoff, "fraction of the limit withheld (0..1)");
  sim_cmd->add_option("--coordinator-period", coordinator_period,
                      "override coordinator cadence (local ticks)");
  sim_cmd->add_option("--mode", mode, "in-process | coordinator | subsystem")
      ->check(CLI::IsMember({"in-process", "coordinator", "subsystem"}));
  sim_cmd->add_option("--address", address, "coordinator address (distributed modes)");
  sim_cmd->add_option("--port", port, "coordinator TCP port (distributed modes)");
  auto* sub_opt = sim_cmd->add_option("--subsystem", subsystem, "subsystem index (subsystem mode)");

  // compare
  auto* cmp_cmd = app.add_subcommand("compare", "metrics of traces against a baseline trace");
  std::string baseline_path;
  std::vector<std::string> trace_paths;
  cmp_cmd->add_option("--baseline", baseline_path, "baseline trace CSV (same time grid)")
      ->required();
  cmp_cmd->add_option("--traces", trace_paths, "trace CSV files to score")->required();

  // verify
  auto* ver_cmd = app.add_subcommand("verify", "run the acceptance suite");
  std::string data_dir = "data";
  ver_cmd->add_option("--data", data_dir, "directory with the bundled scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (sim_cmd->parsed())
      return run_simulate(scenario_path, arch_name, out_path, seed, seed_opt->count() > 0,
                          backoff, coordinator_period, mode, address, port, subsystem,
                          sub_opt->count() > 0);
    if (cmp_cmd->parsed()) return run_compare(baseline_path, trace_paths);
    if (ver_cmd->parsed()) return run_verify(data_dir);
  } catch (const distopt::FaultError& e) {
    std::cerr << "fault: " << e.what() << "\n";
    return 3;
  } catch (const distopt::ProtocolError& e) {
    std::cerr << "fault: " << e.what() << "\n";
    return 3;
  } catch (const distopt::OracleError& e) {
    std::cerr << "fault: " << e.what() << "\n";
    return 3;
  } catch (const distopt::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
