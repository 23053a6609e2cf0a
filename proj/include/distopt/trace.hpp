#pragma once

// Simulation traces (a named-column table sampled once per plant step),
// their CSV round-trip, and summary metrics. CSV uses 9 significant
// digits, LF line endings, and a fixed column set per run configuration,
// so identical runs produce byte-identical files.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "distopt/core.hpp"
#include "distopt/scenario.hpp"

namespace distopt::sim {

struct Trace {
  std::vector<std::string> columns;
  std::vector<Vec> rows;

  std::size_t col(const std::string& name) const;  // throws UsageError when absent
  bool has_col(const std::string& name) const;
  double at(std::size_t row, const std::string& name) const;
};

std::string trace_to_csv(const Trace& t);
void write_trace_csv(const Trace& t, const std::string& path);
Trace parse_trace_csv(const std::string& text);
Trace read_trace_csv(const std::string& path);

struct ConvergenceEvent {
  double event_time_s = 0.0;
  double converged_time_s = -1.0;  // -1: never within the horizon
};

struct Metrics {
  Vec violation_integral;          // per constraint [resource-unit * s]
  double cumulative_cost = 0.0;    // trapezoidal integral of summed cost
  double cumulative_profit_diff = 0.0;  // sum of per-sample % improvement
  std::size_t profit_samples = 0;       // samples entering the sum
  std::vector<ConvergenceEvent> convergence;
};

struct MetricsOptions {
  double cv_tol = 1e-2;  // |controlled variable| threshold for convergence
};

// Baseline (same scenario, arch=naive) enables the profit-difference
// metric; the scenario enables disturbance-event convergence times.
// Baseline rows must sit on the identical time grid.
Metrics compute_metrics(const Trace& run, const Trace* baseline,
                        const scen::Scenario* scenario, const MetricsOptions& opt = {});

}  // namespace distopt::sim
