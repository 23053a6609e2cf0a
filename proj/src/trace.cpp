#include "distopt/trace.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace distopt::sim {

std::size_t Trace::col(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  throw UsageError("trace: no column named '" + name + "'");
}

bool Trace::has_col(const std::string& name) const {
  return std::find(columns.begin(), columns.end(), name) != columns.end();
}

double Trace::at(std::size_t row, const std::string& name) const {
  if (row >= rows.size()) throw UsageError("trace: row out of range");
  return rows[row][col(name)];
}

namespace {

void format_value(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  out += buf;
}

}  // namespace

std::string trace_to_csv(const Trace& t) {
  if (t.columns.empty()) throw UsageError("trace_to_csv: no columns");
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    if (i) out += ',';
    out += t.columns[i];
  }
  out += '\n';
  for (const auto& row : t.rows) {
    if (row.size() != t.columns.size())
      throw UsageError("trace_to_csv: row arity differs from header");
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      format_value(out, row[i]);
    }
    out += '\n';
  }
  return out;
}

void write_trace_csv(const Trace& t, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("write_trace_csv: cannot open '" + path + "'");
  const std::string body = trace_to_csv(t);
  f.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!f) throw UsageError("write_trace_csv: write failed for '" + path + "'");
}

Trace parse_trace_csv(const std::string& text) {
  Trace t;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r')
      throw ParseError("trace csv line " + std::to_string(line_no) +
                       ": CRLF line endings are not accepted");
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const std::size_t pos = line.find(',', start);
      cells.push_back(line.substr(start, pos == std::string::npos ? pos : pos - start));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    if (line_no == 1) {
      for (const auto& c : cells)
        if (c.empty()) throw ParseError("trace csv: empty column name in header");
      t.columns = cells;
      continue;
    }
    if (cells.size() != t.columns.size())
      throw ParseError("trace csv line " + std::to_string(line_no) + ": expected " +
                       std::to_string(t.columns.size()) + " cells, got " +
                       std::to_string(cells.size()));
    Vec row(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const char* s = cells[i].c_str();
      char* end = nullptr;
      row[i] = std::strtod(s, &end);
      if (end == s || *end != '\0')
        throw ParseError("trace csv line " + std::to_string(line_no) + ", column '" +
                         t.columns[i] + "': not a number: '" + cells[i] + "'");
    }
    t.rows.push_back(std::move(row));
  }
  if (t.columns.empty()) throw ParseError("trace csv: missing header");
  return t;
}

Trace read_trace_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ParseError("read_trace_csv: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_trace_csv(buf.str());
}

namespace {

std::vector<std::size_t> columns_matching(const Trace& t, const std::string& prefix) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < t.columns.size(); ++i)
    if (t.columns[i].rfind(prefix, 0) == 0) idx.push_back(i);
  return idx;
}

}  // namespace

Metrics compute_metrics(const Trace& run, const Trace* baseline,
                        const scen::Scenario* scenario, const MetricsOptions& opt) {
  Metrics m;
  if (run.rows.empty()) return m;
  const std::size_t time_col = run.col("time");

  if (baseline) {
    if (baseline->rows.size() != run.rows.size())
      throw UsageError("compute_metrics: baseline trace is on a different grid");
    const std::size_t bt = baseline->col("time");
    for (std::size_t r = 0; r < run.rows.size(); ++r)
      if (baseline->rows[r][bt] != run.rows[r][time_col])
        throw UsageError("compute_metrics: baseline trace is on a different grid");
  }

  // Constraint violation integrals (trapezoidal in time).
  std::size_t n_constraints = 0;
  while (run.has_col("g_total[" + std::to_string(n_constraints) + "]")) ++n_constraints;
  m.violation_integral.assign(n_constraints, 0.0);
  for (std::size_t k = 0; k < n_constraints; ++k) {
    const std::size_t gt = run.col("g_total[" + std::to_string(k) + "]");
    const std::size_t gm = run.col("g_max[" + std::to_string(k) + "]");
    double acc = 0.0;
    for (std::size_t r = 0; r + 1 < run.rows.size(); ++r) {
      const double v0 = std::max(0.0, run.rows[r][gt] - run.rows[r][gm]);
      const double v1 = std::max(0.0, run.rows[r + 1][gt] - run.rows[r + 1][gm]);
      const double dt = run.rows[r + 1][time_col] - run.rows[r][time_col];
      acc += 0.5 * (v0 + v1) * dt;
    }
    m.violation_integral[k] = acc;
  }

  // Cost integral.
  const std::vector<std::size_t> cost_cols = columns_matching(run, "cost[");
  auto total_cost = [&](const Trace& t, const std::vector<std::size_t>& cols, std::size_t r) {
    double s = 0.0;
    for (std::size_t c : cols) s += t.rows[r][c];
    return s;
  };
  double acc = 0.0;
  for (std::size_t r = 0; r + 1 < run.rows.size(); ++r) {
    const double dt = run.rows[r + 1][time_col] - run.rows[r][time_col];
    acc += 0.5 * (total_cost(run, cost_cols, r) + total_cost(run, cost_cols, r + 1)) * dt;
  }
  m.cumulative_cost = acc;

  // Profit series versus the baseline: profit := -sum(cost).
  if (baseline) {
    const std::vector<std::size_t> base_cost = columns_matching(*baseline, "cost[");
    double pd = 0.0;
    std::size_t used = 0;
    for (std::size_t r = 0; r < run.rows.size(); ++r) {
      const double p_base = -total_cost(*baseline, base_cost, r);
      if (std::fabs(p_base) < 1e-9) continue;
      pd += scen::profit_diff(-total_cost(run, cost_cols, r), p_base);
      ++used;
    }
    m.cumulative_profit_diff = pd;
    m.profit_samples = used;
  }

  // Convergence after each disturbance event: |cv| below tolerance,
  // sustained for ten coordinator periods.
  if (scenario && run.has_col("cv[0][0]")) {
    std::set<double> events;
    for (const auto& [name, tl] : scenario->timelines) {
      for (std::size_t i = 1; i + 1 < tl.points.size(); ++i) {
        const auto& prev = tl.points[i - 1];
        const auto& cur = tl.points[i];
        const auto& next = tl.points[i + 1];
        const double slope_in = (cur.second - prev.second) / (cur.first - prev.first);
        const double slope_out = (next.second - cur.second) / (next.first - cur.first);
        if (std::fabs(slope_in - slope_out) > 1e-12) events.insert(cur.first);
      }
    }
    const std::vector<std::size_t> cv_cols = columns_matching(run, "cv[");
    const double hold =
        10.0 * scenario->dt_s * scenario->local_period_steps * scenario->coordinator_period_locals;
    for (double ev : events) {
      if (ev >= scenario->horizon_s) continue;
      ConvergenceEvent ce;
      ce.event_time_s = ev;
      for (std::size_t r = 0; r < run.rows.size(); ++r) {
        const double t0 = run.rows[r][time_col];
        if (t0 < ev) continue;
        bool ok = true;
        bool window_complete = false;
        for (std::size_t q = r; q < run.rows.size(); ++q) {
          if (run.rows[q][time_col] - t0 > hold) {
            window_complete = true;
            break;
          }
          for (std::size_t c : cv_cols)
            if (std::fabs(run.rows[q][c]) >= opt.cv_tol) {
              ok = false;
              break;
            }
          if (!ok) break;
        }
        if (ok && window_complete) {
          ce.converged_time_s = t0;
          break;
        }
      }
      m.convergence.push_back(ce);
    }
  }
  return m;
}

}  // namespace distopt::sim
