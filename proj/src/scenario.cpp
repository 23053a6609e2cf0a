#include "distopt/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace distopt::scen {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

// Strict object reader: tracks which keys were consumed so leftovers can
// be reported as unknown, and funnels every problem into one list.
class ObjReader {
 public:
  ObjReader(const json& obj, std::string where, std::vector<std::string>& problems)
      : obj_(obj), where_(std::move(where)), problems_(problems) {
    if (!obj_.is_object()) problems_.push_back(where_ + ": expected an object");
  }

  bool has(const std::string& key) const { return obj_.is_object() && obj_.contains(key); }

  const json* require(const std::string& key) {
    if (!obj_.is_object()) return nullptr;
    consumed_.insert(key);
    if (!obj_.contains(key)) {
      problems_.push_back(where_ + ": missing required key '" + key + "'");
      return nullptr;
    }
    return &obj_.at(key);
  }

  const json* optional(const std::string& key) {
    if (!obj_.is_object()) return nullptr;
    consumed_.insert(key);
    if (!obj_.contains(key)) return nullptr;
    return &obj_.at(key);
  }

  double number(const std::string& key, double fallback, bool required) {
    const json* v = required ? require(key) : optional(key);
    if (!v) return fallback;
    if (!v->is_number()) {
      problems_.push_back(where_ + ": key '" + key + "' must be a number");
      return fallback;
    }
    return v->get<double>();
  }

  long long integer(const std::string& key, long long fallback, bool required) {
    const json* v = required ? require(key) : optional(key);
    if (!v) return fallback;
    if (!v->is_number_integer()) {
      problems_.push_back(where_ + ": key '" + key + "' must be an integer");
      return fallback;
    }
    return v->get<long long>();
  }

  std::string text(const std::string& key, const std::string& fallback, bool required) {
    const json* v = required ? require(key) : optional(key);
    if (!v) return fallback;
    if (!v->is_string()) {
      problems_.push_back(where_ + ": key '" + key + "' must be a string");
      return fallback;
    }
    return v->get<std::string>();
  }

  void finish() {
    if (!obj_.is_object()) return;
    for (const auto& item : obj_.items())
      if (!consumed_.count(item.key()))
        problems_.push_back(where_ + ": unknown key '" + item.key() + "'");
  }

 private:
  const json& obj_;
  std::string where_;
  std::vector<std::string>& problems_;
  std::set<std::string> consumed_;
};

Vec parse_number_array(const json* v, const std::string& where,
                       std::vector<std::string>& problems) {
  Vec out;
  if (!v) return out;
  if (!v->is_array()) {
    problems.push_back(where + ": expected an array of numbers");
    return out;
  }
  for (const auto& e : *v) {
    if (!e.is_number()) {
      problems.push_back(where + ": expected an array of numbers");
      return out;
    }
    out.push_back(e.get<double>());
  }
  return out;
}

PiGains parse_pi(const json* v, const std::string& where,
                 std::vector<std::string>& problems) {
  PiGains g;
  if (!v) return g;
  ObjReader r(*v, where, problems);
  g.kp = r.number("kp", 0.0, false);
  g.ki = r.number("ki", 0.0, false);
  g.kaw = r.number("kaw", 0.0, false);
  r.finish();
  return g;
}

std::vector<PiGains> parse_pi_list(const json* v, const std::string& where,
                                   std::vector<std::string>& problems) {
  std::vector<PiGains> out;
  if (!v) return out;
  if (!v->is_array()) {
    problems.push_back(where + ": expected an array of controller gain objects");
    return out;
  }
  std::size_t idx = 0;
  for (const auto& e : *v) out.push_back(parse_pi(&e, where + "[" + std::to_string(idx++) + "]", problems));
  return out;
}

Timeline parse_timeline(const json& v, const std::string& where,
                        std::vector<std::string>& problems) {
  Timeline tl;
  if (!v.is_array()) {
    problems.push_back(where + ": expected an array of [time, value] pairs");
    return tl;
  }
  for (const auto& e : v) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
      problems.push_back(where + ": expected [time, value] number pairs");
      return tl;
    }
    tl.points.emplace_back(e[0].get<double>(), e[1].get<double>());
  }
  return tl;
}

void validate_timeline(const Timeline& tl, const std::string& where, double horizon,
                       std::vector<std::string>& problems) {
  if (tl.points.size() < 2) {
    problems.push_back(where + ": needs at least two breakpoints");
    return;
  }
  if (tl.points.front().first != 0.0)
    problems.push_back(where + ": first breakpoint must be at t=0");
  for (std::size_t i = 0; i + 1 < tl.points.size(); ++i)
    if (!(tl.points[i].first < tl.points[i + 1].first)) {
      problems.push_back(where + ": breakpoint times must be strictly increasing");
      break;
    }
  if (tl.points.back().first < horizon)
    problems.push_back(where + ": timeline ends before the horizon");
  for (const auto& [t, v] : tl.points)
    if (!std::isfinite(t) || !std::isfinite(v)) {
      problems.push_back(where + ": non-finite breakpoint");
      break;
    }
}

}  // namespace

double timeline_at(const Timeline& tl, double t) {
  if (tl.points.empty()) throw UsageError("timeline_at: empty timeline");
  if (t <= tl.points.front().first) return tl.points.front().second;
  if (t >= tl.points.back().first) return tl.points.back().second;
  auto it = std::upper_bound(
      tl.points.begin(), tl.points.end(), t,
      [](double val, const std::pair<double, double>& p) { return val < p.first; });
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double f = (t - lo.first) / (hi.first - lo.first);
  return lo.second + f * (hi.second - lo.second);
}

Scenario parse_scenario_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("scenario: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("scenario: root must be a JSON object");

  std::vector<std::string> problems;
  Scenario s;
  ObjReader root(doc, "scenario", problems);

  const long long version = root.integer("schema_version", 1, true);
  if (version != 1) problems.push_back("scenario: unsupported schema_version");
  s.schema_version = static_cast<int>(version);

  const std::string kind = root.text("case", "", true);
  if (kind == "energy_hub") {
    s.kind = CaseKind::kEnergyHub;
  } else if (kind == "gas_lift") {
    s.kind = CaseKind::kGasLift;
  } else {
    problems.push_back("scenario: case must be 'energy_hub' or 'gas_lift'");
  }

  s.name = root.text("name", "", true);
  s.horizon_s = root.number("horizon_s", 0.0, true);
  s.dt_s = root.number("dt_s", 0.0, true);
  if (!(s.horizon_s > 0.0)) problems.push_back("scenario: horizon_s must be positive");
  if (!(s.dt_s > 0.0)) problems.push_back("scenario: dt_s must be positive");
  if (s.dt_s > 0.0 && s.horizon_s < s.dt_s)
    problems.push_back("scenario: horizon shorter than one step");

  const long long m = root.integer("m", 1, true);
  if (m < 1) problems.push_back("scenario: m must be at least 1");
  s.m = static_cast<std::size_t>(std::max(1LL, m));

  s.seed = static_cast<int>(root.integer("seed", 0, false));
  s.local_period_steps = static_cast<int>(root.integer("local_period_steps", 1, false));
  s.coordinator_period_locals =
      static_cast<int>(root.integer("coordinator_period_locals", 10, false));
  if (s.local_period_steps < 1)
    problems.push_back("scenario: local_period_steps must be at least 1");
  if (s.coordinator_period_locals < 5)
    problems.push_back(
        "scenario: coordinator_period_locals must be at least 5 (timescale separation)");

  // hub (energy hub only)
  if (const json* hub = root.optional("hub")) {
    if (s.kind != CaseKind::kEnergyHub)
      problems.push_back("scenario: 'hub' only applies to the energy_hub case");
    ObjReader r(*hub, "hub", problems);
    s.hub.battery_q0 = r.number("battery_q0_kwh", 0.0, false);
    s.hub.solar_wattage = r.number("solar_wattage_kw", 0.0, false);
    r.finish();
    if (s.hub.battery_q0 < 0.0) problems.push_back("hub: battery_q0_kwh must be non-negative");
    if (s.hub.solar_wattage < 0.0) problems.push_back("hub: solar_wattage_kw must be non-negative");
  }

  // subsystems
  if (const json* subs = root.require("subsystems")) {
    if (!subs->is_array()) {
      problems.push_back("scenario: 'subsystems' must be an array");
    } else {
      int idx = 0;
      for (const auto& e : *subs) {
        const std::string where = "subsystems[" + std::to_string(idx) + "]";
        SubsystemSpec sub;
        ObjReader r(e, where, problems);
        sub.id = static_cast<int>(r.integer("id", idx, true));
        sub.type = r.text("type", "", true);
        sub.u_min = r.number("u_min", 0.0, false);
        sub.u_max = r.number("u_max", 0.0, true);
        if (sub.id != idx)
          problems.push_back(where + ": ids must be contiguous starting at 0");
        if (!(sub.u_min >= 0.0)) problems.push_back(where + ": u_min must be non-negative");
        if (!(sub.u_min < sub.u_max)) problems.push_back(where + ": empty input range");

        const std::string expected = (s.kind == CaseKind::kEnergyHub) ? "house" : "well";
        if (sub.type != expected)
          problems.push_back(where + ": type must be '" + expected + "' for this case");

        if (const json* params = r.require("params")) {
          ObjReader pr(*params, where + ".params", problems);
          if (sub.type == "well") {
            sub.well.q0 = pr.number("q0", 0.0, true);
            sub.well.alpha = pr.number("alpha", 0.0, true);
            sub.well.beta = pr.number("beta", 0.0, true);
            sub.well.price = pr.number("price", 0.0, true);
            pr.finish();
            if (!(sub.well.q0 >= 0.0)) problems.push_back(where + ": q0 must be non-negative");
            if (!(sub.well.alpha > 0.0) || !(sub.well.beta > 0.0))
              problems.push_back(where + ": alpha and beta must be positive");
            if (!(sub.well.price > 0.0)) problems.push_back(where + ": price must be positive");
            if (sub.well.alpha > 0.0 && sub.well.beta > 0.0 &&
                sub.u_max > sub.well.alpha / (2.0 * sub.well.beta))
              problems.push_back(where + ": u_max beyond the admissible injection range");
          } else {
            sub.house.C_s = pr.number("C_s", 0.0, true);
            sub.house.C_i = pr.number("C_i", 0.0, true);
            sub.house.C_e = pr.number("C_e", 0.0, true);
            sub.house.C_h = pr.number("C_h", 0.0, true);
            sub.house.R_is = pr.number("R_is", 0.0, true);
            sub.house.R_ih = pr.number("R_ih", 0.0, true);
            sub.house.R_ie = pr.number("R_ie", 0.0, true);
            sub.house.R_ea = pr.number("R_ea", 0.0, true);
            sub.house.R_ia = pr.number("R_ia", 0.0, true);
            sub.house.A_w = pr.number("A_w", 0.0, true);
            sub.house.A_e = pr.number("A_e", 0.0, true);
            pr.finish();
            const double positives[] = {sub.house.C_s,  sub.house.C_i,  sub.house.C_e,
                                        sub.house.C_h,  sub.house.R_is, sub.house.R_ih,
                                        sub.house.R_ie, sub.house.R_ea, sub.house.R_ia};
            for (double v : positives)
              if (!(v > 0.0)) {
                problems.push_back(where + ": capacitances and resistances must be positive");
                break;
              }
            if (sub.house.A_w < 0.0 || sub.house.A_e < 0.0)
              problems.push_back(where + ": solar areas must be non-negative");
          }
        }
        r.finish();
        s.subsystems.push_back(std::move(sub));
        ++idx;
      }
    }
  }
  if (s.subsystems.size() < 2)
    problems.push_back("scenario: at least two subsystems required");
  const std::size_t n_sub = s.subsystems.size();

  // timelines: the allowed name set is exactly determined by the case.
  std::set<std::string> expected_names;
  for (std::size_t k = 0; k < s.m; ++k) expected_names.insert("g_max_" + std::to_string(k));
  if (s.kind == CaseKind::kEnergyHub) {
    expected_names.insert("T_a");
    expected_names.insert("phi");
    for (std::size_t i = 0; i < n_sub; ++i) expected_names.insert("T_sp_" + std::to_string(i));
  } else {
    for (std::size_t i = 0; i < n_sub; ++i) expected_names.insert("valve_" + std::to_string(i));
  }
  if (const json* tls = root.require("timelines")) {
    if (!tls->is_object()) {
      problems.push_back("scenario: 'timelines' must be an object");
    } else {
      for (const auto& item : tls->items()) {
        const std::string where = "timelines." + item.key();
        if (!expected_names.count(item.key())) {
          problems.push_back(where + ": unknown timeline name");
          continue;
        }
        Timeline tl = parse_timeline(item.value(), where, problems);
        validate_timeline(tl, where, s.horizon_s, problems);
        s.timelines[item.key()] = std::move(tl);
      }
      for (const auto& name : expected_names)
        if (!s.timelines.count(name))
          problems.push_back("timelines: missing required timeline '" + name + "'");
    }
  }
  for (std::size_t k = 0; k < s.m; ++k) {
    auto it = s.timelines.find("g_max_" + std::to_string(k));
    if (it != s.timelines.end())
      for (const auto& [t, v] : it->second.points)
        if (!(v > 0.0)) {
          problems.push_back("timelines.g_max_" + std::to_string(k) +
                             ": limits must stay positive");
          break;
        }
  }
  if (s.kind == CaseKind::kGasLift)
    for (std::size_t i = 0; i < n_sub; ++i) {
      auto it = s.timelines.find("valve_" + std::to_string(i));
      if (it != s.timelines.end())
        for (const auto& [t, v] : it->second.points)
          if (v < 0.0 || v > 1.0) {
            problems.push_back("timelines.valve_" + std::to_string(i) +
                               ": valve must stay within [0,1]");
            break;
          }
    }

  // tuning
  if (const json* tuning = root.require("tuning")) {
    ObjReader r(*tuning, "tuning", problems);
    if (const json* dual = r.require("dual")) {
      ObjReader dr(*dual, "tuning.dual", problems);
      s.dual.coordinator_gain =
          parse_number_array(dr.require("coordinator_gain"), "tuning.dual.coordinator_gain", problems);
      s.dual.local_pi = parse_pi_list(dr.require("local_pi"), "tuning.dual.local_pi", problems);
      dr.finish();
      if (s.dual.coordinator_gain.size() != s.m)
        problems.push_back("tuning.dual: coordinator_gain needs one entry per constraint");
      if (s.dual.local_pi.size() != n_sub)
        problems.push_back("tuning.dual: local_pi needs one entry per subsystem");
    }
    if (const json* ovr = r.require("override")) {
      ObjReader orr(*ovr, "tuning.override", problems);
      s.override_tuning.coordinator_gain = parse_number_array(
          orr.require("coordinator_gain"), "tuning.override.coordinator_gain", problems);
      if (const json* crit = orr.require("critical_subsystems")) {
        if (!crit->is_array()) {
          problems.push_back("tuning.override: critical_subsystems must be an array");
        } else {
          for (const auto& e : *crit) {
            if (!e.is_number_integer()) {
              problems.push_back("tuning.override: critical_subsystems must hold integers");
              break;
            }
            s.override_tuning.critical.push_back(e.get<int>());
          }
        }
      }
      s.override_tuning.constraint_pi =
          parse_pi(orr.optional("constraint_pi"), "tuning.override.constraint_pi", problems);
      s.override_tuning.local_pi =
          parse_pi_list(orr.require("local_pi"), "tuning.override.local_pi", problems);
      orr.finish();
      if (s.override_tuning.critical.size() != s.m)
        problems.push_back("tuning.override: one critical subsystem per constraint required");
      std::set<int> seen;
      for (int id : s.override_tuning.critical) {
        if (id < 0 || static_cast<std::size_t>(id) >= n_sub)
          problems.push_back("tuning.override: critical subsystem id out of range");
        if (!seen.insert(id).second)
          problems.push_back("tuning.override: duplicate critical subsystem");
      }
      if (s.override_tuning.coordinator_gain.size() != s.override_tuning.critical.size())
        problems.push_back("tuning.override: coordinator_gain needs one entry per critical subsystem");
      if (s.override_tuning.local_pi.size() != n_sub)
        problems.push_back("tuning.override: local_pi needs one entry per subsystem");
    }
    if (const json* primal = r.require("primal")) {
      ObjReader pr(*primal, "tuning.primal", problems);
      s.primal.equalizer_gains = parse_number_array(
          pr.require("equalizer_gains"), "tuning.primal.equalizer_gains", problems);
      s.primal.marginal_gain = pr.number("marginal_gain", 0.0, true);
      s.primal.closing = static_cast<int>(pr.integer("closing_subsystem", 0, true));
      pr.finish();
      if (s.primal.closing < 0 || static_cast<std::size_t>(s.primal.closing) >= n_sub)
        problems.push_back("tuning.primal: closing_subsystem out of range");
      if (n_sub >= 1 && s.primal.equalizer_gains.size() != n_sub - 1)
        problems.push_back("tuning.primal: one equalizer gain per non-closing subsystem required");
    }
    r.finish();
  }

  root.finish();

  if (!problems.empty()) {
    std::ostringstream msg;
    msg << "scenario validation failed (" << problems.size() << " problem"
        << (problems.size() == 1 ? "" : "s") << "):";
    for (const auto& p : problems) msg << "\n  - " << p;
    throw ValidationError(msg.str());
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("scenario: cannot open file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_json(buf.str());
}

std::string scenario_to_json(const Scenario& s) {
  ordered_json doc;
  doc["schema_version"] = s.schema_version;
  doc["case"] = (s.kind == CaseKind::kEnergyHub) ? "energy_hub" : "gas_lift";
  doc["name"] = s.name;
  doc["horizon_s"] = s.horizon_s;
  doc["dt_s"] = s.dt_s;
  doc["m"] = s.m;
  doc["seed"] = s.seed;
  doc["local_period_steps"] = s.local_period_steps;
  doc["coordinator_period_locals"] = s.coordinator_period_locals;
  if (s.kind == CaseKind::kEnergyHub) {
    doc["hub"] = {{"battery_q0_kwh", s.hub.battery_q0},
                  {"solar_wattage_kw", s.hub.solar_wattage}};
  }
  doc["subsystems"] = ordered_json::array();
  for (const auto& sub : s.subsystems) {
    ordered_json e;
    e["id"] = sub.id;
    e["type"] = sub.type;
    e["u_min"] = sub.u_min;
    e["u_max"] = sub.u_max;
    if (sub.type == "well") {
      e["params"] = {{"q0", sub.well.q0},
                     {"alpha", sub.well.alpha},
                     {"beta", sub.well.beta},
                     {"price", sub.well.price}};
    } else {
      e["params"] = {{"C_s", sub.house.C_s},   {"C_i", sub.house.C_i},
                     {"C_e", sub.house.C_e},   {"C_h", sub.house.C_h},
                     {"R_is", sub.house.R_is}, {"R_ih", sub.house.R_ih},
                     {"R_ie", sub.house.R_ie}, {"R_ea", sub.house.R_ea},
                     {"R_ia", sub.house.R_ia}, {"A_w", sub.house.A_w},
                     {"A_e", sub.house.A_e}};
    }
    doc["subsystems"].push_back(std::move(e));
  }
  doc["timelines"] = ordered_json::object();
  for (const auto& [name, tl] : s.timelines) {
    ordered_json pts = ordered_json::array();
    for (const auto& [t, v] : tl.points) pts.push_back({t, v});
    doc["timelines"][name] = std::move(pts);
  }
  auto pi_json = [](const PiGains& g) {
    return ordered_json{{"kp", g.kp}, {"ki", g.ki}, {"kaw", g.kaw}};
  };
  ordered_json dual;
  dual["coordinator_gain"] = s.dual.coordinator_gain;
  dual["local_pi"] = ordered_json::array();
  for (const auto& g : s.dual.local_pi) dual["local_pi"].push_back(pi_json(g));
  ordered_json ovr;
  ovr["coordinator_gain"] = s.override_tuning.coordinator_gain;
  ovr["critical_subsystems"] = s.override_tuning.critical;
  ovr["constraint_pi"] = pi_json(s.override_tuning.constraint_pi);
  ovr["local_pi"] = ordered_json::array();
  for (const auto& g : s.override_tuning.local_pi) ovr["local_pi"].push_back(pi_json(g));
  ordered_json primal;
  primal["equalizer_gains"] = s.primal.equalizer_gains;
  primal["marginal_gain"] = s.primal.marginal_gain;
  primal["closing_subsystem"] = s.primal.closing;
  doc["tuning"] = ordered_json{{"dual", std::move(dual)},
                               {"override", std::move(ovr)},
                               {"primal", std::move(primal)}};
  return doc.dump(2) + "\n";
}

DisturbanceState disturbance_at(const Scenario& s, double t) {
  if (t < 0.0) throw UsageError("disturbance_at: negative time");
  DisturbanceState d;
  d.t = t;
  d.g_max.resize(s.m);
  for (std::size_t k = 0; k < s.m; ++k)
    d.g_max[k] = timeline_at(s.timelines.at("g_max_" + std::to_string(k)), t);
  d.local.resize(s.n_subsystems());
  if (s.kind == CaseKind::kEnergyHub) {
    const double ta = timeline_at(s.timelines.at("T_a"), t);
    const double phi = timeline_at(s.timelines.at("phi"), t);
    for (std::size_t i = 0; i < s.n_subsystems(); ++i) {
      d.local[i].ambient = ta;
      d.local[i].irradiance = phi;
      d.local[i].setpoint = timeline_at(s.timelines.at("T_sp_" + std::to_string(i)), t);
    }
    d.p_solar = s.hub.solar_wattage * phi;
  } else {
    for (std::size_t i = 0; i < s.n_subsystems(); ++i)
      d.local[i].valve = timeline_at(s.timelines.at("valve_" + std::to_string(i)), t);
  }
  return d;
}

Vec naive_allocation(const Scenario& s, double t) {
  if (s.m != 1)
    throw UsageError("naive_allocation: defined for a single coupling constraint");
  const double share =
      timeline_at(s.timelines.at("g_max_0"), t) / static_cast<double>(s.n_subsystems());
  return Vec(s.n_subsystems(), share);
}

double profit_diff(double profit, double profit_naive) {
  if (std::fabs(profit_naive) < 1e-12)
    throw UsageError("profit_diff: baseline profit is zero");
  return (profit - profit_naive) / profit_naive * 100.0;
}

std::unique_ptr<grad::SubsystemModel> make_model(const SubsystemSpec& sub) {
  if (sub.type == "house")
    return std::make_unique<grad::HouseModel>(sub.house, sub.u_min, sub.u_max);
  if (sub.type == "well")
    return std::make_unique<grad::WellModel>(sub.well, sub.u_min, sub.u_max);
  throw ValidationError("make_model: unknown subsystem type '" + sub.type + "'");
}

Scenario freeze_disturbances(const Scenario& s, double t_freeze, double new_horizon_s) {
  if (!(new_horizon_s > 0.0)) throw UsageError("freeze_disturbances: bad horizon");
  Scenario out = s;
  out.horizon_s = new_horizon_s;
  for (auto& [name, tl] : out.timelines) {
    const double v = timeline_at(s.timelines.at(name), t_freeze);
    tl.points = {{0.0, v}, {new_horizon_s, v}};
  }
  return out;
}

void set_constant_timeline(Scenario& s, const std::string& name, double value) {
  if (!s.timelines.count(name)) throw UsageError("set_constant_timeline: unknown timeline");
  s.timelines[name].points = {{0.0, value}, {s.horizon_s, value}};
}

void set_step_timeline(Scenario& s, const std::string& name, double before, double after,
                       double t_step) {
  if (!s.timelines.count(name)) throw UsageError("set_step_timeline: unknown timeline");
  if (!(t_step > 0.0) || !(t_step + s.dt_s < s.horizon_s))
    throw UsageError("set_step_timeline: step time outside horizon");
  s.timelines[name].points = {
      {0.0, before}, {t_step, before}, {t_step + s.dt_s, after}, {s.horizon_s, after}};
}

}  // namespace distopt::scen
