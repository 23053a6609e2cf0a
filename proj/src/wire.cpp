#include "distopt/wire.hpp"

#include <json.hpp>

namespace distopt::wire {

namespace {

using json = nlohmann::ordered_json;

json vec_to_json(const Vec& v) {
  json a = json::array();
  for (double x : v) a.push_back(x);
  return a;
}

// Strict field access: every key must exist with the right shape, and the
// object must contain nothing else.
class FieldReader {
 public:
  explicit FieldReader(const json& obj) : obj_(obj) {}

  const json& get(const char* key) {
    auto it = obj_.find(key);
    if (it == obj_.end())
      throw ProtocolError(std::string("message missing field '") + key + "'");
    seen_.push_back(key);
    return *it;
  }

  double number(const char* key) {
    const json& v = get(key);
    if (!v.is_number()) throw ProtocolError(std::string("field '") + key + "' must be a number");
    return v.get<double>();
  }

  long long integer(const char* key) {
    const json& v = get(key);
    if (!v.is_number_integer())
      throw ProtocolError(std::string("field '") + key + "' must be an integer");
    return v.get<long long>();
  }

  Vec vector(const char* key) {
    const json& v = get(key);
    if (!v.is_array()) throw ProtocolError(std::string("field '") + key + "' must be an array");
    Vec out;
    out.reserve(v.size());
    for (const json& e : v) {
      if (!e.is_number())
        throw ProtocolError(std::string("field '") + key + "' must hold numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      bool known = false;
      for (const std::string& k : seen_)
        if (k == it.key()) { known = true; break; }
      if (!known) throw ProtocolError("unknown field '" + it.key() + "'");
    }
  }

 private:
  const json& obj_;
  std::vector<std::string> seen_;
};

}  // namespace

std::string encode_message(const Message& msg) {
  json j;
  if (const auto* m = std::get_if<PriceBroadcast>(&msg)) {
    j["type"] = "price";
    j["lambda"] = vec_to_json(m->lambda);
    j["tick"] = m->tick;
  } else if (const auto* m = std::get_if<UsageReport>(&msg)) {
    j["type"] = "usage";
    j["subsystem"] = m->subsystem;
    j["g"] = vec_to_json(m->g);
    j["tick"] = m->tick;
  } else if (const auto* m = std::get_if<OpportunityCostReport>(&msg)) {
    j["type"] = "opportunity";
    j["subsystem"] = m->subsystem;
    j["lambda_i"] = vec_to_json(m->lambda_i);
    j["tick"] = m->tick;
  } else if (const auto* m = std::get_if<AllocationUpdate>(&msg)) {
    j["type"] = "allocation";
    j["subsystem"] = m->subsystem;
    j["t"] = vec_to_json(m->t);
    j["tick"] = m->tick;
  } else if (const auto* m = std::get_if<OverrideReport>(&msg)) {
    j["type"] = "override";
    j["subsystem"] = m->subsystem;
    j["u_c"] = m->u_c;
    j["u_g"] = m->u_g;
    j["tick"] = m->tick;
  }
  return j.dump();
}

Message decode_message(const std::string& line) {
  json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw ProtocolError("malformed JSON: " + line.substr(0, 120));
  if (!j.is_object()) throw ProtocolError("message must be a JSON object");

  FieldReader r(j);
  const json& type = r.get("type");
  if (!type.is_string()) throw ProtocolError("field 'type' must be a string");
  const std::string t = type.get<std::string>();

  Message out;
  if (t == "price") {
    PriceBroadcast m;
    m.lambda = r.vector("lambda");
    m.tick = r.integer("tick");
    out = m;
  } else if (t == "usage") {
    UsageReport m;
    m.subsystem = static_cast<int>(r.integer("subsystem"));
    m.g = r.vector("g");
    m.tick = r.integer("tick");
    out = m;
  } else if (t == "opportunity") {
    OpportunityCostReport m;
    m.subsystem = static_cast<int>(r.integer("subsystem"));
    m.lambda_i = r.vector("lambda_i");
    m.tick = r.integer("tick");
    out = m;
  } else if (t == "allocation") {
    AllocationUpdate m;
    m.subsystem = static_cast<int>(r.integer("subsystem"));
    m.t = r.vector("t");
    m.tick = r.integer("tick");
    out = m;
  } else if (t == "override") {
    OverrideReport m;
    m.subsystem = static_cast<int>(r.integer("subsystem"));
    m.u_c = r.number("u_c");
    m.u_g = r.number("u_g");
    m.tick = r.integer("tick");
    out = m;
  } else {
    throw ProtocolError("unknown message type '" + t + "'");
  }
  r.finish();
  return out;
}

}  // namespace distopt::wire
