#pragma once

// Wire messages for the distributed runtime: one JSON object per line,
// UTF-8, LF-terminated, with a "type" field discriminating the payload.
// Decoding is strict — unknown type, unknown field, missing field or a
// wrong value shape raise ProtocolError (callers log and drop the line,
// keeping the connection alive).

#include <string>
#include <variant>

#include "distopt/core.hpp"

namespace distopt::wire {

// Coordinator -> subsystems: the current shadow prices.
struct PriceBroadcast {
  Vec lambda;
  long long tick = 0;
  friend bool operator==(const PriceBroadcast&, const PriceBroadcast&) = default;
};

// Subsystem -> coordinator: current resource usage g_i. The coordinator
// also reuses this message with subsystem = -1 to relay the aggregate
// usage to override-critical subsystems, whose constraint loop needs it.
struct UsageReport {
  int subsystem = 0;
  Vec g;
  long long tick = 0;
  friend bool operator==(const UsageReport&, const UsageReport&) = default;
};

// Subsystem -> coordinator: local opportunity costs (primal scheme).
struct OpportunityCostReport {
  int subsystem = 0;
  Vec lambda_i;
  long long tick = 0;
  friend bool operator==(const OpportunityCostReport&, const OpportunityCostReport&) = default;
};

// Coordinator -> one subsystem: its resource allocation (primal scheme).
struct AllocationUpdate {
  int subsystem = 0;
  Vec t;
  long long tick = 0;
  friend bool operator==(const AllocationUpdate&, const AllocationUpdate&) = default;
};

// Critical subsystem -> coordinator: both selector candidates; the
// coordinator prices the gap u_c - u_g and recovers the applied input as
// min(u_c, u_g).
struct OverrideReport {
  int subsystem = 0;
  double u_c = 0.0;
  double u_g = 0.0;
  long long tick = 0;
  friend bool operator==(const OverrideReport&, const OverrideReport&) = default;
};

using Message = std::variant<PriceBroadcast, UsageReport, OpportunityCostReport,
                             AllocationUpdate, OverrideReport>;

// One JSON object, no trailing newline (the transport appends the LF).
std::string encode_message(const Message& msg);

// Strict inverse of encode_message; ProtocolError on any malformation.
Message decode_message(const std::string& line);

}  // namespace distopt::wire
