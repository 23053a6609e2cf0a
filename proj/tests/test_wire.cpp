#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "distopt/wire.hpp"

using namespace distopt;
using namespace distopt::wire;

// ---- canonical encodings ----

TEST_CASE("messages encode with a leading type field and stable field order") {
  PriceBroadcast price;
  price.lambda = {0.5};
  price.tick = 12;
  CHECK(encode_message(price) == R"({"type":"price","lambda":[0.5],"tick":12})");

  UsageReport usage;
  usage.subsystem = 2;
  usage.g = {10.25};
  usage.tick = 3;
  CHECK(encode_message(usage) == R"({"type":"usage","subsystem":2,"g":[10.25],"tick":3})");

  OpportunityCostReport opp;
  opp.subsystem = 1;
  opp.lambda_i = {21.5};
  opp.tick = 7;
  CHECK(encode_message(opp) ==
        R"({"type":"opportunity","subsystem":1,"lambda_i":[21.5],"tick":7})");

  AllocationUpdate alloc;
  alloc.subsystem = 0;
  alloc.t = {8.5};
  alloc.tick = 4;
  CHECK(encode_message(alloc) == R"({"type":"allocation","subsystem":0,"t":[8.5],"tick":4})");

  OverrideReport ovr;
  ovr.subsystem = 0;
  ovr.u_c = 3.25;
  ovr.u_g = 2.5;
  ovr.tick = 9;
  CHECK(encode_message(ovr) ==
        R"({"type":"override","subsystem":0,"u_c":3.25,"u_g":2.5,"tick":9})");
}

// ---- round trips ----

TEST_CASE("every message type decodes back to an equal value") {
  PriceBroadcast price;
  price.lambda = {18.372819281, 0.0};
  price.tick = 1234567890123LL;

  UsageReport usage;
  usage.subsystem = -1;  // aggregate relay
  usage.g = {25.999999999};
  usage.tick = 41;

  OpportunityCostReport opp;
  opp.subsystem = 2;
  opp.lambda_i = {-3.5e-7};
  opp.tick = 0;

  AllocationUpdate alloc;
  alloc.subsystem = 1;
  alloc.t = {10.0 / 3.0};
  alloc.tick = 5;

  OverrideReport ovr;
  ovr.subsystem = 0;
  ovr.u_c = 19.9999999999;
  ovr.u_g = 1e-300;
  ovr.tick = 77;

  for (const Message& m : {Message{price}, Message{usage}, Message{opp},
                           Message{alloc}, Message{ovr}}) {
    const Message back = decode_message(encode_message(m));
    CHECK(back == m);  // doubles survive the text round trip exactly
  }
}

TEST_CASE("decoding accepts any field order") {
  const Message m = decode_message(R"({"lambda":[0.5],"tick":12,"type":"price"})");
  const auto& p = std::get<PriceBroadcast>(m);
  CHECK(p.lambda == Vec{0.5});
  CHECK(p.tick == 12);
}

// ---- strict rejection ----

TEST_CASE("malformed lines raise protocol errors") {
  // not JSON at all
  CHECK_THROWS_AS((void)decode_message("hello"), ProtocolError);
  CHECK_THROWS_AS((void)decode_message(""), ProtocolError);
  CHECK_THROWS_AS((void)decode_message(R"({"type":"price")"), ProtocolError);
  // JSON but not an object
  CHECK_THROWS_AS((void)decode_message("[1,2]"), ProtocolError);
  CHECK_THROWS_AS((void)decode_message("42"), ProtocolError);
}

TEST_CASE("unknown types and fields are rejected") {
  CHECK_THROWS_AS((void)decode_message(R"({"type":"priced","lambda":[0.5],"tick":1})"),
                  ProtocolError);
  CHECK_THROWS_AS(
      (void)decode_message(R"({"type":"price","lambda":[0.5],"tick":1,"extra":1})"),
      ProtocolError);
  CHECK_THROWS_AS(
      (void)decode_message(R"({"type":"usage","subsystem":0,"g":[1],"tick":1,"ts":0})"),
      ProtocolError);
}

TEST_CASE("missing fields are rejected") {
  CHECK_THROWS_AS((void)decode_message(R"({"type":"price","tick":1})"), ProtocolError);
  CHECK_THROWS_AS((void)decode_message(R"({"type":"price","lambda":[0.5]})"), ProtocolError);
  CHECK_THROWS_AS((void)decode_message(R"({"type":"usage","subsystem":0,"tick":1})"),
                  ProtocolError);
  CHECK_THROWS_AS((void)decode_message(R"({"type":"override","subsystem":0,"u_c":1,"tick":1})"),
                  ProtocolError);
  CHECK_THROWS_AS((void)decode_message(R"({"lambda":[0.5],"tick":1})"), ProtocolError);
}

TEST_CASE("wrong value shapes are rejected") {
  // vector fields must be arrays of numbers
  CHECK_THROWS_AS((void)decode_message(R"({"type":"price","lambda":0.5,"tick":1})"),
                  ProtocolError);
  CHECK_THROWS_AS((void)decode_message(R"({"type":"price","lambda":["x"],"tick":1})"),
                  ProtocolError);
  // tick and subsystem must be integers
  CHECK_THROWS_AS((void)decode_message(R"({"type":"price","lambda":[0.5],"tick":1.5})"),
                  ProtocolError);
  CHECK_THROWS_AS((void)decode_message(R"({"type":"usage","subsystem":0.5,"g":[1],"tick":1})"),
                  ProtocolError);
  // scalars must be numbers, type must be a string
  CHECK_THROWS_AS(
      (void)decode_message(R"({"type":"override","subsystem":0,"u_c":"x","u_g":1,"tick":1})"),
      ProtocolError);
  CHECK_THROWS_AS((void)decode_message(R"({"type":7,"lambda":[0.5],"tick":1})"), ProtocolError);
}

TEST_CASE("empty vectors and negative ticks survive the trip") {
  PriceBroadcast p;
  p.lambda = {};
  p.tick = -1;
  const Message back = decode_message(encode_message(p));
  CHECK(back == Message{p});
}
