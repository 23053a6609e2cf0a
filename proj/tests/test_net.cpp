#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include "distopt/net.hpp"
#include "distopt/sim.hpp"

using namespace distopt;
using sim::Arch;
using sim::Trace;

namespace {

const std::string kHubPath = DISTOPT_DATA_DIR "/energy_hub.json";

scen::Scenario frozen_hub(double horizon_s) {
  const scen::Scenario s = scen::load_scenario(kHubPath);
  return scen::freeze_disturbances(s, 95400.0, horizon_s);
}

// Joins a worker thread and surfaces its exception, if any. The error slot
// lives on the heap so Worker objects stay movable while the thread runs.
struct Worker {
  std::thread thread;
  std::shared_ptr<std::exception_ptr> error = std::make_shared<std::exception_ptr>();

  template <class F>
  explicit Worker(F f) {
    auto slot = error;
    thread = std::thread([slot, f]() {
      try {
        f();
      } catch (...) {
        *slot = std::current_exception();
      }
    });
  }
  void join() { thread.join(); }
  bool failed() const { return static_cast<bool>(*error); }
};

// Minimal hand-driven peer for protocol-abuse tests.
struct FakeClient {
  int fd = -1;

  explicit FakeClient(int port) {
    fd = ::socket(AF_INET, SOCK_STREAM, 0);
    REQUIRE(fd >= 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<uint16_t>(port));
    ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
    for (int attempt = 0; attempt < 100; ++attempt) {
      if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0) return;
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    REQUIRE_MESSAGE(false, "fake client cannot connect");
  }
  ~FakeClient() { close(); }

  void close() {
    if (fd >= 0) {
      ::close(fd);
      fd = -1;
    }
  }
  void send_line(const std::string& line) {
    const std::string data = line + "\n";
    REQUIRE(::send(fd, data.data(), data.size(), MSG_NOSIGNAL) ==
            static_cast<ssize_t>(data.size()));
  }
  std::string read_line() {
    std::string buf;
    char c = 0;
    while (true) {
      const ssize_t n = ::recv(fd, &c, 1, 0);
      REQUIRE(n == 1);
      if (c == '\n') return buf;
      buf.push_back(c);
    }
  }
};

struct DistributedRun {
  Trace coordinator;
  std::vector<Trace> subsystems;
};

DistributedRun run_distributed(const scen::Scenario& s, Arch arch) {
  net::NetOptions opt;
  opt.run.arch = arch;
  net::Coordinator coord(s, opt);
  opt.port = coord.port();

  DistributedRun out;
  out.subsystems.resize(s.n_subsystems());
  std::vector<Worker> workers;
  workers.reserve(s.n_subsystems() + 1);
  workers.emplace_back([&]() { out.coordinator = coord.run(); });
  for (std::size_t i = 0; i < s.n_subsystems(); ++i)
    workers.emplace_back([&, i]() { out.subsystems[i] = net::run_subsystem(s, i, opt); });
  for (Worker& w : workers) w.join();
  for (Worker& w : workers)
    if (w.failed()) std::rethrow_exception(*w.error);
  return out;
}

}  // namespace

// ---- validation before any socket work ----

TEST_CASE("distributed mode rejects unsupported configurations") {
  const scen::Scenario s = frozen_hub(3600.0);
  net::NetOptions opt;

  opt.run.arch = Arch::kNaive;
  CHECK_THROWS_AS((void)net::run_subsystem(s, 0, opt), ValidationError);
  CHECK_THROWS_AS(net::Coordinator(s, opt), ValidationError);

  opt.run.arch = Arch::kDual;
  CHECK_THROWS_AS((void)net::run_subsystem(s, 5, opt), ValidationError);

  scen::Scenario multi = s;
  multi.m = 2;
  CHECK_THROWS_AS(net::Coordinator(multi, opt), ValidationError);
}

TEST_CASE("the coordinator binds an ephemeral port up front") {
  const scen::Scenario s = frozen_hub(3600.0);
  net::NetOptions opt;
  opt.run.arch = Arch::kDual;
  net::Coordinator coord(s, opt);
  CHECK(coord.port() > 0);
  // never runs: destruction releases the listener without side effects
}

// ---- equivalence with the in-process harness ----

TEST_CASE("distributed dual run matches the in-process trajectories exactly") {
  const scen::Scenario s = frozen_hub(7200.0);

  sim::RunOptions ropt;
  ropt.arch = Arch::kDual;
  const Trace inproc = sim::run_simulation(s, ropt).trace;

  const DistributedRun dist = run_distributed(s, Arch::kDual);

  REQUIRE(dist.coordinator.rows.size() == 12);  // 120 steps, one round per 10
  for (std::size_t r = 0; r < dist.coordinator.rows.size(); ++r) {
    CHECK(dist.coordinator.at(r, "time") == 600.0 * static_cast<double>(r));
    CHECK(dist.coordinator.at(r, "lambda[0]") == inproc.at(10 * r, "lambda[0]"));
    CHECK(dist.coordinator.at(r, "g_max[0]") == 26.0);
  }

  for (std::size_t i = 0; i < 3; ++i) {
    const Trace& sub = dist.subsystems[i];
    REQUIRE(sub.rows.size() == inproc.rows.size());
    const std::string idx = std::to_string(i);
    for (std::size_t k = 0; k < sub.rows.size(); ++k) {
      CHECK(sub.at(k, "time") == inproc.at(k, "time"));
      CHECK(sub.at(k, "u[" + idx + "][0]") == inproc.at(k, "u[" + idx + "][0]"));
      CHECK(sub.at(k, "cv[" + idx + "][0]") == inproc.at(k, "cv[" + idx + "][0]"));
      CHECK(sub.at(k, "T_r[" + idx + "]") == inproc.at(k, "T_r[" + idx + "]"));
    }
  }
}

TEST_CASE("distributed primal run matches the in-process allocations exactly") {
  const scen::Scenario s = frozen_hub(7200.0);

  sim::RunOptions ropt;
  ropt.arch = Arch::kPrimal;
  const Trace inproc = sim::run_simulation(s, ropt).trace;

  const DistributedRun dist = run_distributed(s, Arch::kPrimal);

  REQUIRE(dist.coordinator.rows.size() == 12);
  REQUIRE(dist.coordinator.has_col("t_total[0]"));
  for (std::size_t r = 0; r < dist.coordinator.rows.size(); ++r) {
    for (std::size_t i = 0; i < 3; ++i) {
      const std::string col = "t_alloc[" + std::to_string(i) + "][0]";
      CHECK(dist.coordinator.at(r, col) == inproc.at(10 * r, col));
    }
    CHECK(dist.coordinator.at(r, "t_total[0]") <= 26.0);
  }

  for (std::size_t i = 0; i < 3; ++i) {
    const Trace& sub = dist.subsystems[i];
    const std::string idx = std::to_string(i);
    REQUIRE(sub.rows.size() == inproc.rows.size());
    for (std::size_t k = 0; k < sub.rows.size(); ++k) {
      CHECK(sub.at(k, "u[" + idx + "][0]") == inproc.at(k, "u[" + idx + "][0]"));
      CHECK(sub.at(k, "t_alloc[" + idx + "][0]") == inproc.at(k, "t_alloc[" + idx + "][0]"));
    }
  }
}

TEST_CASE("distributed override run regulates the total to the limit") {
  const scen::Scenario s = frozen_hub(21600.0);
  const DistributedRun dist = run_distributed(s, Arch::kDualOverride);

  REQUIRE(dist.coordinator.rows.size() == 36);
  REQUIRE(dist.coordinator.has_col("lambda[0]"));
  const std::size_t rl = dist.coordinator.rows.size() - 1;
  CHECK(dist.coordinator.at(rl, "lambda[0]") >= 0.0);
  CHECK(dist.coordinator.at(rl, "g_total[0]") == doctest::Approx(26.0).epsilon(2e-2));

  // the critical subsystem still publishes its local view
  const Trace& crit = dist.subsystems[0];
  REQUIRE(crit.has_col("cv[0][0]"));
  REQUIRE(crit.has_col("lambda[0]"));
  CHECK(crit.rows.size() == 360);
}

// ---- protocol robustness against a misbehaving peer ----
//
// Two healthy agents drive subsystems 1 and 2; a hand-rolled client covers
// subsystem 0 and misbehaves. Agent threads swallow their own errors (they
// lose the coordinator when it aborts, which is the expected fallout).

namespace {

struct AbuseHarness {
  scen::Scenario s;
  net::NetOptions opt;
  net::Coordinator coord;
  std::vector<Worker> agents;

  explicit AbuseHarness(double horizon_s)
      : s(frozen_hub(horizon_s)),
        opt([] {
          net::NetOptions o;
          o.run.arch = Arch::kDual;
          return o;
        }()),
        coord(s, opt) {
    opt.port = coord.port();
    for (std::size_t i = 1; i <= 2; ++i)
      agents.emplace_back([this, i]() { (void)net::run_subsystem(s, i, opt); });
  }
  void join_agents() {
    for (Worker& w : agents) w.join();  // errors intentionally ignored
  }
};

}  // namespace

TEST_CASE("junk lines are dropped and the round still completes") {
  AbuseHarness h(600.0);  // exactly one coordination round
  FakeClient fake(h.coord.port());
  fake.send_line("how about some garbage");
  fake.send_line(R"({"almost":"a message"})");
  fake.send_line(R"({"type":"usage","subsystem":0,"g":[8.5],"tick":0})");

  Trace t;
  h.coord.run(t);
  CHECK(t.rows.size() == 1);
  CHECK(t.at(0, "lambda[0]") == 0.0);  // first broadcast precedes any update
  CHECK(fake.read_line().find("\"type\":\"price\"") != std::string::npos);
  h.join_agents();
}

TEST_CASE("a report from the future aborts the run") {
  AbuseHarness h(600.0);
  FakeClient fake(h.coord.port());
  fake.send_line(R"({"type":"usage","subsystem":0,"g":[8.5],"tick":999})");

  CHECK_THROWS_WITH_AS(h.coord.run(), "report from the future (tick 999)", ProtocolError);
  h.join_agents();
}

TEST_CASE("a duplicate report for the same tick aborts the run") {
  AbuseHarness h(600.0);
  FakeClient fake(h.coord.port());
  fake.send_line(R"({"type":"usage","subsystem":0,"g":[8.5],"tick":0})");
  fake.send_line(R"({"type":"usage","subsystem":0,"g":[8.5],"tick":0})");

  CHECK_THROWS_WITH_AS(h.coord.run(), "duplicate report for tick 0", ProtocolError);
  h.join_agents();
}

TEST_CASE("an identity change mid-run aborts and keeps the completed rows") {
  AbuseHarness h(1200.0);  // two rounds
  FakeClient fake(h.coord.port());
  fake.send_line(R"({"type":"usage","subsystem":0,"g":[8.5],"tick":0})");

  Trace partial;
  bool threw = false;
  Worker coord_worker([&]() {
    try {
      h.coord.run(partial);
    } catch (const ProtocolError& e) {
      threw = true;
      CHECK(std::string(e.what()) == "connection changed identity mid-run");
    }
  });

  (void)fake.read_line();  // tick-0 price broadcast: round 0 is complete
  fake.send_line(R"({"type":"usage","subsystem":1,"g":[8.5],"tick":1})");

  coord_worker.join();
  REQUIRE_FALSE(coord_worker.failed());
  CHECK(threw);
  CHECK(partial.rows.size() == 1);  // round 0 survived for flushing
  CHECK(partial.has_col("lambda[0]"));
  h.join_agents();
}

TEST_CASE("a vanished subsystem aborts the run") {
  AbuseHarness h(1200.0);
  FakeClient fake(h.coord.port());
  fake.send_line(R"({"type":"usage","subsystem":0,"g":[8.5],"tick":0})");
  fake.close();  // gone before round 1

  CHECK_THROWS_AS(h.coord.run(), ProtocolError);
  h.join_agents();
}
