#include "distopt/net.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <thread>

#include "distopt/coordinators.hpp"
#include "distopt/log.hpp"
#include "distopt/wire.hpp"

namespace distopt::net {

namespace {

constexpr int kPollTimeoutMs = 30000;   // barrier patience before giving up
constexpr int kConnectRetries = 100;    // subsystem start-up grace: 100 x 50 ms

void close_fd(int& fd) {
  if (fd >= 0) {
    ::close(fd);
    fd = -1;
  }
}

// getaddrinfo wrapper; IPv4, numeric or named hosts.
sockaddr_in resolve(const std::string& address, int port) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const int rc = ::getaddrinfo(address.c_str(), nullptr, &hints, &res);
  if (rc != 0 || res == nullptr)
    throw ProtocolError("cannot resolve '" + address + "': " + ::gai_strerror(rc));
  sockaddr_in out{};
  std::memcpy(&out, res->ai_addr, sizeof(out));
  out.sin_port = htons(static_cast<uint16_t>(port));
  ::freeaddrinfo(res);
  return out;
}

void send_all(int fd, const std::string& data) {
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL);
    if (n <= 0) throw ProtocolError("connection lost while sending");
    off += static_cast<std::size_t>(n);
  }
}

void send_line(int fd, const wire::Message& msg) {
  send_all(fd, wire::encode_message(msg) + "\n");
}

// Pulls whatever is available into buf; true if the peer is still open.
bool pump(int fd, std::string& buf, bool blocking) {
  char chunk[4096];
  const ssize_t n = ::recv(fd, chunk, sizeof(chunk), blocking ? 0 : MSG_DONTWAIT);
  if (n == 0) return false;
  if (n < 0) {
    if (errno == EAGAIN || errno == EWOULDBLOCK) return true;
    throw ProtocolError(std::string("recv failed: ") + std::strerror(errno));
  }
  buf.append(chunk, static_cast<std::size_t>(n));
  return true;
}

// Extracts the next complete line (without the LF) from buf.
bool take_line(std::string& buf, std::string& line) {
  const std::size_t pos = buf.find('\n');
  if (pos == std::string::npos) return false;
  line.assign(buf, 0, pos);
  buf.erase(0, pos + 1);
  return true;
}

long long message_tick(const wire::Message& m) {
  return std::visit([](const auto& x) { return x.tick; }, m);
}

struct Cadence {
  long long steps = 0;       // plant steps over the horizon
  int local_period = 1;      // plant steps per local update
  int coord_period = 1;      // local updates per coordinator update
  long long round_steps = 0; // plant steps per coordinator round
  long long rounds = 0;
};

Cadence cadence_of(const scen::Scenario& s, const sim::RunOptions& run) {
  Cadence c;
  c.steps = std::llround(s.horizon_s / s.dt_s);
  c.local_period = s.local_period_steps;
  c.coord_period = run.coordinator_period_override > 0 ? run.coordinator_period_override
                                                       : s.coordinator_period_locals;
  c.round_steps = static_cast<long long>(c.local_period) * c.coord_period;
  c.rounds = (c.steps + c.round_steps - 1) / c.round_steps;
  if (c.steps < 1) throw ValidationError("distributed run: horizon shorter than one step");
  return c;
}

void check_distributed_arch(const scen::Scenario& s, const sim::RunOptions& run) {
  if (s.m != 1) throw ValidationError("distributed run: single coupling constraint only");
  if (run.arch != sim::Arch::kDual && run.arch != sim::Arch::kDualOverride &&
      run.arch != sim::Arch::kPrimal)
    throw ValidationError("distributed mode supports dual, dual-override and primal");
  if (run.backoff_fraction < 0.0 || run.backoff_fraction >= 1.0)
    throw ValidationError("distributed run: backoff_fraction must lie in [0, 1)");
}

}  // namespace

// ---- coordinator side ----

Coordinator::Coordinator(const scen::Scenario& s, const NetOptions& opt) : s_(s), opt_(opt) {
  check_distributed_arch(s_, opt_.run);
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw ProtocolError(std::string("socket: ") + std::strerror(errno));
  const int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr = resolve(opt_.address, opt_.port);
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    const std::string why = std::strerror(errno);
    close_fd(listen_fd_);
    throw ProtocolError("bind " + opt_.address + ":" + std::to_string(opt_.port) + ": " + why);
  }
  if (::listen(listen_fd_, static_cast<int>(s_.n_subsystems())) != 0) {
    const std::string why = std::strerror(errno);
    close_fd(listen_fd_);
    throw ProtocolError("listen: " + why);
  }
  sockaddr_in bound{};
  socklen_t len = sizeof(bound);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &len);
  port_ = ntohs(bound.sin_port);
  log::info("coordinator listening on " + opt_.address + ":" + std::to_string(port_));
}

Coordinator::~Coordinator() { close_fd(listen_fd_); }

Trace Coordinator::run() {
  Trace t;
  run(t);
  return t;
}

void Coordinator::run(Trace& out) {
  const std::size_t n = s_.n_subsystems();
  const Cadence cad = cadence_of(s_, opt_.run);
  const sim::Arch arch = opt_.run.arch;
  const double backoff_scale = 1.0 - opt_.run.backoff_fraction;

  struct Conn {
    int fd = -1;
    std::string buf;
    int subsystem = -1;
  };
  std::vector<Conn> conns;
  conns.reserve(n);

  // Accept phase: N connections, identity learned from the first report.
  for (std::size_t i = 0; i < n; ++i) {
    pollfd p{listen_fd_, POLLIN, 0};
    const int rc = ::poll(&p, 1, kPollTimeoutMs);
    if (rc <= 0) {
      for (Conn& c : conns) close_fd(c.fd);
      throw ProtocolError("timed out waiting for subsystem connections");
    }
    Conn c;
    c.fd = ::accept(listen_fd_, nullptr, nullptr);
    if (c.fd < 0) {
      for (Conn& cc : conns) close_fd(cc.fd);
      throw ProtocolError(std::string("accept: ") + std::strerror(errno));
    }
    conns.push_back(std::move(c));
  }

  // Architecture state (the coordinator owns it).
  coord::DualCoordinatorState dual_state;
  coord::OverrideCoordinatorState override_coord;
  coord::PrimalCoordinatorState primal_state;
  std::vector<std::size_t> critical_slot(n, static_cast<std::size_t>(-1));

  const scen::DisturbanceState d0 = scen::disturbance_at(s_, 0.0);
  if (arch == sim::Arch::kDual) {
    dual_state.lambda = Vec(s_.m, 0.0);
    dual_state.gain = s_.dual.coordinator_gain;
  } else if (arch == sim::Arch::kDualOverride) {
    override_coord.lambda = Vec(s_.override_tuning.critical.size(), 0.0);
    override_coord.gain = s_.override_tuning.coordinator_gain;
    for (std::size_t slot = 0; slot < s_.override_tuning.critical.size(); ++slot)
      critical_slot[static_cast<std::size_t>(s_.override_tuning.critical[slot])] = slot;
  } else {
    primal_state.closing = static_cast<std::size_t>(s_.primal.closing);
    primal_state.alloc.assign(n, Vec(s_.m, 0.0));
    for (std::size_t i = 0; i < n; ++i)
      primal_state.alloc[i][0] = d0.g_max[0] * backoff_scale / static_cast<double>(n);
    coord::enforce_budget(primal_state.alloc, Vec{d0.g_max[0] * backoff_scale});
    primal_state.marginal_alloc = primal_state.alloc[primal_state.closing];
    primal_state.equalizer_gain.assign(n, 0.0);
    std::size_t gi = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == primal_state.closing) continue;
      primal_state.equalizer_gain[i] = s_.primal.equalizer_gains[gi++];
    }
    primal_state.marginal_gain = Vec(s_.m, s_.primal.marginal_gain);
  }

  out.columns.clear();
  out.rows.clear();
  out.columns.push_back("time");
  if (arch == sim::Arch::kPrimal) {
    for (std::size_t i = 0; i < n; ++i)
      out.columns.push_back("lambda_i[" + std::to_string(i) + "][0]");
    for (std::size_t i = 0; i < n; ++i)
      out.columns.push_back("t_alloc[" + std::to_string(i) + "][0]");
    out.columns.push_back("t_total[0]");
  } else {
    for (std::size_t k = 0; k < (arch == sim::Arch::kDual ? s_.m
                                                          : override_coord.lambda.size());
         ++k)
      out.columns.push_back("lambda[" + std::to_string(k) + "]");
    out.columns.push_back("g_total[0]");
  }
  out.columns.push_back("g_max[0]");

  // Per-round report slots.
  std::vector<bool> have(n, false);
  Vec usage(n, 0.0);
  Vec cand_c(n, 0.0), cand_g(n, 0.0);
  std::vector<Vec> lambda_all(n, Vec(s_.m, 0.0));
  std::vector<bool> id_claimed(n, false);

  auto fail = [&](const std::string& why) -> ProtocolError {
    for (Conn& c : conns) close_fd(c.fd);
    return ProtocolError(why);
  };

  for (long long round = 0; round < cad.rounds; ++round) {
    std::fill(have.begin(), have.end(), false);

    // Barrier: collect one report per subsystem for this tick.
    std::size_t collected = 0;
    while (collected < n) {
      std::vector<pollfd> pfds;
      pfds.reserve(n);
      for (const Conn& c : conns) pfds.push_back({c.fd, POLLIN, 0});
      const int rc = ::poll(pfds.data(), pfds.size(), kPollTimeoutMs);
      if (rc <= 0) throw fail("timed out waiting for tick " + std::to_string(round) + " reports");
      for (std::size_t ci = 0; ci < conns.size(); ++ci) {
        if (!(pfds[ci].revents & (POLLIN | POLLHUP | POLLERR))) continue;
        Conn& c = conns[ci];
        if (!pump(c.fd, c.buf, /*blocking=*/false))
          throw fail("subsystem disconnected during tick " + std::to_string(round));
        std::string line;
        while (take_line(c.buf, line)) {
          wire::Message msg;
          try {
            msg = wire::decode_message(line);
          } catch (const ProtocolError& e) {
            log::info(std::string("dropping bad line: ") + e.what());
            continue;
          }
          const long long tick = message_tick(msg);
          if (tick > round) throw fail("report from the future (tick " + std::to_string(tick) + ")");
          if (tick < round) {
            log::info("dropping stale report for tick " + std::to_string(tick));
            continue;
          }
          int id = -1;
          if (const auto* u = std::get_if<wire::UsageReport>(&msg)) {
            const bool in_range = u->subsystem >= 0 && u->subsystem < static_cast<int>(n);
            const bool want_usage =
                in_range &&
                (arch == sim::Arch::kDual ||
                 (arch == sim::Arch::kDualOverride &&
                  critical_slot[static_cast<std::size_t>(u->subsystem)] ==
                      static_cast<std::size_t>(-1)));
            if (!want_usage || u->g.size() != s_.m) {
              log::info("dropping unexpected usage report");
              continue;
            }
            id = u->subsystem;
            usage[static_cast<std::size_t>(id)] = u->g[0];
          } else if (const auto* o = std::get_if<wire::OverrideReport>(&msg)) {
            const bool in_range = o->subsystem >= 0 && o->subsystem < static_cast<int>(n);
            if (arch != sim::Arch::kDualOverride || !in_range ||
                critical_slot[static_cast<std::size_t>(o->subsystem)] ==
                    static_cast<std::size_t>(-1)) {
              log::info("dropping unexpected override report");
              continue;
            }
            id = o->subsystem;
            cand_c[static_cast<std::size_t>(id)] = o->u_c;
            cand_g[static_cast<std::size_t>(id)] = o->u_g;
            usage[static_cast<std::size_t>(id)] = std::min(o->u_c, o->u_g);
          } else if (const auto* p = std::get_if<wire::OpportunityCostReport>(&msg)) {
            const bool in_range = p->subsystem >= 0 && p->subsystem < static_cast<int>(n);
            if (arch != sim::Arch::kPrimal || !in_range || p->lambda_i.size() != s_.m) {
              log::info("dropping unexpected opportunity report");
              continue;
            }
            id = p->subsystem;
            lambda_all[static_cast<std::size_t>(id)] = p->lambda_i;
          } else {
            log::info("dropping coordinator-bound message of broadcast type");
            continue;
          }
          const auto idx = static_cast<std::size_t>(id);
          if (c.subsystem == -1) {
            if (id_claimed[idx]) throw fail("two connections claim subsystem " + std::to_string(id));
            c.subsystem = id;
            id_claimed[idx] = true;
          } else if (c.subsystem != id) {
            throw fail("connection changed identity mid-run");
          }
          if (have[idx]) throw fail("duplicate report for tick " + std::to_string(round));
          have[idx] = true;
          ++collected;
        }
      }
    }

    // Validate the override arch saw override reports from every critical id.
    const double t = static_cast<double>(round * cad.round_steps) * s_.dt_s;
    const scen::DisturbanceState d = scen::disturbance_at(s_, t);
    Vec g_eff = d.g_max;
    for (double& v : g_eff) v *= backoff_scale;
    double total_usage = 0.0;
    for (std::size_t i = 0; i < n; ++i) total_usage += usage[i];

    // Update (tick 0 broadcasts the initial state).
    if (round > 0) {
      if (arch == sim::Arch::kDual) {
        dual_state = coord::dual_coordinator_step(dual_state, Vec{total_usage}, g_eff);
      } else if (arch == sim::Arch::kDualOverride) {
        Vec uc(override_coord.lambda.size()), ug(override_coord.lambda.size());
        for (std::size_t i = 0; i < n; ++i)
          if (critical_slot[i] != static_cast<std::size_t>(-1)) {
            uc[critical_slot[i]] = cand_c[i];
            ug[critical_slot[i]] = cand_g[i];
          }
        override_coord = coord::override_coordinator_step(override_coord, uc, ug);
      } else {
        auto r = coord::primal_coordinator_step(primal_state, lambda_all, g_eff);
        primal_state = r.state;
      }
    }

    // Record the coordinator-visible row.
    Vec row;
    row.push_back(t);
    if (arch == sim::Arch::kPrimal) {
      for (std::size_t i = 0; i < n; ++i) row.push_back(lambda_all[i][0]);
      double t_total = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        row.push_back(primal_state.alloc[i][0]);
        t_total += primal_state.alloc[i][0];
      }
      row.push_back(t_total);
    } else {
      const Vec& lam = (arch == sim::Arch::kDual) ? dual_state.lambda : override_coord.lambda;
      for (double v : lam) row.push_back(v);
      row.push_back(total_usage);
    }
    row.push_back(d.g_max[0]);
    out.rows.push_back(std::move(row));

    // Broadcast the answers (doubles as the tick acknowledgment).
    try {
      if (arch == sim::Arch::kPrimal) {
        for (Conn& c : conns) {
          wire::AllocationUpdate m;
          m.subsystem = c.subsystem;
          m.t = primal_state.alloc[static_cast<std::size_t>(c.subsystem)];
          m.tick = round;
          send_line(c.fd, m);
        }
      } else {
        const Vec& lam = (arch == sim::Arch::kDual) ? dual_state.lambda : override_coord.lambda;
        wire::PriceBroadcast pb;
        pb.lambda = lam;
        pb.tick = round;
        for (Conn& c : conns) send_line(c.fd, pb);
        if (arch == sim::Arch::kDualOverride) {
          wire::UsageReport agg;
          agg.subsystem = -1;
          agg.g = Vec{total_usage};
          agg.tick = round;
          for (Conn& c : conns)
            if (critical_slot[static_cast<std::size_t>(c.subsystem)] !=
                static_cast<std::size_t>(-1))
              send_line(c.fd, agg);
        }
      }
    } catch (const ProtocolError&) {
      for (Conn& c : conns) close_fd(c.fd);
      throw;
    }
  }

  for (Conn& c : conns) close_fd(c.fd);
}

// ---- subsystem side ----

Trace run_subsystem(const scen::Scenario& s, std::size_t subsystem, const NetOptions& opt) {
  Trace t;
  run_subsystem(s, subsystem, opt, t);
  return t;
}

void run_subsystem(const scen::Scenario& s, std::size_t subsystem, const NetOptions& opt,
                   Trace& out) {
  check_distributed_arch(s, opt.run);
  const std::size_t n = s.n_subsystems();
  if (subsystem >= n) throw ValidationError("run_subsystem: index out of range");
  const Cadence cad = cadence_of(s, opt.run);
  const sim::Arch arch = opt.run.arch;
  const double backoff_scale = 1.0 - opt.run.backoff_fraction;
  const bool energy_hub = s.kind == scen::CaseKind::kEnergyHub;
  const std::size_t i = subsystem;

  // Connect (with retry while the coordinator comes up).
  int fd = -1;
  const sockaddr_in addr = resolve(opt.address, opt.port);
  for (int attempt = 0; attempt < kConnectRetries; ++attempt) {
    fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw ProtocolError(std::string("socket: ") + std::strerror(errno));
    if (::connect(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) == 0) break;
    close_fd(fd);
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  if (fd < 0)
    throw ProtocolError("cannot reach coordinator at " + opt.address + ":" +
                        std::to_string(opt.port));

  // Local state (mirrors the in-process harness for one subsystem).
  const scen::DisturbanceState d0 = scen::disturbance_at(s, 0.0);
  const scen::SubsystemSpec& spec = s.subsystems[i];
  auto model = scen::make_model(spec);
  const double share0 = d0.g_max[0] * backoff_scale / static_cast<double>(n);
  Vec u{std::clamp(share0, spec.u_min, spec.u_max)};
  Vec t_alloc{share0};
  Vec lambda(s.m, 0.0);

  std::vector<control::PiState> pis;
  coord::OverrideLocalState override_state;
  coord::PrimalLocalState primal_local;
  bool is_critical = false;
  auto make_pi = [&](const scen::PiGains& g) {
    control::PiState ps;
    ps.kp = g.kp;
    ps.ki = g.ki;
    ps.kaw = g.kaw;
    ps.out_min = spec.u_min;
    ps.out_max = spec.u_max;
    ps.integral = u[0];
    return ps;
  };
  if (arch == sim::Arch::kDual) {
    pis = {make_pi(s.dual.local_pi[i])};
  } else if (arch == sim::Arch::kDualOverride) {
    pis = {make_pi(s.override_tuning.local_pi[i])};
    for (int id : s.override_tuning.critical)
      if (static_cast<std::size_t>(id) == i) is_critical = true;
    if (is_critical) {
      override_state.gradient_pi = pis;
      override_state.constraint_pi = make_pi(s.override_tuning.constraint_pi);
    }
  }

  plant::HouseState x{};
  if (energy_hub)
    x = plant::house_steady_state(u[0], d0.local[i].ambient, d0.local[i].irradiance, spec.house);

  // Report values carried between rounds.
  double usage = model->steady_constraint(u, d0.local[i])[0];
  double usage_reported = usage;
  Vec opportunity(s.m, 0.0);
  double cand_c = u[0], cand_g = u[0];
  double others_frozen = 0.0;
  bool have_aggregate = false;

  const std::string idx = std::to_string(i);
  out.columns = {"time", "u[" + idx + "][0]", "cv[" + idx + "][0]"};
  out.rows.clear();
  if (arch == sim::Arch::kPrimal)
    out.columns.push_back("t_alloc[" + idx + "][0]");
  else
    out.columns.push_back("lambda[0]");
  out.columns.push_back("cost[" + idx + "]");
  out.columns.push_back(energy_hub ? "T_r[" + idx + "]" : "Ql[" + idx + "]");
  out.rows.reserve(static_cast<std::size_t>(cad.steps));

  std::string rxbuf;
  auto fail = [&](const std::string& why) -> ProtocolError {
    close_fd(fd);
    return ProtocolError(why);
  };

  for (long long k = 0; k < cad.steps; ++k) {
    const double t = static_cast<double>(k) * s.dt_s;
    const scen::DisturbanceState d = scen::disturbance_at(s, t);
    const double g_eff = d.g_max[0] * backoff_scale;

    if (k % cad.local_period == 0) {
      const long long ltick = k / cad.local_period;
      if (ltick % cad.coord_period == 0) {
        const long long round = ltick / cad.coord_period;

        // Send this tick's report.
        if (arch == sim::Arch::kPrimal) {
          wire::OpportunityCostReport m;
          m.subsystem = static_cast<int>(i);
          m.lambda_i = opportunity;
          m.tick = round;
          send_line(fd, m);
        } else if (is_critical) {
          wire::OverrideReport m;
          m.subsystem = static_cast<int>(i);
          m.u_c = cand_c;
          m.u_g = cand_g;
          m.tick = round;
          send_line(fd, m);
          usage_reported = std::min(cand_c, cand_g);
        } else {
          wire::UsageReport m;
          m.subsystem = static_cast<int>(i);
          m.g = Vec{usage};
          m.tick = round;
          send_line(fd, m);
          usage_reported = usage;
        }

        // Await the answers for this tick.
        bool have_answer = false;
        have_aggregate = !is_critical;
        while (!have_answer || !have_aggregate) {
          std::string line;
          while (!take_line(rxbuf, line)) {
            if (!pump(fd, rxbuf, /*blocking=*/true))
              throw fail("coordinator closed the connection at tick " + std::to_string(round));
          }
          wire::Message msg;
          try {
            msg = wire::decode_message(line);
          } catch (const ProtocolError& e) {
            log::info(std::string("dropping bad line: ") + e.what());
            continue;
          }
          const long long tick = message_tick(msg);
          if (tick > round) throw fail("answer from the future");
          if (tick < round) continue;  // stale, drop
          if (const auto* pb = std::get_if<wire::PriceBroadcast>(&msg)) {
            if (arch == sim::Arch::kPrimal || pb->lambda.empty()) {
              log::info("dropping unexpected price broadcast");
              continue;
            }
            lambda = pb->lambda;
            have_answer = true;
          } else if (const auto* au = std::get_if<wire::AllocationUpdate>(&msg)) {
            if (arch != sim::Arch::kPrimal || au->subsystem != static_cast<int>(i) ||
                au->t.size() != s.m) {
              log::info("dropping unexpected allocation update");
              continue;
            }
            t_alloc = au->t;
            have_answer = true;
          } else if (const auto* agg = std::get_if<wire::UsageReport>(&msg)) {
            if (agg->subsystem != -1 || agg->g.size() != 1) {
              log::info("dropping unexpected usage relay");
              continue;
            }
            others_frozen = agg->g[0] - usage_reported;
            have_aggregate = true;
          } else {
            log::info("dropping unexpected message type");
          }
        }
      }

      // Local update against the fresh coordination values.
      if (arch == sim::Arch::kDual || (arch == sim::Arch::kDualOverride && !is_critical)) {
        auto r = coord::dual_local_step(*model, u, d.local[i], lambda, pis, opt.run.gradients);
        u = r.u;
        pis = r.pi;
      } else if (arch == sim::Arch::kDualOverride) {
        const double total_est = others_frozen + model->steady_constraint(u, d.local[i])[0];
        auto r = coord::override_local_step(*model, u, d.local[i], lambda, total_est, g_eff,
                                            override_state, opt.run.gradients);
        u = r.u;
        override_state = r.state;
        cand_c = r.u_candidate_gradient;
        cand_g = r.u_candidate_constraint;
      } else {
        auto r = coord::primal_local_step(*model, u, d.local[i], t_alloc, primal_local,
                                          opt.run.gradients);
        u = r.u;
        primal_local = r.state;
        opportunity = r.opportunity.value;
      }
      usage = model->steady_constraint(u, d.local[i])[0];
    }

    // Record the row at time t.
    Vec row;
    row.push_back(t);
    row.push_back(u[0]);
    if (arch == sim::Arch::kPrimal) {
      row.push_back(model->steady_constraint(u, d.local[i])[0] - t_alloc[0]);
      row.push_back(t_alloc[0]);
    } else {
      const grad::GradientPair g = grad::local_gradients(*model, u, d.local[i], opt.run.gradients);
      row.push_back(grad::local_controlled_variable(g.gamma, g.phi, Vec{lambda[0]})[0]);
      row.push_back(lambda[0]);
    }
    if (energy_hub) {
      const double e = x[1] - d.local[i].setpoint;
      row.push_back(e * e);
      row.push_back(x[1]);
    } else {
      const double ql = plant::well_production(u[0], d.local[i].valve, spec.well);
      row.push_back(-spec.well.price * ql);
      row.push_back(ql);
    }
    out.rows.push_back(std::move(row));

    // Integrate own plant over [t, t+dt).
    if (energy_hub) {
      const double u_i = u[0];
      const double ta = d.local[i].ambient;
      const double phi = d.local[i].irradiance;
      x = plant::rk4_step<4>(x, s.dt_s / 3600.0, [&](const plant::HouseState& xs) {
        return plant::house_derivatives(xs, u_i, ta, phi, spec.house);
      });
    }
  }

  close_fd(fd);
}

}  // namespace distopt::net
