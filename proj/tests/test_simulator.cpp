#include <doctest.h>

#include <string>
#include <vector>

#include "fastpc/error.hpp"
#include "fastpc/network.hpp"
#include "fastpc/simulator.hpp"
#include "fastpc/trace_checker.hpp"

using namespace fastpc;
using namespace std::chrono_literals;

TEST_CASE("equal timestamps dispatch in scheduling order") {
  Simulator sim;
  std::string order;
  sim.schedule(1s, [&] { order += 'A'; });
  sim.schedule(1s, [&] { order += 'B'; });
  sim.schedule(500ms, [&] { order += 'x'; });
  sim.run_until(2s);
  CHECK(order == "xAB");
  CHECK(sim.now() == SimTime(2s));
}

TEST_CASE("scheduling at now runs before the clock advances") {
  Simulator sim;
  std::vector<SimTime> seen;
  sim.schedule(1s, [&] {
    sim.schedule(sim.now(), [&] { seen.push_back(sim.now()); });
    sim.schedule(2s, [&] { seen.push_back(sim.now()); });
  });
  sim.run_until(3s);
  REQUIRE(seen.size() == 2);
  CHECK(seen[0] == SimTime(1s));
  CHECK(seen[1] == SimTime(2s));
}

TEST_CASE("scheduling in the past is an error") {
  Simulator sim;
  sim.run_until(1s);
  CHECK_THROWS_AS(sim.schedule(500ms, [] {}), SimulationError);
}

TEST_CASE("empty run returns immediately") {
  Simulator sim;
  sim.run_until(10s);
  CHECK(sim.dispatched() == 0);
  CHECK(sim.pending() == 0);
}

TEST_CASE("event cap") {
  Simulator sim(10);
  std::function<void()> tick = [&] { sim.schedule_in(1ms, tick); };
  sim.schedule(0ns, tick);
  CHECK_THROWS_AS(sim.run_until(1s), SimulationError);
}

TEST_CASE("fifo queue") {
  FifoQueue q(2);
  Packet p;
  p.size = 1000;
  CHECK(q.push(p));
  CHECK(q.push(p));
  CHECK(q.full());
  CHECK_FALSE(q.push(p));
  CHECK(q.occupancy() == 2);
  CHECK(q.byte_occupancy() == 2000);
  q.pop();
  CHECK(q.occupancy() == 1);
}

namespace {

struct Line {
  Simulator sim;
  Network net{sim};
  TraceChecker checker{0};
  LinkId link;
  PathId path;
  std::vector<SimTime> arrivals;

  explicit Line(std::size_t buffer) {
    net.set_observer(&checker);
    link = net.add_link({"l", 100e6, 0.001, buffer});
    path = net.add_path({link}, [this](const Packet&) { arrivals.push_back(sim.now()); });
  }
  bool send(std::uint64_t seq) {
    Packet p;
    p.seq = seq;
    p.size = 1000;
    p.path = path;
    return net.inject(p);
  }
};

}  // namespace

TEST_CASE("saturated link spaces departures by the transmission time") {
  Line l(0);
  for (int i = 0; i < 5; ++i) l.send(i);
  // First packet starts immediately on the idle link.
  CHECK(l.net.link(l.link).busy());
  CHECK(l.net.link(l.link).queue().occupancy() == 4);
  l.sim.run_until(1s);
  REQUIRE(l.arrivals.size() == 5);
  CHECK(l.arrivals[0] == SimTime(80us + 1ms));
  for (std::size_t i = 1; i < l.arrivals.size(); ++i) CHECK(l.arrivals[i] - l.arrivals[i - 1] == SimTime(80us));
  CHECK(l.net.conserved());
  CHECK(l.checker.ok());
}

TEST_CASE("full buffer drops at the tail") {
  Line l(2);
  int dropped = 0;
  l.net.set_drop_listener([&](const Packet&) { ++dropped; });
  CHECK(l.send(0));  // in service
  CHECK(l.send(1));
  CHECK(l.send(2));
  CHECK_FALSE(l.send(3));
  CHECK(l.net.link(l.link).queue().occupancy() == 2);
  CHECK(dropped == 1);
  l.sim.run_until(1s);
  CHECK(l.arrivals.size() == 3);
  CHECK(l.net.injected() == 4);
  CHECK(l.net.delivered() == 3);
  CHECK(l.net.dropped() == 1);
  CHECK(l.net.conserved());
  CHECK(l.checker.ok());
}

TEST_CASE("path delay") {
  Simulator sim;
  Network net(sim);
  const LinkId a = net.add_link({"a", 1e9, 0.001, 0});
  const LinkId b = net.add_link({"b", 100e6, 0.005, 0});
  const PathId p = net.add_path({a, b}, nullptr);
  CHECK(net.path_delay(p, 1000) == doctest::Approx(0.006 + 8e-6 + 80e-6));
}

TEST_CASE("trace checker flags inconsistent occupancy") {
  TraceChecker c(1);
  c.on_link_event(SimTime(1ms), 0, LinkEvent::arrival, 0);
  CHECK(c.ok());
  c.on_link_event(SimTime(2ms), 0, LinkEvent::arrival, 5);
  CHECK_FALSE(c.ok());
  TraceChecker t(1);
  t.on_link_event(SimTime(2ms), 0, LinkEvent::arrival, 0);
  t.on_link_event(SimTime(1ms), 0, LinkEvent::service_start, 0);
  CHECK_FALSE(t.ok());
}
