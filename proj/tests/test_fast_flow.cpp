#include <doctest.h>

#include <chrono>
#include <string>

#include "fastpc/fast_flow.hpp"
#include "fastpc/runner.hpp"
#include "fastpc/scenario.hpp"

using namespace fastpc;
using doctest::Approx;
using namespace std::chrono_literals;

TEST_CASE("window update arithmetic") {
  CHECK(fast_window_update(100, 0.010, 0.014, 50, 0.5) == Approx(110.714).epsilon(1e-5));
  // Fixed point: r = d + alpha/x with x = w/r.
  const double d = 0.010, w = 150, alpha = 50;
  const double r = d * w / (w - alpha);
  CHECK(fast_window_update(w, d, r, alpha, 0.5) == Approx(w));
  CHECK(fast_window_update(80, d, d, alpha, 1.0) == Approx(130));
  CHECK(fast_window_update(1, 0.010, 1.0, 1, 0.5) == kMinCwnd);
}

namespace {

// One sender on a bare 100 Mb/s, 1 ms link; ACKs are fed by hand.
struct Harness {
  Simulator sim;
  Network net{sim};
  PathId path;
  FastSender sender;

  explicit Harness(FastConfig cfg)
      : path(net.add_path({net.add_link({"l", 100e6, 0.001, 0})}, nullptr)), sender(sim, net, 0, path, cfg) {
    sender.activate();
    sim.run_until(0ns);
  }
  void ack(std::uint64_t seq, SimTime sent, SimTime at) {
    sim.run_until(at);
    Packet p;
    p.seq = seq;
    p.size = 40;
    p.sent_at = sent;
    p.kind = PacketKind::ack;
    sender.on_ack(p);
  }
};

}  // namespace

TEST_CASE("rtt estimation and base rtt") {
  SUBCASE("running minimum") {
    Harness h(FastConfig{});
    REQUIRE(h.sender.next_seq() >= 2);
    h.ack(0, 0ns, 10ms);
    CHECK(h.sender.base_rtt() == Approx(0.010));
    CHECK(h.sender.rtt_est() == Approx(0.010));
    h.ack(1, 0ns, 12ms);
    CHECK(h.sender.base_rtt() == Approx(0.010));
    h.ack(2, 10ms, 19ms);
    CHECK(h.sender.base_rtt() == Approx(0.009));
  }
  SUBCASE("eta = 1 follows the last sample") {
    FastConfig cfg;
    cfg.rtt_ewma_weight = 1.0;
    Harness h(cfg);
    h.ack(0, 0ns, 10ms);
    h.ack(1, 0ns, 14ms);
    CHECK(h.sender.rtt_est() == Approx(0.014));
  }
}

namespace {

MetricsLog run(const std::string& text) { return run_scenario(build_scenario(parse_key_values(text))); }

}  // namespace

TEST_CASE("single flow reaches capacity with alpha packets queued") {
  const std::string base = "flows.count = 1\nflows.oracle_base_rtt = true\ntopology.bottleneck_delay = 0.003\n"
                           "duration = 10\n";
  const auto a50 = run(base + "flows.alpha = 50\n");
  CHECK(a50.summary.flows[0].share == Approx(1.0).epsilon(0.01));
  CHECK(a50.summary.queue_mean == Approx(50).epsilon(0.05));
  CHECK(a50.summary.drops == 0);
  CHECK(a50.summary.conserved);
  CHECK(a50.summary.trace_ok);

  const auto a200 = run(base + "flows.alpha = 200\n");
  CHECK(a200.summary.flows[0].share == Approx(1.0).epsilon(0.01));
  CHECK(a200.summary.queue_mean == Approx(200).epsilon(0.05));
}

TEST_CASE("flows that know the true delay share equally") {
  const auto log = run("schedule = sequential\nflows.count = 2\nflows.oracle_base_rtt = true\nschedule.gap = 3\n"
                       "duration = 20\n");
  CHECK(log.summary.flows[0].share == Approx(0.5).epsilon(0.03));
  CHECK(log.summary.flows[1].share == Approx(0.5).epsilon(0.03));
}

TEST_CASE("five flows for 100 s stay inside the wall-clock budget") {
  const auto t0 = std::chrono::steady_clock::now();
  const auto log = run("schedule = sequential\nflows.count = 5\nschedule.gap = 10\nduration = 100\n");
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(secs < 60.0);
  CHECK(log.summary.conserved);
}
