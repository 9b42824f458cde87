#include <doctest.h>

#include <vector>

#include "fastpc/error.hpp"
#include "fastpc/traffic.hpp"

using namespace fastpc;
using doctest::Approx;
using namespace std::chrono_literals;

TEST_CASE("pareto inverse cdf") {
  // Scale x_m = mean (k-1)/k; P(X > x) = (x_m/x)^k.
  CHECK(pareto_sample(0.1, 1.5, 1.0) == Approx(0.1 / 3));
  const double x = pareto_sample(0.1, 1.5, 0.25);
  CHECK(std::pow((0.1 / 3) / x, 1.5) == Approx(0.25));

  UniformSource u(42);
  double sum = 0;
  const int n = 400000;
  for (int i = 0; i < n; ++i) sum += pareto_sample(2.0, 3.0, u.next());
  CHECK(sum / n == Approx(2.0).epsilon(0.02));
}

TEST_CASE("uniform source range and repeatability") {
  UniformSource a(7), b(7);
  for (int i = 0; i < 1000; ++i) {
    const double x = a.next();
    CHECK(x > 0.0);
    CHECK(x <= 1.0);
    CHECK(x == b.next());
  }
}

namespace {

struct Sink {
  Simulator sim;
  Network net{sim};
  PathId path = net.add_path({net.add_link({"fat", 10e9, 0.0, 0})}, [](const Packet&) {});
};

std::vector<SimTime> trace(ParetoOnOffConfig cfg, SimTime until) {
  Sink s;
  ParetoOnOffSource src(s.sim, s.net, 0, s.path, cfg);
  std::vector<SimTime> out;
  src.set_emit_hook([&](SimTime t, std::uint64_t) { out.push_back(t); });
  src.start(0.0);
  s.sim.run_until(until);
  return out;
}

}  // namespace

TEST_CASE("on/off source") {
  SUBCASE("long-run load is peak times the on fraction") {
    ParetoOnOffConfig cfg;  // shape 1.5, 100 ms / 100 ms, 1 Mb/s
    CHECK(cfg.mean_load() == Approx(0.5e6));
    Sink s;
    ParetoOnOffSource src(s.sim, s.net, 0, s.path, cfg);
    src.start(0.0);
    const double horizon = 4000.0;
    s.sim.run_until(from_seconds(horizon));
    const double load = static_cast<double>(src.bytes_sent()) * 8.0 / horizon;
    CHECK(load == Approx(0.5e6).epsilon(0.10));
  }
  SUBCASE("packets inside a burst leave at the peak rate") {
    ParetoOnOffConfig cfg;
    cfg.peak_rate = 8e6;  // 1 ms per 1000 B packet
    const auto t = trace(cfg, 2s);
    REQUIRE(t.size() > 2);
    CHECK(t[1] - t[0] == SimTime(1ms));
  }
  SUBCASE("same seed, same emission trace") {
    ParetoOnOffConfig cfg;
    cfg.seed = 99;
    CHECK(trace(cfg, 20s) == trace(cfg, 20s));
    ParetoOnOffConfig other = cfg;
    other.seed = 100;
    CHECK(trace(cfg, 20s) != trace(other, 20s));
  }
  SUBCASE("huge idle mean is near silence") {
    ParetoOnOffConfig cfg;
    cfg.mean_idle = 1e9;
    cfg.mean_burst = 0.01;
    const auto t = trace(cfg, 100s);
    CHECK(t.size() < 200);
  }
  SUBCASE("validation") {
    ParetoOnOffConfig cfg;
    cfg.shape = 1.0;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg = {};
    cfg.peak_rate = 0;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
  }
}
