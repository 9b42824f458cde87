#include "fastpc/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <memory>
#include <mutex>
#include <thread>

#include "fastpc/error.hpp"
#include "fastpc/fast_flow.hpp"
#include "fastpc/remedies.hpp"
#include "fastpc/simulator.hpp"
#include "fastpc/trace_checker.hpp"
#include "fastpc/traffic.hpp"

namespace fastpc {

namespace {

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a * 0x9E3779B97F4A7C15ULL ^ (b + 0xD1B54A32D192ED03ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

BuiltTopology build_dumbbell(const ScenarioSpec& spec, Network& net) {
  const DumbbellSpec& d = spec.dumbbell;
  BuiltTopology t;
  t.bottleneck = net.add_link({"bottleneck", d.bottleneck_rate, d.bottleneck_delay, d.buffer});
  const LinkId back = net.add_link({"bottleneck_rev", d.bottleneck_rate, d.bottleneck_delay, 0});
  t.tracked.push_back(t.bottleneck);
  for (std::size_t i = 0; i < spec.flows.size(); ++i) {
    const std::string tag = std::to_string(i + 1);
    const LinkId in = net.add_link({"access_in_" + tag, d.access_rate, d.access_delay, 0});
    const LinkId out = net.add_link({"access_out_" + tag, d.access_rate, d.access_delay, 0});
    const LinkId rin = net.add_link({"access_in_rev_" + tag, d.access_rate, d.access_delay, 0});
    const LinkId rout = net.add_link({"access_out_rev_" + tag, d.access_rate, d.access_delay, 0});
    t.forward.push_back(net.add_path({in, t.bottleneck, out}, nullptr));
    t.reverse.push_back(net.add_path({rout, back, rin}, nullptr));
  }
  for (int k = 0; k < spec.background.count; ++k) {
    const std::string tag = std::to_string(k + 1);
    const LinkId in = net.add_link({"bg_in_" + tag, d.access_rate, d.access_delay, 0});
    const LinkId out = net.add_link({"bg_out_" + tag, d.access_rate, d.access_delay, 0});
    t.background.push_back(net.add_path({in, t.bottleneck, out}, nullptr));
  }
  return t;
}

BuiltTopology build_parking_lot(const ScenarioSpec& spec, Network& net) {
  const ParkingLotSpec& p = spec.parking_lot;
  BuiltTopology t;
  std::vector<LinkId> hop(static_cast<std::size_t>(p.hop_count));
  std::vector<LinkId> hop_rev(hop.size());
  for (int h = 0; h < p.hop_count; ++h) {
    const std::string tag = std::to_string(h + 1);
    hop[h] = net.add_link({"hop" + tag, p.link_rate, p.link_delay, p.buffer});
    hop_rev[h] = net.add_link({"hop" + tag + "_rev", p.link_rate, p.link_delay, 0});
    t.tracked.push_back(hop[h]);
  }
  t.bottleneck = hop.back();
  auto chain = [&](LinkId access, int entry) {
    std::vector<LinkId> links{access};
    for (int h = entry - 1; h < p.hop_count; ++h) links.push_back(hop[h]);
    return links;
  };
  auto chain_rev = [&](LinkId access, int entry) {
    std::vector<LinkId> links;
    for (int h = p.hop_count - 1; h >= entry - 1; --h) links.push_back(hop_rev[h]);
    links.push_back(access);
    return links;
  };
  for (std::size_t i = 0; i < spec.flows.size(); ++i) {
    const std::string tag = std::to_string(i + 1);
    const int entry = spec.flows[i].entry;
    const LinkId in = net.add_link({"access_" + tag, p.link_rate, p.link_delay, 0});
    const LinkId rin = net.add_link({"access_rev_" + tag, p.link_rate, p.link_delay, 0});
    t.forward.push_back(net.add_path(chain(in, entry), nullptr));
    t.reverse.push_back(net.add_path(chain_rev(rin, entry), nullptr));
  }
  for (int k = 0; k < spec.background.count; ++k) {
    const LinkId in = net.add_link({"bg_access_" + std::to_string(k + 1), p.link_rate, p.link_delay, 0});
    t.background.push_back(net.add_path(chain(in, spec.background.entry), nullptr));
  }
  return t;
}

double default_tail_start(const ScenarioSpec& spec, double max_rtt) {
  double last_join = 0.0;
  for (const auto& f : spec.flows) last_join = std::max(last_join, f.fast.start_time_s);
  const double settled = last_join + 10.0 * max_rtt;
  if (settled >= spec.duration) return last_join;
  return settled + 0.5 * (spec.duration - settled);
}

}  // namespace

BuiltTopology build_topology(const ScenarioSpec& spec, Network& net) {
  return spec.topology == TopologyKind::dumbbell ? build_dumbbell(spec, net) : build_parking_lot(spec, net);
}

MetricsLog run_scenario(const ScenarioSpec& spec, const RunOptions& opt) {
  Simulator sim;
  Network net(sim);
  TraceChecker checker(0);
  if (opt.check_trace) net.set_observer(&checker);
  BuiltTopology topo = build_topology(spec, net);

  MetricsLog log;
  const std::size_t n = spec.flows.size();
  const std::size_t newcomer = spec.newcomer();
  std::vector<std::unique_ptr<FastSender>> senders;
  std::vector<std::uint64_t> delivered(n, 0);
  std::uint64_t background_delivered = 0;
  double max_rtt = 0.0;

  for (std::size_t i = 0; i < n; ++i) {
    const FlowSpec& fs = spec.flows[i];
    FastConfig cfg = fs.fast;
    const double true_rtt =
        net.path_delay(topo.forward[i], spec.packet_size) + net.path_delay(topo.reverse[i], spec.ack_size);
    max_rtt = std::max(max_rtt, true_rtt);
    if (fs.oracle_base_rtt) cfg.oracle_base_rtt_s = true_rtt;
    auto sender = std::make_unique<FastSender>(sim, net, static_cast<std::uint32_t>(i), topo.forward[i], cfg);
    if (fs.remedy == RemedyKind::delay_probe) {
      sender->set_remedy(std::make_unique<DelayProbe>(fs.probe));
    } else if (fs.remedy == RemedyKind::rate_reduction) {
      sender->set_remedy(std::make_unique<RateReduction>(fs.rate_reduction));
    }
    FastSender* raw = sender.get();
    sender->set_probe_sink([&log, &sim, &opt, raw, i, newcomer](const ProbeEvent& ev) {
      log.probes.push_back(ev);
      if (opt.stop_after_probe && i == newcomer) {
        auto* probe = dynamic_cast<DelayProbe*>(raw->remedy());
        if (probe && probe->phase() == DelayProbe::Phase::done) sim.stop();
      }
    });
    senders.push_back(std::move(sender));
  }

  for (std::size_t i = 0; i < n; ++i) {
    net.set_endpoint(topo.forward[i], [&net, &delivered, &topo, &spec, i](const Packet& p) {
      ++delivered[i];
      Packet ack = p;
      ack.kind = PacketKind::ack;
      ack.size = spec.ack_size;
      ack.path = topo.reverse[i];
      net.inject(ack);
    });
    net.set_endpoint(topo.reverse[i], [&senders, i](const Packet& p) { senders[i]->on_ack(p); });
  }
  net.set_drop_listener([&senders](const Packet& p) {
    if (p.kind == PacketKind::data) senders[p.flow_id]->on_drop(p);
  });

  std::vector<std::unique_ptr<ParetoOnOffSource>> sources;
  for (int k = 0; k < spec.background.count; ++k) {
    ParetoOnOffConfig cfg = spec.background.source;
    cfg.seed = mix(mix(spec.background.source.seed, spec.seed), static_cast<std::uint64_t>(k));
    net.set_endpoint(topo.background[k], [&background_delivered](const Packet&) { ++background_delivered; });
    auto src = std::make_unique<ParetoOnOffSource>(sim, net, static_cast<std::uint32_t>(k), topo.background[k], cfg);
    src->start(spec.background.start);
    sources.push_back(std::move(src));
  }

  for (auto& s : senders) s->activate();

  // Periodic sampling.
  const SimTime interval = from_seconds(spec.metrics.interval);
  std::vector<std::uint64_t> last_delivered(n, 0);
  std::vector<double> last_integral(topo.tracked.size(), 0.0);
  std::function<void()> sample;
  if (opt.record_series) {
    sample = [&] {
      const double t = to_seconds(sim.now());
      const double dt = spec.metrics.interval;
      for (std::size_t i = 0; i < n; ++i) {
        const std::string id = std::to_string(i + 1);
        log.throughput.push_back({t, id, static_cast<double>(delivered[i] - last_delivered[i]) / dt});
        last_delivered[i] = delivered[i];
        if (senders[i]->active() && senders[i]->has_rtt()) {
          log.base_rtt.push_back({t, id, senders[i]->base_rtt()});
          log.cwnd.push_back({t, id, senders[i]->cwnd()});
        }
      }
      for (std::size_t q = 0; q < topo.tracked.size(); ++q) {
        const Link& link = net.link(topo.tracked[q]);
        const double integral = link.occupancy_integral(sim.now());
        log.queue.push_back({t, link.name(), (integral - last_integral[q]) / dt});
        last_integral[q] = integral;
      }
      if (sim.now() + interval <= from_seconds(spec.duration)) sim.schedule_in(interval, sample);
    };
    sim.schedule(interval, sample);
  }

  // Tail snapshot.
  double tail_start = spec.metrics.tail_start.value_or(default_tail_start(spec, max_rtt));
  std::vector<std::uint64_t> tail_delivered(n, 0);
  double tail_integral = 0.0;
  bool tail_taken = false;
  sim.schedule(from_seconds(tail_start), [&] {
    tail_delivered = delivered;
    tail_integral = net.link(topo.bottleneck).occupancy_integral(sim.now());
    tail_taken = true;
  });

  sim.run_until(from_seconds(spec.duration));

  Summary& s = log.summary;
  const double t_end = to_seconds(sim.now());
  if (!tail_taken) {
    tail_start = t_end;
    tail_delivered = delivered;
    tail_integral = net.link(topo.bottleneck).occupancy_integral(sim.now());
  }
  const double tail_len = t_end - tail_start;
  s.tail_start = tail_start;
  s.tail_end = t_end;
  s.capacity_pps = spec.capacity_pps();
  s.newcomer = newcomer;
  s.bottleneck = net.link(topo.bottleneck).name();
  for (std::size_t i = 0; i < n; ++i) {
    const FastSender& snd = *senders[i];
    FlowSummary f;
    f.id = static_cast<std::uint32_t>(i + 1);
    f.start = spec.flows[i].fast.start_time_s;
    f.remedy = to_string(spec.flows[i].remedy);
    f.mean_rate = tail_len > 0.0 ? static_cast<double>(delivered[i] - tail_delivered[i]) / tail_len : 0.0;
    f.share = f.mean_rate / s.capacity_pps;
    f.base_rtt = snd.base_rtt();
    f.rtt_est = snd.rtt_est();
    f.cwnd = snd.cwnd();
    f.delivered = delivered[i];
    f.lost = snd.lost();
    s.flows.push_back(f);
  }
  s.queue_mean = tail_len > 0.0
                     ? (net.link(topo.bottleneck).occupancy_integral(sim.now()) - tail_integral) / tail_len
                     : 0.0;
  s.fairness_ratio = std::numeric_limits<double>::quiet_NaN();
  if (n >= 2) {
    std::vector<double> old;
    for (std::size_t i = 0; i < n; ++i) {
      if (i != newcomer) old.push_back(s.flows[i].mean_rate);
    }
    try {
      s.fairness_ratio = model::fairness_ratio(s.flows[newcomer].mean_rate, old);
    } catch (const DomainError&) {
    }
  }
  for (std::size_t l = 0; l < net.link_count(); ++l) s.drops += net.link(static_cast<LinkId>(l)).counters().drops;
  s.background_packets = background_delivered;
  s.events = sim.dispatched();
  s.injected = net.injected();
  s.delivered = net.delivered();
  s.in_flight = net.in_flight();
  s.conserved = net.conserved();
  s.trace_ok = opt.check_trace ? checker.ok() : true;
  s.trace_violations = checker.violations();
  return log;
}

void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& fn) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(count)));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned j = 0; j < jobs; ++j) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<SweepResult> sweep(const KeyValues& base, const std::string& axis, const std::vector<double>& values,
                               unsigned jobs, const RunOptions& opt) {
  const std::string key = resolve_axis(axis);
  const std::uint64_t base_seed = build_scenario(base).seed;

  std::vector<SweepResult> results(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    KeyValues kv = base;
    kv[key] = format_number(values[k]);
    kv["seed"] = std::to_string(base_seed + k);
    try {
      results[k].spec = build_scenario(kv);
    } catch (const ValidationError& e) {
      for (const auto& p : e.problems()) {
        if (p.rfind(key + ": unknown key", 0) == 0) throw ValidationError({"sweep: unknown axis '" + axis + "'"});
      }
      throw;
    }
    results[k].value = values[k];
  }
  parallel_for(values.size(), jobs, [&](std::size_t k) { results[k].log = run_scenario(results[k].spec, opt); });
  return results;
}

Prediction predict(const ScenarioSpec& spec) {
  Prediction p;
  const std::size_t n = spec.flows.size();
  const double alpha = spec.flows.front().fast.alpha;
  auto fair = [&](const char* basis) {
    p.shares.assign(n, 1.0 / static_cast<double>(n));
    p.queue = alpha * static_cast<double>(n);
    p.basis = basis;
  };

  if (spec.schedule == ScheduleKind::stable_arrival) {
    const std::size_t incumbents = n - 1;
    const FlowSpec& nc = spec.flows.back();
    if (nc.remedy == RemedyKind::delay_probe || nc.oracle_base_rtt) {
      fair("fair_share");
      return p;
    }
    const auto sol = model::stable_arrival(incumbents, alpha);
    p.shares.assign(n, sol.share_old);
    p.shares.back() = sol.share_new;
    p.queue = alpha * static_cast<double>(incumbents) + sol.newcomer_backlog;
    p.basis = "stable_arrival";
    return p;
  }

  const bool any_remedy = std::any_of(spec.flows.begin(), spec.flows.end(), [](const FlowSpec& f) {
    return f.remedy == RemedyKind::delay_probe || f.oracle_base_rtt;
  });
  if (any_remedy || n == 1) {
    fair("fair_share");
    return p;
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return spec.flows[a].fast.start_time_s < spec.flows[b].fast.start_time_s;
  });
  const auto backlog = model::sequential_backlog(n);
  const auto shares = model::sequential_shares(backlog);
  p.shares.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) p.shares[order[k]] = shares[k];
  p.queue = alpha * (static_cast<double>(n) + backlog.sum());
  p.basis = "sequential";
  return p;
}

}  // namespace fastpc
