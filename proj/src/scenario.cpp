#include "fastpc/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "fastpc/error.hpp"

namespace fastpc {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  // splitmix64 finalizer over a combined word.
  std::uint64_t z = a * 0x9E3779B97F4A7C15ULL + b + 0x632BE59BD9B4E019ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class Reader {
 public:
  explicit Reader(const KeyValues& kv) : kv_(kv) {}

  std::optional<std::string> raw(const std::string& key) {
    auto it = kv_.find(key);
    if (it == kv_.end()) return std::nullopt;
    used_.insert(key);
    return it->second;
  }

  /// First key present in `keys` wins.
  std::optional<std::pair<std::string, std::string>> first_of(const std::vector<std::string>& keys) {
    for (const auto& k : keys) {
      if (auto v = raw(k)) return std::make_pair(k, *v);
    }
    return std::nullopt;
  }

  double number(const std::vector<std::string>& keys, double def) {
    auto found = first_of(keys);
    if (!found) return def;
    return parse_number(found->first, found->second, def);
  }
  double number(const std::string& key, double def) { return number(std::vector<std::string>{key}, def); }

  std::optional<double> optional_number(const std::vector<std::string>& keys) {
    auto found = first_of(keys);
    if (!found) return std::nullopt;
    return parse_number(found->first, found->second, 0.0);
  }

  long integer(const std::vector<std::string>& keys, long def) {
    auto found = first_of(keys);
    if (!found) return def;
    const double v = parse_number(found->first, found->second, static_cast<double>(def));
    if (v != std::floor(v)) {
      problem(found->first + ": expected an integer, got '" + found->second + "'");
      return def;
    }
    return static_cast<long>(v);
  }
  long integer(const std::string& key, long def) { return integer(std::vector<std::string>{key}, def); }

  bool boolean(const std::vector<std::string>& keys, bool def) {
    auto found = first_of(keys);
    if (!found) return def;
    const std::string& v = found->second;
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    problem(found->first + ": expected a boolean, got '" + v + "'");
    return def;
  }

  std::string text(const std::vector<std::string>& keys, const std::string& def) {
    auto found = first_of(keys);
    return found ? found->second : def;
  }

  void problem(std::string msg) { problems_.push_back(std::move(msg)); }
  std::vector<std::string>& problems() { return problems_; }

  void report_unused() {
    for (const auto& [k, v] : kv_) {
      if (!used_.count(k)) problem(k + ": unknown key");
    }
  }

 private:
  double parse_number(const std::string& key, const std::string& value, double def) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(value, &pos);
      if (pos != value.size() || !std::isfinite(v)) throw std::invalid_argument(value);
      return v;
    } catch (const std::exception&) {
      problem(key + ": expected a number, got '" + value + "'");
      return def;
    }
  }

  const KeyValues& kv_;
  std::set<std::string> used_;
  std::vector<std::string> problems_;
};

// Lookup chain for a per-flow setting: flow.<i>.<k>, newcomer.<k>, flows.<k>.
std::vector<std::string> flow_keys(std::size_t index, bool newcomer, const std::string& suffix) {
  std::vector<std::string> keys{"flow." + std::to_string(index) + "." + suffix};
  if (newcomer) keys.push_back("newcomer." + suffix);
  keys.push_back("flows." + suffix);
  return keys;
}

RemedyKind parse_remedy(Reader& r, const std::string& key, const std::string& v) {
  if (v == "none") return RemedyKind::none;
  if (v == "rate_reduction") return RemedyKind::rate_reduction;
  if (v == "delay_probe") return RemedyKind::delay_probe;
  r.problem(key + ": unknown remedy '" + v + "' (none | rate_reduction | delay_probe)");
  return RemedyKind::none;
}

FlowSpec parse_flow(Reader& r, std::size_t index, bool newcomer, bool oracle_default, int entry_default,
                    std::uint32_t packet_size) {
  const std::string tag = "flow " + std::to_string(index);
  auto keys = [&](const std::string& s) { return flow_keys(index, newcomer, s); };
  FlowSpec f;
  f.fast.packet_size = packet_size;
  f.fast.alpha = r.number(keys("alpha"), 50.0);
  f.fast.gamma = r.number(keys("gamma"), 0.5);
  f.fast.rtt_ewma_weight = r.number(keys("rtt_ewma_weight"), 0.25);
  f.fast.slow_start = r.boolean(keys("slow_start"), false);
  f.fast.stop_time_s = r.optional_number(keys("stop_time"));
  f.oracle_base_rtt = r.boolean(keys("oracle_base_rtt"), oracle_default);
  f.entry = static_cast<int>(r.integer(keys("path"), entry_default));

  if (!(f.fast.alpha > 0.0)) r.problem(tag + ": alpha must be > 0");
  if (!(f.fast.gamma > 0.0 && f.fast.gamma <= 1.0)) r.problem(tag + ": gamma must be in (0, 1]");
  if (!(f.fast.rtt_ewma_weight > 0.0 && f.fast.rtt_ewma_weight <= 1.0)) {
    r.problem(tag + ": rtt_ewma_weight must be in (0, 1]");
  }

  if (auto mode = r.first_of(keys("update_mode"))) {
    const std::string& v = mode->second;
    if (v == "per_rtt") {
      f.fast.update_mode = UpdateMode::per_rtt;
    } else if (v.rfind("fixed:", 0) == 0) {
      f.fast.update_mode = UpdateMode::fixed_interval;
      try {
        f.fast.update_interval_s = std::stod(v.substr(6));
      } catch (const std::exception&) {
        f.fast.update_interval_s = -1.0;
      }
      if (!(f.fast.update_interval_s > 0.0)) r.problem(mode->first + ": bad fixed update interval '" + v + "'");
    } else {
      r.problem(mode->first + ": expected per_rtt or fixed:<seconds>, got '" + v + "'");
    }
  }

  if (auto rem = r.first_of(keys("remedy"))) f.remedy = parse_remedy(r, rem->first, rem->second);

  f.probe.theta = r.number(keys("remedy.theta"), f.probe.theta);
  f.probe.t_eps_rtts = r.number(keys("remedy.t_eps_rtts"), f.probe.t_eps_rtts);
  f.probe.max_retries = static_cast<int>(r.integer(keys("remedy.max_retries"), f.probe.max_retries));
  f.probe.noise_gate = r.number(keys("remedy.noise_gate"), f.probe.noise_gate);
  f.probe.drift_compensation = r.boolean(keys("remedy.drift_compensation"), f.probe.drift_compensation);
  f.probe.samples = static_cast<int>(r.integer(keys("remedy.samples"), f.probe.samples));
  f.probe.stagger = static_cast<int>(r.integer(keys("remedy.stagger"), f.probe.stagger));
  const long settle_window = r.integer(keys("remedy.settle_window"), 5);
  const double settle_tol = r.number(keys("remedy.settle_tol"), 0.01);
  f.probe.settle_window = f.rate_reduction.settle_window = static_cast<int>(settle_window);
  f.probe.settle_tol = f.rate_reduction.settle_tol = settle_tol;
  f.rate_reduction.scale_factor = r.number(keys("remedy.scale_factor"), f.fast.alpha);
  f.rate_reduction.throttle_duration_rtts =
      r.number(keys("remedy.throttle_duration_rtts"), f.rate_reduction.throttle_duration_rtts);
  return f;
}

}  // namespace

KeyValues parse_key_values(const std::string& text, const std::string& origin) {
  KeyValues kv;
  std::vector<std::string> problems;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = origin + ":" + std::to_string(lineno);
    if (eq == std::string::npos) {
      problems.push_back(where + ": expected key=value");
      continue;
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      problems.push_back(where + ": empty key");
      continue;
    }
    if (!kv.emplace(key, value).second) problems.push_back(where + ": duplicate key " + key);
  }
  if (!problems.empty()) throw ValidationError(std::move(problems));
  return kv;
}

KeyValues load_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError({path + ": cannot open scenario file"});
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_key_values(ss.str(), path);
}

std::string format_key_values(const KeyValues& kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

const char* to_string(RemedyKind k) {
  switch (k) {
    case RemedyKind::none:
      return "none";
    case RemedyKind::rate_reduction:
      return "rate_reduction";
    case RemedyKind::delay_probe:
      return "delay_probe";
  }
  return "none";
}

double ScenarioSpec::capacity_pps() const {
  const double rate = topology == TopologyKind::dumbbell ? dumbbell.bottleneck_rate : parking_lot.link_rate;
  return rate / (8.0 * packet_size);
}

std::size_t ScenarioSpec::newcomer() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < flows.size(); ++i) {
    if (flows[i].fast.start_time_s >= flows[best].fast.start_time_s) best = i;
  }
  return best;
}

ScenarioSpec build_scenario(const KeyValues& kv) {
  Reader r(kv);
  ScenarioSpec s;
  s.source = kv;
  s.name = r.text({"name"}, "scenario");

  const std::string topo = r.text({"topology"}, "dumbbell");
  if (topo == "dumbbell") {
    s.topology = TopologyKind::dumbbell;
    auto& d = s.dumbbell;
    d.bottleneck_rate = r.number("topology.bottleneck_rate", d.bottleneck_rate);
    d.bottleneck_delay = r.number("topology.bottleneck_delay", d.bottleneck_delay);
    d.access_rate = r.number("topology.access_rate", d.access_rate);
    d.access_delay = r.number("topology.access_delay", d.access_delay);
    const long buf = r.integer("topology.buffer", 0);
    if (buf < 0) r.problem("topology.buffer: must be >= 0");
    d.buffer = static_cast<std::size_t>(std::max(0L, buf));
    if (!(d.bottleneck_rate > 0.0)) r.problem("topology.bottleneck_rate: must be > 0");
    if (!(d.access_rate > 0.0)) r.problem("topology.access_rate: must be > 0");
    if (!(d.bottleneck_delay >= 0.0)) r.problem("topology.bottleneck_delay: must be >= 0");
    if (!(d.access_delay >= 0.0)) r.problem("topology.access_delay: must be >= 0");
  } else if (topo == "parking_lot") {
    s.topology = TopologyKind::parking_lot;
    auto& p = s.parking_lot;
    p.hop_count = static_cast<int>(r.integer("topology.hop_count", p.hop_count));
    p.link_rate = r.number("topology.link_rate", p.link_rate);
    p.link_delay = r.number("topology.link_delay", p.link_delay);
    const long buf = r.integer("topology.buffer", 0);
    if (buf < 0) r.problem("topology.buffer: must be >= 0");
    p.buffer = static_cast<std::size_t>(std::max(0L, buf));
    if (p.hop_count < 1) r.problem("topology.hop_count: must be >= 1");
    if (!(p.link_rate > 0.0)) r.problem("topology.link_rate: must be > 0");
    if (!(p.link_delay >= 0.0)) r.problem("topology.link_delay: must be >= 0");
  } else {
    r.problem("topology: unknown kind '" + topo + "' (dumbbell | parking_lot)");
  }

  const long pkt = r.integer("packet_size", 1000);
  const long ack = r.integer("ack_size", 40);
  if (pkt <= 0) r.problem("packet_size: must be > 0");
  if (ack <= 0) r.problem("ack_size: must be > 0");
  s.packet_size = static_cast<std::uint32_t>(std::max(1L, pkt));
  s.ack_size = static_cast<std::uint32_t>(std::max(1L, ack));
  s.duration = r.number("duration", s.duration);
  if (!(s.duration > 0.0)) r.problem("duration: must be > 0");
  const long seed = r.integer("seed", 1);
  s.seed = static_cast<std::uint64_t>(seed);

  const std::string sched = r.text({"schedule"}, "explicit");
  const long count = r.integer("flows.count", 1);
  if (count < 1) r.problem("flows.count: must be >= 1");
  const std::size_t n = static_cast<std::size_t>(std::max(1L, count));
  const int hops = s.parking_lot.hop_count;
  const bool parking = s.topology == TopologyKind::parking_lot;
  UniformSource jitter_rng(mix_seed(s.seed, 0x51u));

  if (sched == "explicit") {
    s.schedule = ScheduleKind::explicit_times;
    for (std::size_t i = 1; i <= n; ++i) {
      FlowSpec f = parse_flow(r, i, i == n, false, std::min<int>(static_cast<int>(i), hops), s.packet_size);
      f.fast.start_time_s = r.number(flow_keys(i, false, "start_time"), 0.0);
      s.flows.push_back(f);
    }
  } else if (sched == "sequential") {
    s.schedule = ScheduleKind::sequential;
    const double first = r.number("schedule.first_start", 0.0);
    const double gap = r.number("schedule.gap", 2.0);
    const double jitter = r.number("schedule.jitter", 1.0);
    if (!(gap >= 0.0) || !(jitter >= 0.0)) r.problem("schedule.gap/jitter: must be >= 0");
    double t = first;
    for (std::size_t i = 1; i <= n; ++i) {
      if (i > 1) t += gap + jitter * jitter_rng.next();
      FlowSpec f = parse_flow(r, i, i == n, false, std::min<int>(static_cast<int>(i), hops), s.packet_size);
      f.fast.start_time_s = t;
      s.flows.push_back(f);
    }
  } else if (sched == "stable_arrival") {
    s.schedule = ScheduleKind::stable_arrival;
    const double first = r.number("schedule.first_start", 0.0);
    const double inc_jitter = r.number("schedule.incumbent_jitter", 0.01);
    const double newcomer_start = r.number("schedule.newcomer_start", 4.0);
    const double jitter = r.number("schedule.jitter", 1.0);
    if (!(inc_jitter >= 0.0) || !(jitter >= 0.0)) r.problem("schedule.jitter: must be >= 0");
    for (std::size_t i = 1; i <= n; ++i) {
      FlowSpec f = parse_flow(r, i, false, true, std::min<int>(static_cast<int>(i) + 1, hops), s.packet_size);
      f.fast.start_time_s = first + inc_jitter * jitter_rng.next();
      s.flows.push_back(f);
    }
    FlowSpec nc = parse_flow(r, n + 1, true, false, 1, s.packet_size);
    nc.fast.start_time_s = newcomer_start + jitter * jitter_rng.next();
    s.flows.push_back(nc);
  } else {
    r.problem("schedule: unknown kind '" + sched + "' (explicit | sequential | stable_arrival)");
  }

  for (std::size_t i = 0; i < s.flows.size(); ++i) s.flows[i].probe.seed = mix_seed(s.seed, 0x100u + i);
  for (std::size_t i = 0; i < s.flows.size(); ++i) {
    const FlowSpec& f = s.flows[i];
    const std::string tag = "flow " + std::to_string(i + 1);
    if (!(f.fast.start_time_s >= 0.0) || !(f.fast.start_time_s < s.duration)) {
      r.problem(tag + ": start time " + std::to_string(f.fast.start_time_s) + " outside [0, duration)");
    }
    if (parking && (f.entry < 1 || f.entry > hops)) {
      r.problem(tag + ": path (entry router) must be in 1.." + std::to_string(hops));
    }
    try {
      if (f.remedy == RemedyKind::delay_probe) {
        for (auto& w : f.probe.validate()) s.notes.push_back(tag + ": " + w);
      } else if (f.remedy == RemedyKind::rate_reduction) {
        f.rate_reduction.validate();
      }
    } catch (const DomainError& e) {
      r.problem(tag + ": " + e.what());
    }
  }

  auto& bg = s.background;
  bg.count = static_cast<int>(r.integer("background.count", 0));
  bg.source.shape = r.number("background.shape", 1.5);
  bg.source.mean_burst = r.number("background.mean_burst", 0.1);
  bg.source.mean_idle = r.number("background.mean_idle", 0.1);
  bg.source.peak_rate = r.number("background.peak_rate", 1e6);
  bg.source.seed = static_cast<std::uint64_t>(r.integer("background.seed", 1));
  bg.source.packet_size = s.packet_size;
  bg.start = r.number("background.start", 0.0);
  bg.entry = static_cast<int>(r.integer("background.entry", 1));
  if (bg.count < 0) r.problem("background.count: must be >= 0");
  if (bg.count > 0) {
    try {
      bg.source.validate();
    } catch (const DomainError& e) {
      r.problem(e.what());
    }
    if (parking && (bg.entry < 1 || bg.entry > hops)) {
      r.problem("background.entry: must be in 1.." + std::to_string(hops));
    }
  }

  s.metrics.interval = r.number("metrics.interval", 0.5);
  s.metrics.tail_start = r.optional_number({"metrics.tail_start"});
  if (!(s.metrics.interval > 0.0)) r.problem("metrics.interval: must be > 0");
  if (s.metrics.tail_start && !(*s.metrics.tail_start >= 0.0 && *s.metrics.tail_start < s.duration)) {
    r.problem("metrics.tail_start: must be in [0, duration)");
  }

  r.report_unused();
  if (!r.problems().empty()) throw ValidationError(std::move(r.problems()));

  const double cap = s.capacity_pps();
  s.notes.push_back("bottleneck " + std::to_string(cap * 8.0 * s.packet_size) + " b/s = " +
                    std::to_string(cap) + " packets/s at " + std::to_string(s.packet_size) + " B");
  return s;
}

ScenarioSpec load_scenario(const std::string& path) { return build_scenario(load_key_values(path)); }

std::string resolve_axis(const std::string& axis) {
  static const std::map<std::string, std::string> aliases{
      {"n", "flows.count"},
      {"theta", "flows.remedy.theta"},
      {"alpha", "flows.alpha"},
      {"gamma", "flows.gamma"},
      {"bottleneck_delay", "topology.bottleneck_delay"},
      {"peak_rate", "background.peak_rate"},
  };
  auto it = aliases.find(axis);
  return it == aliases.end() ? axis : it->second;
}

}  // namespace fastpc
