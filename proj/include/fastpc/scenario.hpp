#pragma once

// Scenario description: topology, flow schedule, background traffic and
// metric settings, parsed from a line-oriented `dotted.key=value` file.
//
// Rates are given in bits/second and converted to packets/second once, at
// validation, using `packet_size`.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fastpc/fast_flow.hpp"
#include "fastpc/remedies.hpp"
#include "fastpc/traffic.hpp"

namespace fastpc {

/// Ordered key/value map; ordering makes the echoed scenario file canonical.
using KeyValues = std::map<std::string, std::string>;

/// Parses `key=value` lines; `#` starts a comment. Throws ValidationError
/// naming the line for malformed input or duplicate keys.
KeyValues parse_key_values(const std::string& text, const std::string& origin = "<input>");
KeyValues load_key_values(const std::string& path);
std::string format_key_values(const KeyValues& kv);

enum class TopologyKind { dumbbell, parking_lot };
enum class ScheduleKind { explicit_times, sequential, stable_arrival };
enum class RemedyKind { none, rate_reduction, delay_probe };

const char* to_string(RemedyKind k);

struct DumbbellSpec {
  double bottleneck_rate = 100e6;   // bits/s
  double bottleneck_delay = 0.005;  // one-way seconds
  double access_rate = 1e9;
  double access_delay = 0.001;
  std::size_t buffer = 0;  // packets, 0 = unbounded
};

struct ParkingLotSpec {
  int hop_count = 5;  // chain links, the last one ends at the sink
  double link_rate = 100e6;
  double link_delay = 0.005;
  std::size_t buffer = 0;
};

struct FlowSpec {
  FastConfig fast;
  bool oracle_base_rtt = false;
  RemedyKind remedy = RemedyKind::none;
  ProbeConfig probe;
  RateReductionConfig rate_reduction;
  int entry = 1;  // parking lot: router where the flow enters
};

struct BackgroundSpec {
  int count = 0;
  ParetoOnOffConfig source;
  double start = 0.0;
  int entry = 1;
};

struct MetricsSpec {
  double interval = 0.5;
  std::optional<double> tail_start;
};

struct ScenarioSpec {
  std::string name;
  TopologyKind topology = TopologyKind::dumbbell;
  DumbbellSpec dumbbell;
  ParkingLotSpec parking_lot;
  std::uint32_t packet_size = 1000;
  std::uint32_t ack_size = 40;
  double duration = 30.0;
  std::uint64_t seed = 1;
  ScheduleKind schedule = ScheduleKind::explicit_times;
  /// Flows with resolved start times; for stable_arrival the newcomer is last.
  std::vector<FlowSpec> flows;
  BackgroundSpec background;
  MetricsSpec metrics;
  /// Canonical key/values the spec was built from.
  KeyValues source;
  /// Human-readable conversion notes (rate -> packets/second, warnings).
  std::vector<std::string> notes;

  /// Bottleneck capacity, packets/second.
  double capacity_pps() const;
  /// Index of the flow that started last.
  std::size_t newcomer() const;
};

/// Builds and validates a spec. Throws ValidationError listing every
/// offending field.
ScenarioSpec build_scenario(const KeyValues& kv);
ScenarioSpec load_scenario(const std::string& path);

/// Keys a sweep may vary (any numeric key is accepted); short aliases:
/// n, theta, alpha, bottleneck_delay, peak_rate.
std::string resolve_axis(const std::string& axis);

}  // namespace fastpc
