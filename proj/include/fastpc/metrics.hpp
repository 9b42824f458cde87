#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fastpc/remedies.hpp"

namespace fastpc {

struct SeriesPoint {
  double time;
  std::string id;
  double value;
};

struct FlowSummary {
  std::uint32_t id = 0;
  double start = 0.0;
  double mean_rate = 0.0;  // packets/second over the tail interval
  double share = 0.0;      // mean_rate / bottleneck capacity
  double base_rtt = 0.0;
  double rtt_est = 0.0;
  double cwnd = 0.0;
  std::uint64_t delivered = 0;
  std::uint64_t lost = 0;
  std::string remedy;
};

struct Summary {
  double tail_start = 0.0;
  double tail_end = 0.0;
  double capacity_pps = 0.0;
  std::vector<FlowSummary> flows;
  std::size_t newcomer = 0;      // index into flows
  double fairness_ratio = 0.0;   // NaN with a single flow
  double queue_mean = 0.0;       // bottleneck, packets, over the tail
  std::string bottleneck;
  std::uint64_t drops = 0;
  std::uint64_t background_packets = 0;
  std::uint64_t events = 0;
  std::uint64_t injected = 0;
  std::uint64_t delivered = 0;
  std::uint64_t in_flight = 0;
  bool conserved = false;
  bool trace_ok = false;
  std::uint64_t trace_violations = 0;
};

struct MetricsLog {
  std::vector<SeriesPoint> throughput;  // packets/second per flow per interval
  std::vector<SeriesPoint> queue;       // time-averaged occupancy per link per interval
  std::vector<SeriesPoint> base_rtt;    // seconds
  std::vector<SeriesPoint> cwnd;        // packets
  std::vector<ProbeEvent> probes;
  Summary summary;
};

/// Shortest round-trip decimal form; deterministic across runs.
std::string format_number(double v);

/// RFC-4180 field quoting.
std::string csv_field(const std::string& s);

std::string series_csv(const std::vector<SeriesPoint>& series, const std::string& id_column);
std::string probes_csv(const std::vector<ProbeEvent>& probes);
std::string summary_text(const Summary& s);

/// Writes scenario.txt, summary.txt and the series CSVs into `dir`
/// (created if missing).
void write_run_directory(const std::string& dir, const std::string& scenario_echo, const MetricsLog& log);

}  // namespace fastpc
