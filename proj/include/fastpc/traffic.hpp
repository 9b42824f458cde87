#pragma once

// Unreliable Pareto ON/OFF background sources (UDP-like cross traffic).

#include <cstdint>
#include <functional>
#include <random>

#include "fastpc/network.hpp"
#include "fastpc/simulator.hpp"

namespace fastpc {

struct ParetoOnOffConfig {
  double shape = 1.5;
  double mean_burst = 0.1;  // seconds
  double mean_idle = 0.1;   // seconds
  double peak_rate = 1e6;   // bits/second
  std::uint32_t packet_size = 1000;
  std::uint64_t seed = 1;

  void validate() const;
  /// peak * mean_burst / (mean_burst + mean_idle), bits/second.
  double mean_load() const { return peak_rate * mean_burst / (mean_burst + mean_idle); }
};

/// Uniform doubles in (0, 1] built from the raw 64-bit stream so sequences are
/// identical across standard library implementations.
class UniformSource {
 public:
  explicit UniformSource(std::uint64_t seed) : engine_(seed) {}
  double next() { return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

/// Inverse-CDF Pareto draw with the given mean; `u` in (0, 1].
double pareto_sample(double mean, double shape, double u);

class ParetoOnOffSource {
 public:
  ParetoOnOffSource(Simulator& sim, Network& net, std::uint32_t source_id, PathId path,
                    ParetoOnOffConfig cfg);

  ParetoOnOffSource(const ParetoOnOffSource&) = delete;
  ParetoOnOffSource& operator=(const ParetoOnOffSource&) = delete;

  /// Begins with an ON period at `at` seconds.
  void start(double at);

  std::uint64_t packets_sent() const { return packets_; }
  std::uint64_t bytes_sent() const { return bytes_; }
  std::uint64_t on_periods() const { return on_periods_; }
  double on_time_total() const { return on_total_; }
  double off_time_total() const { return off_total_; }

  /// Called for every emitted packet (time, seq); for trace comparisons.
  void set_emit_hook(std::function<void(SimTime, std::uint64_t)> hook) { hook_ = std::move(hook); }

 private:
  void begin_burst();
  void emit(std::uint64_t remaining);

  Simulator& sim_;
  Network& net_;
  std::uint32_t id_;
  PathId path_;
  ParetoOnOffConfig cfg_;
  UniformSource rng_;
  SimTime interval_;
  std::uint64_t packets_ = 0;
  std::uint64_t bytes_ = 0;
  std::uint64_t on_periods_ = 0;
  double on_total_ = 0.0;
  double off_total_ = 0.0;
  std::function<void(SimTime, std::uint64_t)> hook_;
};

}  // namespace fastpc
