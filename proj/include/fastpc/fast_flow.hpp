#pragma once

// FAST-TCP sender endpoint: window-clocked transmission, RTT estimation,
// base-RTT tracking and the periodic window update
//   w <- gamma * (d_hat * w / r_hat + alpha) + (1 - gamma) * w.

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <optional>

#include "fastpc/network.hpp"
#include "fastpc/simulator.hpp"

namespace fastpc {

class Remedy;
struct ProbeEvent;

enum class UpdateMode { per_rtt, fixed_interval };

struct FastConfig {
  double alpha = 50.0;
  double gamma = 0.5;
  double rtt_ewma_weight = 0.25;
  UpdateMode update_mode = UpdateMode::per_rtt;
  double update_interval_s = 0.02;  // fixed_interval mode only
  double start_time_s = 0.0;
  std::optional<double> stop_time_s;
  /// Preset d_hat to the path's true propagation delay (skips the min-RTT
  /// measurement bias).
  std::optional<double> oracle_base_rtt_s;
  bool slow_start = false;
  double initial_cwnd = 2.0;
  std::uint32_t packet_size = 1000;
};

inline constexpr double kMinCwnd = 2.0;

/// Applies one window update. Floors the result at kMinCwnd.
double fast_window_update(double cwnd, double base_rtt, double rtt_est, double alpha, double gamma);

class FastSender {
 public:
  FastSender(Simulator& sim, Network& net, std::uint32_t flow_id, PathId forward, FastConfig cfg);
  ~FastSender();

  FastSender(const FastSender&) = delete;
  FastSender& operator=(const FastSender&) = delete;

  /// Schedules start (and stop, if configured).
  void activate();

  /// ACK arrival for a data packet of this flow.
  void on_ack(const Packet& ack);
  /// A data packet of this flow was dropped somewhere on its path.
  void on_drop(const Packet& data);

  /// Runs the window update; skipped (returns current cwnd) while frozen or
  /// before the first RTT sample.
  double update_window();

  void set_remedy(std::unique_ptr<Remedy> remedy);
  Remedy* remedy() { return remedy_.get(); }

  // State accessors.
  std::uint32_t id() const { return id_; }
  const FastConfig& config() const { return cfg_; }
  double cwnd() const { return cwnd_; }
  bool has_rtt() const { return base_rtt_ > 0.0; }
  double base_rtt() const { return base_rtt_; }
  double rtt_est() const { return rtt_est_; }
  double last_rtt_sample() const { return last_sample_; }
  std::uint64_t in_flight() const { return in_flight_; }
  std::uint64_t next_seq() const { return next_seq_; }
  std::uint64_t acked() const { return acked_; }
  std::uint64_t lost() const { return lost_; }
  std::uint64_t updates() const { return updates_; }
  bool active() const { return started_ && !stopped_; }
  double started_at() const { return started_at_; }
  Simulator& sim() { return sim_; }

  // Remedy hooks.
  void set_cwnd(double w);
  void overwrite_base_rtt(double d);
  void freeze_updates(bool frozen) { frozen_ = frozen; }
  bool updates_frozen() const { return frozen_; }
  void set_ewma_override(std::optional<double> eta) { ewma_override_ = eta; }
  /// Sends while in_flight < floor(cwnd).
  void try_send();

  void set_probe_sink(std::function<void(const ProbeEvent&)> sink) { probe_sink_ = std::move(sink); }
  void report_probe(const ProbeEvent& ev) const;

  /// Largest in_flight seen relative to ceil(cwnd) at send time; must stay <= 0.
  std::int64_t max_window_excess() const { return max_window_excess_; }

 private:
  struct Outstanding {
    std::uint64_t seq;
    bool acked;
  };

  void start();
  void send_one();
  void schedule_fixed_update();
  void arm_timeout();
  void on_timeout(std::uint64_t generation);
  void declare_lost_front();

  Simulator& sim_;
  Network& net_;
  std::uint32_t id_;
  PathId forward_;
  FastConfig cfg_;
  std::unique_ptr<Remedy> remedy_;
  std::function<void(const ProbeEvent&)> probe_sink_;

  double cwnd_;
  double base_rtt_ = 0.0;  // 0 until the first sample
  double rtt_est_ = 0.0;
  double last_sample_ = 0.0;
  std::uint64_t in_flight_ = 0;
  std::uint64_t next_seq_ = 0;
  std::uint64_t epoch_seq_ = 0;
  std::uint64_t acked_ = 0;
  std::uint64_t lost_ = 0;
  std::uint64_t updates_ = 0;
  std::deque<Outstanding> outstanding_;
  int dup_after_front_ = 0;
  std::uint64_t timeout_generation_ = 0;
  SimTime last_ack_at_{0};
  bool frozen_ = false;
  bool ramping_ = false;
  std::optional<double> ewma_override_;
  bool started_ = false;
  bool stopped_ = false;
  double started_at_ = 0.0;
  std::int64_t max_window_excess_ = -1'000'000;
};

}  // namespace fastpc
