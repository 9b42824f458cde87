#pragma once

// Sender-side remedies for propagation-delay overestimation. Each remedy is
// a state machine owned by its FastSender and driven by the sender's hooks.

#include <cmath>
#include <deque>
#include <cstdint>
#include <string>
#include <vector>

#include "fastpc/analytic_model.hpp"
#include "fastpc/fast_flow.hpp"
#include "fastpc/traffic.hpp"

namespace fastpc {

class Remedy {
 public:
  virtual ~Remedy() = default;
  virtual const char* name() const = 0;
  virtual void on_window_update(FastSender& flow, double before, double after) = 0;
  virtual void on_ack(FastSender& flow, const Packet& ack, double rtt) = 0;
  virtual void on_drop(FastSender& flow) = 0;
};

/// Declares equilibrium after `window` consecutive updates with relative
/// window change below `tol`.
class SettleDetector {
 public:
  SettleDetector(int window, double tol) : window_(window), tol_(tol) {}

  bool observe(double before, double after) {
    const double rel = before > 0.0 ? std::abs(after - before) / before : 1.0;
    count_ = rel < tol_ ? count_ + 1 : 0;
    return count_ >= window_;
  }
  void reset() { count_ = 0; }

 private:
  int window_;
  double tol_;
  int count_ = 0;
};

struct ProbeConfig {
  double theta = -0.5;
  double t_eps_rtts = 1.0;
  int settle_window = 5;
  double settle_tol = 0.01;
  int max_retries = 2;
  /// A probe is rejected when the RTT spread seen while settling exceeds
  /// noise_gate * |delta_r|. 0 disables the check.
  double noise_gate = 0.5;
  /// Account for base-RTT decreases since the flow joined.
  bool drift_compensation = true;
  /// Measurements combined (interquartile mean of theta t_eps / delta_r) before the
  /// correction is applied. Each one waits for the window to settle again.
  int samples = 1;
  /// After settling, wait a further 0..stagger window updates (uniform,
  /// seeded) before probing, so repeated samples do not all start at the
  /// same phase of a window oscillation.
  int stagger = 0;
  std::uint64_t seed = 1;

  /// Throws DomainError on invalid values; returns warnings (dead zone).
  std::vector<std::string> validate() const;
};

struct RateReductionConfig {
  double scale_factor = 50.0;
  double throttle_duration_rtts = 2.0;
  int settle_window = 5;
  double settle_tol = 0.01;

  void validate() const;
};

/// One probe attempt as seen by the flow.
struct ProbeEvent {
  double time = 0.0;
  std::uint32_t flow_id = 0;
  int attempt = 0;
  double r_star = 0.0;  // smoothed RTT when the probe started
  double w_star = 0.0;
  double r_ref = 0.0;   // sample of the last packet sent before the perturbation
  double r_eps = 0.0;   // sample of the marker
  double base_rtt_before = 0.0;
  double base_at_join = 0.0;
  double jitter = 0.0;  // RTT spread over the settle window
  bool aborted_on_drop = false;
  bool rejected_noise = false;
  bool partial = false;  // one of several samples; no correction applied
  int samples_used = 1;
  model::ProbeInversion result;  // theta, t_eps, delta_r, n_hat, ... status
};

class DelayProbe final : public Remedy {
 public:
  enum class Phase { settling, probing, done };

  explicit DelayProbe(ProbeConfig cfg);

  const char* name() const override { return "delay_probe"; }
  void on_window_update(FastSender& flow, double before, double after) override;
  void on_ack(FastSender& flow, const Packet& ack, double rtt) override;
  void on_drop(FastSender& flow) override;

  Phase phase() const { return phase_; }
  const std::vector<ProbeEvent>& history() const { return history_; }
  double current_theta() const { return theta_; }

 private:
  void start(FastSender& flow);
  void finish(FastSender& flow);
  void conclude(FastSender& flow, ProbeEvent ev, bool success);
  void next_sample(FastSender& flow, const ProbeEvent& ev);

  ProbeConfig cfg_;
  SettleDetector settle_;
  Phase phase_ = Phase::settling;
  double theta_;
  double theta_eff_ = 0.0;  // theta realized by the whole-packet surplus
  int attempt_ = 0;
  int wait_ = 0;  // window updates left before a staggered start
  UniformSource rng_;
  double r_star_ = 0.0;
  double w_star_ = 0.0;
  double t_eps_ = 0.0;
  double t0_ = 0.0;
  double base_at_join_ = 0.0;
  std::vector<double> rhos_;
  int measurements_ = 0;
  std::deque<double> spreads_;
  double sample_min_ = 0.0;
  double sample_max_ = 0.0;
  bool have_sample_ = false;
  double jitter_ = 0.0;
  std::uint64_t ref_seq_ = 0;
  double r_ref_ = 0.0;
  bool have_ref_ = false;
  std::uint64_t marker_ = 0;
  bool measuring_ = false;
  std::uint64_t generation_ = 0;
  std::vector<ProbeEvent> history_;
};

class RateReduction final : public Remedy {
 public:
  enum class Phase { settling, throttling, done };

  explicit RateReduction(RateReductionConfig cfg);

  const char* name() const override { return "rate_reduction"; }
  void on_window_update(FastSender& flow, double before, double after) override;
  void on_ack(FastSender&, const Packet&, double) override {}
  void on_drop(FastSender&) override {}

  Phase phase() const { return phase_; }
  double throttle_started() const { return started_; }

 private:
  RateReductionConfig cfg_;
  SettleDetector settle_;
  Phase phase_ = Phase::settling;
  double started_ = -1.0;
};

}  // namespace fastpc
