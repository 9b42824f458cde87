#include "fastpc/remedies.hpp"

#include <algorithm>
#include <cmath>

#include "fastpc/error.hpp"

namespace fastpc {

std::vector<std::string> ProbeConfig::validate() const {
  if (!(theta >= -1.0 && theta <= 1.0) || theta == 0.0) {
    throw DomainError("remedy.theta must be in [-1, 1] and nonzero");
  }
  if (!(t_eps_rtts > 0.0)) throw DomainError("remedy.t_eps_rtts must be > 0");
  if (settle_window < 1) throw DomainError("remedy.settle_window must be >= 1");
  if (!(settle_tol > 0.0)) throw DomainError("remedy.settle_tol must be > 0");
  if (max_retries < 0) throw DomainError("remedy.max_retries must be >= 0");
  if (!(noise_gate >= 0.0)) throw DomainError("remedy.noise_gate must be >= 0");
  if (samples < 1) throw DomainError("remedy.samples must be >= 1");
  if (stagger < 0) throw DomainError("remedy.stagger must be >= 0");
  std::vector<std::string> warnings;
  if (std::abs(theta) < 0.1) {
    warnings.push_back("remedy.theta=" + std::to_string(theta) +
                       " is inside the dead zone |theta| < 0.1; flow-count estimates are unreliable");
  }
  return warnings;
}

void RateReductionConfig::validate() const {
  if (!(scale_factor > 1.0)) throw DomainError("remedy.scale_factor must be > 1");
  if (!(throttle_duration_rtts > 0.0)) throw DomainError("remedy.throttle_duration_rtts must be > 0");
  if (settle_window < 1) throw DomainError("remedy.settle_window must be >= 1");
  if (!(settle_tol > 0.0)) throw DomainError("remedy.settle_tol must be > 0");
}

// ---------------------------------------------------------------- DelayProbe

DelayProbe::DelayProbe(ProbeConfig cfg)
    : cfg_(cfg), settle_(cfg.settle_window, cfg.settle_tol), theta_(cfg.theta), rng_(cfg.seed) {
  cfg_.validate();
}

void DelayProbe::on_window_update(FastSender& flow, double before, double after) {
  if (phase_ != Phase::settling) return;
  spreads_.push_back(have_sample_ ? sample_max_ - sample_min_ : 0.0);
  while (spreads_.size() > static_cast<std::size_t>(cfg_.settle_window)) spreads_.pop_front();
  have_sample_ = false;
  if (wait_ > 0) {
    if (--wait_ == 0) start(flow);
    return;
  }
  if (!settle_.observe(before, after)) return;
  if (cfg_.stagger > 0) {
    wait_ = std::min(cfg_.stagger, static_cast<int>(rng_.next() * (cfg_.stagger + 1)));
    if (wait_ > 0) return;
  }
  start(flow);
}

void DelayProbe::start(FastSender& flow) {
  phase_ = Phase::probing;
  r_star_ = flow.rtt_est();
  w_star_ = flow.cwnd();
  t_eps_ = cfg_.t_eps_rtts * r_star_;
  t0_ = to_seconds(flow.sim().now());
  measuring_ = false;
  have_ref_ = false;
  jitter_ = 0.0;
  for (double v : spreads_) jitter_ = std::max(jitter_, v);
  spreads_.clear();
  ref_seq_ = flow.next_seq() - 1;

  flow.freeze_updates(true);
  flow.set_ewma_override(1.0);

  // The sending rate becomes (1 - theta) x* for t_eps: the window ramps by
  // -theta x* per second on top of the ACK clock. A step change would leave
  // the surplus queued at the first hop whenever the access link is no faster
  // than the bottleneck.
  const std::uint64_t gen = ++generation_;
  flow.sim().schedule_in(from_seconds(t_eps_), [this, &flow, gen] {
    if (gen != generation_ || phase_ != Phase::probing) return;
    flow.set_cwnd(std::max(kMinCwnd, w_star_ * (1.0 - theta_ * t_eps_ / r_star_)));
    flow.try_send();
    // Only whole packets are in flight, so the surplus actually injected is
    // floor(w_end) - floor(w*). The inversion uses the theta it amounts to.
    const double surplus = std::floor(flow.cwnd()) - std::floor(w_star_);
    theta_eff_ = surplus != 0.0 ? -surplus * r_star_ / (w_star_ * t_eps_) : theta_;
    // Marker: the last packet sent under the perturbation when it adds
    // packets, the first one sent after it when it withholds them.
    marker_ = theta_ < 0.0 && flow.next_seq() > 0 ? flow.next_seq() - 1 : flow.next_seq();
    measuring_ = true;
  });
}

void DelayProbe::on_ack(FastSender& flow, const Packet& ack, double rtt) {
  if (base_at_join_ == 0.0) base_at_join_ = flow.base_rtt();
  if (phase_ == Phase::settling) {
    sample_min_ = have_sample_ ? std::min(sample_min_, rtt) : rtt;
    sample_max_ = have_sample_ ? std::max(sample_max_, rtt) : rtt;
    have_sample_ = true;
    return;
  }
  if (phase_ != Phase::probing) return;
  if (!have_ref_ && ack.seq >= ref_seq_) {
    r_ref_ = rtt;
    have_ref_ = true;
  }
  if (!measuring_) {
    const double elapsed = to_seconds(flow.sim().now()) - t0_;
    flow.set_cwnd(std::max(kMinCwnd, w_star_ - theta_ * (w_star_ / r_star_) * elapsed));
    return;
  }
  if (ack.seq >= marker_) finish(flow);
}

void DelayProbe::on_drop(FastSender& flow) {
  if (phase_ != Phase::probing) return;
  ProbeEvent ev;
  ev.time = to_seconds(flow.sim().now());
  ev.flow_id = flow.id();
  ev.attempt = attempt_;
  ev.r_star = r_star_;
  ev.w_star = w_star_;
  ev.base_rtt_before = flow.base_rtt();
  ev.aborted_on_drop = true;
  ev.result.status = model::ProbeStatus::failed_sign;
  ev.result.theta = theta_;
  ev.result.t_eps = t_eps_;
  if (cfg_.samples > 1 && ++measurements_ < cfg_.samples + cfg_.max_retries) {
    ev.partial = true;
    next_sample(flow, ev);
    return;
  }
  conclude(flow, ev, false);
}

void DelayProbe::finish(FastSender& flow) {
  ProbeEvent ev;
  ev.time = to_seconds(flow.sim().now());
  ev.flow_id = flow.id();
  ev.attempt = attempt_;
  ev.r_star = r_star_;
  ev.w_star = w_star_;
  ev.r_ref = r_ref_;
  ev.r_eps = flow.rtt_est();
  ev.base_rtt_before = flow.base_rtt();
  ev.base_at_join = std::max(base_at_join_, flow.base_rtt());
  ev.jitter = jitter_;

  // Both samples come from packets sent t_eps apart, so background drift
  // only enters over that span.
  double delta_r = ev.r_eps - r_ref_;
  const bool usable = delta_r != 0.0 && r_star_ > flow.base_rtt();
  const double rho = usable ? -theta_eff_ * t_eps_ / delta_r : 0.0;
  ev.rejected_noise = usable && cfg_.noise_gate > 0.0 && jitter_ > cfg_.noise_gate * std::abs(delta_r);
  const bool valid = usable && rho >= 1.0 && !ev.rejected_noise;

  if (cfg_.samples > 1) {
    ++measurements_;
    if (valid) rhos_.push_back(rho);
    const bool enough = rhos_.size() >= static_cast<std::size_t>(cfg_.samples);
    const bool exhausted = measurements_ >= cfg_.samples + cfg_.max_retries;
    if (!enough && !exhausted) {
      ev.result.status = valid ? model::ProbeStatus::ok : model::ProbeStatus::failed_sign;
      ev.result.theta = theta_;
      ev.result.t_eps = t_eps_;
      ev.result.delta_r = delta_r;
      ev.result.rho = rho;
      ev.partial = true;
      next_sample(flow, ev);
      return;
    }
    if (rhos_.empty()) {
      ev.result.status = model::ProbeStatus::failed_sign;
      ev.result.theta = theta_;
      ev.result.t_eps = t_eps_;
      ev.result.delta_r = delta_r;
      phase_ = Phase::done;
      conclude(flow, ev, false);
      return;
    }
    std::vector<double> sorted = rhos_;
    std::sort(sorted.begin(), sorted.end());
    // Interquartile mean: robust like the median, but not confined to the
    // packet-time grid single measurements fall on.
    const std::size_t m = sorted.size();
    const std::size_t cut = m / 4;
    double centre = 0.0;
    for (std::size_t i = cut; i < m - cut; ++i) centre += sorted[i];
    centre /= static_cast<double>(m - 2 * cut);
    delta_r = -theta_eff_ * t_eps_ / centre;
    ev.samples_used = static_cast<int>(m);
  } else if (ev.rejected_noise || !usable) {
    ev.result.status = model::ProbeStatus::failed_sign;
    ev.result.theta = theta_;
    ev.result.t_eps = t_eps_;
    ev.result.delta_r = delta_r;
    conclude(flow, ev, false);
    return;
  }

  ev.result = cfg_.drift_compensation
                  ? model::invert_probe_with_drift(theta_eff_, t_eps_, delta_r, w_star_, r_star_, flow.base_rtt(),
                                                   ev.base_at_join, flow.config().alpha)
                  : model::invert_probe(theta_eff_, t_eps_, delta_r, w_star_, r_star_, flow.base_rtt(),
                                        flow.config().alpha);
  if (cfg_.samples > 1 && ev.result.status != model::ProbeStatus::ok) phase_ = Phase::done;
  conclude(flow, ev, ev.result.status == model::ProbeStatus::ok);
}

void DelayProbe::next_sample(FastSender& flow, const ProbeEvent& ev) {
  ++generation_;
  flow.freeze_updates(false);
  flow.set_ewma_override(std::nullopt);
  flow.set_cwnd(w_star_);
  settle_.reset();
  phase_ = Phase::settling;
  history_.push_back(ev);
  flow.report_probe(ev);
  flow.try_send();
}

void DelayProbe::conclude(FastSender& flow, ProbeEvent ev, bool success) {
  ++generation_;
  flow.freeze_updates(false);
  flow.set_ewma_override(std::nullopt);
  if (success) {
    if (ev.result.d_corrected < flow.base_rtt()) flow.overwrite_base_rtt(ev.result.d_corrected);
    flow.set_cwnd(ev.result.w_reset);
    phase_ = Phase::done;
  } else {
    flow.set_cwnd(w_star_);
    if (phase_ != Phase::done && cfg_.samples <= 1 && attempt_ < cfg_.max_retries) {
      ++attempt_;
      theta_ /= 2.0;
      settle_.reset();
      phase_ = Phase::settling;
    } else {
      phase_ = Phase::done;
    }
  }
  history_.push_back(ev);
  flow.report_probe(ev);
  flow.try_send();
}

// ------------------------------------------------------------- RateReduction

RateReduction::RateReduction(RateReductionConfig cfg)
    : cfg_(cfg), settle_(cfg.settle_window, cfg.settle_tol) {
  cfg_.validate();
}

void RateReduction::on_window_update(FastSender& flow, double before, double after) {
  if (phase_ != Phase::settling || !settle_.observe(before, after)) return;
  phase_ = Phase::throttling;
  started_ = to_seconds(flow.sim().now());
  flow.freeze_updates(true);
  flow.set_cwnd(flow.cwnd() / cfg_.scale_factor);
  // The window stays reduced; the minimum-RTT tracker keeps running so a
  // drained queue lowers base_rtt.
  const double duration = cfg_.throttle_duration_rtts * flow.rtt_est();
  flow.sim().schedule_in(from_seconds(duration), [this, &flow] {
    flow.freeze_updates(false);
    phase_ = Phase::done;
    flow.try_send();
  });
}

}  // namespace fastpc
