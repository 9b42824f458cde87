#include "fastpc/fast_flow.hpp"

#include <algorithm>
#include <cmath>

#include "fastpc/remedies.hpp"

namespace fastpc {

namespace {
constexpr double kTimeoutCheckPeriod = 1.0;
}

double fast_window_update(double cwnd, double base_rtt, double rtt_est, double alpha, double gamma) {
  const double next = gamma * (base_rtt * cwnd / rtt_est + alpha) + (1.0 - gamma) * cwnd;
  return std::max(kMinCwnd, next);
}

FastSender::FastSender(Simulator& sim, Network& net, std::uint32_t flow_id, PathId forward, FastConfig cfg)
    : sim_(sim), net_(net), id_(flow_id), forward_(forward), cfg_(std::move(cfg)) {
  cwnd_ = std::max(kMinCwnd, cfg_.initial_cwnd);
  ramping_ = cfg_.slow_start;
}

FastSender::~FastSender() = default;

void FastSender::set_remedy(std::unique_ptr<Remedy> remedy) { remedy_ = std::move(remedy); }

void FastSender::report_probe(const ProbeEvent& ev) const {
  if (probe_sink_) probe_sink_(ev);
}

void FastSender::activate() {
  sim_.schedule(from_seconds(cfg_.start_time_s), [this] { start(); });
  if (cfg_.stop_time_s) {
    sim_.schedule(from_seconds(*cfg_.stop_time_s), [this] { stopped_ = true; });
  }
}

void FastSender::start() {
  if (stopped_) return;
  started_ = true;
  started_at_ = to_seconds(sim_.now());
  if (cfg_.oracle_base_rtt_s) base_rtt_ = *cfg_.oracle_base_rtt_s;
  last_ack_at_ = sim_.now();
  try_send();
  epoch_seq_ = next_seq_;
  if (cfg_.update_mode == UpdateMode::fixed_interval) schedule_fixed_update();
  arm_timeout();
}

void FastSender::schedule_fixed_update() {
  sim_.schedule_in(from_seconds(cfg_.update_interval_s), [this] {
    if (stopped_) return;
    update_window();
    try_send();
    schedule_fixed_update();
  });
}

void FastSender::arm_timeout() {
  const std::uint64_t gen = timeout_generation_;
  sim_.schedule_in(from_seconds(kTimeoutCheckPeriod), [this, gen] { on_timeout(gen); });
}

void FastSender::on_timeout(std::uint64_t generation) {
  if (generation != timeout_generation_ || stopped_) return;
  const double rto = std::max(1.0, 4.0 * rtt_est_);
  if (in_flight_ > 0 && to_seconds(sim_.now() - last_ack_at_) >= rto) {
    // Everything still outstanding is presumed lost; the window is kept.
    lost_ += in_flight_;
    in_flight_ = 0;
    outstanding_.clear();
    dup_after_front_ = 0;
    if (remedy_) remedy_->on_drop(*this);
    try_send();
  }
  arm_timeout();
}

void FastSender::send_one() {
  Packet p;
  p.flow_id = id_;
  p.seq = next_seq_++;
  p.size = cfg_.packet_size;
  p.sent_at = sim_.now();
  p.kind = PacketKind::data;
  p.path = forward_;
  ++in_flight_;
  outstanding_.push_back({p.seq, false});
  max_window_excess_ = std::max(max_window_excess_, static_cast<std::int64_t>(in_flight_) -
                                                        static_cast<std::int64_t>(std::ceil(cwnd_)));
  net_.inject(p);
}

void FastSender::try_send() {
  if (!started_ || stopped_) return;
  const auto limit = static_cast<std::uint64_t>(std::floor(cwnd_));
  while (in_flight_ < limit) send_one();
}

void FastSender::set_cwnd(double w) { cwnd_ = std::max(kMinCwnd, w); }

void FastSender::overwrite_base_rtt(double d) { base_rtt_ = d; }

void FastSender::declare_lost_front() {
  outstanding_.pop_front();
  --in_flight_;
  ++lost_;
  while (!outstanding_.empty() && outstanding_.front().acked) outstanding_.pop_front();
  dup_after_front_ = 0;
  for (const auto& o : outstanding_) dup_after_front_ += o.acked ? 1 : 0;
}

void FastSender::on_drop(const Packet& /*data*/) {
  if (remedy_) remedy_->on_drop(*this);
}

void FastSender::on_ack(const Packet& ack) {
  const double rtt = to_seconds(sim_.now() - ack.sent_at);
  last_sample_ = rtt;
  last_ack_at_ = sim_.now();
  if (rtt_est_ == 0.0) {
    rtt_est_ = rtt;
    base_rtt_ = base_rtt_ > 0.0 ? std::min(base_rtt_, rtt) : rtt;
  } else {
    base_rtt_ = std::min(base_rtt_, rtt);
    const double eta = ewma_override_.value_or(cfg_.rtt_ewma_weight);
    rtt_est_ = eta * rtt + (1.0 - eta) * rtt_est_;
  }

  // FIFO paths never reorder, so outstanding_ stays sorted by seq.
  auto it = std::lower_bound(outstanding_.begin(), outstanding_.end(), ack.seq,
                             [](const Outstanding& o, std::uint64_t s) { return o.seq < s; });
  if (it != outstanding_.end() && it->seq == ack.seq && !it->acked) {
    it->acked = true;
    --in_flight_;
    ++acked_;
    if (it != outstanding_.begin()) ++dup_after_front_;
    while (!outstanding_.empty() && outstanding_.front().acked) outstanding_.pop_front();
    if (outstanding_.empty() || outstanding_.front().seq > ack.seq) dup_after_front_ = 0;
    while (dup_after_front_ >= 3 && !outstanding_.empty()) declare_lost_front();
  }

  if (remedy_) remedy_->on_ack(*this, ack, rtt);

  if (cfg_.update_mode == UpdateMode::per_rtt && ack.seq >= epoch_seq_) {
    update_window();
    epoch_seq_ = next_seq_;
  }
  try_send();
}

double FastSender::update_window() {
  if (frozen_ || rtt_est_ <= 0.0 || stopped_) return cwnd_;
  const double before = cwnd_;
  if (ramping_) {
    const double backlog = cwnd_ * (1.0 - base_rtt_ / rtt_est_);
    if (backlog < cfg_.alpha / 2.0) {
      cwnd_ = 2.0 * cwnd_;
    } else {
      ramping_ = false;
    }
  }
  if (!ramping_) cwnd_ = fast_window_update(cwnd_, base_rtt_, rtt_est_, cfg_.alpha, cfg_.gamma);
  ++updates_;
  if (remedy_) remedy_->on_window_update(*this, before, cwnd_);
  return cwnd_;
}

}  // namespace fastpc
