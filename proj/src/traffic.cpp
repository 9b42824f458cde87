#include "fastpc/traffic.hpp"

#include <algorithm>
#include <cmath>

#include "fastpc/error.hpp"

namespace fastpc {

void ParetoOnOffConfig::validate() const {
  if (!(shape > 1.0)) throw DomainError("background.shape must be > 1 (finite mean)");
  if (!(mean_burst > 0.0)) throw DomainError("background.mean_burst must be > 0");
  if (!(mean_idle > 0.0)) throw DomainError("background.mean_idle must be > 0");
  if (!(peak_rate > 0.0)) throw DomainError("background.peak_rate must be > 0");
  if (packet_size == 0) throw DomainError("background packet size must be > 0");
}

double pareto_sample(double mean, double shape, double u) {
  const double scale = mean * (shape - 1.0) / shape;
  return scale / std::pow(u, 1.0 / shape);
}

ParetoOnOffSource::ParetoOnOffSource(Simulator& sim, Network& net, std::uint32_t source_id, PathId path,
                                     ParetoOnOffConfig cfg)
    : sim_(sim), net_(net), id_(source_id), path_(path), cfg_(cfg), rng_(cfg.seed) {
  cfg_.validate();
  interval_ = transmission_time(cfg_.packet_size, cfg_.peak_rate);
}

void ParetoOnOffSource::start(double at) {
  sim_.schedule(from_seconds(at), [this] { begin_burst(); });
}

void ParetoOnOffSource::begin_burst() {
  const double on = pareto_sample(cfg_.mean_burst, cfg_.shape, rng_.next());
  const double slot = to_seconds(interval_);
  const auto count = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(on / slot)));
  ++on_periods_;
  on_total_ += static_cast<double>(count) * slot;
  emit(count);
}

void ParetoOnOffSource::emit(std::uint64_t remaining) {
  Packet p;
  p.flow_id = id_;
  p.seq = packets_;
  p.size = cfg_.packet_size;
  p.sent_at = sim_.now();
  p.kind = PacketKind::background;
  p.path = path_;
  if (hook_) hook_(sim_.now(), p.seq);
  ++packets_;
  bytes_ += p.size;
  net_.inject(p);

  if (remaining > 1) {
    sim_.schedule_in(interval_, [this, remaining] { emit(remaining - 1); });
    return;
  }
  // Capped so enormous idle means (a silenced source) stay representable.
  const double off = std::min(pareto_sample(cfg_.mean_idle, cfg_.shape, rng_.next()), 1e6);
  off_total_ += off;
  sim_.schedule_in(interval_ + from_seconds(off), [this] { begin_burst(); });
}

}  // namespace fastpc
