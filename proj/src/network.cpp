#include "fastpc/network.hpp"

#include <stdexcept>

#include "fastpc/error.hpp"

namespace fastpc {

LinkId Network::add_link(LinkConfig cfg) {
  if (!(cfg.rate_bps > 0.0)) throw DomainError("link " + cfg.name + ": rate must be > 0");
  if (!(cfg.prop_delay_s >= 0.0)) throw DomainError("link " + cfg.name + ": delay must be >= 0");
  links_.emplace_back(std::move(cfg));
  return static_cast<LinkId>(links_.size() - 1);
}

PathId Network::add_path(std::vector<LinkId> links, Endpoint at_end) {
  if (links.empty()) throw DomainError("add_path: empty path");
  for (LinkId id : links) {
    if (id >= links_.size()) throw DomainError("add_path: unknown link id " + std::to_string(id));
  }
  paths_.push_back(PathEntry{std::move(links), std::move(at_end)});
  return static_cast<PathId>(paths_.size() - 1);
}

double Network::path_delay(PathId id, std::uint32_t bytes) const {
  double total = 0.0;
  for (LinkId l : path(id)) {
    const Link& link = links_[l];
    total += to_seconds(link.prop_delay()) + to_seconds(transmission_time(bytes, link.config().rate_bps));
  }
  return total;
}

std::uint64_t Network::in_flight() const {
  std::uint64_t total = 0;
  for (const Link& l : links_) {
    total += l.queue_.occupancy() + (l.busy_ ? 1 : 0) + l.propagating_.size();
  }
  return total;
}

bool Network::inject(Packet p) {
  if (p.path >= paths_.size()) throw DomainError("inject: unknown path");
  ++injected_;
  p.hop = 0;
  return enqueue(paths_[p.path].links.front(), p);
}

bool Network::enqueue(LinkId id, const Packet& p) {
  Link& link = links_[id];
  ++link.counters_.arrivals;
  notify(id, LinkEvent::arrival);
  if (!link.busy_) {
    link.in_service_ = p;
    link.busy_ = true;
    ++link.counters_.service_starts;
    notify(id, LinkEvent::service_start);
    sim_.schedule_in(transmission_time(p.size, link.cfg_.rate_bps), [this, id] { on_transmitted(id); });
    return true;
  }
  link.account(sim_.now());
  if (!link.queue_.push(p)) {
    ++link.counters_.drops;
    ++dropped_;
    notify(id, LinkEvent::drop);
    if (drop_listener_) drop_listener_(p);
    return false;
  }
  return true;
}

void Network::start_service(LinkId id) {
  Link& link = links_[id];
  link.account(sim_.now());
  link.in_service_ = link.queue_.pop();
  link.busy_ = true;
  ++link.counters_.service_starts;
  notify(id, LinkEvent::service_start);
  sim_.schedule_in(transmission_time(link.in_service_.size, link.cfg_.rate_bps),
                   [this, id] { on_transmitted(id); });
}

void Network::on_transmitted(LinkId id) {
  Link& link = links_[id];
  ++link.counters_.departures;
  link.counters_.bytes_departed += link.in_service_.size;
  link.propagating_.push_back(link.in_service_);
  link.busy_ = false;
  notify(id, LinkEvent::departure);
  sim_.schedule_in(link.prop_delay(), [this, id] { on_propagated(id); });
  if (!link.queue_.empty()) start_service(id);
}

void Network::on_propagated(LinkId id) {
  Link& link = links_[id];
  Packet p = link.propagating_.front();
  link.propagating_.pop_front();
  const PathEntry& path = paths_[p.path];
  ++p.hop;
  if (p.hop < path.links.size()) {
    enqueue(path.links[p.hop], p);
    return;
  }
  ++delivered_;
  if (path.at_end) path.at_end(p);
}

}  // namespace fastpc
