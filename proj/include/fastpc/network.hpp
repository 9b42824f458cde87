#pragma once

// Packet transport: store-and-forward links with tail-drop FIFO queues and
// fixed propagation delay, stitched into static paths (no routing).

#include <cstdint>
#include <deque>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "fastpc/sim_time.hpp"
#include "fastpc/simulator.hpp"

namespace fastpc {

using LinkId = std::uint32_t;
using PathId = std::uint32_t;

enum class PacketKind : std::uint8_t { data, ack, background };

struct Packet {
  std::uint32_t flow_id = 0;
  std::uint64_t seq = 0;
  std::uint32_t size = 0;  // bytes
  SimTime sent_at{0};
  PacketKind kind = PacketKind::data;
  PathId path = 0;
  std::uint16_t hop = 0;
};

/// Tail-drop FIFO. capacity == 0 means unbounded.
class FifoQueue {
 public:
  explicit FifoQueue(std::size_t capacity = 0) : capacity_(capacity) {}

  bool full() const { return capacity_ != 0 && items_.size() >= capacity_; }
  bool empty() const { return items_.empty(); }
  std::size_t occupancy() const { return items_.size(); }
  std::uint64_t byte_occupancy() const { return bytes_; }
  std::size_t capacity() const { return capacity_; }

  /// Returns false (and leaves the queue untouched) when full.
  bool push(const Packet& p) {
    if (full()) return false;
    items_.push_back(p);
    bytes_ += p.size;
    return true;
  }

  Packet pop() {
    Packet p = items_.front();
    items_.pop_front();
    bytes_ -= p.size;
    return p;
  }

 private:
  std::deque<Packet> items_;
  std::uint64_t bytes_ = 0;
  std::size_t capacity_;
};

struct LinkConfig {
  std::string name;
  double rate_bps = 100e6;
  double prop_delay_s = 0.005;  // one-way
  std::size_t buffer_packets = 0;
};

struct LinkCounters {
  std::uint64_t arrivals = 0;
  std::uint64_t drops = 0;
  std::uint64_t service_starts = 0;
  std::uint64_t departures = 0;
  std::uint64_t bytes_departed = 0;
};

class Link {
 public:
  explicit Link(LinkConfig cfg) : cfg_(std::move(cfg)), queue_(cfg_.buffer_packets) {}

  const LinkConfig& config() const { return cfg_; }
  const std::string& name() const { return cfg_.name; }
  double byte_rate() const { return cfg_.rate_bps / 8.0; }
  SimTime prop_delay() const { return from_seconds(cfg_.prop_delay_s); }

  const FifoQueue& queue() const { return queue_; }
  bool busy() const { return busy_; }
  std::size_t in_propagation() const { return propagating_.size(); }
  const LinkCounters& counters() const { return counters_; }

  /// Time integral of queue occupancy (packet-seconds) up to `now`.
  double occupancy_integral(SimTime now) const {
    return occ_integral_ + static_cast<double>(queue_.occupancy()) * to_seconds(now - last_change_);
  }

 private:
  friend class Network;

  void account(SimTime now) {
    occ_integral_ += static_cast<double>(queue_.occupancy()) * to_seconds(now - last_change_);
    last_change_ = now;
  }

  LinkConfig cfg_;
  FifoQueue queue_;
  bool busy_ = false;
  Packet in_service_{};
  std::deque<Packet> propagating_;
  LinkCounters counters_{};
  double occ_integral_ = 0.0;
  SimTime last_change_{0};
};

enum class LinkEvent : std::uint8_t { arrival, drop, service_start, departure };

/// Receives every queue event; used by the independent trace checker.
class LinkObserver {
 public:
  virtual ~LinkObserver() = default;
  virtual void on_link_event(SimTime at, LinkId link, LinkEvent ev, std::size_t occupancy_after) = 0;
};

class Network {
 public:
  using Endpoint = std::function<void(const Packet&)>;

  explicit Network(Simulator& sim) : sim_(sim) {}

  Network(const Network&) = delete;
  Network& operator=(const Network&) = delete;

  LinkId add_link(LinkConfig cfg);
  /// A path is an ordered list of links; `at_end` runs when a packet
  /// finishes the last hop.
  PathId add_path(std::vector<LinkId> links, Endpoint at_end);

  const Link& link(LinkId id) const { return links_.at(id); }
  std::size_t link_count() const { return links_.size(); }
  const std::vector<LinkId>& path(PathId id) const { return paths_.at(id).links; }
  void set_endpoint(PathId id, Endpoint at_end) { paths_.at(id).at_end = std::move(at_end); }

  /// Propagation plus per-hop serialization of a `bytes`-sized packet.
  double path_delay(PathId id, std::uint32_t bytes) const;

  /// Sends `p` along p.path from its first hop. Returns false if dropped
  /// at the first queue.
  bool inject(Packet p);

  void set_observer(LinkObserver* obs) { observer_ = obs; }

  std::uint64_t injected() const { return injected_; }
  std::uint64_t delivered() const { return delivered_; }
  std::uint64_t dropped() const { return dropped_; }
  /// Packets queued, in service or propagating on any link.
  std::uint64_t in_flight() const;
  bool conserved() const { return injected_ == delivered_ + dropped_ + in_flight(); }

  /// Drop notifications (flow id, kind) for senders that watch losses.
  void set_drop_listener(std::function<void(const Packet&)> fn) { drop_listener_ = std::move(fn); }

 private:
  struct PathEntry {
    std::vector<LinkId> links;
    Endpoint at_end;
  };

  bool enqueue(LinkId id, const Packet& p);
  void start_service(LinkId id);
  void on_transmitted(LinkId id);
  void on_propagated(LinkId id);
  void notify(LinkId id, LinkEvent ev) {
    if (observer_) observer_->on_link_event(sim_.now(), id, ev, links_[id].queue_.occupancy());
  }

  Simulator& sim_;
  std::vector<Link> links_;
  std::vector<PathEntry> paths_;
  LinkObserver* observer_ = nullptr;
  std::function<void(const Packet&)> drop_listener_;
  std::uint64_t injected_ = 0;
  std::uint64_t delivered_ = 0;
  std::uint64_t dropped_ = 0;
};

}  // namespace fastpc
