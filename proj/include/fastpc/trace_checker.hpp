#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fastpc/network.hpp"

namespace fastpc {

/// Rebuilds every queue's occupancy from the raw event stream
/// (arrivals - drops - service starts) and compares it with what the link
/// reports after each event. Also checks that time never runs backwards and
/// that each link serves at most one packet at a time.
class TraceChecker : public LinkObserver {
 public:
  explicit TraceChecker(std::size_t links) : state_(links) {}

  void on_link_event(SimTime at, LinkId link, LinkEvent ev, std::size_t occupancy_after) override;

  bool ok() const { return violations_ == 0; }
  std::uint64_t violations() const { return violations_; }
  std::uint64_t events() const { return events_; }
  const std::string& first_violation() const { return first_; }

 private:
  struct PerLink {
    std::int64_t arrivals = 0;
    std::int64_t drops = 0;
    std::int64_t starts = 0;
    std::int64_t departures = 0;
  };

  void fail(const std::string& what);

  std::vector<PerLink> state_;
  SimTime last_{0};
  std::uint64_t events_ = 0;
  std::uint64_t violations_ = 0;
  std::string first_;
};

}  // namespace fastpc
