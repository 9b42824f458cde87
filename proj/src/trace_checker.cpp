#include "fastpc/trace_checker.hpp"

namespace fastpc {

void TraceChecker::fail(const std::string& what) {
  if (violations_++ == 0) first_ = what;
}

void TraceChecker::on_link_event(SimTime at, LinkId link, LinkEvent ev, std::size_t occupancy_after) {
  ++events_;
  if (at < last_) fail("time went backwards at event " + std::to_string(events_));
  last_ = at;
  if (link >= state_.size()) state_.resize(link + 1);
  PerLink& s = state_[link];
  switch (ev) {
    case LinkEvent::arrival:
      ++s.arrivals;
      // The reported occupancy is taken before the packet is placed.
      if (static_cast<std::int64_t>(occupancy_after) != s.arrivals - 1 - s.drops - s.starts) {
        fail("occupancy mismatch on arrival, link " + std::to_string(link));
      }
      return;
    case LinkEvent::drop:
      ++s.drops;
      break;
    case LinkEvent::service_start:
      ++s.starts;
      if (s.starts - s.departures > 1) fail("two packets in service on link " + std::to_string(link));
      break;
    case LinkEvent::departure:
      ++s.departures;
      if (s.departures > s.starts) fail("departure without service on link " + std::to_string(link));
      break;
  }
  const std::int64_t expected = s.arrivals - s.drops - s.starts;
  if (expected < 0 || static_cast<std::int64_t>(occupancy_after) != expected) {
    fail("occupancy mismatch on link " + std::to_string(link) + " at event " + std::to_string(events_));
  }
}

}  // namespace fastpc
