#include "fastpc/simulator.hpp"

#include <algorithm>
#include <string>

#include "fastpc/error.hpp"

namespace fastpc {

void Simulator::schedule(SimTime at, Action action) {
  if (at < now_) {
    throw SimulationError("schedule: event at " + std::to_string(at.count()) +
                          " ns is before the current clock " + std::to_string(now_.count()) +
                          " ns");
  }
  heap_.push_back(Event{at, next_seq_++, std::move(action)});
  std::push_heap(heap_.begin(), heap_.end(), Later{});
}

void Simulator::run_until(SimTime t_end) {
  stop_requested_ = false;
  while (!heap_.empty() && heap_.front().at <= t_end && !stop_requested_) {
    std::pop_heap(heap_.begin(), heap_.end(), Later{});
    Event ev = std::move(heap_.back());
    heap_.pop_back();
    now_ = ev.at;
    if (++dispatched_ > event_cap_) {
      throw SimulationError("run_until: event cap of " + std::to_string(event_cap_) +
                            " exceeded (runaway simulation)");
    }
    ev.action();
  }
  if (!stop_requested_ && t_end > now_) now_ = t_end;
}

}  // namespace fastpc
