#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "fastpc/sim_time.hpp"

namespace fastpc {

/// Single-threaded discrete-event engine. Events with equal timestamps are
/// dispatched in scheduling order.
class Simulator {
 public:
  using Action = std::function<void()>;

  explicit Simulator(std::uint64_t event_cap = 2'000'000'000ULL) : event_cap_(event_cap) {}

  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  SimTime now() const { return now_; }

  /// Throws SimulationError when `at` is earlier than now().
  void schedule(SimTime at, Action action);
  void schedule_in(SimTime delay, Action action) { schedule(now_ + delay, std::move(action)); }

  /// Dispatches every event with timestamp <= t_end, then sets the clock to
  /// t_end. Throws SimulationError if the event cap is exceeded.
  void run_until(SimTime t_end);

  /// Stops the current run_until after the event being dispatched.
  void stop() { stop_requested_ = true; }

  std::size_t pending() const { return heap_.size(); }
  std::uint64_t dispatched() const { return dispatched_; }

 private:
  struct Event {
    SimTime at;
    std::uint64_t seq;
    Action action;
  };
  struct Later {
    bool operator()(const Event& x, const Event& y) const {
      return x.at != y.at ? x.at > y.at : x.seq > y.seq;
    }
  };

  std::vector<Event> heap_;
  SimTime now_{0};
  std::uint64_t next_seq_ = 0;
  std::uint64_t dispatched_ = 0;
  std::uint64_t event_cap_;
  bool stop_requested_ = false;
};

}  // namespace fastpc
