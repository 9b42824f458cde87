#pragma once

#include <string>
#include <vector>

#include "fastpc/metrics.hpp"
#include "fastpc/network.hpp"
#include "fastpc/scenario.hpp"

namespace fastpc {

/// Paths and links created for a scenario. forward/reverse are indexed like
/// ScenarioSpec::flows.
struct BuiltTopology {
  std::vector<PathId> forward;
  std::vector<PathId> reverse;
  std::vector<PathId> background;
  LinkId bottleneck = 0;
  std::vector<LinkId> tracked;
};

/// Dumbbell: S_i -access- R1 -bottleneck- R2 -access- D_i, one access pair
/// per flow and per background source, shared bottleneck in both directions.
/// Parking lot: chain R1 -> ... -> R_H -> D; flow entering at R_e crosses
/// hops e..H; every link uses the same rate and delay.
BuiltTopology build_topology(const ScenarioSpec& spec, Network& net);

struct RunOptions {
  bool check_trace = true;
  bool record_series = true;
  /// End the run as soon as the newcomer's delay probe has concluded.
  bool stop_after_probe = false;
};

/// Runs a scenario to completion. Deterministic for a given spec.
MetricsLog run_scenario(const ScenarioSpec& spec, const RunOptions& opt = {});

struct SweepResult {
  double value = 0.0;
  ScenarioSpec spec;
  MetricsLog log;
};

/// One run per value of `axis` (a key or alias accepted by resolve_axis).
/// Run k uses seed base_seed + k. Results come back in `values` order.
/// Throws ValidationError for an unknown axis.
std::vector<SweepResult> sweep(const KeyValues& base, const std::string& axis, const std::vector<double>& values,
                               unsigned jobs = 1, const RunOptions& opt = {});

/// Runs fn(i) for i in [0, count) on up to `jobs` threads.
void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& fn);

/// Model prediction for a scenario's tail: per-flow shares of the
/// bottleneck (indexed like ScenarioSpec::flows) and total bottleneck backlog.
struct Prediction {
  std::vector<double> shares;
  double queue = 0.0;
  std::string basis;  // which model produced it
};

Prediction predict(const ScenarioSpec& spec);

}  // namespace fastpc
