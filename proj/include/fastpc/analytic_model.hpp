#pragma once

// Closed-form and numerically solved equilibrium predictions for FAST flows
// sharing one FIFO bottleneck. Everything here is pure: capacities are in
// packets/second, delays in seconds, backlogs in packets.

#include <cstddef>
#include <span>
#include <vector>

namespace fastpc::model {

struct FlowParams {
  double alpha = 50.0;  // target backlog, packets
  double gamma = 0.5;   // gain in (0, 1]

  void validate() const;
};

struct PathParams {
  double capacity_c = 12500.0;  // packets/second
  double prop_delay_d = 0.0;    // round-trip, seconds
  double tx_time_sum = 0.0;     // seconds

  void validate() const;
};

/// Extra-queue coefficients a_1..a_n for n sequentially arriving flows.
/// Index 0 holds a_1 (always 0).
struct BacklogVector {
  std::vector<double> a;
  /// |sum of normalized rates - 1| after each prefix solve.
  std::vector<double> residual;

  std::size_t size() const { return a.size(); }
  double operator[](std::size_t i) const { return a[i]; }
  double sum() const;
};

struct TwoFlowSplit {
  double share_first;
  double share_second;
  double a;
};

struct StableArrivalSolution {
  std::size_t n;
  double a;
  double share_old;
  double share_new;
  double newcomer_backlog;  // packets
};

enum class ProbeStatus { ok, failed_sign, clamped };

const char* to_string(ProbeStatus s);

struct ProbeInversion {
  ProbeStatus status = ProbeStatus::ok;
  double theta = 0.0;
  double t_eps = 0.0;
  double delta_r = 0.0;
  double rho = 0.0;  // -theta * t_eps / delta_r
  double n_hat = 0.0;
  long n_rounded = 0;
  double c_hat = 0.0;
  double d_corrected = 0.0;
  double w_reset = 0.0;
};

/// alpha / queueing_delay. Throws DomainError for queueing_delay <= 0.
double equilibrium_rate(double alpha, double queueing_delay);

TwoFlowSplit two_flow_split();

/// Solves sum_{i=1..j} 1/(1 + j - i + sum_{k=i..j} a_k) = 1 for a_j,
/// j = 2..n, by Newton's method with a bisection fallback on [0, j].
/// Throws NumericalError if a prefix fails to converge.
BacklogVector sequential_backlog(std::size_t n);

/// Normalized equilibrium rate of each of n sequentially arrived flows,
/// oldest first.
std::vector<double> sequential_shares(std::size_t n);
std::vector<double> sequential_shares(const BacklogVector& backlog);

/// Total bottleneck backlog alpha * (n + sum a_j), packets.
double sequential_queue_length(std::size_t n, double alpha);

/// One newcomer joining n flows that know their true propagation delay.
StableArrivalSolution stable_arrival(std::size_t n, double alpha);

/// Coefficient a = (sqrt(1+4n) - 1)/2, evaluated without cancellation.
double stable_arrival_coefficient(double n);

/// Smallest round-trip propagation delay for which pausing the newcomer
/// drains the bottleneck before incumbents react: n*alpha*(1+sqrt(1+4n))/(2C).
double rate_reduction_min_delay(std::size_t n, double alpha, double capacity_c);

/// Inverts a window probe.
///   theta         window perturbation factor, w_eps = (1 - theta) w
///   t_eps         perturbation duration, seconds
///   delta_r       measured r_eps - r_star, seconds (positive when theta < 0)
///   w, r          settled window (packets) and RTT (seconds) before the probe
///   base_rtt_est  the flow's current propagation-delay estimate
/// status == failed_sign when rho < 1 (n_hat would be negative); the other
/// fields are then only partially filled. Negative d_corrected is clamped to 0
/// and reported as status == clamped.
ProbeInversion invert_probe(double theta, double t_eps, double delta_r, double w,
                            double r, double base_rtt_est, double alpha);

/// Variant for a flow whose base RTT has fallen by drift = base_at_join -
/// base_rtt_est since it joined (queues drained by other traffic). With
/// rho = -theta t_eps / delta_r and C_hat = rho w / r, the flow count becomes
/// (rho - 1)(rho - drift C_hat / alpha) and the correction is taken from the
/// base RTT measured at join. Reduces to invert_probe when drift == 0.
ProbeInversion invert_probe_with_drift(double theta, double t_eps, double delta_r, double w, double r,
                                       double base_rtt_est, double base_at_join, double alpha);

/// n * new_rate / sum(old_rates). Throws DomainError on empty or all-zero
/// old_rates, or negative rates.
double fairness_ratio(double new_rate, std::span<const double> old_rates);

}  // namespace fastpc::model
