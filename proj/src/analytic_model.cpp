#include "fastpc/analytic_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fastpc/error.hpp"

namespace fastpc::model {

namespace {

constexpr double kResidualTol = 1e-10;
constexpr int kMaxIterations = 200;

// Sum of normalized rates with the newest coefficient set to x.
// suffix[i] holds sum_{k=i}^{j-1} a_k for the already solved prefix, so the
// flow arriving i-th sees 1 + (j - i) + suffix[i] + x.
struct PrefixEquation {
  std::span<const double> suffix;  // size j; suffix[j-1] == 0 for the newcomer

  void eval(double x, double& f, double& df) const {
    f = -1.0;
    df = 0.0;
    const std::size_t j = suffix.size();
    for (std::size_t i = 0; i < j; ++i) {
      const double denom = 1.0 + static_cast<double>(j - 1 - i) + suffix[i] + x;
      const double inv = 1.0 / denom;
      f += inv;
      df -= inv * inv;
    }
  }
};

double solve_prefix(const PrefixEquation& eq, double guess, double& residual) {
  double lo = 0.0;
  double hi = static_cast<double>(eq.suffix.size());
  double x = (guess > lo && guess < hi) ? guess : 0.5 * (lo + hi);
  double f = 0.0;
  double df = 0.0;
  for (int it = 0; it < kMaxIterations; ++it) {
    eq.eval(x, f, df);
    if (std::abs(f) < 1e-14) break;
    // f is strictly decreasing in x: keep the bracket tight.
    if (f > 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    double next = x - f / df;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-16 * std::max(1.0, x)) {
      x = next;
      eq.eval(x, f, df);
      break;
    }
    x = next;
  }
  residual = std::abs(f);
  if (!(residual < kResidualTol)) {
    throw NumericalError("sequential_backlog: prefix of length " +
                         std::to_string(eq.suffix.size()) + " did not converge (residual " +
                         std::to_string(residual) + ")");
  }
  return x;
}

}  // namespace

void FlowParams::validate() const {
  if (!(alpha > 0.0)) throw DomainError("alpha must be > 0");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw DomainError("gamma must be in (0, 1]");
}

void PathParams::validate() const {
  if (!(capacity_c > 0.0)) throw DomainError("capacity must be > 0");
  if (!(prop_delay_d >= 0.0)) throw DomainError("propagation delay must be >= 0");
  if (!(tx_time_sum >= 0.0)) throw DomainError("transmission time sum must be >= 0");
}

double BacklogVector::sum() const { return std::accumulate(a.begin(), a.end(), 0.0); }

const char* to_string(ProbeStatus s) {
  switch (s) {
    case ProbeStatus::ok:
      return "ok";
    case ProbeStatus::failed_sign:
      return "failed_sign";
    case ProbeStatus::clamped:
      return "clamped";
  }
  return "unknown";
}

double equilibrium_rate(double alpha, double queueing_delay) {
  if (!(queueing_delay > 0.0)) {
    throw DomainError("equilibrium_rate: queueing delay must be > 0 (empty buffer has no equilibrium)");
  }
  return alpha / queueing_delay;
}

TwoFlowSplit two_flow_split() {
  const double a = (std::sqrt(5.0) - 1.0) / 2.0;
  return {1.0 - a, a, a};
}

BacklogVector sequential_backlog(std::size_t n) {
  BacklogVector out;
  if (n == 0) return out;
  out.a.reserve(n);
  out.residual.reserve(n);
  out.a.push_back(0.0);
  out.residual.push_back(0.0);

  // suffix[i] = sum_{k=i+1}^{j-1} a_k over 0-based flow index i.
  std::vector<double> suffix(1, 0.0);
  suffix.reserve(n);
  for (std::size_t j = 2; j <= n; ++j) {
    // Extend to j flows: the newcomer (index j-1) has no prior coefficients.
    suffix.push_back(0.0);
    const PrefixEquation eq{std::span<const double>(suffix)};
    double residual = 0.0;
    const double guess = out.a.back() + 0.5;
    const double aj = solve_prefix(eq, guess, residual);
    out.a.push_back(aj);
    out.residual.push_back(residual);
    for (double& s : suffix) s += aj;
  }
  return out;
}

std::vector<double> sequential_shares(const BacklogVector& backlog) {
  const std::size_t n = backlog.size();
  std::vector<double> shares(n);
  // tail = sum_{j=i}^{n} a_j, accumulated from the newest flow backwards.
  double tail = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    tail += backlog.a[k];
    shares[k] = 1.0 / (1.0 + static_cast<double>(n - 1 - k) + tail);
  }
  return shares;
}

std::vector<double> sequential_shares(std::size_t n) {
  if (n == 0) throw DomainError("sequential_shares: n must be >= 1");
  return sequential_shares(sequential_backlog(n));
}

double sequential_queue_length(std::size_t n, double alpha) {
  if (n == 0) throw DomainError("sequential_queue_length: n must be >= 1");
  if (!(alpha > 0.0)) throw DomainError("sequential_queue_length: alpha must be > 0");
  return alpha * (static_cast<double>(n) + sequential_backlog(n).sum());
}

double stable_arrival_coefficient(double n) {
  // (sqrt(1+4n) - 1)/2 rewritten as 2n/(sqrt(1+4n) + 1).
  return 2.0 * n / (std::sqrt(1.0 + 4.0 * n) + 1.0);
}

StableArrivalSolution stable_arrival(std::size_t n, double alpha) {
  if (n == 0) throw DomainError("stable_arrival: n must be >= 1");
  const double nn = static_cast<double>(n);
  const double a = stable_arrival_coefficient(nn);
  return {n, a, 1.0 / (nn + 1.0 + a), 1.0 / (1.0 + a), alpha * (1.0 + a)};
}

double rate_reduction_min_delay(std::size_t n, double alpha, double capacity_c) {
  if (n == 0) throw DomainError("rate_reduction_min_delay: n must be >= 1");
  if (!(alpha > 0.0) || !(capacity_c > 0.0)) {
    throw DomainError("rate_reduction_min_delay: alpha and capacity must be > 0");
  }
  const double nn = static_cast<double>(n);
  return nn * alpha * (1.0 + std::sqrt(1.0 + 4.0 * nn)) / (2.0 * capacity_c);
}

ProbeInversion invert_probe(double theta, double t_eps, double delta_r, double w, double r,
                            double base_rtt_est, double alpha) {
  if (theta == 0.0) throw DomainError("invert_probe: theta must be nonzero");
  if (!(t_eps > 0.0)) throw DomainError("invert_probe: t_eps must be > 0");
  if (delta_r == 0.0) throw DomainError("invert_probe: delta_r must be nonzero");
  if (!(w > 0.0)) throw DomainError("invert_probe: w must be > 0");
  if (!(base_rtt_est >= 0.0) || !(r > base_rtt_est)) {
    throw DomainError("invert_probe: requires r > base_rtt_est >= 0");
  }

  ProbeInversion out;
  out.theta = theta;
  out.t_eps = t_eps;
  out.delta_r = delta_r;
  out.rho = -theta * t_eps / delta_r;
  if (!(out.rho >= 1.0)) {
    out.status = ProbeStatus::failed_sign;
    return out;
  }
  out.n_hat = out.rho * (out.rho - 1.0);
  out.n_rounded = std::lround(out.n_hat);
  out.c_hat = (1.0 + std::sqrt(1.0 + 4.0 * out.n_hat)) * w / (2.0 * r);
  const double corrected = base_rtt_est - out.n_hat * alpha / out.c_hat;
  if (corrected < 0.0) {
    out.status = ProbeStatus::clamped;
    out.d_corrected = 0.0;
  } else {
    out.d_corrected = corrected;
  }
  out.w_reset = alpha + out.d_corrected * out.c_hat / (out.n_hat + 1.0);
  return out;
}

ProbeInversion invert_probe_with_drift(double theta, double t_eps, double delta_r, double w, double r,
                                       double base_rtt_est, double base_at_join, double alpha) {
  ProbeInversion out = invert_probe(theta, t_eps, delta_r, w, r, base_rtt_est, alpha);
  if (out.status == ProbeStatus::failed_sign) return out;
  if (!(base_at_join >= base_rtt_est)) throw DomainError("invert_probe_with_drift: base_at_join < base_rtt_est");
  const double drift = base_at_join - base_rtt_est;
  if (drift == 0.0) return out;

  out.status = ProbeStatus::ok;
  out.c_hat = out.rho * w / r;
  out.n_hat = std::max(0.0, (out.rho - 1.0) * (out.rho - drift * out.c_hat / alpha));
  out.n_rounded = std::lround(out.n_hat);
  const double corrected = std::min(base_rtt_est, base_at_join - out.n_hat * alpha / out.c_hat);
  if (corrected < 0.0) {
    out.status = ProbeStatus::clamped;
    out.d_corrected = 0.0;
  } else {
    out.d_corrected = corrected;
  }
  out.w_reset = alpha + out.d_corrected * out.c_hat / (out.n_hat + 1.0);
  return out;
}

double fairness_ratio(double new_rate, std::span<const double> old_rates) {
  if (old_rates.empty()) throw DomainError("fairness_ratio: no incumbent flows");
  if (new_rate < 0.0) throw DomainError("fairness_ratio: negative rate");
  double total = 0.0;
  for (double x : old_rates) {
    if (x < 0.0) throw DomainError("fairness_ratio: negative rate");
    total += x;
  }
  if (!(total > 0.0)) throw DomainError("fairness_ratio: incumbent rates sum to zero");
  return static_cast<double>(old_rates.size()) * new_rate / total;
}

}  // namespace fastpc::model
