// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "fastpc/analytic_model.hpp"
#include "fastpc/metrics.hpp"
#include "fastpc/runner.hpp"
#include "fastpc/scenario.hpp"

using namespace fastpc;

namespace {

bool g_all_conserved = true;
int g_runs = 0;

MetricsLog run_text(const std::string& text, const RunOptions& opt = {}) {
  const ScenarioSpec spec = build_scenario(parse_key_values(text, "acceptance"));
  MetricsLog log = run_scenario(spec, opt);
  ++g_runs;
  if (!opt.stop_after_probe && (!log.summary.conserved || !log.summary.trace_ok)) {
    g_all_conserved = false;
    std::printf("  conservation/trace failure in run of:\n%s\n", text.c_str());
  }
  return log;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

int g_failed = 0;
std::vector<int> g_only;  // criteria named on the command line; empty = all

void report(int id, const char* title, const std::function<Outcome()>& fn) {
  if (!g_only.empty() && std::find(g_only.begin(), g_only.end(), id) == g_only.end()) return;
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = fn();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++g_failed;
  std::printf("%s %d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str(), secs);
  std::fflush(stdout);
}

// Final successful estimate of the newcomer's probe, NaN if none.
double final_n_hat(const MetricsLog& log) {
  for (auto it = log.probes.rbegin(); it != log.probes.rend(); ++it) {
    if (it->partial) continue;
    if (it->result.status == model::ProbeStatus::ok && !it->rejected_noise && !it->aborted_on_drop) {
      return it->result.n_hat;
    }
    break;
  }
  return std::nan("");
}

Outcome closed_form() {
  std::ostringstream d;
  bool ok = true;
  const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
  const auto split = model::two_flow_split();
  const double e1 = std::abs(split.a - golden);
  ok = ok && e1 <= 1e-12;
  double worst = 0.0;
  for (std::size_t n = 1; n <= 10000; ++n) {
    const auto s = model::stable_arrival(n, 50.0);
    // n/(n+1+a) + 1/(1+a) = 1
    const double identity = static_cast<double>(n) / (n + 1 + s.a) + 1.0 / (1.0 + s.a);
    worst = std::max(worst, std::abs(identity - 1.0));
  }
  ok = ok && worst <= 1e-12;
  const auto b = model::sequential_backlog(2);
  const double e3 = std::abs(b[1] - golden);
  ok = ok && e3 <= 1e-10;
  d << "|a-golden|=" << e1 << " capacity identity max err=" << worst << " |a_2-closed|=" << e3;
  return {ok, d.str()};
}

Outcome rate_reduction_bounds() {
  const double b4 = model::rate_reduction_min_delay(4, 50, 12500) * 1e3;
  const double b8 = model::rate_reduction_min_delay(8, 50, 12500) * 1e3;
  const bool ok = std::abs(b4 - 40.9) <= 0.1 && std::abs(b8 - 107.9) <= 0.1;
  return {ok, "n=4 " + fmt("%.3f", b4) + " ms (40.9), n=8 " + fmt("%.3f", b8) + " ms (107.9)"};
}

std::string sequential_text(int n, double alpha, double gap, double duration, int seed) {
  std::ostringstream s;
  s << "schedule = sequential\nflows.count = " << n << "\nflows.alpha = " << alpha << "\nschedule.gap = " << gap
    << "\nduration = " << duration << "\nseed = " << seed << "\n";
  return s.str();
}

Outcome two_flow() {
  bool ok = true;
  std::ostringstream d;
  double lo = 1.0, hi = 0.0;
  for (double alpha : {40.0, 50.0, 60.0}) {
    const auto log = run_text(sequential_text(2, alpha, 5, 30, 1));
    const double s1 = log.summary.flows[0].share;
    const double s2 = log.summary.flows[1].share;
    ok = ok && rel(s1, 0.382) <= 0.05 && rel(s2, 0.618) <= 0.05;
    lo = std::min(lo, s1);
    hi = std::max(hi, s1);
    d << "a=" << alpha << ":" << fmt("%.4f", s1) << "/" << fmt("%.4f", s2) << " ";
  }
  ok = ok && (hi - lo) * 100.0 < 3.0;
  d << "spread=" << fmt("%.2f", (hi - lo) * 100.0) << "pp";
  return {ok, d.str()};
}

Outcome sequential_arrivals() {
  bool ok = true;
  std::ostringstream d;
  for (int n = 2; n <= 9; ++n) {
    const double gap = 5.0;
    const auto log = run_text(sequential_text(n, 50, gap, gap * (n - 1) + 40, n));
    const auto want = model::sequential_shares(static_cast<std::size_t>(n));
    const double q_want = model::sequential_queue_length(static_cast<std::size_t>(n), 50);
    double worst = 0.0;
    for (int i = 0; i < n; ++i) worst = std::max(worst, rel(log.summary.flows[i].share, want[i]));
    const double q_err = std::abs(log.summary.queue_mean - q_want);
    const bool this_ok = worst <= 0.07 && q_err <= n + 2;
    ok = ok && this_ok;
    d << "n=" << n << " share err " << fmt("%.1f%%", worst * 100) << " queue " << fmt("%.1f", log.summary.queue_mean)
      << "/" << fmt("%.1f", q_want) << (this_ok ? "" : " !") << "; ";
  }
  return {ok, d.str()};
}

std::string stable_text(int n, const std::string& extra, int seed, double duration = 30) {
  std::ostringstream s;
  s << "schedule = stable_arrival\nflows.count = " << n << "\nflows.alpha = 50\nduration = " << duration
    << "\nseed = " << seed << "\n"
    << extra;
  return s.str();
}

Outcome stable_arrival() {
  bool ok = true;
  std::ostringstream d;
  for (int n : {2, 4, 8}) {
    const auto log = run_text(stable_text(n, "", 1));
    const double a = model::stable_arrival_coefficient(n);
    const double want = (n + 1 + a) / (1 + a);
    const double got = log.summary.fairness_ratio;
    ok = ok && rel(got, want) <= 0.07;
    d << "n=" << n << " " << fmt("%.3f", got) << "/" << fmt("%.3f", want) << " ";
  }
  return {ok, d.str()};
}

Outcome theta_sweep() {
  bool ok = true;
  std::ostringstream d;
  RunOptions opt;
  opt.stop_after_probe = true;
  opt.record_series = false;
  // samples = 1 is a single probe; the sweep itself averages nine staggered ones.
  auto hits_for = [&](int n, double theta, int samples) {
    int hits = 0;
    for (int rep = 0; rep < 10; ++rep) {
      const std::string extra =
          "newcomer.remedy = delay_probe\nnewcomer.remedy.settle_tol = 0.002\nnewcomer.remedy.stagger = 8\n"
          "newcomer.remedy.samples = " + std::to_string(samples) + "\nnewcomer.remedy.theta = " +
          format_number(theta) + "\n";
      const double nh = final_n_hat(run_text(stable_text(n, extra, 100 + rep, 40), opt));
      if (std::abs(nh - n) <= 1.0) ++hits;
    }
    return hits;
  };
  for (int n : {2, 4, 8}) {
    d << "n=" << n << ":";
    for (double theta : {-0.7, -0.5, -0.3, -0.1, 0.1, 0.3, 0.5, 0.7}) {
      const int hits = hits_for(n, theta, 9);
      ok = ok && hits >= 9;
      d << " " << hits;
    }
    d << " /10 [report: theta=-0.05 " << hits_for(n, -0.05, 9) << "/10, single probe theta=-0.1 "
      << hits_for(n, -0.1, 1) << "/10, -0.05 " << hits_for(n, -0.05, 1) << "/10]; ";
  }
  return {ok, d.str()};
}

Outcome remedy_five() {
  const std::string base =
      "schedule = sequential\nflows.count = 5\nflows.alpha = 50\nschedule.gap = 20\nschedule.jitter = 0.5\n"
      "duration = 130\nseed = 7\n";
  const auto fixed = run_text(base + "flows.remedy = delay_probe\nflows.remedy.settle_tol = 0.002\n");
  const auto plain = run_text(base);
  bool ok = true;
  double worst = 0.0, plain_worst = 0.0;
  for (int i = 0; i < 5; ++i) {
    worst = std::max(worst, rel(fixed.summary.flows[i].share, 0.2));
    plain_worst = std::max(plain_worst, rel(plain.summary.flows[i].share, 0.2));
  }
  const double q_err = rel(fixed.summary.queue_mean, 250.0);
  ok = worst <= 0.10 && q_err <= 0.10 && plain_worst > 0.10;
  std::ostringstream d;
  d << "probe max share err " << fmt("%.1f%%", worst * 100) << ", queue " << fmt("%.1f", fixed.summary.queue_mean)
    << " (" << fmt("%.1f%%", q_err * 100) << "); unremedied max share err " << fmt("%.1f%%", plain_worst * 100);
  return {ok, d.str()};
}

Outcome bound_crossing() {
  // Round-trip propagation of the dumbbell: 2 x (bottleneck + two 1 ms access
  // links) plus transmission times (1000 B at 1 Gb/s x2, at 100 Mb/s x1).
  auto round_trip = [](double one_way) { return 2.0 * (one_way + 0.002) + 2 * 8e-6 + 80e-6; };
  const double bound = model::rate_reduction_min_delay(4, 50, 12500);
  std::vector<double> delays, rr, dp;
  for (int k = 0; k <= 20; ++k) delays.push_back(0.003 + 0.0025 * k);
  for (double dl : delays) {
    const std::string topo = "topology.bottleneck_delay = " + format_number(dl) + "\n";
    rr.push_back(run_text(stable_text(4, topo + "newcomer.remedy = rate_reduction\n", 11, 40)).summary.fairness_ratio);
    dp.push_back(
        run_text(stable_text(4, topo + "newcomer.remedy = delay_probe\nnewcomer.remedy.settle_tol = 0.002\n", 11, 40))
            .summary.fairness_ratio);
  }
  // First delay from which rate reduction stays fair, last unfair delay below it.
  std::size_t fair_from = delays.size();
  for (std::size_t i = delays.size(); i-- > 0;) {
    if (rr[i] > 1.15) break;
    fair_from = i;
  }
  std::ptrdiff_t unfair_at = -1;
  for (std::size_t i = 0; i < fair_from; ++i)
    if (rr[i] > 1.3) unfair_at = static_cast<std::ptrdiff_t>(i);
  bool ok = fair_from < delays.size() && unfair_at >= 0;
  std::ostringstream d;
  if (ok) {
    const double lo = round_trip(delays[unfair_at]);
    const double hi = round_trip(delays[fair_from]);
    ok = lo >= 0.5 * bound && hi <= 1.5 * bound;
    d << "rate reduction >1.3 up to RTT " << fmt("%.1f", lo * 1e3) << " ms, <=1.15 from " << fmt("%.1f", hi * 1e3)
      << " ms (bound " << fmt("%.1f", bound * 1e3) << ")";
  } else {
    d << "rate reduction never crosses";
  }
  const auto [mn, mx] = std::minmax_element(dp.begin(), dp.end());
  ok = ok && *mn >= 0.9 && *mx <= 1.1;
  d << "; delay probe in [" << fmt("%.3f", *mn) << ", " << fmt("%.3f", *mx) << "]";
  return {ok, d.str()};
}

Outcome background_noise() {
  const std::string base =
      "topology = parking_lot\nschedule = stable_arrival\nflows.count = 4\nflows.alpha = 50\nbackground.count = 1\n"
      "background.shape = 1.25\nbackground.mean_burst = 0.1\nbackground.mean_idle = 0.1\nduration = 60\n";
  const std::string probe = "newcomer.remedy = delay_probe\nnewcomer.remedy.t_eps_rtts = 0.5\nnewcomer.remedy.samples = 5\n";
  bool ok = true;
  std::ostringstream d;
  for (double peak : {5e6, 10e6, 20e6, 50e6, 100e6}) {
    double dev_fast = 0, dev_probe = 0, mean_probe = 0;
    const int seeds = 4;
    for (int s = 1; s <= seeds; ++s) {
      const std::string text = base + "background.peak_rate = " + format_number(peak) + "\nseed = " +
                               std::to_string(s) + "\n";
      const double rf = run_text(text).summary.fairness_ratio;
      const double rp = run_text(text + probe).summary.fairness_ratio;
      dev_fast += std::abs(rf - 1) / seeds;
      dev_probe += std::abs(rp - 1) / seeds;
      mean_probe += rp / seeds;
    }
    if (peak <= 50e6) {
      ok = ok && dev_probe < dev_fast;
      d << peak / 1e6 << "Mb/s |r-1| probe " << fmt("%.3f", dev_probe) << " fast " << fmt("%.3f", dev_fast) << "; ";
    } else {
      ok = ok && mean_probe >= 0.8 - 0.05;
      d << peak / 1e6 << "Mb/s probe ratio " << fmt("%.3f", mean_probe) << " (floor 0.8 +- 0.05)";
    }
  }
  return {ok, d.str()};
}

std::string all_csv(const MetricsLog& log) {
  return series_csv(log.throughput, "flow_id") + series_csv(log.queue, "link") + series_csv(log.base_rtt, "flow_id") +
         series_csv(log.cwnd, "flow_id") + probes_csv(log.probes) + summary_text(log.summary);
}

Outcome determinism() {
  const std::string noisy =
      "topology = parking_lot\nschedule = stable_arrival\nflows.count = 4\nnewcomer.remedy = delay_probe\n"
      "background.count = 2\nbackground.peak_rate = 20e6\nduration = 20\nseed = 9\n";
  const std::string plain = sequential_text(3, 50, 5, 25, 4);
  bool same = true;
  for (const auto& t : {noisy, plain}) same = same && all_csv(run_text(t)) == all_csv(run_text(t));
  std::ostringstream d;
  d << "byte-identical reruns " << (same ? "yes" : "no") << ", conservation+trace on all " << g_runs << " runs "
    << (g_all_conserved ? "ok" : "FAILED");
  return {same && g_all_conserved, d.str()};
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) g_only.push_back(std::atoi(argv[i]));
  report(1, "closed-form pinning", closed_form);
  report(2, "rate-reduction bounds", rate_reduction_bounds);
  report(3, "two-flow split", two_flow);
  report(4, "sequential arrivals n=2..9", sequential_arrivals);
  report(5, "stable arrival n=2,4,8", stable_arrival);
  report(6, "theta sweep", theta_sweep);
  report(7, "five-flow remedy", remedy_five);
  report(8, "bound crossing", bound_crossing);
  report(9, "background-noise robustness", background_noise);
  report(10, "determinism and conservation", determinism);
  std::printf("%d of %zu criteria failed\n", g_failed, g_only.empty() ? std::size_t{10} : g_only.size());
  return g_failed == 0 ? 0 : 1;
}
