#include "fastpc/metrics.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "fastpc/error.hpp"

namespace fastpc {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string series_csv(const std::vector<SeriesPoint>& series, const std::string& id_column) {
  std::string out = "time," + id_column + ",value\r\n";
  for (const auto& p : series) {
    out += format_number(p.time);
    out += ',';
    out += csv_field(p.id);
    out += ',';
    out += format_number(p.value);
    out += "\r\n";
  }
  return out;
}

std::string probes_csv(const std::vector<ProbeEvent>& probes) {
  std::string out =
      "time,flow_id,attempt,status,theta,t_eps,r_star,w_star,r_ref,r_eps,delta_r,n_hat,n_rounded,c_hat,"
      "d_corrected,w_reset,base_rtt_before,base_at_join,jitter,aborted_on_drop,rejected_noise,partial,samples_used\r\n";
  for (const auto& p : probes) {
    const auto& r = p.result;
    out += format_number(p.time) + "," + std::to_string(p.flow_id) + "," + std::to_string(p.attempt) + "," +
           model::to_string(r.status) + "," + format_number(r.theta) + "," + format_number(r.t_eps) + "," +
           format_number(p.r_star) + "," + format_number(p.w_star) + "," + format_number(p.r_ref) + "," + format_number(p.r_eps) + "," +
           format_number(r.delta_r) + "," + format_number(r.n_hat) + "," + std::to_string(r.n_rounded) + "," +
           format_number(r.c_hat) + "," + format_number(r.d_corrected) + "," + format_number(r.w_reset) + "," +
           format_number(p.base_rtt_before) + "," + format_number(p.base_at_join) + "," + format_number(p.jitter) + "," +
           (p.aborted_on_drop ? "1" : "0") + "," + (p.rejected_noise ? "1" : "0") + "," + (p.partial ? "1" : "0") + "," +
           std::to_string(p.samples_used) + "\r\n";
  }
  return out;
}

std::string summary_text(const Summary& s) {
  std::string out;
  auto put = [&out](const std::string& k, const std::string& v) { out += k + "=" + v + "\n"; };
  put("tail_start", format_number(s.tail_start));
  put("tail_end", format_number(s.tail_end));
  put("capacity_pps", format_number(s.capacity_pps));
  put("flows", std::to_string(s.flows.size()));
  put("newcomer", std::to_string(s.flows.empty() ? 0 : s.flows[s.newcomer].id));
  put("fairness_ratio", format_number(s.fairness_ratio));
  put("bottleneck", s.bottleneck);
  put("queue_mean", format_number(s.queue_mean));
  put("drops", std::to_string(s.drops));
  put("background_packets", std::to_string(s.background_packets));
  put("events", std::to_string(s.events));
  put("injected", std::to_string(s.injected));
  put("delivered", std::to_string(s.delivered));
  put("in_flight", std::to_string(s.in_flight));
  put("conserved", s.conserved ? "true" : "false");
  put("trace_ok", s.trace_ok ? "true" : "false");
  for (const auto& f : s.flows) {
    const std::string p = "flow." + std::to_string(f.id) + ".";
    put(p + "start", format_number(f.start));
    put(p + "remedy", f.remedy);
    put(p + "mean_rate", format_number(f.mean_rate));
    put(p + "share", format_number(f.share));
    put(p + "base_rtt", format_number(f.base_rtt));
    put(p + "rtt_est", format_number(f.rtt_est));
    put(p + "cwnd", format_number(f.cwnd));
    put(p + "delivered", std::to_string(f.delivered));
    put(p + "lost", std::to_string(f.lost));
  }
  return out;
}

namespace {
void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}
}  // namespace

void write_run_directory(const std::string& dir, const std::string& scenario_echo, const MetricsLog& log) {
  const std::filesystem::path root(dir);
  std::filesystem::create_directories(root);
  write_file(root / "scenario.txt", scenario_echo);
  write_file(root / "summary.txt", summary_text(log.summary));
  write_file(root / "throughput.csv", series_csv(log.throughput, "flow_id"));
  write_file(root / "queue.csv", series_csv(log.queue, "queue_id"));
  write_file(root / "base_rtt.csv", series_csv(log.base_rtt, "flow_id"));
  write_file(root / "cwnd.csv", series_csv(log.cwnd, "flow_id"));
  write_file(root / "probes.csv", probes_csv(log.probes));
}

}  // namespace fastpc
