#include "fastpc/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "fastpc/analytic_model.hpp"
#include "fastpc/error.hpp"
#include "fastpc/metrics.hpp"
#include "fastpc/runner.hpp"
#include "fastpc/scenario.hpp"

namespace fastpc::cli {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string one_line(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
}

void require_count(long long n, const char* what) {
  if (n < 1) throw UsageError(std::string("--") + what + " must be >= 1");
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw UsageError(std::string("--") + what + " must be a positive number");
}

std::string output_dir(const std::string& given, const std::string& name) {
  if (!given.empty()) return given;
  return (std::filesystem::path(default_output_root()) / name).string();
}

std::string echo(const ScenarioSpec& spec) {
  std::string text = format_key_values(spec.source);
  for (const auto& note : spec.notes) text += "# " + note + "\n";
  return text;
}

int model_seq(long long n, double alpha, std::ostream& out) {
  require_count(n, "n");
  require_positive(alpha, "alpha");
  const auto a = model::sequential_backlog(static_cast<std::size_t>(n));
  const auto shares = model::sequential_shares(a);
  out << "n=" << n << "\n";
  out << "flow,a,share\n";
  for (std::size_t k = 0; k < a.size(); ++k) {
    out << k + 1 << "," << fixed(a[k], 4) << "," << fixed(shares[k], 4) << "\n";
  }
  std::string joined;
  for (std::size_t k = 0; k < shares.size(); ++k) joined += (k ? "/" : "") + fixed(shares[k], 4);
  out << "a_" << n << "=" << fixed(a[a.size() - 1], 4) << "\n";
  out << "shares=" << joined << "\n";
  out << "sum_a=" << fixed(a.sum(), 4) << "\n";
  out << "queue_packets=" << fixed(model::sequential_queue_length(static_cast<std::size_t>(n), alpha), 2)
      << " (alpha=" << format_number(alpha) << ")\n";
  double worst = 0.0;
  for (double r : a.residual) worst = std::max(worst, std::abs(r));
  out << "max_residual=" << format_number(worst) << "\n";
  return exit_ok;
}

int model_stable(long long n, double alpha, std::ostream& out) {
  require_count(n, "n");
  require_positive(alpha, "alpha");
  const auto s = model::stable_arrival(static_cast<std::size_t>(n), alpha);
  out << "n=" << n << "\n";
  out << "a=" << fixed(s.a, 6) << "\n";
  out << "share_incumbent=" << fixed(s.share_old, 6) << "\n";
  out << "share_newcomer=" << fixed(s.share_new, 6) << "\n";
  out << "rate_ratio=" << fixed(s.share_new / s.share_old, 6) << "\n";
  out << "newcomer_backlog=" << fixed(s.newcomer_backlog, 3) << "\n";
  return exit_ok;
}

int model_bound(long long n, double alpha, double capacity, std::ostream& out) {
  require_count(n, "n");
  require_positive(alpha, "alpha");
  require_positive(capacity, "capacity");
  const double d = model::rate_reduction_min_delay(static_cast<std::size_t>(n), alpha, capacity);
  out << "min_delay_s=" << format_number(d) << "\n";
  out << "min_delay=" << fixed(d * 1e3, 3) << " ms\n";
  return exit_ok;
}

int run_cmd(const std::string& file, std::optional<std::uint64_t> seed, const std::string& out_dir,
            std::ostream& out) {
  KeyValues kv = load_key_values(file);
  if (seed) kv["seed"] = std::to_string(*seed);
  const ScenarioSpec spec = build_scenario(kv);
  const MetricsLog log = run_scenario(spec);
  const std::string dir = output_dir(out_dir, spec.name);
  write_run_directory(dir, echo(spec), log);
  const auto& s = log.summary;
  out << "scenario=" << spec.name << "\n";
  out << "out=" << dir << "\n";
  out << "fairness_ratio=" << format_number(s.fairness_ratio) << "\n";
  out << "queue_mean=" << format_number(s.queue_mean) << "\n";
  out << "conserved=" << (s.conserved ? "true" : "false") << " trace_ok=" << (s.trace_ok ? "true" : "false")
      << "\n";
  return s.conserved && s.trace_ok ? exit_ok : exit_failure;
}

int sweep_cmd(const std::string& file, const std::string& axis, const std::string& values_text,
              const std::string& out_dir, unsigned jobs, std::ostream& out) {
  if (jobs < 1) throw UsageError("--jobs must be >= 1");
  const std::vector<double> values = parse_values(values_text);
  const KeyValues kv = load_key_values(file);
  const auto results = sweep(kv, axis, values, jobs);
  const std::string name = results.empty() ? "sweep" : results.front().spec.name + "_sweep";
  const std::filesystem::path root(output_dir(out_dir, name));
  std::filesystem::create_directories(root);

  std::string table = "value,seed,fairness_ratio,newcomer_share,queue_mean,n_hat,probe_status,conserved,trace_ok\r\n";
  bool healthy = true;
  for (const auto& r : results) {
    const std::string tag = axis + "=" + format_number(r.value);
    write_run_directory((root / tag).string(), echo(r.spec), r.log);
    const auto& s = r.log.summary;
    const std::uint32_t nc = s.flows.empty() ? 0 : s.flows[s.newcomer].id;
    std::string n_hat = "", status = "";
    for (const auto& p : r.log.probes) {
      if (p.flow_id + 1 == nc) {
        n_hat = format_number(p.result.n_hat);
        status = model::to_string(p.result.status);
      }
    }
    table += format_number(r.value) + "," + std::to_string(r.spec.seed) + "," + format_number(s.fairness_ratio) + "," +
             format_number(s.flows.empty() ? 0.0 : s.flows[s.newcomer].share) + "," + format_number(s.queue_mean) +
             "," + n_hat + "," + status + "," + (s.conserved ? "true" : "false") + "," +
             (s.trace_ok ? "true" : "false") + "\r\n";
    healthy = healthy && s.conserved && s.trace_ok;
  }
  write_text(root / "sweep.csv", table);
  out << "out=" << root.string() << "\n";
  out << table;
  return healthy ? exit_ok : exit_failure;
}

int compare_cmd(const std::string& file, const std::string& out_dir, std::ostream& out) {
  const ScenarioSpec spec = load_scenario(file);
  const Prediction pred = predict(spec);
  const MetricsLog log = run_scenario(spec);
  const std::filesystem::path root(output_dir(out_dir, spec.name));
  write_run_directory(root.string(), echo(spec), log);

  const auto& s = log.summary;
  auto dev = [](double sim, double model) { return std::abs(sim - model) / model; };
  std::string table = "quantity,model,sim,deviation\r\n";
  for (std::size_t i = 0; i < s.flows.size(); ++i) {
    const double m = pred.shares[i];
    table += "share." + std::to_string(s.flows[i].id) + "," + format_number(m) + "," +
             format_number(s.flows[i].share) + "," + format_number(dev(s.flows[i].share, m)) + "\r\n";
  }
  table += "queue," + format_number(pred.queue) + "," + format_number(s.queue_mean) + "," +
           format_number(dev(s.queue_mean, pred.queue)) + "\r\n";
  write_text(root / "compare.csv", table);

  out << "scenario=" << spec.name << " model=" << pred.basis << "\n";
  out << "out=" << root.string() << "\n";
  out << "quantity      model      sim        deviation\n";
  auto row = [&out](const std::string& q, double m, double v, double d) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-12s  %-9.4f  %-9.4f  %.2f%%\n", q.c_str(), m, v, 100.0 * d);
    out << buf;
  };
  for (std::size_t i = 0; i < s.flows.size(); ++i) {
    row("share." + std::to_string(s.flows[i].id), pred.shares[i], s.flows[i].share,
        dev(s.flows[i].share, pred.shares[i]));
  }
  row("queue", pred.queue, s.queue_mean, dev(s.queue_mean, pred.queue));
  return s.conserved && s.trace_ok ? exit_ok : exit_failure;
}

}  // namespace

std::string default_output_root() {
  const char* env = std::getenv("FASTPC_OUT");
  return env && *env ? env : "out";
}

std::vector<double> parse_values(const std::string& text) {
  auto number = [&text](const std::string& tok) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != tok.size() || !std::isfinite(v)) throw UsageError("--values: bad number '" + tok + "' in '" + text + "'");
    return v;
  };
  std::vector<double> values;
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw UsageError("--values: range must be start:stop:step");
    const double start = number(parts[0]), stop = number(parts[1]), step = number(parts[2]);
    if (!(step > 0.0) || stop < start) throw UsageError("--values: range needs step > 0 and stop >= start");
    const auto count = static_cast<long long>(std::floor((stop - start) / step + 1e-9));
    if (count > 100000) throw UsageError("--values: range too long");
    for (long long k = 0; k <= count; ++k) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.12g", start + static_cast<double>(k) * step);
      values.push_back(std::strtod(buf, nullptr));
    }
    return values;
  }
  std::stringstream ss(text);
  for (std::string tok; std::getline(ss, tok, ',');) values.push_back(number(tok));
  if (values.empty()) throw UsageError("--values: empty list");
  return values;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"FAST-TCP persistent congestion simulator and model", "fastpc"};
  app.require_subcommand(1);

  long long n = 0;
  double alpha = 50.0, capacity = 0.0;

  auto* seq = app.add_subcommand("model-seq", "Backlog vector and shares for sequential arrivals");
  seq->add_option("--n", n, "Number of flows")->required();
  seq->add_option("--alpha", alpha, "Per-flow backlog target (packets)");

  auto* stable = app.add_subcommand("model-stable", "One flow joining n flows at equilibrium");
  stable->add_option("--n", n, "Number of incumbent flows")->required();
  stable->add_option("--alpha", alpha, "Per-flow backlog target (packets)");

  auto* bound = app.add_subcommand("model-bound", "Minimum propagation delay for rate reduction to be fair");
  bound->add_option("--n", n, "Number of incumbent flows")->required();
  bound->add_option("--alpha", alpha, "Per-flow backlog target (packets)");
  bound->add_option("--capacity", capacity, "Bottleneck capacity (packets/s)")->required();

  std::string file, out_dir, axis, values;
  std::uint64_t seed = 0;
  unsigned jobs = 1;

  auto* run = app.add_subcommand("run", "Run one scenario file");
  run->add_option("scenario", file, "Scenario file")->required();
  auto* seed_opt = run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--out", out_dir, "Output directory (default $FASTPC_OUT/<name>)");

  auto* sw = app.add_subcommand("sweep", "Run a scenario once per value of one parameter");
  sw->add_option("scenario", file, "Scenario file")->required();
  sw->add_option("--axis", axis, "Scenario key or alias: n, theta, alpha, bottleneck_delay, peak_rate")->required();
  sw->add_option("--values", values, "Comma list or start:stop:step (use --values=-0.5,... for negatives)")
      ->required();
  sw->add_option("--out", out_dir, "Output directory");
  sw->add_option("--jobs", jobs, "Concurrent runs");

  auto* cmp = app.add_subcommand("compare", "Run a scenario and print model vs measurement");
  cmp->add_option("scenario", file, "Scenario file")->required();
  cmp->add_option("--out", out_dir, "Output directory");

  std::vector<const char*> argv{"fastpc"};
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << "fastpc: error: usage: " << one_line(e.what()) << "\n";
    out << app.help();
    return exit_usage;
  }

  try {
    if (seq->parsed()) return model_seq(n, alpha, out);
    if (stable->parsed()) return model_stable(n, alpha, out);
    if (bound->parsed()) return model_bound(n, alpha, capacity, out);
    if (run->parsed()) {
      std::optional<std::uint64_t> s;
      if (seed_opt->count() > 0) s = seed;
      return run_cmd(file, s, out_dir, out);
    }
    if (sw->parsed()) return sweep_cmd(file, axis, values, out_dir, jobs, out);
    if (cmp->parsed()) return compare_cmd(file, out_dir, out);
  } catch (const UsageError& e) {
    err << "fastpc: error: usage: " << one_line(e.what()) << "\n";
    out << app.help();
    return exit_usage;
  } catch (const ValidationError& e) {
    err << "fastpc: error: validation: " << one_line(e.what()) << "\n";
    return exit_validation;
  } catch (const DomainError& e) {
    err << "fastpc: error: validation: " << one_line(e.what()) << "\n";
    return exit_validation;
  } catch (const NumericalError& e) {
    err << "fastpc: error: numerical: " << one_line(e.what()) << "\n";
    return exit_numerical;
  } catch (const std::exception& e) {
    err << "fastpc: error: internal: " << one_line(e.what()) << "\n";
    return exit_failure;
  }
  return exit_usage;
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dispatch(args, std::cout, std::cerr);
}

}  // namespace fastpc::cli
