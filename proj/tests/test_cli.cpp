#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fastpc/cli.hpp"

namespace fs = std::filesystem;
using fastpc::cli::dispatch;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fastpc_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("model commands") {
  const auto seq = call({"model-seq", "--n", "2"});
  CHECK(seq.code == 0);
  CHECK(seq.out.find("a_2=0.6180") != std::string::npos);
  CHECK(seq.out.find("shares=0.3820/0.6180") != std::string::npos);

  const auto bound = call({"model-bound", "--n", "4", "--alpha", "50", "--capacity", "12500"});
  CHECK(bound.code == 0);
  CHECK(bound.out.find("40.9") != std::string::npos);

  CHECK(call({"model-stable", "--n", "4"}).out.find("rate_ratio=2.56") != std::string::npos);
}

TEST_CASE("exit codes") {
  const auto missing = call({"run", "missing.scn"});
  CHECK(missing.code == fastpc::cli::exit_validation);
  CHECK(missing.err.find("missing.scn") != std::string::npos);
  CHECK(missing.err.rfind("fastpc: error:", 0) == 0);

  CHECK(call({}).code == fastpc::cli::exit_usage);
  CHECK(call({"frobnicate"}).code == fastpc::cli::exit_usage);
  CHECK(call({"model-seq"}).code == fastpc::cli::exit_usage);
  CHECK(call({"model-seq", "--n", "0"}).code == fastpc::cli::exit_usage);
  CHECK(call({"model-bound", "--n", "4", "--capacity", "0"}).code == fastpc::cli::exit_usage);

  const fs::path dir = scratch("bad");
  std::ofstream(dir / "bad.scn") << "flows.count = 2\nflows.gamma = 7\n";
  const auto bad = call({"run", (dir / "bad.scn").string(), "--out", (dir / "o").string()});
  CHECK(bad.code == fastpc::cli::exit_validation);
  CHECK(bad.err.find("gamma") != std::string::npos);
}

TEST_CASE("value lists") {
  CHECK(fastpc::cli::parse_values("1,2.5,3") == std::vector<double>{1, 2.5, 3});
  const auto range = fastpc::cli::parse_values("0.003:0.013:0.005");
  REQUIRE(range.size() == 3);
  CHECK(range[2] == 0.013);
}

TEST_CASE("run output is byte-identical across reruns") {
  const fs::path dir = scratch("det");
  std::ofstream(dir / "s.scn") << "name = det\ntopology = parking_lot\nschedule = stable_arrival\nflows.count = 2\n"
                                  "newcomer.remedy = delay_probe\nbackground.count = 1\nbackground.peak_rate = 20e6\n"
                                  "duration = 8\nseed = 3\n";
  REQUIRE(call({"run", (dir / "s.scn").string(), "--out", (dir / "a").string()}).code == 0);
  REQUIRE(call({"run", (dir / "s.scn").string(), "--out", (dir / "b").string()}).code == 0);
  int files = 0;
  for (const auto& e : fs::directory_iterator(dir / "a")) {
    ++files;
    CHECK(slurp(e.path()) == slurp(dir / "b" / e.path().filename()));
  }
  CHECK(files >= 5);
  const std::string summary = slurp(dir / "a" / "summary.txt");
  CHECK(summary.find("conserved") != std::string::npos);

  const auto other = call({"run", (dir / "s.scn").string(), "--seed", "4", "--out", (dir / "c").string()});
  CHECK(other.code == 0);
  CHECK(slurp(dir / "a" / "throughput.csv") != slurp(dir / "c" / "throughput.csv"));
}

TEST_CASE("sweep and compare write their tables") {
  const fs::path dir = scratch("sweep");
  std::ofstream(dir / "s.scn") << "name = sw\nschedule = sequential\nflows.count = 2\nschedule.gap = 3\nduration = 12\n";
  const auto sw = call({"sweep", (dir / "s.scn").string(), "--axis", "alpha", "--values", "40,60", "--out",
                        (dir / "o").string()});
  CHECK(sw.code == 0);
  const std::string csv = slurp(dir / "o" / "sweep.csv");
  CHECK(csv.rfind("value,seed,fairness_ratio", 0) == 0);
  CHECK(fs::exists(dir / "o" / "alpha=40"));

  const auto cmp = call({"compare", (dir / "s.scn").string(), "--out", (dir / "c").string()});
  CHECK(cmp.code == 0);
  CHECK(slurp(dir / "c" / "compare.csv").rfind("quantity,model,sim,deviation", 0) == 0);

  CHECK(call({"sweep", (dir / "s.scn").string(), "--axis", "nope", "--values", "1"}).code ==
        fastpc::cli::exit_validation);
}
