#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "support.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using ordsel::testing::data;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("ordsel_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

Run run(const std::string& args) {
  const auto out = scratch() / "stdout", err = scratch() / "stderr";
  const std::string cmd = std::string(ORDSEL_CLI) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("optimize prints plan JSON and explain output") {
    REQUIRE(std::string(ORDSEL_CLI) != "");
    const auto r = run("optimize --catalog " + q(data("car_catalog.json")) + " --query " + q(data("car_query.json")) +
                       " --explain");
    CHECK(r.code == 0);
    const auto plan = json::parse(r.out);
    CHECK(plan.contains("cost"));
    const auto explain = json::parse(r.err);
    CHECK(explain.contains("afm"));
    CHECK(explain.contains("interesting"));
  }

  TEST_CASE("cost subcommand agrees with the stored plan cost") {
    const auto plan_file = scratch() / "plan.json";
    const auto r = run("optimize --catalog " + q(data("b1_catalog.json")) + " --query " + q(data("b1_query.json")));
    REQUIRE(r.code == 0);
    std::ofstream(plan_file) << r.out;
    const auto c = run("cost --plan " + q(plan_file) + " --catalog " + q(data("b1_catalog.json")));
    CHECK(c.code == 0);
    CHECK(json::parse(c.out)["match"] == true);
  }

  TEST_CASE("solve-prefix with the oracle") {
    const auto inst = scratch() / "inst.json";
    std::ofstream(inst) << R"({"vertices": [["a"], ["a", "b"], ["b"]], "edges": [[0, 1], [1, 2]], "f": "identity"})";
    const auto r = run("solve-prefix --instance " + q(inst) + " --oracle");
    CHECK(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j["benefit"] == 1.0);
    CHECK(j["oracle_benefit"] == 1.0);
  }

  TEST_CASE("gen is deterministic and sort orders its output") {
    const auto a = run("gen --rows 1000 --segments 10 --seed 7");
    const auto b = run("gen --rows 1000 --segments 10 --seed 7");
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out.rfind("seg,val,payload\n", 0) == 0);

    const auto csv = scratch() / "in.csv", sorted = scratch() / "out.csv", metrics = scratch() / "m.json";
    std::ofstream(csv) << a.out;
    const auto s = run("sort --input " + q(csv) + " --output " + q(sorted) + " --key seg:int,val:int --target-order seg,val"
                       " --known-prefix seg --memory-records 100 --metrics-out " + q(metrics));
    CHECK(s.code == 0);
    const auto m = json::parse(slurp(metrics));
    CHECK(m["records"] == 1000);
    CHECK(m["blocks_written"] == 0);

    std::istringstream lines(slurp(sorted));
    std::string line;
    std::getline(lines, line);
    CHECK(line == "seg,val,payload");
    long prev_seg = -1, prev_val = -1, count = 0;
    while (std::getline(lines, line)) {
      const auto c1 = line.find(','), c2 = line.find(',', c1 + 1);
      const long seg = std::stol(line.substr(0, c1)), val = std::stol(line.substr(c1 + 1, c2 - c1 - 1));
      CHECK((seg > prev_seg || (seg == prev_seg && val >= prev_val)));
      prev_seg = seg;
      prev_val = val;
      ++count;
    }
    CHECK(count == 1000);
  }

  TEST_CASE("unsorted prefix is reported") {
    const auto csv = scratch() / "bad.csv";
    std::ofstream(csv) << "seg,val\n2,1\n1,5\n";
    const auto r = run("sort --input " + q(csv) + " --key seg:int,val:int --target-order seg,val --known-prefix seg");
    CHECK(r.code == 1);
    CHECK(json::parse(r.err)["code"] == "InputNotSorted");
  }

  TEST_CASE("bench emits one row per segment count and algorithm") {
    const auto r = run("bench --segments 1,16 --rows 4096 --memory-records 512 --seed 3");
    CHECK(r.code == 0);
    CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 5);
    CHECK(r.out.rfind("segments,", 0) == 0);
  }

  TEST_CASE("error exit codes") {
    const auto io = run("optimize --catalog /nonexistent.json --query /nonexistent.json");
    CHECK(io.code == 2);
    const auto e = json::parse(io.err);
    CHECK(e["code"] == "Io");
    CHECK(e.contains("message"));
    CHECK(e.contains("path"));

    const auto bad = run("optimize --catalog " + q(data("car_catalog.json")) + " --query " + q(data("b1_query.json")));
    CHECK(bad.code == 1);
    CHECK(json::parse(bad.err)["code"] == "Validation");

    CHECK(run("").code == 1);
    CHECK(run("optimize --no-such-flag").code == 1);
  }
}
