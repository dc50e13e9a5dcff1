// Copyright 2026 rbmpc authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

std::string cli() {
  const char* env = std::getenv("RBMPC_CLI");
  REQUIRE(env != nullptr);
  return env;
}

std::string scenario(const std::string& name) {
  const char* env = std::getenv("RBMPC_SCENARIO_DIR");
  REQUIRE(env != nullptr);
  return (fs::path(env) / name).string();
}

fs::path work_dir() {
  const fs::path dir = fs::temp_directory_path() / "rbmpc_cli_test";
  fs::create_directories(dir);
  return dir;
}

int run(const std::string& args) {
  const std::string cmd =
      "RBMPC_LOG=quiet " + cli() + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Csv {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

Csv parse_csv(const fs::path& path) {
  Csv out;
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      out.comments.push_back(line);
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
      fields.push_back(field);
    }
    if (!header_seen) {
      out.header = fields;
      header_seen = true;
    } else {
      out.rows.push_back(fields);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("solve: TS1 defaults converge and write a result file") {
  const fs::path out = work_dir() / "solve_ts1.json";
  const int rc =
      run("solve " + scenario("ts1.json") + " --out " + out.string());
  CHECK(rc == 0);
  const nlohmann::json j = nlohmann::json::parse(slurp(out));
  CHECK(j.at("schema") == "rbmpc-solve-v1");
  CHECK(j.at("converged") == true);
  CHECK(j.at("q").size() == 4);
  CHECK(j.at("tree").at("split_step") == 5);
  CHECK(j.at("tree").at("horizon") == 50);
  CHECK(j.at("tree").at("branches").size() == 4);
  CHECK(j.at("tree").at("shared").at("inputs").size() == 5);
}

TEST_CASE("solve: alpha = 1 risk run equals the nominal run") {
  const fs::path out_r = work_dir() / "a1_risk.json";
  const fs::path out_n = work_dir() / "a1_nom.json";
  CHECK(run("solve " + scenario("ts1.json") + " --alpha 1 --out " +
            out_r.string()) == 0);
  CHECK(run("solve " + scenario("ts1.json") + " --alpha 1 --nominal --out " +
            out_n.string()) == 0);
  const auto jr = nlohmann::json::parse(slurp(out_r));
  const auto jn = nlohmann::json::parse(slurp(out_n));
  const double cr = jr.at("final_cost");
  const double cn = jn.at("final_cost");
  CHECK(std::abs(cr - cn) <= 1e-6);
}

TEST_CASE("solve: missing scenario file exits nonzero") {
  CHECK(run("solve /nonexistent/path.json") != 0);
}

TEST_CASE("montecarlo: rejects n = 0 and accepts small runs") {
  CHECK(run("montecarlo " + scenario("ts1.json") + " --n 0") != 0);

  const fs::path out = work_dir() / "mc.csv";
  CHECK(run("montecarlo " + scenario("ts1.json") +
            " --n 3 --seed 5 --jobs 2 --out " + out.string()) == 0);
  const Csv csv = parse_csv(out);
  REQUIRE(!csv.comments.empty());
  CHECK(csv.comments[0] == "# rbmpc-montecarlo-v1");
  REQUIRE(csv.header.size() == 10);
  CHECK(csv.header[0] == "seed");
  CHECK(csv.header[5] == "time_ms");
  CHECK(csv.rows.size() == 6);  // 3 risk + 3 nominal
}

TEST_CASE("montecarlo: fixed seed reproduces the per-sample rows") {
  const fs::path out_a = work_dir() / "mc_a.csv";
  const fs::path out_b = work_dir() / "mc_b.csv";
  CHECK(run("montecarlo " + scenario("ts2.json") + " --n 3 --seed 11 --out " +
            out_a.string()) == 0);
  CHECK(run("montecarlo " + scenario("ts2.json") + " --n 3 --seed 11 --out " +
            out_b.string()) == 0);
  const Csv a = parse_csv(out_a);
  const Csv b = parse_csv(out_b);
  REQUIRE(a.rows.size() == b.rows.size());
  const std::size_t time_col = 5;
  for (std::size_t r = 0; r < a.rows.size(); ++r) {
    REQUIRE(a.rows[r].size() == b.rows[r].size());
    for (std::size_t c = 0; c < a.rows[r].size(); ++c) {
      if (c == time_col) continue;  // wall-clock timing is not replayed
      CHECK(a.rows[r][c] == b.rows[r][c]);
    }
  }
}

TEST_CASE("closedloop: trace schema and the t_a = 0 degenerate mode") {
  const fs::path out = work_dir() / "trace.csv";
  // shorten the run for test time: 2 s of simulation
  const fs::path cfg = work_dir() / "ts1_short.json";
  {
    std::ofstream f(cfg);
    f << R"({"scenario": "TS1", "sim_duration": 2.0})";
  }
  CHECK(run("closedloop " + cfg.string() + " --ta 0 --out " + out.string()) ==
        0);
  const Csv csv = parse_csv(out);
  REQUIRE(!csv.comments.empty());
  CHECK(csv.comments[0] == "# rbmpc-trace-v1");
  // t, 6 ego/input columns, 6 stats columns, 4 q columns, 2 vehicles x 2
  REQUIRE(csv.header.size() == 13 + 4 + 4);
  CHECK(csv.header[0] == "t");
  CHECK(csv.header[13] == "q0");
  CHECK(csv.rows.size() == 20);
  // t_a = 0: every solve is single-mode; q is the true-mode vertex
  for (const auto& row : csv.rows) {
    CHECK(row[13 + 2] == "1");  // TS1 true joint mode is index 2
  }
  // timestamps strictly increasing by dt
  for (std::size_t r = 0; r + 1 < csv.rows.size(); ++r) {
    const double t0 = std::stod(csv.rows[r][0]);
    const double t1 = std::stod(csv.rows[r + 1][0]);
    CHECK(t1 - t0 == doctest::Approx(0.1).epsilon(1e-9));
  }
}

TEST_CASE("closedloop: identical invocations produce identical traces") {
  const fs::path cfg = work_dir() / "ts1_short2.json";
  {
    std::ofstream f(cfg);
    f << R"({"scenario": "TS1", "sim_duration": 1.0})";
  }
  const fs::path out_a = work_dir() / "trace_a.csv";
  const fs::path out_b = work_dir() / "trace_b.csv";
  CHECK(run("closedloop " + cfg.string() + " --out " + out_a.string()) == 0);
  CHECK(run("closedloop " + cfg.string() + " --out " + out_b.string()) == 0);
  const Csv a = parse_csv(out_a);
  const Csv b = parse_csv(out_b);
  REQUIRE(a.rows.size() == b.rows.size());
  const std::size_t time_col = 10;  // solve_time_ms
  for (std::size_t r = 0; r < a.rows.size(); ++r) {
    for (std::size_t c = 0; c < a.rows[r].size(); ++c) {
      if (c == time_col) continue;
      CHECK(a.rows[r][c] == b.rows[r][c]);
    }
  }
}

TEST_CASE("bad subcommand or missing arguments exit nonzero") {
  CHECK(run("frobnicate") != 0);
  CHECK(run("solve") != 0);
}
