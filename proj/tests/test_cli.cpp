// SPDX-License-Identifier: Apache-2.0
//
// End-to-end checks of the absplace executable.

#include <doctest.h>
#include <json.hpp>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(ABSPLACE_CLI) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string tiny() { return std::string("-c ") + ABSPLACE_TEST_DATA + "/tiny.json"; }

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("absplace_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::map<std::string, std::string> schema() {
  std::map<std::string, std::string> out;
  std::ifstream in(std::string(ABSPLACE_TEST_DATA) + "/schema.txt");
  std::string name, fields;
  while (in >> name >> fields) out[name] = fields;
  return out;
}

std::string keys(const Json& j) {
  std::string s;
  for (const auto& [k, v] : j.items()) s += (s.empty() ? "" : ",") + k;
  return s;
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST_CASE("cli map: schema, free space, domain error") {
  const auto r = run(tiny() + " map");
  REQUIRE(r.code == 0);
  const Json j = Json::parse(r.out);
  CHECK(keys(j) == schema()["map"]);

  const auto free = run("--height 0 map --tx 104 100 10 --rx 104 180 10");
  REQUIRE(free.code == 0);
  CHECK(Json::parse(free.out)["xi_traversal"] == 0.0);
  CHECK(Json::parse(free.out)["xi_ellipsoid"] == 0.0);

  const auto wall = run("map --tx 104 100 10 --rx 104 180 10");
  CHECK(Json::parse(wall.out)["xi_traversal"].get<double>() > 0.0);

  CHECK(run(tiny() + " map --tx 10 10 -5 --rx 250 200 100").code == 2);
  CHECK(run(tiny() + " map --tx 10 10 5 --rx 10 10 5").code == 1);
  CHECK(run(tiny() + " map").out == r.out);
}

TEST_CASE("cli place: schema, feasibility, determinism") {
  const fs::path d1 = scratch("place1"), d2 = scratch("place2");
  const auto a = run(tiny() + " --out-dir " + d1.string() + " place");
  const auto b = run(tiny() + " --out-dir " + d2.string() + " place");
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  for (const char* f : {"tiny_place.json", "tiny_positions.csv", "tiny_trace.csv"})
    CHECK(slurp(d1 / f) == slurp(d2 / f));

  const auto s = schema();
  const Json j = Json::parse(slurp(d1 / "tiny_place.json"));
  CHECK(keys(j) == s.at("place"));
  CHECK(j["feasible"] == true);
  CHECK(j["N"] == j["selected"].size());
  for (const auto& rate : j["user_rates"]) CHECK(rate.get<double>() >= 5e6);
  CHECK(first_line(slurp(d1 / "tiny_positions.csv")) == s.at("positions"));
  CHECK(first_line(slurp(d1 / "tiny_trace.csv")) == s.at("trace"));
}

TEST_CASE("cli place: single user, flag precedence, infeasible exit") {
  const fs::path d = scratch("place_flags");
  const auto one = run(tiny() + " --users 1 --out-dir " + d.string() + " place");
  REQUIRE(one.code == 0);
  CHECK(Json::parse(one.out)["N"] == 1);
  CHECK(Json::parse(one.out)["num_users"] == 1);

  const auto s7 = Json::parse(run(tiny() + " --out-dir " + d.string() + " place").out);
  const auto s8 = Json::parse(run(tiny() + " --seed 8 --out-dir " + d.string() + " place").out);
  CHECK(s7["users"] != s8["users"]);

  const auto inf = run(tiny() + " --min-rate 1e12 --out-dir " + d.string() + " place");
  CHECK(inf.code == 3);
  const Json j = Json::parse(slurp(d / "tiny_place.json"));
  CHECK(j["feasible"] == false);
  CHECK(j["uncoverable_users"].size() == 3);
}

TEST_CASE("cli experiment: schema, row counts, determinism") {
  const fs::path d1 = scratch("exp1"), d2 = scratch("exp2");
  REQUIRE(run(tiny() + " --out-dir " + d1.string() + " experiment").code == 0);
  REQUIRE(run(tiny() + " --out-dir " + d2.string() + " experiment").code == 0);
  const std::string runs = slurp(d1 / "tiny_runs.csv"), summary = slurp(d1 / "tiny_summary.csv");
  CHECK(runs == slurp(d2 / "tiny_runs.csv"));
  CHECK(summary == slurp(d2 / "tiny_summary.csv"));
  const auto s = schema();
  CHECK(first_line(runs) == s.at("runs"));
  CHECK(first_line(summary) == s.at("summary"));
  auto lines = [](const std::string& t) { return std::count(t.begin(), t.end(), '\n'); };
  CHECK(lines(runs) == 1 + 3 * 2 * 2);
  CHECK(lines(summary) == 1 + 3 * 2);
}

TEST_CASE("cli oracle: guard, gap, determinism") {
  const fs::path d = scratch("oracle");
  CHECK(run("--out-dir " + d.string() + " oracle").code == 4);
  const auto a = run(tiny() + " --out-dir " + d.string() + " oracle --compare-admm");
  REQUIRE(a.code == 0);
  const Json j = Json::parse(a.out);
  CHECK(keys(j) == schema().at("oracle"));
  CHECK(j["gap"].get<int>() >= 0);
  CHECK(run(tiny() + " --out-dir " + d.string() + " oracle --compare-admm").out == a.out);
}

TEST_CASE("cli: bad configs and arguments exit 1") {
  const fs::path d = scratch("bad");
  {
    std::ofstream(d / "bad.json") << R"({"channel": {"wavelength": 0.1, "carrier_frequency": 2e9}})";
  }
  CHECK(run("-c " + (d / "bad.json").string() + " map --tx 1 1 1 --rx 2 2 2").code == 1);
  CHECK(run("--out-dir " + d.string() + " experiment").code == 1);  // no sweep values
  CHECK(run("").code != 0);
}

TEST_CASE("cli slf and estimate round trip") {
  const fs::path d = scratch("slf");
  const auto r = run(tiny() + " --out-dir " + d.string() + " slf");
  REQUIRE(r.code == 0);
  CHECK(r.out == slurp(d / "tiny_slf.txt"));
  {
    std::ofstream(d / "m.csv") << "tx_x,tx_y,tx_z,rx_x,rx_y,rx_z,shadow_db\n10,10,0,250,200,100,0\n";
  }
  const auto e = run(tiny() + " --out-dir " + d.string() + " estimate " + (d / "m.csv").string());
  CHECK(e.code == 0);
  CHECK(fs::exists(d / "tiny_slf_estimate.txt"));
}
