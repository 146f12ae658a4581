#include "misti/cli.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

using namespace misti;
using namespace misti::cli;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result call(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> v;
  std::istringstream is(text);
  for (std::string l; std::getline(is, l);) v.push_back(l);
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> v;
  std::istringstream is(s);
  for (std::string f; std::getline(is, f, sep);) v.push_back(f);
  return v;
}

// Exit status of the built binary.
int exit_status(const std::string& args) {
  const std::string cmd = std::string(MISTI_BINARY) + " " + args + " > /dev/null 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("misti_test_" + std::to_string(::getpid()) + "_" + name);
}

}  // namespace

TEST_CASE("simulate writes a csv trajectory") {
  const auto r = call({"simulate", "--process", "thinning", "--law", "nb", "--theta", "1", "--p", "0.5", "--rho", "0.5",
                       "--steps", "1000", "--seed", "42"});
  REQUIRE(r.code == kExitOk);
  const auto l = lines(r.out);
  REQUIRE(l.size() == 1001);
  CHECK(l[0] == "t,x");
  CHECK(l[1].rfind("0,", 0) == 0);
  CHECK(l[1000].rfind("999,", 0) == 0);
  for (std::size_t i = 1; i < l.size(); ++i) CHECK(std::stoi(split(l[i], ',')[1]) >= 0);

  const auto again = call({"simulate", "--process", "thinning", "--law", "nb", "--theta", "1", "--p", "0.5", "--rho",
                           "0.5", "--steps", "1000", "--seed", "42"});
  CHECK(again.out == r.out);
  const auto other = call({"simulate", "--steps", "1000", "--seed", "43"});
  CHECK(other.out != r.out);

  CHECK(call({"simulate", "--steps", "0"}).code == kExitConfig);
  CHECK(call({"simulate", "--rho", "1.5"}).code == kExitConfig);
  CHECK(call({"simulate", "--process", "random-measure", "--steps", "5000"}).code == kExitConfig);
  CHECK(call({"simulate", "--law", "levy", "--levy", "2:0.3"}).code == kExitConfig);
}

TEST_CASE("simulate other processes") {
  const auto ct = call({"simulate", "--process", "ct-nb", "--alpha", "1.5", "--p", "0.4", "--horizon", "20", "--x0", "3"});
  REQUIRE(ct.code == kExitOk);
  const auto l = lines(ct.out);
  CHECK(l[0] == "time,state");
  CHECK(l[1] == "0,3");

  const auto js = call({"simulate", "--process", "branching-poisson", "--steps", "4", "--format", "jsonl", "--t0", "7"});
  REQUIRE(js.code == kExitOk);
  const auto jl = lines(js.out);
  REQUIRE(jl.size() == 4);
  CHECK(nlohmann::json::parse(jl[0])["t"] == 7);

  const auto levy = call({"simulate", "--law", "levy", "--levy", "1:0.5,2:0.25", "--steps", "10"});
  CHECK(levy.code == kExitOk);
}

TEST_CASE("verify suites") {
  for (const auto& suite : suite_names()) {
    const auto r = call({"verify", "--suite", suite});
    CHECK_MESSAGE(r.code == kExitOk, suite);
    for (const auto& line : lines(r.out)) {
      const auto j = nlohmann::json::parse(line);
      CHECK(j.contains("name"));
      CHECK(j.contains("violation"));
      CHECK(j.contains("witness"));
      CHECK(j.contains("tolerance"));
      CHECK(j["ok"] == true);
    }
  }
  const auto csv = call({"verify", "--suite", "theorem3", "--format", "csv"});
  CHECK(lines(csv.out)[0] == "suite,name,violation,tolerance,pass,expected,ok,witness");
  CHECK(csv.out.find("random-measure-nb:markov,0.0239257812") != std::string::npos);
  CHECK(call({"verify", "--suite", "nope"}).code == kExitConfig);
}

TEST_CASE("table of the discriminating probability") {
  const auto r = call({"table", "--theta", "1", "--p", "0.5", "--rho", "0.5"});
  REQUIRE(r.code == kExitOk);
  const auto l = lines(r.out);
  REQUIRE(l.size() == 2);
  const auto f = split(l[1], ',');
  CHECK(std::stod(f[3]) == doctest::Approx(0.0703125).epsilon(1e-12));
  CHECK(std::stod(f[6]) == doctest::Approx(0.078125).epsilon(1e-12));
  CHECK(std::stod(f[9]) == doctest::Approx(0.0078125).epsilon(1e-10));

  const auto grid = call({"table", "--thetas", "0.5,1,2", "--ps", "0.3,0.7", "--rhos", "0.2,0.8", "--k", "16"});
  REQUIRE(grid.code == kExitOk);
  const auto gl = lines(grid.out);
  REQUIRE(gl.size() == 13);
  for (std::size_t i = 1; i < gl.size(); ++i) {
    const auto g = split(gl[i], ',');
    CHECK(std::stod(g[5]) <= 1e-9);
    CHECK(std::stod(g[8]) <= 1e-9);
    CHECK(std::stod(g[9]) > 0.0);
  }

  // rho -> 0: both reduce to p^{2 theta}.
  const auto low = split(lines(call({"table", "--theta", "1.5", "--p", "0.4", "--rho", "1e-7"}).out)[1], ',');
  CHECK(std::stod(low[3]) == doctest::Approx(std::pow(0.4, 3.0)).epsilon(1e-5));
  CHECK(std::stod(low[6]) == doctest::Approx(std::pow(0.4, 3.0)).epsilon(1e-5));
  // theta -> 0: both reduce to (1 - rho)^2.
  const auto thin = split(lines(call({"table", "--theta", "1e-7", "--p", "0.5", "--rho", "0.3"}).out)[1], ',');
  CHECK(std::stod(thin[3]) == doctest::Approx(0.49).epsilon(1e-5));
  CHECK(std::stod(thin[6]) == doctest::Approx(0.49).epsilon(1e-5));

  CHECK(call({"table", "--rho", "1"}).code == kExitConfig);
  CHECK(call({"table", "--p", "0"}).code == kExitConfig);
}

TEST_CASE("config files") {
  RunConfig cfg;
  cfg.command = "table";
  cfg.theta = 0.1 + 0.2;
  cfg.p = 1.0 / 3;
  cfg.rhos = {0.25, 0.5};
  cfg.law = "levy";
  cfg.levy = "1:0.5,2:0.25";
  cfg.seed = 123456789012345ULL;
  cfg.out = "a file.csv";
  CHECK(parse_config_text("table", dump_config(cfg)) == cfg);

  CHECK_THROWS_AS(parse_config_text("table", "bogus = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_args({"table", "--bogus", "1"}), ConfigError);
  CHECK_THROWS_AS(parse_args({"launch"}), ConfigError);
  CHECK_THROWS_AS(parse_args({}), ConfigError);

  const auto path = temp_file("cfg.toml");
  {
    std::ofstream f(path);
    f << "theta = 2\nrho = 0.25\n";
  }
  const auto from_file = parse_args({"simulate", "--config", path.string()});
  CHECK(from_file.theta == 2.0);
  CHECK(from_file.rho == 0.25);
  const auto overridden = parse_args({"simulate", "--config", path.string(), "--theta", "3"});
  CHECK(overridden.theta == 3.0);
  CHECK(overridden.rho == 0.25);
  {
    std::ofstream f(path);
    f << "thta = 2\n";
  }
  CHECK(call({"simulate", "--config", path.string()}).code == kExitConfig);
  std::filesystem::remove(path);

  CHECK(output_format(parse_args({"verify"})) == "jsonl");
  CHECK(output_format(parse_args({"table"})) == "csv");
  CHECK(call({"table", "--help"}).code == kExitOk);
  CHECK(call({}).code == kExitConfig);
}

TEST_CASE("classify") {
  const auto nb = call({"classify", "--r0", "0.5", "--r1", "0.4", "--r2", "0.08", "--theta1", "0.4"});
  REQUIRE(nb.code == kExitOk);
  const auto f = split(lines(nb.out)[1], ',');
  CHECK(f[0] == "branching-nb");
  CHECK(std::stod(f[2]) == doctest::Approx(0.625));
  CHECK(std::stod(f[3]) == doctest::Approx(0.4));
  CHECK(std::stod(f[4]) == doctest::Approx(1.0));

  const auto po = call({"classify", "--r0", "0.3", "--r1", "0.7", "--r2", "0", "--theta1", "2", "--format", "jsonl"});
  CHECK(nlohmann::json::parse(po.out)["family"] == "branching-poisson");
  const auto iid = call({"classify", "--r0", "1", "--r1", "0", "--r2", "0", "--theta1", "1", "--format", "jsonl"});
  CHECK(nlohmann::json::parse(iid.out)["family"] == "iid");
  const auto con = call({"classify", "--r0", "0", "--r1", "1", "--r2", "0", "--theta1", "1", "--format", "jsonl"});
  CHECK(nlohmann::json::parse(con.out)["family"] == "constant");

  // q = 1 is not a valid negative binomial.
  CHECK(call({"classify", "--r0", "0.5", "--r1", "0.25", "--r2", "0.125", "--theta1", "1"}).code == kExitConfig);
}

TEST_CASE("binary exit codes and output files") {
  CHECK(exit_status("verify --suite theorem3") == kExitOk);
  CHECK(exit_status("simulate --steps 0") == kExitConfig);
  CHECK(exit_status("") == kExitConfig);
  const auto path = temp_file("out.csv");
  REQUIRE(exit_status("simulate --steps 10 --out " + path.string()) == kExitOk);
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  CHECK(lines(ss.str()).size() == 11);
  std::filesystem::remove(path);
}
