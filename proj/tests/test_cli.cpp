#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "doctest.h"
#include "opensub/io.hpp"

using namespace opensub;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "opensub");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string dir() {
  const fs::path d = fs::temp_directory_path() / "opensub_test_cli";
  fs::create_directories(d);
  return d.string();
}

std::string path(const std::string& name) { return dir() + "/" + name; }

std::string slurp(const std::string& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

void write(const std::string& p, const std::string& text) { std::ofstream(p) << text; }

const char* kTwoSite =
    R"({"d1":1,"d2":1,"omega1":[[[0,0]]],"omega2":[[[0,0]]],"gamma":[[[1,0]]]})";

}  // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(run({}).code == cli::kExitUsage);
  CHECK(run({"no-such-command"}).code == cli::kExitUsage);
  CHECK(run({"decompose"}).code == cli::kExitUsage);
  CHECK(run({"gen-random", "--d1", "2", "--d2", "2", "--rank", "3", "-o",
             path("x.json")})
            .code == cli::kExitUsage);
  CHECK(run({"kernel", "-i", path("missing.json")}).code == cli::kExitUsage);
  CHECK(run({"gen-lattice", "--box", "4", "--cube", "2", "--offset", "1", "1",
             "-o", path("l.json")})
            .code == cli::kExitUsage);
}

TEST_CASE("help exits with 0") {
  const Result r = run({"decompose", "--help"});
  CHECK(r.code == cli::kExitOk);
  CHECK(r.out.find("--input") != std::string::npos);
}

TEST_CASE("malformed system file is a usage error with a field diagnostic") {
  write(path("bad.json"), R"({"d1":1,"d2":1,"omega1":[[[0,0]]],"omega2":[[[0,0]]]})");
  const Result r = run({"decompose", "-i", path("bad.json")});
  CHECK(r.code == cli::kExitUsage);
  CHECK(r.err.find("missing field 'gamma'") != std::string::npos);

  write(path("broken.json"), "{\"d1\": 1,\n \"d2\": }");
  const Result b = run({"decompose", "-i", path("broken.json")});
  CHECK(b.code == cli::kExitUsage);
  CHECK(b.err.find("byte") != std::string::npos);
}

TEST_CASE("decompose of an uncoupled system") {
  write(path("zero.json"),
        R"({"d1":2,"d2":1,"omega1":[[[1,0],[0,0]],[[0,0],[2,0]]],)"
        R"("omega2":[[[3,0]]],"gamma":[[[0,0]],[[0,0]]]})");
  const Result r = run({"decompose", "--input", path("zero.json"), "--tol", "1e-10",
                        "--output", path("dec.json")});
  REQUIRE(r.code == cli::kExitOk);
  const io::Json j = io::parse(slurp(path("dec.json")));
  CHECK(j["dims"]["h1d"] == 2);
  CHECK(j["dims"]["h1c"] == 0);
  CHECK(j["dims"]["h2c"] == 0);
  CHECK(j["dims"]["h2d"] == 1);
  CHECK(j["tol"] == 1e-10);
}

TEST_CASE("gen-random then verify-theorem") {
  REQUIRE(run({"gen-random", "--d1", "5", "--d2", "8", "--rank", "2", "--seed",
               "42", "-o", path("r.json")})
              .code == cli::kExitOk);
  const Result r = run({"verify-theorem", "-i", path("r.json")});
  CHECK(r.code == cli::kExitOk);
  const io::Json j = io::parse(r.out);
  CHECK(j["max_equality_distance"].get<double>() <= 1e-9);
  CHECK(j["passed"] == true);
  CHECK(r.err.find("H1c+H2c vs O(H1c)") != std::string::npos);
}

TEST_CASE("generated files are consumed without loss") {
  REQUIRE(run({"gen-random", "--d1", "3", "--d2", "4", "--rank", "2", "--seed",
               "9", "-o", path("a.json")})
              .code == cli::kExitOk);
  const BlockSystem sys = io::read_system_file(path("a.json"));
  const BlockSystem direct = random_system(3, 4, 2, 9);
  CHECK(sys.omega1() == direct.omega1());
  CHECK(sys.gamma() == direct.gamma());

  REQUIRE(run({"gen-lattice", "--box", "4", "--cube", "2", "--dims", "2", "-o",
               path("lat.json")})
              .code == cli::kExitOk);
  const io::Json meta = io::parse(slurp(path("lat.json")));
  CHECK(meta["lattice"]["surface_count"] == 4);
  CHECK(meta["lattice"]["offset"] == io::Json::array({1, 1}));
  const Result d = run({"decompose", "-i", path("lat.json")});
  CHECK(d.code == cli::kExitOk);
  CHECK(io::parse(d.out)["dims"]["h1c"] == 4);
}

TEST_CASE("reports are byte-identical across runs") {
  REQUIRE(run({"gen-random", "--d1", "2", "--d2", "3", "--rank", "1", "--seed",
               "3", "-o", path("d1.json")})
              .code == cli::kExitOk);
  REQUIRE(run({"gen-random", "--d1", "2", "--d2", "3", "--rank", "1", "--seed",
               "3", "-o", path("d2.json")})
              .code == cli::kExitOk);
  CHECK(slurp(path("d1.json")) == slurp(path("d2.json")));
  for (const std::vector<std::string>& cmd :
       {std::vector<std::string>{"verify-theorem", "-i", path("d1.json")},
        std::vector<std::string>{"no-gain", "-i", path("d1.json"), "--trials", "5"},
        std::vector<std::string>{"simulate-reduced", "-i", path("d1.json"),
                                 "--steps", "50"}}) {
    CHECK(run(cmd).out == run(cmd).out);
  }
}

TEST_CASE("compare reproduces cos t at second order") {
  write(path("two.json"), kTwoSite);
  const Result r = run({"compare", "-i", path("two.json"), "--t-max", "10",
                        "--steps", "2000"});
  REQUIRE(r.code == cli::kExitOk);
  const io::Json j = io::parse(r.out);
  CHECK(j["sup_error"].get<double>() <= 1e-3);
  CHECK(j["order"].get<double>() == doctest::Approx(2.0).epsilon(0.05));
  CHECK(r.err.find("order") != std::string::npos);

  const Result tight = run({"compare", "-i", path("two.json"), "--steps", "100",
                            "--max-discrepancy", "1e-12"});
  CHECK(tight.code == cli::kExitVerificationFailed);
  CHECK(tight.err.find("exceeds") != std::string::npos);
}

TEST_CASE("simulation and kernel csv output") {
  write(path("two.json"), kTwoSite);
  const Result full = run({"simulate-full", "-i", path("two.json"), "--steps", "4",
                           "--t-max", "1"});
  REQUIRE(full.code == cli::kExitOk);
  CHECK(full.out.rfind("time,re0,im0,re1,im1\n", 0) == 0);
  CHECK(std::count(full.out.begin(), full.out.end(), '\n') == 6);

  const Result red = run({"simulate-reduced", "-i", path("two.json"), "--steps",
                          "4", "-o", path("red.csv")});
  REQUIRE(red.code == cli::kExitOk);
  CHECK(slurp(path("red.csv")).rfind("time,re0,im0\n", 0) == 0);

  const Result k = run({"kernel", "-i", path("two.json"), "--side", "hidden",
                        "--steps", "2"});
  REQUIRE(k.code == cli::kExitOk);
  CHECK(k.out.rfind("t,a_0_0_re,a_0_0_im\n0,1,0\n", 0) == 0);
  CHECK(run({"kernel", "-i", path("two.json"), "--side", "left"}).code ==
        cli::kExitUsage);
  CHECK(run({"kernel", "-i", path("two.json"), "--steps", "1"}).code ==
        cli::kExitUsage);
}

TEST_CASE("no-gain report") {
  write(path("two.json"), kTwoSite);
  const Result r = run({"no-gain", "-i", path("two.json"), "--trials", "7",
                        "--seed", "5"});
  REQUIRE(r.code == cli::kExitOk);
  const io::Json j = io::parse(r.out);
  CHECK(j["values"].size() == 7);
  CHECK(j["passed"] == true);
  CHECK(j["tol"] == 1e-10);
}

TEST_CASE("verify-lattice") {
  const Result r = run({"verify-lattice", "--box", "5", "--cube", "3"});
  CHECK(r.code == cli::kExitOk);
  const io::Json j = io::parse(r.out);
  CHECK(j["rank_gamma"] == 26);
  CHECK(j["lattice"]["multiplicity_bound"] == 52);
  CHECK(run({"verify-lattice", "--box", "4", "--cube", "2", "--offset", "0", "1",
             "1"})
            .code == cli::kExitUsage);
}

TEST_CASE("tolerance precedence") {
  write(path("two.json"), kTwoSite);
  auto tol_of = [](const Result& r) { return io::parse(r.out)["tol"].get<double>(); };
  CHECK(tol_of(run({"decompose", "-i", path("two.json")})) == 1e-10);
  ::setenv(cli::kTolEnv, "1e-9", 1);
  CHECK(tol_of(run({"decompose", "-i", path("two.json")})) == 1e-9);
  CHECK(tol_of(run({"decompose", "-i", path("two.json"), "--tol", "1e-8"})) == 1e-8);
  ::setenv(cli::kTolEnv, "garbage", 1);
  CHECK(run({"decompose", "-i", path("two.json")}).code == cli::kExitUsage);
  ::unsetenv(cli::kTolEnv);
}
