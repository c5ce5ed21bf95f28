#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <unistd.h>

#include "fwdegen/cli.hpp"
#include "fwdegen/config.hpp"
#include "fwdegen/errors.hpp"
#include "fwdegen/table_io.hpp"

using namespace fwdegen;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fwdegen_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  return p;
}

int invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "fwdegen");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli::main_entry(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) { return io::read_text(p); }

}  // namespace

TEST_CASE("key-value documents") {
  const auto kv = config::parse("# header\nsigma1 = 0.25  # trailing\n\n theta=0.5\n");
  CHECK(kv.at("sigma1") == "0.25");
  CHECK(kv.at("theta") == "0.5");
  CHECK_THROWS_AS(config::parse("sigma1 0.2\n"), ConfigError);
  CHECK_THROWS_AS(config::parse("a = 1\na = 2\n"), ConfigError);
  CHECK_THROWS_AS(config::to_double("x", "1.0abc"), ConfigError);
  const Params p = config::params_from(kv);
  CHECK(p.sigma1 == 0.25);
  CHECK(p.lambda1 == 1.0);
}

TEST_CASE("manifest parses back to the same spec") {
  config::KeyValues kv{{"command", "invariant"}, {"sigma1", "0.1"}, {"seed", "77"}, {"delta", "0.05"}};
  const auto spec = cli::resolve(kv, "unused");
  CHECK(spec.t_final == 5000.0);
  const auto text = io::record_text(cli::manifest(spec));
  const auto again = cli::resolve(config::parse(text), "unused");
  CHECK(io::record_text(cli::manifest(again)) == text);
  CHECK(text.find("unused") == std::string::npos);
  CHECK_THROWS_AS(cli::resolve({{"command", "costs"}, {"sigmaone", "1"}}, "x"), ConfigError);
  CHECK_THROWS_AS(cli::resolve({{"command", "costs"}, {"method", "guess"}}, "x"), ConfigError);
  CHECK_THROWS_AS(cli::resolve({{"sigma1", "0"}}, "x"), ConfigError);
}

TEST_CASE("classify writes the verdict") {
  const auto out = scratch("classify");
  CHECK(invoke({"classify", "--sigma1", "0.3", "-o", out.string()}) == 0);
  const auto verdict = slurp(out / "verdict.txt");
  CHECK(verdict.find("delta_(-1,0)") != std::string::npos);
  CHECK(verdict.find("argmin=K1;") != std::string::npos);
  CHECK(fs::exists(out / "manifest.txt"));
  CHECK(slurp(out / "cost_matrix.csv").rfind(",K1,K2,K3\n", 0) == 0);
}

TEST_CASE("validate failure exits with code 2 and lists the clauses") {
  const auto out = scratch("validate");
  CHECK(invoke({"validate", "--sigma1", "1.0", "--epsilon", "0.9", "-o", out.string()}) == 2);
  const auto err = slurp(out / "error.txt");
  CHECK(err.find("exit_code = 2") != std::string::npos);
  CHECK(err.find("sigma1_range") != std::string::npos);
  CHECK(err.find("epsilon_range") != std::string::npos);
  const auto table = slurp(out / "validation.csv");
  CHECK(table.find("sigma1_range") != std::string::npos);

  const auto ok = scratch("validate_ok");
  CHECK(invoke({"validate", "-o", ok.string()}) == 0);
  CHECK(slurp(ok / "validation.csv") == "clause,message\n");
  CHECK_FALSE(fs::exists(ok / "error.txt"));
}

TEST_CASE("costs with both methods adds the disagreement column") {
  const auto out = scratch("costs");
  CHECK(invoke({"costs", "--method", "both", "--sigma1", "0.5", "-o", out.string()}) == 0);
  const auto table = slurp(out / "cost_matrix.csv");
  CHECK(table.rfind(",K1,K2,K3,disagreement\n", 0) == 0);
  CHECK(fs::exists(out / "cost_matrix_pathopt.csv"));
  CHECK(fs::exists(out / "well_costs.csv"));
}

TEST_CASE("reruns from the manifest are byte-identical") {
  const std::vector<std::vector<std::string>> runs{
      {"simulate", "--sigma1", "0.2", "--epsilon", "0.3", "--t-final", "2", "--seed", "11"},
      {"invariant", "--t-final", "20", "--n-paths", "5", "--epsilon", "0.4", "--init", "fixed", "--x0", "-0.5"},
      {"control", "--control", "constant", "--t-final", "2"},
      {"action", "--w0", "0.9", "--nodes", "201"},
      {"lyapunov", "--grid", "101"}};
  int k = 0;
  for (const auto& args : runs) {
    const auto a = scratch("run_a" + std::to_string(k));
    const auto b = scratch("run_b" + std::to_string(k));
    ++k;
    auto first = args;
    first.insert(first.end(), {"-o", a.string()});
    REQUIRE(invoke(first) == 0);
    REQUIRE(invoke({"--manifest", (a / "manifest.txt").string(), "-o", b.string()}) == 0);
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(a)) {
      ++files;
      CHECK(slurp(e.path()) == slurp(b / e.path().filename()));
    }
    CHECK(files >= 2);
  }
}

TEST_CASE("error exit codes") {
  const auto out = scratch("errors");
  CHECK(invoke({"costs", "--set", "bogus=1", "-o", out.string()}) == 2);
  CHECK(invoke({"simulate", "--dt", "0.5", "-o", out.string()}) == 2);
  CHECK(invoke({"action", "--sigma1", "0.2", "--w0", "0.5", "-o", out.string()}) == 2);
  // a numerical failure: blow-up from a huge initial state
  CHECK(invoke({"simulate", "--x0", "1e60", "--dt", "0.01", "-o", out.string()}) == 3);
  CHECK(slurp(out / "error.txt").find("kind = numerical") != std::string::npos);
  // the output path is a regular file
  const auto file = scratch("plainfile");
  fs::create_directories(file.parent_path());
  io::write_text(file, "x");
  CHECK(invoke({"validate", "-o", (file / "sub").string()}) == 4);
  CHECK(invoke({"--manifest", (out / "missing.txt").string(), "-o", out.string()}) == 4);
}

TEST_CASE("output directory from the environment") {
  const auto out = scratch("env");
  ::setenv("FWDEGEN_OUTPUT", out.string().c_str(), 1);
  CHECK(invoke({"validate"}) == 0);
  ::unsetenv("FWDEGEN_OUTPUT");
  CHECK(fs::exists(out / "manifest.txt"));
}
