#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "clusterlab/errors.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace clusterlab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "clusterlab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("clusterlab_test_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("usage errors exit 64") {
  const auto r = invoke({"frobnicate"});
  CHECK(r.code == cli::kExitUsage);
  CHECK(r.err.find("Subcommands") != std::string::npos);
  CHECK(invoke({}).code == cli::kExitUsage);
  CHECK(invoke({"spectrum", "--bogus"}).code == cli::kExitUsage);
  CHECK(invoke({"spectrum", "--n", "six"}).code == cli::kExitUsage);
  CHECK(invoke({"--help"}).code == cli::kExitOk);
}

TEST_CASE("installed binary reports exit codes") {
  const char* bin = std::getenv("CLUSTERLAB_BIN");
  if (!bin) return;
  const int status = std::system((std::string(bin) + " nonsense >/dev/null 2>&1").c_str());
  CHECK(WEXITSTATUS(status) == 64);
}

TEST_CASE("couplings subcommand") {
  auto r = invoke({"couplings", "--j", "0.1", "--u", "1.0"});
  REQUIRE(r.code == 0);
  auto j = json::parse(r.out);
  CHECK(j["couplings"]["lambda3"] == 0.0);
  CHECK(j["couplings"]["lambda4"] == 0.0);

  r = invoke({"couplings", "--j", "0", "--u", "1.0", "--ubb", "1.3"});
  REQUIRE(r.code == 0);
  j = json::parse(r.out);
  for (const char* k : {"lambda1", "lambda2", "lambda3", "lambda4", "b_z_comp"}) CHECK(j["couplings"][k] == 0.0);

  r = invoke({"couplings", "--j", "10", "--u", "100"});
  REQUIRE(r.code == 0);
  j = json::parse(r.out);
  CHECK(j["perturbative"] == true);
  CHECK(j["couplings"]["lambda1"].get<double>() == doctest::Approx(-1.6));

  CHECK(invoke({"couplings", "--j", "0.1", "--u", "-1"}).code == cli::kExitError);
}

TEST_CASE("validate subcommand") {
  auto r = invoke({"validate", "--j", "0.1", "--u", "1.0"});
  CHECK(r.code == cli::kExitOk);
  CHECK(json::parse(r.out)["max_rel_dev"].get<double>() <= 0.08);
  r = invoke({"validate", "--j", "0.3", "--u", "1.0"});
  CHECK(r.code == cli::kExitValidation);
  CHECK(r.err.find("warning") != std::string::npos);
}

TEST_CASE("spectrum subcommand") {
  const auto r = invoke({"spectrum", "--model", "cluster", "--n", "6", "--b", "0"});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["gap"].get<double>() == doctest::Approx(2.0));
  CHECK(j["ground"].get<double>() == doctest::Approx(-6.0));
  CHECK(invoke({"spectrum", "--model", "ising"}).code == cli::kExitUsage);
  CHECK(invoke({"spectrum", "--n", "2"}).code == cli::kExitError);
}

TEST_CASE("corr and survey subcommands") {
  auto r = invoke({"corr", "--b", "0.5", "--l-max", "6", "--n", "8", "--ed"});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("L,analytic,ed\n2,", 0) == 0);
  r = invoke({"survey", "--b", "0", "--n", "9", "--window", "5"});
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out.substr(0))["fraction"].get<double>() == 1.0 / 128);
  CHECK(invoke({"survey", "--n", "9", "--window", "4"}).code == cli::kExitError);
}

TEST_CASE("locent subcommand") {
  auto r = invoke({"locent", "--b", "0", "--n", "8", "--p", "1", "--q", "5", "--scheme", "cluster"});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["value"].get<double>() == doctest::Approx(1.0));
  CHECK(j["B"] == 0.0);
  CHECK(invoke({"locent", "--n", "8", "--p", "0", "--q", "3", "--scheme", "lower-bound"}).code == cli::kExitError);
}

TEST_CASE("grid parsing") {
  const auto g = cli::parse_grid("0:2:0.1");
  REQUIRE(g.size() == 21);
  CHECK(g[3] == 0.3);
  CHECK(g.back() == 2.0);
  CHECK(cli::parse_grid("0.5") == std::vector<double>{0.5});
  CHECK_THROWS_AS(cli::parse_grid("0:1"), DomainError);
  CHECK_THROWS_AS(cli::parse_grid("1:0:0.1"), DomainError);
  CHECK_THROWS_AS(cli::parse_grid("0:1:0"), DomainError);
  CHECK_THROWS_AS(cli::parse_grid("a:1:0.1"), DomainError);
}

TEST_CASE("run directory layout and reproducibility") {
  const auto d1 = scratch("a"), d2 = scratch("b");
  const std::vector<std::string> base{"figure2", "--b-grid", "0.5:1.5:0.5", "--n", "8", "--anneal-steps", "4",
                                      "--anneal-proposals", "4", "--l-max", "20"};
  auto args1 = base, args2 = base;
  args1.insert(args1.end(), {"--out", d1.string(), "--threads", "2"});
  args2.insert(args2.end(), {"--out", d2.string(), "--threads", "1"});
  REQUIRE(invoke(args1).code == 0);
  REQUIRE(invoke(args2).code == 0);
  for (const char* f : {"config.json", "correlation_length.csv", "entanglement_length.csv", "locent_sweep.csv"}) {
    CHECK(fs::exists(d1 / f));
    CHECK(slurp(d1 / f) == slurp(d2 / f));
  }
  const auto manifest = json::parse(slurp(d1 / "manifest.json"));
  CHECK(manifest.contains("timings"));
  CHECK(manifest["seed"] == 1);

  const auto corr = slurp(d1 / "correlation_length.csv");
  CHECK(corr.rfind("B,xi,model,diverges\n", 0) == 0);
  CHECK(corr.find("\n1,inf,power_law,1\n") != std::string::npos);
  CHECK(slurp(d1 / "locent_sweep.csv").rfind("B,L,E_loc,xi_flag\n", 0) == 0);
  CHECK(slurp(d1 / "entanglement_length.csv").rfind("B,xi_E,model,diverges\n", 0) == 0);
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST_CASE("per-point failures do not stop a sweep") {
  cli::Figure2Config c;
  c.b_grid = {0.5};
  c.n = 5;
  CHECK_THROWS_AS(cli::figure2(c), DomainError);
  c.n = 6;
  c.anneal_steps = 1;
  c.anneal_proposals = 1;
  c.l_max = 20;
  const auto pts = cli::figure2(c);
  REQUIRE(pts.size() == 1);
  CHECK(pts[0].correlation.has_value());
  // Two usable distances on a 6-ring are too few for an entanglement fit.
  CHECK_FALSE(pts[0].error.empty());
  CHECK_FALSE(pts[0].entanglement.has_value());
}
