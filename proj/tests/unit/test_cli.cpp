#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "mwave/io.hpp"
#include "mwave_cli/commands.hpp"
#include "mwave_cli/config.hpp"
#include "support.hpp"

using namespace mwave;
using namespace mwave::cli;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kSource = MWAVE_SOURCE_DIR;

ExperimentConfig small(const std::string& out) {
  ExperimentConfig c = ExperimentConfig::defaults();
  c.set("grid.n", "41");
  c.set("output_dir", json(out).dump());
  return c;
}

int run(const std::string& cmd, const ExperimentConfig& cfg, std::string* text = nullptr) {
  std::ostringstream out, err;
  const int code = run_command(cmd, cfg, out, err);
  if (text) *text = out.str() + err.str();
  return code;
}

int shell(const std::string& args) {
  const int status = std::system((std::string(MWAVE_TOOL_PATH) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config defaults, overrides and validation") {
  auto c = ExperimentConfig::defaults();
  CHECK(c.n() == 150);
  CHECK(c.T() == 3.0);
  CHECK(c.cfl() == 0.4);
  CHECK(c.seed() == 1);
  CHECK_FALSE(c.allow_short_time());
  c.set("time.T", "2.5");
  CHECK(c.T() == 2.5);
  c.set("speed.type", "radial_bump");
  CHECK(c.get<std::string>("speed.type") == "radial_bump");
  c.set("sweep.N", "[1, 2, 3]");
  CHECK(c.get<std::vector<int>>("sweep.N").size() == 3);

  CHECK_THROWS_AS(c.set("grid.n", "3"), ConfigError);
  CHECK_THROWS_AS(c.set("time.cfl", "0.6"), ConfigError);
  CHECK_THROWS_AS(c.set("source.type", "laser"), ConfigError);
  CHECK_THROWS_AS(c.get<int>("grid.nope"), ConfigError);
  CHECK_THROWS_AS(c.get<int>("speed.type"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json(json::array()), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_file("/nonexistent/config.json"), ConfigError);

  const auto f = ExperimentConfig::from_file((kSource / "configs/forward_demo.json").string());
  CHECK(f.n() == 41);
  CHECK(f.get<double>("speed.amplitude") == 0.15);
  CHECK(f.get<int>("reconstruct.max_iter") == 15);
}

TEST_CASE("config hash tracks every field") {
  const auto base = ExperimentConfig::defaults();
  CHECK(base.hash() == ExperimentConfig::defaults().hash());
  CHECK(base.hash_hex().size() == 16);
  for (const auto& [key, value] : std::vector<std::pair<std::string, std::string>>{
           {"grid.n", "151"}, {"time.T", "3.1"}, {"seed", "2"}, {"sweep.s1", "1"}, {"svd.m", "19"},
           {"output_dir", "\"elsewhere\""}, {"perturbation.eps", "[0.1, 0.01]"}}) {
    auto c = base;
    c.set(key, value);
    CHECK_MESSAGE(c.hash() != base.hash(), key);
  }
}

TEST_CASE("setup enforces the observation time for reconstruction") {
  auto c = ExperimentConfig::defaults();
  c.set("grid.n", "31");
  c.set("time.T", "1.0");
  CHECK_THROWS_AS(make_setup(c, true), ConfigError);
  CHECK_NOTHROW(make_setup(c, false));
  c.set("allow_short_time", "true");
  CHECK_NOTHROW(make_setup(c, true));
  c.set("grid.pad", "3");
  CHECK_THROWS_AS(make_setup(c, false), ConfigError);
  c.set("grid.pad", "\"auto\"");
  const Setup s = make_setup(c, false);
  CHECK(s.grid->satisfies_padding(1.0, 1.0));
  CHECK(s.tg.dt <= 0.4 * s.grid->h());
}

TEST_CASE("forward command") {
  const auto d0 = test::scratch_dir("cli_zero");
  auto cz = small(d0.string());
  cz.set("time.T", "1.0");
  cz.set("source.type", "zero");
  REQUIRE(run("forward", cz) == kPass);
  CHECK(io::read_trace((d0 / "trace").string()).max_abs() == 0.0);
  const auto m = json::parse(test::read_bytes(d0 / "manifest.json"));
  CHECK(m.at("config_hash") == cz.hash_hex());
  CHECK(m.at("command") == "forward");

  const auto d1 = test::scratch_dir("cli_det_a"), d2 = test::scratch_dir("cli_det_b");
  auto c1 = small(d1.string()), c2 = small(d2.string());
  c1.set("time.T", "1.0");
  c2.set("time.T", "1.0");
  REQUIRE(run("forward", c1) == kPass);
  REQUIRE(run("forward", c2) == kPass);
  for (const char* f : {"trace.f64", "trace.json", "f1.f64", "f2.f64"})
    CHECK(test::read_bytes(d1 / f) == test::read_bytes(d2 / f));
}

TEST_CASE("demo config reproduces the stored regression trace") {
  const auto d = test::scratch_dir("cli_demo");
  auto c = ExperimentConfig::from_file((kSource / "configs/forward_demo.json").string());
  c.set("output_dir", json(d.string()).dump());
  REQUIRE(run("forward", c) == kPass);
  const BoundaryTrace got = io::read_trace((d / "trace").string());
  const BoundaryTrace ref = io::read_trace((kSource / "tests/data/forward_demo_trace").string());
  REQUIRE(got.steps() == ref.steps());
  REQUIRE(got.nodes() == ref.nodes());
  double err = 0;
  for (std::size_t q = 0; q < got.values().size(); ++q)
    err = std::max(err, std::abs(got.values()[q] - ref.values()[q]));
  CHECK(err <= 1e-12);
}

TEST_CASE("identities command matches the stored regression values") {
  const auto d = test::scratch_dir("cli_identities");
  auto c = ExperimentConfig::from_file((kSource / "configs/identities_demo.json").string());
  c.set("output_dir", json(d.string()).dump());
  std::string text;
  run("identities", c, &text);
  INFO(text);
  const json got = json::parse(test::read_bytes(d / "identities.json"));
  const json ref = json::parse(test::read_bytes(kSource / "tests/data/identities_demo.json"));
  REQUIRE(got.at("identities").size() == ref.at("identities").size());
  for (std::size_t k = 0; k < ref.at("identities").size(); ++k) {
    const double a = got["identities"][k]["residual"].get<double>();
    const double b = ref["identities"][k]["residual"].get<double>();
    CHECK(got["identities"][k]["identity_id"] == ref["identities"][k]["identity_id"]);
    CHECK(a == doctest::Approx(b).epsilon(1e-9));
  }
  for (const char* key : {"B1_L1_minus_id", "B2_L1", "B1_L2", "B2_L2_minus_id"})
    CHECK(got["left_inverse"][key].get<double>() == doctest::Approx(ref["left_inverse"][key].get<double>()).epsilon(1e-9));
}

TEST_CASE("reconstruct command") {
  const auto d = test::scratch_dir("cli_rec");
  auto c = small(d.string());
  c.set("grid.n", "61");
  c.set("source.type", "bumps");
  c.set("source.f1", R"([{"x": 0.45, "y": 0.5, "w": 0.2, "a": 1.0}])");
  std::string text;
  CHECK(run("reconstruct", c, &text) == kPass);
  CHECK(text.find("PASS reconstruction error") != std::string::npos);
  CHECK(fs::exists(d / "neumann.csv"));

  auto z = small(test::scratch_dir("cli_rec_zero").string());
  z.set("source.type", "zero");
  CHECK(run("reconstruct", z) == kPass);
  CHECK(io::read_field((fs::path(z.output_dir()) / "f1").string()).is_zero());

  auto shrt = small(test::scratch_dir("cli_rec_short").string());
  shrt.set("time.T", "0.1");
  CHECK(run("reconstruct", shrt) == kConfigError);
  shrt.set("allow_short_time", "true");
  CHECK(run("reconstruct", shrt) != kPass);
}

TEST_CASE("linearize and sweep commands") {
  const auto d = test::scratch_dir("cli_lin");
  auto c = small(d.string());
  c.set("grid.n", "61");
  c.set("time.T", "1.0");
  std::string text;
  CHECK(run("linearize", c, &text) == kPass);
  CHECK(text.find("Taylor remainder order") != std::string::npos);
  CHECK(fs::exists(d / "kernel_pair_delta_f.f64"));

  const auto ds = test::scratch_dir("cli_sweep");
  auto s = small(ds.string());
  s.set("grid.n", "61");
  s.set("time.T", "1.0");
  s.set("sweep.N", "[1]");
  s.set("sweep.kinds", R"(["kernel"])");
  run("sweep", s, &text);
  REQUIRE(fs::exists(ds / "decay_0.csv"));
  std::istringstream csv(test::read_bytes(ds / "decay_0.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "lambda,input_norm,output_norm,ratio");
  double prev = 0;
  int rows = 0;
  while (std::getline(csv, line)) {
    const double lam = std::stod(line.substr(0, line.find(',')));
    CHECK(lam > prev);
    prev = lam;
    ++rows;
  }
  CHECK(rows == 8);
  CHECK(fs::exists(ds / "manifest.json"));
}

TEST_CASE("error mapping and command-line surface") {
  auto c = small(test::scratch_dir("cli_err").string());
  CHECK(run("bogus", c) == kConfigError);
  c.set("speed.type", "file");
  c.set("speed.path", "\"/nonexistent/c2\"");
  CHECK(run("forward", c) == kConfigError);

  const auto d = test::scratch_dir("cli_shell");
  CHECK(shell("forward --output " + d.string() + " --set grid.n=31 --set time.T=0.5 --set source.type=zero") == 0);
  CHECK(fs::exists(d / "trace.f64"));
  CHECK(shell("forward --set grid.n=2 --output " + d.string()) == 2);
  CHECK(shell("forward --set nonsense --output " + d.string()) == 2);
  CHECK(shell("forward --config /nonexistent.json") == 2);
  CHECK(shell("explode") == 2);
  CHECK(shell("forward --threads 0") == 2);
  CHECK(shell("reconstruct --set grid.n=31 --set time.T=0.5 --output " + d.string()) == 2);
}
