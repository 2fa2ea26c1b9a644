#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "entroflow/config.hpp"
#include "entroflow/error.hpp"

using namespace entroflow;
namespace fs = std::filesystem;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::InvalidInput;
}

bool mentions(const std::vector<std::string>& msgs, const std::string& needle) {
  for (const auto& m : msgs)
    if (m.find(needle) != std::string::npos) return true;
  return false;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

const char* kSmallLambda = R"(
kind = "lambda"
seed = 3
[metric]
profile = "flat"
extent = 6
cells = 120
[schedule]
radii = [2, 4]
alphas = [1.5, 1.25]
)";

}  // namespace

TEST_CASE("config parsing") {
  const auto c = Config::parse(R"(# comment
kind = "flow"
top = 3   # trailing comment
[metric]
profile = plummer
mass = 1.5
[noncollapse]
radii = [0.5, 1, 2e0]
lambda = true
)");
  CHECK(c.string("kind") == "flow");
  CHECK(c.number("top") == 3.0);
  CHECK(c.integer("top", 0) == 3);
  CHECK(c.string("metric.profile") == "plummer");
  CHECK(c.number("metric.mass") == 1.5);
  CHECK(c.array("noncollapse.radii") == std::vector<double>{0.5, 1.0, 2.0});
  CHECK(c.flag("noncollapse.lambda", false));
  CHECK(c.number("metric.core", 7.0) == 7.0);
  CHECK(c.array("absent").empty());
  CHECK(kind_of([&] { c.number("metric.profile"); }) == ErrorKind::Usage);
  CHECK(kind_of([&] { c.string("missing"); }) == ErrorKind::Usage);
}

TEST_CASE("parse errors carry the line number") {
  for (const char* bad : {"kind = \"flow\"\nnonsense line\n", "a = [1, x]\n", "[metric\n",
                          "a = \"open\n", "a = 1\na = 2\n"}) {
    CAPTURE(bad);
    try {
      Config::parse(bad);
      FAIL("accepted");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Usage);
      CHECK(std::string(e.what()).find("line") != std::string::npos);
    }
  }
  CHECK(kind_of([] { Config::load("/nonexistent/x.cfg"); }) == ErrorKind::Usage);
}

TEST_CASE("validation") {
  CHECK(validate_config(Config::parse(kSmallLambda)).ok());

  auto c = Config::parse(kSmallLambda);
  c.set("metric.colour", std::string("red"));
  CHECK(mentions(validate_config(c).errors, "unknown key metric.colour"));

  c = Config::parse(kSmallLambda);
  c.set("flow.T", 1.0);
  CHECK(mentions(validate_config(c).errors, "does not apply"));

  c = Config::parse(kSmallLambda);
  c.set("kind", std::string("teleport"));
  CHECK(mentions(validate_config(c).errors, "unknown kind"));

  c = Config::parse(kSmallLambda);
  c.set("schedule.radii", std::vector<double>{2.0, 40.0});
  CHECK(mentions(validate_config(c).errors, "exceeds the grid arclength"));

  c = Config::parse(kSmallLambda);
  c.set("minimizer.tolerance", -1.0);
  CHECK_FALSE(validate_config(c).ok());

  c = Config::parse(kSmallLambda);
  c.set("metric.extent", std::string("big"));
  CHECK(mentions(validate_config(c).errors, "wrong type"));

  const auto flow = Config::parse(R"(
kind = "flow"
[metric]
profile = "flat"
extent = 10
cells = 100
[flow]
T = 1
dt = 0.01
)");
  const auto rep = validate_config(flow);
  CHECK(rep.ok());
  CHECK(mentions(rep.warnings, "stability bound"));
  CHECK(rep.estimated_steps == 100);
  CHECK(rep.estimated_work == 101 * 100);
}

TEST_CASE("metrics from config") {
  auto c = Config::parse(kSmallLambda);
  const auto g = metric_from_config(c);
  CHECK(g.size() == 121);
  c.set("metric.scale", 4.0);
  CHECK(metric_from_config(c).total_arclength() == doctest::Approx(12.0));
  c.set("metric.profile", std::string("warp-drive"));
  CHECK(kind_of([&] { metric_from_config(c); }) == ErrorKind::Usage);
}

TEST_CASE("sha256") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("runs are staged, hashed and deterministic") {
  const auto root = fs::temp_directory_path() / "entroflow_run_test";
  fs::remove_all(root);
  const auto cfg = Config::parse(kSmallLambda);
  const auto s1 = run_experiment(cfg, {root / "a", std::nullopt, std::nullopt});
  const auto s2 = run_experiment(cfg, {root / "b", std::nullopt, std::nullopt});
  CHECK_FALSE(s1.headline.empty());
  CHECK(fs::exists(root / "a" / "manifest.txt"));
  CHECK_FALSE(fs::exists(root / "a.partial"));
  const auto man = slurp(root / "a" / "manifest.txt");
  CHECK(man.find(sha256_hex(cfg.text())) != std::string::npos);
  for (const auto& f : s1.files) {
    CAPTURE(f.string());
    if (f.filename() == "manifest.txt") continue;
    CHECK(slurp(root / "a" / f) == slurp(root / "b" / f));
    CHECK(man.find(sha256_file(root / "a" / f)) != std::string::npos);
  }

  // a bad config never touches the output directory
  auto bad = cfg;
  bad.set("metric.cells", 4.0);
  CHECK(kind_of([&] { run_experiment(bad, {root / "c", std::nullopt, std::nullopt}); }) ==
        ErrorKind::Usage);
  CHECK_FALSE(fs::exists(root / "c"));
  CHECK_FALSE(fs::exists(root / "c.partial"));
  fs::remove_all(root);
}
