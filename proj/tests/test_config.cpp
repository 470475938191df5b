#include <stdexcept>

#include "addax/config.hpp"
#include "addax/errors.hpp"
#include "addax/io.hpp"
#include "doctest.h"

using namespace addax;

namespace {

const char* kMinimalConfig = R"(# minimal run
[problem]
kind = quadratic
dim = 2
sigma = 0.1
dataset_size = 8

[optimizer]
method = ip_sgd
eta = 0.1
k1 = 2
steps = 10
seed = 7

[run]
seeds = 7
record_every = 1
)";

}  // namespace

TEST_CASE("minimal config parses") {
  const RunConfig config = parse_config_text(kMinimalConfig, "test.ini");
  CHECK(config.problem.kind == "quadratic");
  CHECK(config.problem.dim == 2);
  CHECK(config.optimizer.method == Method::ip_sgd);
  CHECK(config.optimizer.steps == 10);
  CHECK(config.seeds.size() == 1);
}

TEST_CASE("unknown keys name the key and line") {
  const char* bad = "[problem]\nkind = quadratic\nwibble = 3\n";
  CHECK_THROWS_WITH_AS(parse_config_text(bad, "bad.ini"),
                       doctest::Contains("wibble"), config_error);
  try {
    parse_config_text(bad, "bad.ini");
  } catch (const config_error& err) {
    CHECK(std::string(err.what()).find("bad.ini:3") != std::string::npos);
  }
}

TEST_CASE("bad numbers are rejected with context") {
  const char* bad = "[optimizer]\neta = fast\n";
  CHECK_THROWS_WITH_AS(parse_config_text(bad, "bad.ini"),
                       doctest::Contains("eta"), config_error);
}

TEST_CASE("compare section with per-method overrides") {
  const char* text = R"(
[compare]
methods = addax_wa, mezo
threshold_frac = 0.02
mezo.eta = 1e-3
addax_wa.eta = 0.04
)";
  const RunConfig config = parse_config_text(text, "cmp.ini");
  REQUIRE(config.compare_methods.size() == 2);
  CHECK(config.compare_methods[0] == Method::addax_wa);
  CHECK(config.threshold_frac == doctest::Approx(0.02));
  REQUIRE(config.method_overrides.count("mezo") == 1);
  OptimizerConfig opt;
  opt.eta = 1.0;
  for (const auto& [key, value] : config.method_overrides.at("mezo")) {
    apply_optimizer_override(opt, key, value);
  }
  CHECK(opt.eta == doctest::Approx(1e-3));
}

TEST_CASE("run loop produces the documented row count") {
  const RunConfig config = parse_config_text(kMinimalConfig, "test.ini");
  auto problem = make_problem(config.problem);
  OptimizerConfig opt = config.optimizer;
  const RunResult result = run(*problem, opt);
  const std::string csv = trajectory_csv(result.records);
  std::size_t rows = 0;
  for (char c : csv) {
    rows += c == '\n';
  }
  CHECK(rows == 1 + 11);  // header + initial + ceil(10/1)
}

TEST_CASE("format_double round-trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456.789, 0.0}) {
    const std::string s = format_double(v);
    CHECK(std::stod(s) == v);
  }
}

TEST_CASE("theta dump round-trips") {
  const ParamVector theta({{1.5, -2.25}, {3.0, 0.1, 1e-17}});
  const auto path = std::filesystem::temp_directory_path() / "addax_theta.bin";
  write_theta_dump(path, theta);
  const auto back = read_theta_dump(path);
  const auto flat = theta.flatten();
  REQUIRE(back.size() == flat.size());
  for (std::size_t i = 0; i < flat.size(); ++i) {
    CHECK(back[i] == flat[i]);
  }
  std::filesystem::remove(path);
}

TEST_CASE("make_problem covers every kind") {
  ProblemSpec spec;
  spec.kind = "quadratic";
  spec.dim = 3;
  CHECK(make_problem(spec)->dim() == 3);
  spec.kind = "logistic";
  spec.dim = 4;
  CHECK(make_problem(spec)->dim() == 4);
  spec.kind = "mlp";
  spec.layers = {2, 3, 1};
  CHECK(make_problem(spec)->layer_count() == 2);
}
