#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "addax/optimizers.hpp"
#include "addax/problem.hpp"

namespace addax {

struct ProblemSpec {
  std::string kind = "quadratic";  // quadratic | logistic | mlp
  std::size_t dim = 2;
  std::vector<std::size_t> layers;  // mlp widths, or quadratic layer split
  double mu = 1.0;
  double l_lip = 1.0;
  double sigma = 0.0;
  double ridge = 0.0;
  double noise = 0.05;
  std::size_t dataset_size = 64;
  double len_p = 0.05;
  int len_cap = 512;
  double init_radius = 2.0;
  double init_scale = 0.5;
  std::uint64_t data_seed = 1;
};

std::unique_ptr<Problem> make_problem(const ProblemSpec& spec);

struct RunConfig {
  ProblemSpec problem;
  OptimizerConfig optimizer;
  std::vector<std::uint64_t> seeds;  // replicate seeds; empty = {optimizer.seed}
  std::string out_dir = ".";

  // compare section
  std::vector<Method> compare_methods;
  double threshold_frac = 0.01;
  // raw per-method key/value overrides, applied on top of [optimizer]
  std::map<std::string, std::vector<std::pair<std::string, std::string>>>
      method_overrides;

  std::size_t stats_bins = 20;

  std::vector<std::uint64_t> replicate_seeds() const {
    return seeds.empty() ? std::vector<std::uint64_t>{optimizer.seed} : seeds;
  }
};

// Plain-text sectioned key = value format; '#' starts a comment. Unknown
// keys are parse errors naming the key and line.
RunConfig parse_config_text(const std::string& text,
                            const std::string& origin);
RunConfig parse_config_file(const std::string& path);

// Applies one "key = value" override to an optimizer config (used by the
// per-method entries of the [compare] section).
void apply_optimizer_override(OptimizerConfig& config, const std::string& key,
                              const std::string& value);

}  // namespace addax
