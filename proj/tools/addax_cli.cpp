// Command-line harness: deterministic optimizer runs, method comparisons,
// validator suites, length statistics, and memory-model predictions.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "addax/config.hpp"
#include "addax/errors.hpp"
#include "addax/io.hpp"
#include "addax/theory.hpp"

namespace fs = std::filesystem;
using namespace addax;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::size_t jobs = 1;
  std::optional<std::uint64_t> seed_override;
};

RunConfig load_config(const CommonFlags& flags) {
  RunConfig config = parse_config_file(flags.config_path);
  if (!flags.out_dir.empty()) {
    config.out_dir = flags.out_dir;
  }
  if (flags.seed_override) {
    config.seeds = {*flags.seed_override};
    config.optimizer.seed = *flags.seed_override;
  }
  fs::create_directories(config.out_dir);
  return config;
}

// Runs tasks indexed 0..n-1 on up to `jobs` threads; results land in
// caller-provided slots so aggregation order is fixed.
void parallel_for(std::size_t n, std::size_t jobs,
                  const std::function<void(std::size_t)>& task) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      task(i);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  const std::size_t n_workers = std::min(jobs, n);
  workers.reserve(n_workers);
  for (std::size_t w = 0; w < n_workers; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
        task(i);
      }
    });
  }
  for (auto& worker : workers) {
    worker.join();
  }
}

int cmd_run(const CommonFlags& flags) {
  const RunConfig config = load_config(flags);
  const auto problem = make_problem(config.problem);
  const auto seeds = config.replicate_seeds();

  std::vector<RunResult> results(seeds.size());
  parallel_for(seeds.size(), flags.jobs, [&](std::size_t i) {
    OptimizerConfig opt = config.optimizer;
    opt.seed = seeds[i];
    results[i] = run(*problem, opt);
  });

  bool numeric_failure = false;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const std::string stem = std::string(method_name(config.optimizer.method)) +
                             "_seed" + std::to_string(seeds[i]);
    write_file_atomic(fs::path(config.out_dir) / (stem + ".csv"),
                      trajectory_csv(results[i].records));
    if (results[i].final_theta) {
      write_theta_dump(fs::path(config.out_dir) / (stem + ".theta.bin"),
                       *results[i].final_theta);
    }
    if (results[i].error) {
      std::cerr << "numeric failure (" << stem << "): " << *results[i].error
                << "\n";
      numeric_failure = true;
    }
  }
  return numeric_failure ? kExitNumeric : kExitOk;
}

int cmd_compare(const CommonFlags& flags) {
  const RunConfig config = load_config(flags);
  if (config.compare_methods.size() < 2) {
    throw config_error("compare: need at least 2 methods");
  }
  const auto problem = make_problem(config.problem);
  const auto seeds = config.replicate_seeds();
  const double loss_star = problem->optimum_loss();

  struct Row {
    Method method;
    std::uint64_t seed = 0;
    long long steps_to_threshold = -1;
    std::optional<double> final_err_sq;
    std::int64_t peak_mem = 0;
    double wall_ms = 0.0;
    bool failed = false;
  };
  const std::size_t n_methods = config.compare_methods.size();
  std::vector<Row> rows(n_methods * seeds.size());

  parallel_for(rows.size(), flags.jobs, [&](std::size_t i) {
    const Method method = config.compare_methods[i / seeds.size()];
    const std::uint64_t seed = seeds[i % seeds.size()];
    OptimizerConfig opt = config.optimizer;
    opt.method = method;
    opt.seed = seed;
    const auto overrides = config.method_overrides.find(method_name(method));
    if (overrides != config.method_overrides.end()) {
      for (const auto& [key, value] : overrides->second) {
        apply_optimizer_override(opt, key, value);
      }
    }
    const auto start = std::chrono::steady_clock::now();
    const RunResult result = run(*problem, opt);
    const auto stop = std::chrono::steady_clock::now();

    Row row;
    row.method = method;
    row.seed = seed;
    row.wall_ms =
        std::chrono::duration<double, std::milli>(stop - start).count();
    row.failed = result.error.has_value();
    if (!result.records.empty()) {
      const double initial_gap = result.records.front().loss - loss_star;
      const double threshold = config.threshold_frac * initial_gap;
      for (const auto& rec : result.records) {
        if (rec.loss - loss_star <= threshold) {
          row.steps_to_threshold = static_cast<long long>(rec.step);
          break;
        }
      }
      row.final_err_sq = result.records.back().err_sq;
      row.peak_mem = result.records.back().peak_mem;
    }
    rows[i] = row;
  });

  std::ostringstream csv;
  csv << "method,seed,steps_to_threshold,final_err_sq,peak_mem_bytes,wall_ms\n";
  for (const auto& row : rows) {
    csv << method_name(row.method) << ',' << row.seed << ','
        << row.steps_to_threshold << ',';
    if (row.final_err_sq) {
      csv << format_double(*row.final_err_sq);
    }
    csv << ',' << row.peak_mem << ',' << format_double(row.wall_ms) << '\n';
  }
  // Median summary per method; runs that never reach the threshold count as
  // unreachable and push the median toward the sentinel.
  for (std::size_t m = 0; m < n_methods; ++m) {
    std::vector<double> steps;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      const auto& row = rows[m * seeds.size() + s];
      steps.push_back(row.steps_to_threshold < 0
                          ? std::numeric_limits<double>::infinity()
                          : static_cast<double>(row.steps_to_threshold));
    }
    std::sort(steps.begin(), steps.end());
    const double median = steps[steps.size() / 2];
    csv << method_name(config.compare_methods[m]) << ",median,"
        << (std::isinf(median) ? -1LL : static_cast<long long>(median))
        << ",,,\n";
  }
  write_file_atomic(fs::path(config.out_dir) / "compare.csv", csv.str());

  for (const auto& row : rows) {
    if (row.failed) {
      std::cerr << "numeric failure: " << method_name(row.method) << " seed "
                << row.seed << "\n";
      return kExitNumeric;
    }
  }
  return kExitOk;
}

void write_reports(const fs::path& out_dir, const std::string& suite,
                   const std::vector<theory::Report>& reports) {
  std::ostringstream text;
  std::ostringstream csv;
  csv << "check,key,value\n";
  for (const auto& report : reports) {
    text << report.to_text() << '\n';
    csv << report.name << ",pass,"
        << (report.pass ? (*report.pass ? "1" : "0") : "report_only") << '\n';
    for (const auto& [key, value] : report.values) {
      csv << report.name << ',' << key << ',' << format_double(value) << '\n';
    }
  }
  write_file_atomic(out_dir / ("validate_" + suite + ".txt"), text.str());
  write_file_atomic(out_dir / ("validate_" + suite + ".csv"), csv.str());
}

std::vector<theory::Report> run_suite(const std::string& suite,
                                      std::uint64_t base_seed) {
  using namespace theory;
  std::vector<Report> reports;
  if (suite == "bias") {
    QuadraticSpec qspec;
    qspec.dim = 6;
    qspec.mu = 1.0;
    qspec.l_lip = 4.0;
    qspec.sigma = 0.5;
    qspec.n_points = 64;
    qspec.data_seed = base_seed;
    const auto quadratic = make_quadratic(qspec);
    GaussStream qinit(derive_seed(base_seed, 201));
    Report q = check_bias_bound(*quadratic, quadratic->initial_theta(qinit),
                                1e-3, 100000, base_seed);
    q.name = "bias_bound_quadratic";
    reports.push_back(std::move(q));

    LogisticSpec lspec;
    lspec.dim = 10;
    lspec.n_points = 64;
    lspec.data_seed = base_seed;
    const auto logistic = make_logistic(lspec);
    GaussStream linit(derive_seed(base_seed, 202));
    Report l = check_bias_bound(*logistic, logistic->initial_theta(linit),
                                1e-3, 100000, base_seed);
    l.name = "bias_bound_logistic";
    reports.push_back(std::move(l));
  } else if (suite == "variance") {
    QuadraticSpec spec;
    spec.dim = 100;
    spec.mu = 1.0;
    spec.l_lip = 4.0;
    spec.sigma = 0.5;
    spec.n_points = 64;
    spec.data_seed = base_seed;
    const auto problem = make_quadratic(spec);
    const ParamVector star = *problem->optimum();
    Report k4 = check_variance_bound(*problem, star, 1e-4, 4, 100000,
                                     derive_seed(base_seed, 203));
    k4.name = "variance_bound_k4";
    Report k8 = check_variance_bound(*problem, star, 1e-4, 8, 100000,
                                     derive_seed(base_seed, 204));
    k8.name = "variance_bound_k8";
    Report halving;
    halving.name = "variance_halving";
    const double ratio = *k8.get("variance") / *k4.get("variance");
    halving.add("ratio_k8_over_k4", ratio);
    halving.pass = std::abs(ratio - 0.5) <= 0.1 * 0.5 + 0.05;
    reports.push_back(std::move(k4));
    reports.push_back(std::move(k8));
    reports.push_back(std::move(halving));
  } else if (suite == "rate_sc") {
    RateScConfig config;
    config.base_seed = base_seed;
    reports.push_back(check_rate_strongly_convex(config));
  } else if (suite == "rate_nc") {
    RateNcConfig config;
    config.base_seed = base_seed;
    reports.push_back(check_rate_nonconvex(config));
  } else if (suite == "partitioned") {
    PartitionedConfig config;
    config.seed = base_seed;
    reports.push_back(check_partitioned(config));
    reports.push_back(eff_rank_diagnostic(EffRankConfig{}));
  } else {
    throw CLI::ValidationError("validate", "unknown suite: " + suite);
  }
  return reports;
}

int cmd_validate(const std::string& suite, const CommonFlags& flags) {
  const std::uint64_t base_seed = flags.seed_override.value_or(1);
  const fs::path out_dir = flags.out_dir.empty() ? "." : flags.out_dir;
  fs::create_directories(out_dir);

  std::vector<std::string> suites;
  if (suite == "all") {
    suites = {"bias", "variance", "rate_sc", "rate_nc", "partitioned"};
  } else {
    suites = {suite};
  }
  bool all_pass = true;
  for (const auto& s : suites) {
    const auto reports = run_suite(s, base_seed);
    write_reports(out_dir, s, reports);
    for (const auto& report : reports) {
      const bool ok = !report.pass || *report.pass;
      std::cout << (ok ? "PASS " : "FAIL ") << s << "/" << report.name << "\n";
      all_pass = all_pass && ok;
    }
  }
  return all_pass ? kExitOk : kExitCheckFailed;
}

int cmd_stats(const CommonFlags& flags) {
  const RunConfig config = load_config(flags);
  const auto problem = make_problem(config.problem);
  const auto stats = length_stats(problem->dataset(), config.stats_bins);
  write_file_atomic(fs::path(config.out_dir) / "length_stats.csv",
                    length_stats_csv(stats));
  std::cout << "min=" << stats.min << " max=" << stats.max
            << " mean=" << format_double(stats.mean) << " p95=" << stats.p95
            << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixed-order optimizer benchmark harness"};
  app.require_subcommand(1);

  CommonFlags flags;

  auto add_common = [&](CLI::App* cmd, bool need_config) {
    if (need_config) {
      cmd->add_option("--config", flags.config_path, "config file path")
          ->required();
    }
    cmd->add_option("--jobs", flags.jobs, "max concurrent replicate runs");
    cmd->add_option("--out", flags.out_dir, "output directory override");
    cmd->add_option("--seed-override", flags.seed_override,
                    "replace the configured seed list");
  };

  auto* run_cmd = app.add_subcommand("run", "execute one optimizer config");
  add_common(run_cmd, true);

  auto* compare_cmd =
      app.add_subcommand("compare", "run several methods and summarize");
  add_common(compare_cmd, true);

  auto* validate_cmd =
      app.add_subcommand("validate", "run theory validation suites");
  std::string suite;
  validate_cmd
      ->add_option("suite", suite,
                   "bias|variance|rate_sc|rate_nc|partitioned|all")
      ->required();
  add_common(validate_cmd, false);

  auto* stats_cmd =
      app.add_subcommand("stats", "sequence-length histogram CSV");
  add_common(stats_cmd, true);

  auto* mem_cmd =
      app.add_subcommand("mem-predict", "parametric peak-memory model");
  std::string mem_method;
  std::int64_t mem_batch = 1, mem_seq = 1;
  std::int64_t mem_k0 = 1, mem_k1 = 1, mem_lt = 1, mem_lmax = 1;
  LmMemModel model;
  mem_cmd->add_option("--method", mem_method, "mezo|ip_sgd|sgd|addax")
      ->required();
  mem_cmd->add_option("--batch", mem_batch, "batch size");
  mem_cmd->add_option("--seq", mem_seq, "sequence length");
  mem_cmd->add_option("--k0", mem_k0, "addax zeroth-order batch");
  mem_cmd->add_option("--k1", mem_k1, "addax first-order batch");
  mem_cmd->add_option("--lt", mem_lt, "addax length threshold");
  mem_cmd->add_option("--lmax", mem_lmax, "dataset max length");
  mem_cmd->add_option("--weight-bytes", model.weight_bytes, "model weights");
  mem_cmd->add_option("--act-coeff", model.act_coeff,
                      "activation bytes per sample-token");
  mem_cmd->add_option("--bwd-mult", model.bwd_mult,
                      "backward activation multiplier");
  mem_cmd->add_option("--grad-layer-bytes", model.grad_layer_max_bytes,
                      "largest single-layer gradient");
  mem_cmd->add_option("--full-grad-bytes", model.full_grad_bytes,
                      "full gradient buffer");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*run_cmd) {
      return cmd_run(flags);
    }
    if (*compare_cmd) {
      return cmd_compare(flags);
    }
    if (*validate_cmd) {
      if (suite != "all" && suite != "bias" && suite != "variance" &&
          suite != "rate_sc" && suite != "rate_nc" && suite != "partitioned") {
        std::cerr << "unknown suite: " << suite << "\n";
        return kExitUsage;
      }
      return cmd_validate(suite, flags);
    }
    if (*stats_cmd) {
      return cmd_stats(flags);
    }
    if (*mem_cmd) {
      std::int64_t bytes = 0;
      if (mem_method == "addax" || mem_method == "addax_wa") {
        bytes = predict_peak_addax(model, mem_k1, mem_lt, mem_k0, mem_lmax);
      } else if (mem_method == "mezo") {
        bytes = predict_peak(model, MemMethod::mezo, mem_batch, mem_seq);
      } else if (mem_method == "ip_sgd") {
        bytes = predict_peak(model, MemMethod::ip_sgd, mem_batch, mem_seq);
      } else if (mem_method == "sgd") {
        bytes = predict_peak(model, MemMethod::sgd, mem_batch, mem_seq);
      } else {
        std::cerr << "unknown method: " << mem_method << "\n";
        return kExitUsage;
      }
      std::cout << bytes << "\n";
      return kExitOk;
    }
  } catch (const config_error& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return kExitUsage;
  } catch (const numeric_error& err) {
    std::cerr << "numeric error: " << err.what() << "\n";
    return kExitNumeric;
  } catch (const std::invalid_argument& err) {
    std::cerr << "invalid argument: " << err.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitNumeric;
  }
  return kExitUsage;
}
