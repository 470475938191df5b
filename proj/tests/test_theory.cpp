#include <cmath>
#include <stdexcept>

#include "addax/theory.hpp"
#include "doctest.h"

using namespace addax;
using namespace addax::theory;

namespace {

std::unique_ptr<Problem> noisy_quadratic(std::size_t dim, double sigma,
                                         std::uint64_t seed = 1) {
  QuadraticSpec spec;
  spec.dim = dim;
  spec.mu = 1.0;
  spec.l_lip = 4.0;
  spec.sigma = sigma;
  spec.n_points = 64;
  spec.data_seed = seed;
  return make_quadratic(spec);
}

}  // namespace

TEST_CASE("bias check passes on the quadratic (exact two-point difference)") {
  auto problem = noisy_quadratic(6, 0.5);
  GaussStream init(2);
  const ParamVector theta = problem->initial_theta(init);
  const Report report = check_bias_bound(*problem, theta, 1e-3, 10000, 7);
  REQUIRE(report.pass.has_value());
  CHECK(*report.pass);
  CHECK(*report.get("bias_sq") <= 3.0 * *report.get("mc_err"));
}

TEST_CASE("bias check passes on logistic regression") {
  LogisticSpec spec;
  spec.dim = 10;
  spec.n_points = 64;
  spec.data_seed = 3;
  auto problem = make_logistic(spec);
  GaussStream init(4);
  const ParamVector theta = problem->initial_theta(init);
  const Report report = check_bias_bound(*problem, theta, 1e-3, 20000, 11);
  REQUIRE(report.pass.has_value());
  CHECK(*report.pass);
}

TEST_CASE("bias bound is the quoted formula") {
  LogisticSpec spec;
  spec.dim = 10;
  spec.data_seed = 3;
  auto problem = make_logistic(spec);
  GaussStream init(4);
  const ParamVector theta = problem->initial_theta(init);
  const double L = *problem->lipschitz_bound();
  const Report report = check_bias_bound(*problem, theta, 1e-1, 10000, 11);
  CHECK(*report.get("bound") ==
        doctest::Approx(1e-2 * L * L * 100.0 / 4.0).epsilon(1e-12));
}

TEST_CASE("bias check rejects tiny n_mc") {
  auto problem = noisy_quadratic(4, 0.1);
  GaussStream init(2);
  const ParamVector theta = problem->initial_theta(init);
  CHECK_THROWS_AS(check_bias_bound(*problem, theta, 1e-3, 100, 7),
                  std::invalid_argument);
}

TEST_CASE("variance check passes at the minimizer") {
  auto problem = noisy_quadratic(100, 0.5, 9);
  const ParamVector theta = *problem->optimum();
  const Report report = check_variance_bound(*problem, theta, 1e-4, 4, 20000, 5);
  REQUIRE(report.pass.has_value());
  CHECK(*report.pass);
  CHECK(*report.get("ratio") < 1.1);
}

TEST_CASE("variance halves when the batch doubles") {
  auto problem = noisy_quadratic(100, 0.5, 9);
  const ParamVector theta = *problem->optimum();
  const Report at4 = check_variance_bound(*problem, theta, 1e-4, 4, 20000, 5);
  const Report at8 = check_variance_bound(*problem, theta, 1e-4, 8, 20000, 6);
  const double ratio = *at8.get("variance") / *at4.get("variance");
  CHECK(ratio == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("variance bound scales linearly in dimension") {
  auto p10 = noisy_quadratic(10, 0.5, 9);
  auto p100 = noisy_quadratic(100, 0.5, 9);
  const Report r10 =
      check_variance_bound(*p10, *p10->optimum(), 1e-4, 4, 10000, 5);
  const Report r100 =
      check_variance_bound(*p100, *p100->optimum(), 1e-4, 4, 10000, 5);
  const double sigma10 = *r10.get("sigma_hat_sq");
  const double sigma100 = *r100.get("sigma_hat_sq");
  CHECK(*r10.get("bound") == doctest::Approx(10.0 / 4.0 * sigma10));
  CHECK(*r100.get("bound") == doctest::Approx(100.0 / 4.0 * sigma100));
}

TEST_CASE("noiseless variance check reports without judging") {
  auto problem = noisy_quadratic(10, 0.0);
  GaussStream init(2);
  const ParamVector theta = problem->initial_theta(init);
  const Report report = check_variance_bound(*problem, theta, 1e-4,
                                             problem->dataset().size(), 10000, 5);
  CHECK_FALSE(report.pass.has_value());
  CHECK(report.note.find("report only") != std::string::npos);
}

TEST_CASE("suggested step sizes respect the caps") {
  TheoryParams params;
  params.lipschitz_L = 10.0;
  params.dim_d = 20;
  params.sigma_sq = 0.0;

  const auto nc = suggest_hyperparams(params, 1000, 4, 4, 0.0,
                                      Regime::nonconvex);
  CHECK(nc.eta == doctest::Approx(0.05));  // (2-0)/(4*10)

  params.mu = 1.0;
  const auto sc = suggest_hyperparams(params, 1000, 4, 4, 0.0,
                                      Regime::strongly_convex);
  CHECK(sc.eta == doctest::Approx(0.05));  // 1/(2*10)
}

TEST_CASE("suggested nonconvex eta halves when T quadruples") {
  TheoryParams params;
  params.lipschitz_L = 10.0;
  params.dim_d = 20;
  params.sigma_sq = 1.0;
  params.loss_gap = 5.0;
  const auto at_t = suggest_hyperparams(params, 4000, 4, 4, 0.1,
                                        Regime::nonconvex);
  const auto at_4t = suggest_hyperparams(params, 16000, 4, 4, 0.1,
                                         Regime::nonconvex);
  CHECK(at_4t.eta == doctest::Approx(at_t.eta / 2.0));
}

TEST_CASE("strongly convex corollary values, frozen from a hand computation") {
  // alpha = 8/208, C = (1-a)^2/4 + a^2 50/8, eta = (2/T) ln(T mu^2 R^2/(4 C s^2))
  TheoryParams params;
  params.lipschitz_L = 10.0;
  params.mu = 1.0;
  params.dim_d = 50;
  params.sigma_sq = 0.01;
  params.dist0_sq = 4.0;
  const double alpha = optimal_alpha(8, 4, 50);
  const auto sug =
      suggest_hyperparams(params, 1000, 8, 4, alpha, Regime::strongly_convex);
  CHECK(sug.eta == doctest::Approx(0.0258768810784868).epsilon(1e-9));
  CHECK(sug.epsilon == doctest::Approx(2.2349560677002034e-05).epsilon(1e-9));
}

TEST_CASE("nonconvex corollary values, frozen from a hand computation") {
  TheoryParams params;
  params.lipschitz_L = 10.0;
  params.dim_d = 20;
  params.sigma_sq = 1.0;
  params.loss_gap = 5.0;
  const auto sug =
      suggest_hyperparams(params, 4000, 4, 4, 0.1, Regime::nonconvex);
  CHECK(sug.eta == doctest::Approx(0.03146583877637763).epsilon(1e-9));
  CHECK(sug.epsilon == doctest::Approx(0.004259055432355839).epsilon(1e-9));
}

TEST_CASE("partitioned corollary values, frozen from a hand computation") {
  TheoryParams params;
  params.lipschitz_L = 4.0;
  params.dim_d = 10;
  params.sigma_sq = 0.04;
  params.loss_gap = 3.0;
  const auto sug =
      suggest_hyperparams(params, 2000, 4, 4, 0.25, Regime::partitioned);
  CHECK(sug.eta == doctest::Approx(0.125).epsilon(1e-9));  // cap 2a/L binds
  CHECK(sug.epsilon ==
        doctest::Approx(1.583333333333333e-07).epsilon(1e-9));
}

TEST_CASE("suggestion errors name the missing constant") {
  TheoryParams params;
  params.dim_d = 20;
  params.sigma_sq = 1.0;
  CHECK_THROWS_WITH_AS(
      suggest_hyperparams(params, 1000, 4, 4, 0.1, Regime::nonconvex),
      doctest::Contains("lipschitz_L"), std::invalid_argument);
  params.lipschitz_L = 10.0;
  CHECK_THROWS_WITH_AS(
      suggest_hyperparams(params, 1000, 4, 4, 0.1, Regime::nonconvex),
      doctest::Contains("loss_gap"), std::invalid_argument);
}

TEST_CASE("partitioned suggestion uses the 2 alpha / L cap") {
  TheoryParams params;
  params.lipschitz_L = 10.0;
  params.dim_d = 20;
  params.sigma_sq = 0.0;
  const auto sug = suggest_hyperparams(params, 1000, 4, 4, 0.25,
                                       Regime::partitioned);
  CHECK(sug.eta == doctest::Approx(0.05));  // 2*0.25/10
  CHECK_THROWS_AS(
      suggest_hyperparams(params, 1000, 4, 4, 0.0, Regime::partitioned),
      std::invalid_argument);
}

TEST_CASE("rate checks validate their sweeps") {
  RateScConfig config;
  config.n_seeds = 3;
  CHECK_THROWS_AS(check_rate_strongly_convex(config), std::invalid_argument);
  config.n_seeds = 20;
  config.t_sweep = {100, 200};
  CHECK_THROWS_AS(check_rate_strongly_convex(config), std::invalid_argument);

  RateNcConfig nc;
  nc.n_seeds = 1;
  CHECK_THROWS_AS(check_rate_nonconvex(nc), std::invalid_argument);
}

TEST_CASE("nonconvex check refuses step sizes above the cap") {
  RateNcConfig config;
  config.n_seeds = 20;
  config.t_sweep = {50, 100};
  config.lipschitz = 10.0;
  config.alpha = 0.5;
  config.eta = 1.0;  // cap is (2-0.5)/40 = 0.0375
  CHECK_THROWS_WITH_AS(check_rate_nonconvex(config),
                       doctest::Contains("cap"), std::invalid_argument);
}

TEST_CASE("nonconvex trend on a tiny sweep") {
  RateNcConfig config;
  config.widths = {3, 4, 1};
  config.n_points = 32;
  config.t_sweep = {60, 240};
  config.n_seeds = 20;
  config.base_seed = 5;
  const Report report = check_rate_nonconvex(config);
  REQUIRE(report.pass.has_value());
  CHECK(*report.pass);
}

TEST_CASE("strongly convex rate matches the log T over T law") {
  // T values small enough that eta hits its stability cap sit on a flat
  // noise floor; the sweep starts where the ln(T)/T schedule is active.
  RateScConfig config;
  config.dim = 20;
  config.n_points = 128;
  config.t_sweep = {500, 1000, 2000, 4000};
  config.n_seeds = 20;
  config.base_seed = 3;
  const Report report = check_rate_strongly_convex(config);
  REQUIRE(report.pass.has_value());
  CHECK(*report.pass);
  CHECK(*report.get("slope") <= -0.8);
}

TEST_CASE("noiseless rate check flags the geometric regime") {
  RateScConfig config;
  config.dim = 10;
  config.sigma = 0.0;
  config.n_points = 16;
  config.t_sweep = {100, 200, 400, 800};
  config.n_seeds = 20;
  config.base_seed = 9;
  const Report report = check_rate_strongly_convex(config);
  CHECK(report.note.find("noiseless") != std::string::npos);
  CHECK(*report.get("slope") < -1.3);  // geometric decay, far below the law
}

TEST_CASE("doubling k1 halves the variance floor at alpha zero") {
  // Steady-state err_sq under a fixed eta is proportional to sigma^2 / K^1.
  QuadraticSpec spec;
  spec.dim = 10;
  spec.mu = 1.0;
  spec.l_lip = 2.0;
  spec.sigma = 1.0;
  spec.n_points = 128;
  spec.data_seed = 7;
  auto problem = make_quadratic(spec);

  auto floor_of = [&](std::size_t k1, std::uint64_t seed) {
    OptimizerConfig config;
    config.method = Method::addax_wa;
    config.alpha = 0.0;
    config.eta = 0.05;
    config.k0 = 1;
    config.k1 = k1;
    config.steps = 4000;
    config.record_every = 50;
    config.seed = seed;
    const RunResult result = run(*problem, config);
    // average the tail records to estimate the stationary level
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t i = result.records.size() / 2; i < result.records.size();
         ++i) {
      acc += *result.records[i].err_sq;
      ++count;
    }
    return acc / static_cast<double>(count);
  };

  double floor_k2 = 0.0, floor_k4 = 0.0;
  for (std::uint64_t s = 0; s < 12; ++s) {
    floor_k2 += floor_of(2, 100 + s);
    floor_k4 += floor_of(4, 200 + s);
  }
  CHECK(floor_k4 / floor_k2 == doctest::Approx(0.5).epsilon(0.25));
}

TEST_CASE("optimal alpha beats alpha one at equal per-step sample cost") {
  // 12 zeroth-order samples vs 8 zeroth- plus 4 first-order samples.
  MlpSpec spec;
  spec.widths = {3, 4, 1};
  spec.n_points = 32;
  spec.data_seed = 21;
  auto problem = make_mlp(spec);
  const double alpha_opt = optimal_alpha(8, 4, problem->dim());

  auto mean_min_gns = [&](double alpha, std::size_t k0, std::size_t k1) {
    double acc = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {  // paired seeds
      OptimizerConfig config;
      config.method = Method::addax_wa;
      config.alpha = alpha;
      config.eta = 0.02;
      config.epsilon = 1e-3;
      config.k0 = k0;
      config.k1 = k1;
      config.steps = 400;
      config.seed = seed;
      const RunResult result = run(*problem, config);
      double best = result.records.front().grad_norm_sq;
      for (const auto& rec : result.records) {
        best = std::min(best, rec.grad_norm_sq);
      }
      acc += best;
    }
    return acc / 10.0;
  };

  const double with_optimal = mean_min_gns(alpha_opt, 8, 4);
  const double zo_only = mean_min_gns(1.0, 12, 4);
  CHECK(with_optimal <= zo_only);
}

TEST_CASE("partitioned epsilon condition is flagged post hoc") {
  PartitionedConfig config;
  config.n_mc = 2000;
  config.epsilon = 25.0;  // sqrt(eps) * ||grad|| > 1 at any sane probe
  const Report report = check_partitioned(config);
  CHECK(report.note.find("violated") != std::string::npos);
}

TEST_CASE("partitioned direction aligns with the combined gradient") {
  PartitionedConfig config;
  config.n_mc = 20000;
  const Report report = check_partitioned(config);
  REQUIRE(report.pass.has_value());
  CHECK(*report.pass);
  CHECK(*report.get("cosine_combined") >= 0.95);
}

TEST_CASE("duplicate populations reduce to the no-assignment identity") {
  PartitionedConfig config;
  config.duplicate_populations = true;
  config.n_mc = 20000;
  config.cosine_threshold = 0.99;
  const Report report = check_partitioned(config);
  REQUIRE(report.pass.has_value());
  CHECK(*report.pass);
}

TEST_CASE("alpha zero aligns with the short-population gradient") {
  PartitionedConfig config;
  config.alpha = 0.0;
  config.n_mc = 5000;
  config.cosine_threshold = 0.99;
  config.reference = PartitionedConfig::Reference::l1;
  const Report report = check_partitioned(config);
  REQUIRE(report.pass.has_value());
  CHECK(*report.pass);
  CHECK(*report.get("cosine_l1") >= 0.99);
}

TEST_CASE("smoothed loss identity on the double well") {
  const Report report = check_smoothed_identity(0.5, 0.1, 1e-3, 100000, 17);
  REQUIRE(report.pass.has_value());
  CHECK(*report.pass);
  // Gaussian moments: smoothed gradient = 4 t^3 + 12 t eps^2 - 4 t.
  const double analytic = 4.0 * 0.125 + 12.0 * 0.5 * 0.01 - 4.0 * 0.5;
  CHECK(*report.get("analytic_smoothed_grad") == doctest::Approx(analytic));
  CHECK(*report.get("spsa_mean") ==
        doctest::Approx(analytic).epsilon(0.02));
}

TEST_CASE("effective rank diagnostic reports concentrated variance") {
  EffRankConfig config;
  config.dim = 32;
  config.top_rank = 4;
  config.n_mc = 10000;
  const Report report = eff_rank_diagnostic(config);
  CHECK_FALSE(report.pass.has_value());
  // Most of the estimate variance should sit inside the top eigenspace
  // because g0 is dominated by the stiff directions.
  CHECK(*report.get("var_in_top") > *report.get("var_outside_top") / 32.0);
  CHECK(*report.get("eff_rank") < 5.0);
}

TEST_CASE("lipschitz estimate brackets the quadratic's true constant") {
  auto problem = noisy_quadratic(12, 0.3, 13);  // l_lip = 4 in the helper
  GaussStream init(2);
  const ParamVector center = problem->initial_theta(init);
  const double estimate = estimate_lipschitz(*problem, center, 1.0, 64, 7);
  CHECK(estimate <= 4.0 * (1.0 + 1e-9));  // never above the true constant
  CHECK(estimate >= 1.0);                 // and well above mu for log-spaced spectra
}

TEST_CASE("per-sample gradient variance matches the generator sigma") {
  auto problem = noisy_quadratic(20, 0.5, 11);
  GaussStream init(3);
  const ParamVector theta = problem->initial_theta(init);
  const double sigma_hat = per_sample_gradient_variance(*problem, theta);
  // generator draws noise with total variance sigma^2 = 0.25
  CHECK(sigma_hat == doctest::Approx(0.25).epsilon(0.35));
}
