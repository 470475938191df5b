#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "addax/optimizers.hpp"
#include "addax/problem.hpp"

namespace addax {
namespace theory {

// Problem constants the convergence statements are phrased in. loss_gap and
// dist0_sq feed the step-size corollaries and may be absent when unknown.
struct TheoryParams {
  double lipschitz_L = 0.0;  // smoothness constant
  double sigma_sq = 0.0;     // per-sample gradient variance bound
  double mu = 0.0;           // strong convexity constant
  double eff_rank_r = 0.0;   // tr(H)/L
  std::size_t dim_d = 0;
  std::optional<double> loss_gap;  // L(theta_0) - L_star
  std::optional<double> dist0_sq;  // ||theta_0 - theta_star||^2
};

// Auditable check result: the bound, the empirical value, and the Monte
// Carlo error always travel together.
struct Report {
  std::string name;
  std::optional<bool> pass;  // absent for report-only diagnostics
  std::vector<std::pair<std::string, double>> values;
  std::string note;

  void add(const std::string& key, double value) {
    values.emplace_back(key, value);
  }
  std::optional<double> get(const std::string& key) const;
  std::string to_text() const;  // key=value lines
};

// Brute-force per-sample gradient variance at theta: the sigma^2 estimate
// the variance bound is checked against.
double per_sample_gradient_variance(const Problem& problem,
                                    const ParamVector& theta);

// Crude empirical smoothness estimate: max gradient-difference ratio over
// random probe pairs around center. A lower bound on the true constant.
double estimate_lipschitz(const Problem& problem, const ParamVector& center,
                          double radius, std::size_t n_probes,
                          std::uint64_t seed);

// ||E[g0 z] - grad L||^2 against eps^2 L^2 d^2 / 4 plus Monte Carlo slack.
// The expectation runs over z only, with the full dataset as the batch.
// n_mc >= 1e4.
Report check_bias_bound(const Problem& problem, const ParamVector& theta,
                        double epsilon, std::size_t n_mc, std::uint64_t seed,
                        std::optional<double> lipschitz = std::nullopt);

// Total variance of the SPSA estimate over batch and z against (d/K) times
// the brute-force per-sample gradient variance. With Gaussian directions the
// exact constant is (d+2)/d of the bound, so passing configurations probe
// near-stationary points at moderate d.
Report check_variance_bound(const Problem& problem, const ParamVector& theta,
                            double epsilon, std::size_t k, std::size_t n_mc,
                            std::uint64_t seed);

struct RateScConfig {
  std::size_t dim = 50;
  double mu = 1.0;
  double l_lip = 10.0;
  double sigma = 0.1;
  double init_radius = 2.0;
  std::size_t n_points = 256;
  std::size_t k0 = 8;
  std::size_t k1 = 4;
  std::optional<double> alpha;  // default: optimal_alpha(k0, k1, dim)
  std::vector<std::size_t> t_sweep = {500, 1000, 2000, 4000};
  std::size_t n_seeds = 20;
  std::uint64_t base_seed = 1;
};

// Fits log E[err_sq(T)] against log(T / ln T) on the quadratic with the
// corollary step sizes; passes when the slope is at most -0.8.
Report check_rate_strongly_convex(const RateScConfig& config);

struct RateNcConfig {
  std::vector<std::size_t> widths = {4, 8, 1};
  double noise = 0.05;
  std::size_t n_points = 64;
  std::size_t k0 = 8;
  std::size_t k1 = 4;
  std::optional<double> alpha;       // default: optimal_alpha(k0, k1, d)
  std::optional<double> eta;         // default: corollary value; refused above the cap
  std::optional<double> lipschitz;   // default: estimated
  double epsilon = 1e-3;
  std::vector<std::size_t> t_sweep = {250, 1000, 4000};
  std::size_t n_seeds = 20;
  std::uint64_t base_seed = 1;
};

// Averaged min grad_norm_sq must not increase along the T sweep (one-sided,
// one standard error).
Report check_rate_nonconvex(const RateNcConfig& config);

enum class Regime { nonconvex, strongly_convex, partitioned };

struct HyperSuggestion {
  double eta = 0.0;
  double epsilon = 0.0;
};

// Corollary step sizes with their stability caps: eta <= (2-alpha)/(4L) in
// the nonconvex regime, 1/(2L) when strongly convex, 2 alpha / L for
// partitioned datasets. Missing constants raise invalid_argument naming the
// constant.
HyperSuggestion suggest_hyperparams(const TheoryParams& params, std::size_t T,
                                    std::size_t k0, std::size_t k1,
                                    double alpha, Regime regime);

struct PartitionedConfig {
  std::size_t dim = 10;
  double mu = 1.0;
  double l_lip = 4.0;
  std::size_t n0 = 24;           // long-sequence sub-population
  std::size_t n1 = 72;           // short-sequence sub-population
  double center_gap = 2.0;       // distance between sub-population minima
  double sigma = 0.2;
  int l_short = 8;
  int l_long = 64;
  int l_t = 16;
  std::size_t k0 = 4;
  std::size_t k1 = 4;
  double epsilon = 1e-3;
  std::optional<double> alpha;   // default: n0 / (n0 + n1)
  std::size_t n_mc = 100000;
  std::uint64_t seed = 1;
  double cosine_threshold = 0.95;
  bool duplicate_populations = false;  // D^0 = D^1 degenerate variant
  enum class Reference { combined, l0, l1 };
  Reference reference = Reference::combined;
};

// Monte Carlo expected update direction against the gradient of the
// combined loss (N0 L0 + N1 L1) / (N0 + N1); reports cosine similarity and
// flags steps where sqrt(eps) * ||grad L|| exceeds 1.
Report check_partitioned(const PartitionedConfig& config);

// On the 1-D double well: Monte Carlo mean of g0 z against a common-random-
// numbers finite difference of the Gaussian-smoothed loss.
Report check_smoothed_identity(double theta, double epsilon, double h,
                               std::size_t n_mc, std::uint64_t seed);

struct EffRankConfig {
  std::size_t dim = 64;
  std::size_t top_rank = 4;
  double l_lip = 10.0;
  double tail = 1e-3;  // eigenvalue of the remaining directions, times l_lip
  std::size_t n_mc = 20000;
  std::uint64_t seed = 1;
};

// Report-only diagnostic: variance mass of the SPSA direction inside vs
// outside the top-r eigenspace of a low-effective-rank quadratic.
Report eff_rank_diagnostic(const EffRankConfig& config);

}  // namespace theory
}  // namespace addax
