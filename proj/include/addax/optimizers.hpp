#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "addax/mem_ledger.hpp"
#include "addax/partition.hpp"
#include "addax/problem.hpp"
#include "addax/spsa.hpp"

namespace addax {

enum class Method { sgd, ip_sgd, mezo, addax, addax_wa };

const char* method_name(Method m);
std::optional<Method> parse_method(const std::string& name);

struct OptimizerConfig {
  Method method = Method::ip_sgd;
  double eta = 0.1;        // learning rate, > 0
  double epsilon = 1e-3;   // SPSA perturbation scale, > 0
  double alpha = 0.0;      // mixing constant in [0, 1]
  std::size_t k0 = 0;      // zeroth-order batch size
  std::size_t k1 = 0;      // first-order batch size
  int l_t = 1;             // sequence-length threshold (addax)
  std::size_t steps = 1;   // T >= 1
  std::uint64_t seed = 1;
  std::size_t record_every = 0;  // 0 = max(1, steps / 200)

  void validate() const;
  std::size_t effective_record_every() const;
};

struct TrajectoryRecord {
  std::size_t step = 0;
  double loss = 0.0;
  double grad_norm_sq = 0.0;          // full-data, analytic; diagnostic only
  std::optional<double> err_sq;       // ||theta - theta_star||^2 when known
  std::int64_t peak_mem = 0;          // ledger peak so far, bytes
};

struct RunResult {
  std::vector<TrajectoryRecord> records;
  std::optional<std::string> error;  // set when a numeric failure aborted the run
  std::optional<ParamVector> final_theta;
};

// One in-place first-order step: for m = M..1 the layer gradient is
// computed, applied, and freed before the next layer's gradient exists. No
// normalization, no accumulation.
void ip_sgd_step(const Problem& problem, ParamVector& theta, Batch batch,
                 double eta, MemoryLedger& ledger);

// Full-gradient step normalized by its L2 norm; all layer gradients are
// live at once. Zero gradient is a no-op.
void sgd_step(const Problem& problem, ParamVector& theta, Batch batch,
              double eta, MemoryLedger& ledger);

// Zeroth-order step via seed replay: estimate, then regenerate z layer by
// layer and apply theta_m -= eta * g0 * z_m.
void mezo_step(const Problem& problem, ParamVector& theta, Batch batch,
               double eta, double epsilon, GaussStream& seed_stream,
               MemoryLedger& ledger);

// Mixed step on already-drawn batches: zeroth-order estimate on b0 first,
// then first-order layer updates M..1 scaled by eta*(1-alpha), then seed
// reset and zeroth-order updates 1..M scaled by eta*alpha. At alpha = 0 the
// zeroth-order branch is skipped entirely (and b0 ignored); at alpha = 1 the
// first-order branch is skipped (and b1 ignored), so the degenerate cases
// reproduce ip_sgd_step and mezo_step bit for bit.
void addax_step(const Problem& problem, ParamVector& theta, Batch b0,
                Batch b1, double eta, double epsilon, double alpha,
                GaussStream& seed_stream, MemoryLedger& ledger);

// Executes T steps of the configured method over the problem's dataset,
// recording diagnostics every record_every steps (plus the initial point and
// the final step). Reproducible from config.seed: batch sampling for B^0 and
// B^1, SPSA seeds, and the initial point each use their own sub-stream.
RunResult run(const Problem& problem, const OptimizerConfig& config);

// Variance-optimal mixing constant K^0 / (K^0 + d K^1).
double optimal_alpha(std::size_t k0, std::size_t k1, std::size_t d);

}  // namespace addax
