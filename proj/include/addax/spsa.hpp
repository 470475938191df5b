#pragma once

#include <cstdint>

#include "addax/mem_ledger.hpp"
#include "addax/problem.hpp"

namespace addax {

// Two-point directional derivative estimate plus the seed that regenerates
// its direction. Storing the seed instead of z keeps the extra state O(1).
struct ZoEstimate {
  double g0 = 0.0;
  std::uint64_t seed = 0;
  double epsilon = 0.0;
};

// theta_m += scale * z_m for each layer, with z replayed from seed. Only one
// layer's perturbation vector is ever live; the ledger, when given, sees the
// allocation and the matching free.
void perturb_parameters(ParamVector& theta, double scale, std::uint64_t seed,
                        MemoryLedger* ledger = nullptr);

// SPSA estimate (loss(theta + eps z) - loss(theta - eps z)) / (2 eps) with a
// fresh seed drawn from seed_stream. The three perturbations are net zero,
// so theta returns to its entry value up to rounding (<= 1e-12 relative per
// coordinate in 64-bit).
ZoEstimate zeroth_grad(const Problem& problem, ParamVector& theta, Batch batch,
                       double epsilon, GaussStream& seed_stream,
                       MemoryLedger* ledger = nullptr);

}  // namespace addax
