#pragma once

// Brute-force reference implementations used as oracles by the tests. These
// deliberately avoid the library's in-place update and seed-replay paths:
// directions are materialized as full vectors and parameters are copied.

#include <cstdint>
#include <vector>

#include "addax/problem.hpp"

namespace addax::testing {

// Full direction vector replayed from a seed (flat, length problem dim).
std::vector<double> replay_direction(std::uint64_t seed, std::size_t dim);

// Two-point estimate with explicit theta +/- eps z copies.
double ref_spsa_scalar(const Problem& problem, const ParamVector& theta,
                       Batch batch, double epsilon, std::uint64_t seed);

// Flat analytic minibatch gradient assembled layer by layer on an unmutated
// theta.
std::vector<double> ref_gradient(const Problem& problem,
                                 const ParamVector& theta, Batch batch);

// theta - eta (alpha z g0 + (1-alpha) g1), composed out of place.
std::vector<double> ref_addax_update(const Problem& problem,
                                     const ParamVector& theta, Batch b0,
                                     Batch b1, double eta, double epsilon,
                                     double alpha, std::uint64_t seed);

}  // namespace addax::testing
