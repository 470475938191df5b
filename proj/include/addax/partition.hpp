#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "addax/data.hpp"

namespace addax {

// Index split of a dataset by sequence-length threshold. When the threshold
// reaches the dataset maximum both sides are the whole dataset (the
// no-assignment regime); otherwise d0 holds the long sequences and d1 the
// short ones.
struct Partition {
  std::vector<std::size_t> d0;  // seq_len > l_t (or all, when l_t >= l_max)
  std::vector<std::size_t> d1;  // seq_len <= l_t (or all)
  int l_t = 0;
};

Partition partition(const Dataset& dataset, int l_t);

// k points drawn uniformly with replacement from the given side.
std::vector<DataPoint> sample_batch(const Dataset& dataset,
                                    std::span<const std::size_t> side,
                                    std::size_t k, GaussStream& stream);

struct LengthStats {
  std::vector<double> bin_upper_edges;
  std::vector<std::size_t> counts;
  int min = 0;
  int max = 0;
  double mean = 0.0;
  int p95 = 0;
};

LengthStats length_stats(const Dataset& dataset, std::size_t bins);

}  // namespace addax
