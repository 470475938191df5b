#include "addax/partition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "addax/errors.hpp"

namespace addax {

Partition partition(const Dataset& dataset, int l_t) {
  if (l_t < 1) {
    throw std::invalid_argument("partition: l_t must be >= 1");
  }
  Partition part;
  part.l_t = l_t;
  if (l_t >= dataset.l_max()) {
    part.d0.resize(dataset.size());
    std::iota(part.d0.begin(), part.d0.end(), std::size_t{0});
    part.d1 = part.d0;
    return part;
  }
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (dataset[i].seq_len > l_t) {
      part.d0.push_back(i);
    } else {
      part.d1.push_back(i);
    }
  }
  if (part.d0.empty()) {
    throw config_error("partition: d0 (seq_len > l_t) is empty for l_t=" +
                       std::to_string(l_t));
  }
  if (part.d1.empty()) {
    throw config_error("partition: d1 (seq_len <= l_t) is empty for l_t=" +
                       std::to_string(l_t));
  }
  return part;
}

std::vector<DataPoint> sample_batch(const Dataset& dataset,
                                    std::span<const std::size_t> side,
                                    std::size_t k, GaussStream& stream) {
  if (k == 0) {
    throw std::invalid_argument("sample_batch: k must be >= 1");
  }
  if (side.empty()) {
    throw config_error("sample_batch: side is empty");
  }
  std::vector<DataPoint> batch;
  batch.reserve(k);
  for (std::size_t j = 0; j < k; ++j) {
    batch.push_back(dataset[side[stream.next_index(side.size())]]);
  }
  return batch;
}

LengthStats length_stats(const Dataset& dataset, std::size_t bins) {
  if (bins == 0) {
    throw std::invalid_argument("length_stats: bins must be >= 1");
  }
  LengthStats stats;
  std::vector<int> lengths;
  lengths.reserve(dataset.size());
  double sum = 0.0;
  for (const auto& pt : dataset.points()) {
    lengths.push_back(pt.seq_len);
    sum += pt.seq_len;
  }
  std::sort(lengths.begin(), lengths.end());
  stats.min = lengths.front();
  stats.max = lengths.back();
  stats.mean = sum / static_cast<double>(lengths.size());
  // Nearest-rank 95th percentile.
  const std::size_t rank = static_cast<std::size_t>(
      std::ceil(0.95 * static_cast<double>(lengths.size())));
  stats.p95 = lengths[std::max<std::size_t>(rank, 1) - 1];

  stats.counts.assign(bins, 0);
  stats.bin_upper_edges.resize(bins);
  const double lo = stats.min;
  const double width =
      (static_cast<double>(stats.max) - lo) / static_cast<double>(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    stats.bin_upper_edges[b] = lo + width * static_cast<double>(b + 1);
  }
  for (int len : lengths) {
    std::size_t b = 0;
    if (width > 0.0) {
      b = static_cast<std::size_t>((static_cast<double>(len) - lo) / width);
      b = std::min(b, bins - 1);  // max lands in the last (closed) bin
    }
    ++stats.counts[b];
  }
  return stats;
}

}  // namespace addax
