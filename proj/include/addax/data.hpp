#pragma once

#include <cstdint>
#include <vector>

#include "addax/rng.hpp"

namespace addax {

struct DataPoint {
  std::vector<double> features;
  double label = 0.0;
  int seq_len = 1;  // token-count proxy; >= 1
};

// Owning, immutable-after-construction sample collection.
class Dataset {
 public:
  // points must be nonempty; every seq_len >= 1 and features finite.
  explicit Dataset(std::vector<DataPoint> points);

  const std::vector<DataPoint>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  const DataPoint& operator[](std::size_t i) const { return points_[i]; }
  int l_max() const { return l_max_; }

 private:
  std::vector<DataPoint> points_;
  int l_max_;
};

// Right-skewed integer length model: 1 + Geometric(p), capped. Mimics the
// long-tail shape of token-length histograms while staying fully seeded.
struct LengthDistribution {
  double p = 0.05;  // in (0, 1)
  int cap = 512;    // >= 1
};

int sample_length(GaussStream& stream, const LengthDistribution& dist);

}  // namespace addax
