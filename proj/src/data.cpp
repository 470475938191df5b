#include "addax/data.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace addax {

Dataset::Dataset(std::vector<DataPoint> points)
    : points_(std::move(points)), l_max_(0) {
  if (points_.empty()) {
    throw std::invalid_argument("Dataset: points must be nonempty");
  }
  for (const auto& pt : points_) {
    if (pt.seq_len < 1) {
      throw std::invalid_argument("Dataset: seq_len must be >= 1");
    }
    for (double v : pt.features) {
      if (!std::isfinite(v)) {
        throw std::invalid_argument("Dataset: features must be finite");
      }
    }
    l_max_ = std::max(l_max_, pt.seq_len);
  }
}

int sample_length(GaussStream& stream, const LengthDistribution& dist) {
  if (!(dist.p > 0.0 && dist.p < 1.0) || dist.cap < 1) {
    throw std::invalid_argument("sample_length: need 0 < p < 1 and cap >= 1");
  }
  // Inverse-CDF geometric draw; u in (0, 1] keeps the log finite.
  const double u =
      1.0 - static_cast<double>(stream.next_seed() >> 11) * 0x1.0p-53;
  const int geometric =
      static_cast<int>(std::floor(std::log(u) / std::log1p(-dist.p)));
  return std::min(dist.cap, 1 + std::max(0, geometric));
}

}  // namespace addax
