#include "addax/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace addax {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream_tag) {
  SplitMix64 mix(base ^ (stream_tag * 0xd1b54a32d192ed03ULL));
  return mix.next();
}

void GaussStream::reset(std::uint64_t seed) {
  engine_ = SplitMix64(seed);
  seed_ = seed;
  spare_ = 0.0;
  has_spare_ = false;
}

double GaussStream::next() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // u1 in (0, 1] so the log is finite.
  const double u1 = 1.0 - engine_.next_unit();
  const double u2 = engine_.next_unit();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

void GaussStream::draw(std::span<double> out) {
  if (out.empty()) {
    throw std::invalid_argument("GaussStream::draw: n must be >= 1");
  }
  for (double& v : out) {
    v = next();
  }
}

std::vector<double> GaussStream::draw(std::size_t n) {
  if (n == 0) {
    throw std::invalid_argument("GaussStream::draw: n must be >= 1");
  }
  std::vector<double> out(n);
  draw(std::span<double>(out));
  return out;
}

std::size_t GaussStream::next_index(std::size_t bound) {
  if (bound == 0) {
    throw std::invalid_argument("GaussStream::next_index: bound must be >= 1");
  }
  // Rejection sampling over the top multiple of bound; unbiased and exact.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x;
  do {
    x = engine_.next();
  } while (x >= limit);
  return static_cast<std::size_t>(x % bound);
}

}  // namespace addax
