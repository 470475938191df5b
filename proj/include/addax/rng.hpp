#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace addax {

// SplitMix64: one 64-bit word of state, full-period, well-studied avalanche
// constants (Steele, Lea, Flood 2014). Two resets with the same seed replay
// the identical output sequence on any build.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

// Mixes a stream tag into a base seed so that sub-streams derived from one
// run seed are decorrelated.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream_tag);

// Deterministic, seed-addressable stream of standard normal variates.
// The normal transform is Box-Muller over SplitMix64 uniforms; pairs are
// generated at once and the spare is cached, so drawing layer by layer
// consumes exactly the same cursor positions as one flat draw.
class GaussStream {
 public:
  explicit GaussStream(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  void reset(std::uint64_t seed);
  std::uint64_t seed() const { return seed_; }

  // One standard normal variate, advancing the cursor by one.
  double next();

  // Fills out with out.size() variates.
  void draw(std::span<double> out);

  // n variates; n >= 1.
  std::vector<double> draw(std::size_t n);

  // Fresh 64-bit seed for seed-replay perturbation. Consumes one engine
  // word; intended for streams dedicated to seed generation.
  std::uint64_t next_seed() { return engine_.next(); }

  // Uniform index in [0, bound); bound >= 1. Intended for streams dedicated
  // to batch sampling.
  std::size_t next_index(std::size_t bound);

 private:
  SplitMix64 engine_;
  std::uint64_t seed_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace addax
