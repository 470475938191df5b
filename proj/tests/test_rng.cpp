#include <cmath>
#include <stdexcept>

#include "addax/rng.hpp"
#include "doctest.h"

using namespace addax;

TEST_CASE("reset replays the identical sequence") {
  GaussStream a(42);
  const auto first = a.draw(3);
  a.reset(42);
  const auto second = a.draw(3);
  for (int i = 0; i < 3; ++i) {
    CHECK(first[i] == second[i]);
  }
}

TEST_CASE("different seeds diverge immediately") {
  GaussStream a(42);
  GaussStream b(43);
  CHECK(a.next() != b.next());
}

TEST_CASE("replay is elementwise across a full vector") {
  GaussStream s(7);
  const auto x = s.draw(64);
  s.reset(7);
  const auto y = s.draw(64);
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(x[i] == y[i]);
  }
}

TEST_CASE("layerwise draws match one flat draw") {
  GaussStream flat(99);
  const auto whole = flat.draw(5);

  GaussStream split(99);
  const auto first = split.draw(2);
  const auto second = split.draw(3);
  CHECK(whole[0] == first[0]);
  CHECK(whole[1] == first[1]);
  CHECK(whole[2] == second[0]);
  CHECK(whole[3] == second[1]);
  CHECK(whole[4] == second[2]);
}

TEST_CASE("draw rejects n = 0") {
  GaussStream s(1);
  CHECK_THROWS_AS(s.draw(0), std::invalid_argument);
}

TEST_CASE("moments of a million draws") {
  GaussStream s(2024);
  const std::size_t n = 1'000'000;
  double sum = 0.0, sum_sq = 0.0, sum_lag = 0.0, prev = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = s.next();
    sum += z;
    sum_sq += z * z;
    if (i > 0) {
      sum_lag += prev * z;
    }
    prev = z;
  }
  const double mean = sum / static_cast<double>(n);
  const double var = sum_sq / static_cast<double>(n) - mean * mean;
  const double lag = sum_lag / static_cast<double>(n - 1);
  CHECK(std::abs(mean) < 0.005);      // 3 sigma / sqrt(n) ~ 0.003
  CHECK(std::abs(var - 1.0) < 0.01);  // chi^2 concentration
  CHECK(std::abs(lag) < 0.005);       // off-diagonal of E[z z^T]
}

TEST_CASE("uniform index stays in range and covers the support") {
  GaussStream s(5);
  bool seen[4] = {false, false, false, false};
  for (int i = 0; i < 1000; ++i) {
    const std::size_t idx = s.next_index(4);
    REQUIRE(idx < 4);
    seen[idx] = true;
  }
  CHECK(seen[0]);
  CHECK(seen[1]);
  CHECK(seen[2]);
  CHECK(seen[3]);
}

TEST_CASE("derived seeds differ by tag") {
  CHECK(derive_seed(1, 1) != derive_seed(1, 2));
  CHECK(derive_seed(1, 1) != derive_seed(2, 1));
  CHECK(derive_seed(1, 1) == derive_seed(1, 1));
}
