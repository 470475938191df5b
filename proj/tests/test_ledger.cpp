#include <algorithm>
#include <stdexcept>

#include "addax/mem_ledger.hpp"
#include "addax/rng.hpp"
#include "doctest.h"

using namespace addax;

TEST_CASE("track updates peak and balance") {
  MemoryLedger ledger;
  ledger.track("a", 8);
  ledger.track("a", -8);
  CHECK(ledger.peak_bytes() == 8);
  CHECK(ledger.current_bytes() == 0);
}

TEST_CASE("peak is the max prefix sum") {
  MemoryLedger ledger;
  ledger.track("a", 8);
  ledger.track("b", 8);
  ledger.track("a", -8);
  CHECK(ledger.peak_bytes() == 16);
  CHECK(ledger.current_bytes() == 8);
}

TEST_CASE("negative balance is a contract violation") {
  MemoryLedger ledger;
  CHECK_THROWS_AS(ledger.track("a", -1), std::logic_error);
}

TEST_CASE("event log reproduces peak and balance") {
  MemoryLedger ledger(true);
  GaussStream stream(5);
  std::int64_t live = 0;
  for (int i = 0; i < 200; ++i) {
    const std::int64_t delta = static_cast<std::int64_t>(stream.next_index(64));
    if (stream.next_index(2) == 0 && live >= delta) {
      ledger.track("x", -delta);
      live -= delta;
    } else {
      ledger.track("x", delta);
      live += delta;
    }
  }
  std::int64_t run = 0, peak = 0;
  for (const auto& [tag, delta] : ledger.events()) {
    run += delta;
    peak = std::max(peak, run);
  }
  CHECK(run == ledger.current_bytes());
  CHECK(peak == ledger.peak_bytes());
}

TEST_CASE("predict_peak orderings") {
  LmMemModel model;
  for (std::int64_t batch : {1, 4, 16}) {
    for (std::int64_t seq : {16, 128, 1024}) {
      const auto mezo = predict_peak(model, MemMethod::mezo, batch, seq);
      const auto ip = predict_peak(model, MemMethod::ip_sgd, batch, seq);
      const auto sgd = predict_peak(model, MemMethod::sgd, batch, seq);
      CHECK(sgd >= ip);
      CHECK(ip >= mezo);
    }
  }
}

TEST_CASE("activation term is linear in sequence length") {
  LmMemModel model;
  const auto base = predict_peak(model, MemMethod::mezo, 4, 100);
  const auto doubled = predict_peak(model, MemMethod::mezo, 4, 200);
  CHECK(doubled - model.weight_bytes == 2 * (base - model.weight_bytes));
}

TEST_CASE("addax peak does not exceed ip_sgd at full length") {
  LmMemModel model;
  for (std::int64_t batch : {2, 8, 16}) {
    for (std::int64_t seq : {64, 512, 1024}) {
      const auto addax = predict_peak_addax(model, batch, seq / 2, batch, seq);
      const auto ip = predict_peak(model, MemMethod::ip_sgd, batch, seq);
      CHECK(addax <= ip);
    }
  }
}

TEST_CASE("predict_peak is monotone in its inputs") {
  LmMemModel model;
  CHECK(predict_peak(model, MemMethod::ip_sgd, 4, 128) <=
        predict_peak(model, MemMethod::ip_sgd, 5, 128));
  CHECK(predict_peak(model, MemMethod::ip_sgd, 4, 128) <=
        predict_peak(model, MemMethod::ip_sgd, 4, 129));
  CHECK(predict_peak_addax(model, 4, 64, 8, 512) <=
        predict_peak_addax(model, 4, 65, 8, 512));
  CHECK(predict_peak_addax(model, 4, 64, 8, 512) <=
        predict_peak_addax(model, 5, 64, 8, 512));
}

TEST_CASE("predict_peak validates inputs") {
  LmMemModel model;
  CHECK_THROWS_AS(predict_peak(model, MemMethod::mezo, 0, 16),
                  std::invalid_argument);
  model.bwd_mult = 0.5;
  CHECK_THROWS_AS(predict_peak(model, MemMethod::mezo, 1, 16),
                  std::invalid_argument);
}
