#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace addax {

// Exact live-buffer accounting for the desk-scale problems. Tracks the
// gradient and perturbation buffers the optimizers allocate; peak_bytes is
// the maximum prefix sum of the deltas.
class MemoryLedger {
 public:
  explicit MemoryLedger(bool record_events = false)
      : record_events_(record_events) {}

  // delta_bytes may be negative (a free); the running balance must stay
  // nonnegative.
  void track(std::string_view tag, std::int64_t delta_bytes);

  std::int64_t current_bytes() const { return current_; }
  std::int64_t peak_bytes() const { return peak_; }
  const std::vector<std::pair<std::string, std::int64_t>>& events() const {
    return events_;
  }

 private:
  std::int64_t current_ = 0;
  std::int64_t peak_ = 0;
  bool record_events_;
  std::vector<std::pair<std::string, std::int64_t>> events_;
};

enum class MemMethod { mezo, ip_sgd, sgd };

// Parametric peak-memory model for LM fine-tuning: weights plus an
// activation term linear in batch * sequence-length, plus the gradient
// buffer the method keeps live. A model of the qualitative orderings, not a
// measurement.
struct LmMemModel {
  // Illustrative defaults; all configurable.
  std::int64_t weight_bytes = 26'000'000'000;    // 13B params at 2 bytes each
  double act_coeff = 2'000'000.0;                // bytes per sample-token, forward
  double bwd_mult = 2.0;                         // backward activation multiplier, >= 1
  std::int64_t grad_layer_max_bytes = 500'000'000;
  std::int64_t full_grad_bytes = 26'000'000'000;  // >= grad_layer_max_bytes

  void validate() const;
};

std::int64_t predict_peak(const LmMemModel& model, MemMethod method,
                          std::int64_t batch, std::int64_t seq);

// Addax peak: the worse of its first-order sub-step at (k1, l_t) and its
// zeroth-order sub-step at (k0, l_max).
std::int64_t predict_peak_addax(const LmMemModel& model, std::int64_t k1,
                                std::int64_t l_t, std::int64_t k0,
                                std::int64_t l_max);

}  // namespace addax
