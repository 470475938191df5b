#include "addax/mem_ledger.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace addax {

void MemoryLedger::track(std::string_view tag, std::int64_t delta_bytes) {
  if (current_ + delta_bytes < 0) {
    throw std::logic_error("MemoryLedger: balance would go negative (tag '" +
                           std::string(tag) + "')");
  }
  current_ += delta_bytes;
  peak_ = std::max(peak_, current_);
  if (record_events_) {
    events_.emplace_back(std::string(tag), delta_bytes);
  }
}

void LmMemModel::validate() const {
  if (weight_bytes <= 0 || act_coeff <= 0.0 || bwd_mult < 1.0 ||
      grad_layer_max_bytes <= 0 || full_grad_bytes < grad_layer_max_bytes) {
    throw std::invalid_argument("LmMemModel: invalid coefficients");
  }
}

std::int64_t predict_peak(const LmMemModel& model, MemMethod method,
                          std::int64_t batch, std::int64_t seq) {
  model.validate();
  if (batch < 1 || seq < 1) {
    throw std::invalid_argument("predict_peak: need batch >= 1 and seq >= 1");
  }
  const double fwd_act = model.act_coeff * static_cast<double>(batch) *
                         static_cast<double>(seq);
  switch (method) {
    case MemMethod::mezo:
      return model.weight_bytes + std::llround(fwd_act);
    case MemMethod::ip_sgd:
      return model.weight_bytes + std::llround(fwd_act * model.bwd_mult) +
             model.grad_layer_max_bytes;
    case MemMethod::sgd:
      return model.weight_bytes + std::llround(fwd_act * model.bwd_mult) +
             model.full_grad_bytes;
  }
  throw std::invalid_argument("predict_peak: unknown method");
}

std::int64_t predict_peak_addax(const LmMemModel& model, std::int64_t k1,
                                std::int64_t l_t, std::int64_t k0,
                                std::int64_t l_max) {
  return std::max(predict_peak(model, MemMethod::ip_sgd, k1, l_t),
                  predict_peak(model, MemMethod::mezo, k0, l_max));
}

}  // namespace addax
