#include "addax/spsa.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "addax/errors.hpp"

namespace addax {

void perturb_parameters(ParamVector& theta, double scale, std::uint64_t seed,
                        MemoryLedger* ledger) {
  if (!std::isfinite(scale)) {
    throw std::invalid_argument("perturb_parameters: scale must be finite");
  }
  if (scale == 0.0) {
    return;
  }
  GaussStream z_stream(seed);
  for (std::size_t m = 0; m < theta.layer_count(); ++m) {
    auto& layer = theta.layer(m);
    std::vector<double> z(layer.size());
    if (ledger) {
      ledger->track("perturb", static_cast<std::int64_t>(z.size() * sizeof(double)));
    }
    z_stream.draw(std::span<double>(z));
    for (std::size_t i = 0; i < layer.size(); ++i) {
      layer[i] += scale * z[i];
    }
    if (ledger) {
      ledger->track("perturb", -static_cast<std::int64_t>(z.size() * sizeof(double)));
    }
  }
}

ZoEstimate zeroth_grad(const Problem& problem, ParamVector& theta, Batch batch,
                       double epsilon, GaussStream& seed_stream,
                       MemoryLedger* ledger) {
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("zeroth_grad: epsilon must be > 0");
  }
  const std::uint64_t seed = seed_stream.next_seed();

  perturb_parameters(theta, epsilon, seed, ledger);
  const double loss_up = problem.loss(theta, batch);
  perturb_parameters(theta, -2.0 * epsilon, seed, ledger);
  const double loss_down = problem.loss(theta, batch);
  perturb_parameters(theta, epsilon, seed, ledger);

  if (!std::isfinite(loss_up) || !std::isfinite(loss_down)) {
    throw numeric_error(
        "zeroth_grad: non-finite loss at perturbed parameters (loss(+eps)=" +
        std::to_string(loss_up) + ", loss(-eps)=" + std::to_string(loss_down) +
        ")");
  }
  return ZoEstimate{(loss_up - loss_down) / (2.0 * epsilon), seed, epsilon};
}

}  // namespace addax
