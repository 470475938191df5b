#include "addax/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "addax/errors.hpp"

namespace addax {

namespace {

bool all_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      return false;
    }
  }
  return true;
}

std::int64_t bytes_of(const std::vector<double>& v) {
  return static_cast<std::int64_t>(v.size() * sizeof(double));
}

// First-order phase of Alg-style in-place updates: walk layers M..1, apply
// theta_m -= step_size * g_m, free g_m before touching the next layer.
void in_place_fo_phase(const Problem& problem, ParamVector& theta, Batch batch,
                       double step_size, MemoryLedger& ledger) {
  auto walker = problem.backward(theta, batch);
  for (std::size_t m = theta.layer_count(); m-- > 0;) {
    std::vector<double> g = walker->layer_grad(m);
    ledger.track("grad_layer", bytes_of(g));
    if (!all_finite(g)) {
      ledger.track("grad_layer", -bytes_of(g));
      throw numeric_error("non-finite first-order gradient in layer " +
                          std::to_string(m));
    }
    auto& layer = theta.layer(m);
    for (std::size_t i = 0; i < layer.size(); ++i) {
      layer[i] -= step_size * g[i];
    }
    ledger.track("grad_layer", -bytes_of(g));
  }
}

}  // namespace

const char* method_name(Method m) {
  switch (m) {
    case Method::sgd:
      return "sgd";
    case Method::ip_sgd:
      return "ip_sgd";
    case Method::mezo:
      return "mezo";
    case Method::addax:
      return "addax";
    case Method::addax_wa:
      return "addax_wa";
  }
  return "unknown";
}

std::optional<Method> parse_method(const std::string& name) {
  if (name == "sgd") return Method::sgd;
  if (name == "ip_sgd") return Method::ip_sgd;
  if (name == "mezo") return Method::mezo;
  if (name == "addax") return Method::addax;
  if (name == "addax_wa") return Method::addax_wa;
  return std::nullopt;
}

void OptimizerConfig::validate() const {
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw config_error("optimizer: eta must be positive and finite");
  }
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw config_error("optimizer: epsilon must be positive and finite");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw config_error("optimizer: alpha must be in [0, 1]");
  }
  if (steps < 1) {
    throw config_error("optimizer: steps must be >= 1");
  }
  switch (method) {
    case Method::addax:
    case Method::addax_wa:
      if (k0 < 1 || k1 < 1) {
        throw config_error("optimizer: addax requires k0 >= 1 and k1 >= 1");
      }
      break;
    case Method::mezo:
      if (k0 < 1) {
        throw config_error("optimizer: mezo requires k0 >= 1");
      }
      break;
    case Method::sgd:
    case Method::ip_sgd:
      if (k1 < 1) {
        throw config_error("optimizer: sgd/ip_sgd require k1 >= 1");
      }
      break;
  }
}

std::size_t OptimizerConfig::effective_record_every() const {
  if (record_every > 0) {
    return record_every;
  }
  return std::max<std::size_t>(1, steps / 200);
}

void ip_sgd_step(const Problem& problem, ParamVector& theta, Batch batch,
                 double eta, MemoryLedger& ledger) {
  in_place_fo_phase(problem, theta, batch, eta, ledger);
}

void sgd_step(const Problem& problem, ParamVector& theta, Batch batch,
              double eta, MemoryLedger& ledger) {
  auto walker = problem.backward(theta, batch);
  std::vector<std::vector<double>> grads(theta.layer_count());
  std::int64_t held = 0;
  for (std::size_t m = theta.layer_count(); m-- > 0;) {
    grads[m] = walker->layer_grad(m);
    held += bytes_of(grads[m]);
    ledger.track("grad_full", bytes_of(grads[m]));
    if (!all_finite(grads[m])) {
      ledger.track("grad_full", -held);
      throw numeric_error("non-finite gradient in layer " + std::to_string(m));
    }
  }
  double norm_sq = 0.0;
  for (const auto& g : grads) {
    for (double x : g) {
      norm_sq += x * x;
    }
  }
  if (norm_sq > 0.0) {
    const double inv_norm = 1.0 / std::sqrt(norm_sq);
    for (std::size_t m = 0; m < grads.size(); ++m) {
      auto& layer = theta.layer(m);
      for (std::size_t i = 0; i < layer.size(); ++i) {
        layer[i] -= eta * grads[m][i] * inv_norm;
      }
    }
  }
  ledger.track("grad_full", -held);
}

void mezo_step(const Problem& problem, ParamVector& theta, Batch batch,
               double eta, double epsilon, GaussStream& seed_stream,
               MemoryLedger& ledger) {
  const ZoEstimate est =
      zeroth_grad(problem, theta, batch, epsilon, seed_stream, &ledger);
  perturb_parameters(theta, -(eta * est.g0), est.seed, &ledger);
}

void addax_step(const Problem& problem, ParamVector& theta, Batch b0,
                Batch b1, double eta, double epsilon, double alpha,
                GaussStream& seed_stream, MemoryLedger& ledger) {
  std::optional<ZoEstimate> est;
  if (alpha > 0.0) {
    est = zeroth_grad(problem, theta, b0, epsilon, seed_stream, &ledger);
  }
  if (alpha < 1.0) {
    in_place_fo_phase(problem, theta, b1, eta * (1.0 - alpha), ledger);
  }
  if (alpha > 0.0) {
    perturb_parameters(theta, -((eta * alpha) * est->g0), est->seed, &ledger);
  }
}

RunResult run(const Problem& problem, const OptimizerConfig& config) {
  config.validate();
  const Dataset& data = problem.dataset();

  GaussStream batch0(derive_seed(config.seed, 1));
  GaussStream batch1(derive_seed(config.seed, 2));
  GaussStream spsa_seeds(derive_seed(config.seed, 3));
  GaussStream init(derive_seed(config.seed, 4));

  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), std::size_t{0});

  std::span<const std::size_t> side0(all);
  std::span<const std::size_t> side1(all);
  Partition part;
  if (config.method == Method::addax) {
    part = partition(data, config.l_t);
    side0 = part.d0;
    side1 = part.d1;
  }

  ParamVector theta = problem.initial_theta(init);
  const std::optional<ParamVector> star = problem.optimum();
  std::vector<double> star_flat;
  if (star) {
    star_flat = star->flatten();
  }

  MemoryLedger ledger;
  RunResult result;
  const std::size_t record_every = config.effective_record_every();

  auto record = [&](std::size_t step) {
    TrajectoryRecord rec;
    rec.step = step;
    rec.loss = problem.full_loss(theta);
    rec.grad_norm_sq = problem.full_grad_norm_sq(theta);
    if (star) {
      const auto flat = theta.flatten();
      double err = 0.0;
      for (std::size_t i = 0; i < flat.size(); ++i) {
        const double diff = flat[i] - star_flat[i];
        err += diff * diff;
      }
      rec.err_sq = err;
    }
    rec.peak_mem = ledger.peak_bytes();
    result.records.push_back(rec);
  };

  record(0);
  for (std::size_t t = 1; t <= config.steps; ++t) {
    try {
      switch (config.method) {
        case Method::sgd: {
          const auto batch = sample_batch(data, side1, config.k1, batch1);
          sgd_step(problem, theta, Batch(batch), config.eta, ledger);
          break;
        }
        case Method::ip_sgd: {
          const auto batch = sample_batch(data, side1, config.k1, batch1);
          ip_sgd_step(problem, theta, Batch(batch), config.eta, ledger);
          break;
        }
        case Method::mezo: {
          const auto batch = sample_batch(data, side0, config.k0, batch0);
          mezo_step(problem, theta, Batch(batch), config.eta, config.epsilon,
                    spsa_seeds, ledger);
          break;
        }
        case Method::addax:
        case Method::addax_wa: {
          std::vector<DataPoint> b0;
          std::vector<DataPoint> b1;
          if (config.alpha > 0.0) {
            b0 = sample_batch(data, side0, config.k0, batch0);
          }
          if (config.alpha < 1.0) {
            b1 = sample_batch(data, side1, config.k1, batch1);
          }
          addax_step(problem, theta, Batch(b0), Batch(b1), config.eta,
                     config.epsilon, config.alpha, spsa_seeds, ledger);
          break;
        }
      }
      if (!theta.all_finite()) {
        throw numeric_error("parameters became non-finite");
      }
    } catch (const numeric_error& err) {
      result.error = "step " + std::to_string(t) + ": " + err.what();
      break;
    }
    if (t % record_every == 0 || t == config.steps) {
      record(t);
    }
  }
  result.final_theta = std::move(theta);
  return result;
}

double optimal_alpha(std::size_t k0, std::size_t k1, std::size_t d) {
  if (k0 < 1 || k1 < 1 || d < 1) {
    throw std::invalid_argument("optimal_alpha: k0, k1, d must all be >= 1");
  }
  const double K0 = static_cast<double>(k0);
  return K0 / (K0 + static_cast<double>(d) * static_cast<double>(k1));
}

}  // namespace addax
