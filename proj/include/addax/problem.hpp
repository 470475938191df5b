#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "addax/data.hpp"
#include "addax/param_vector.hpp"
#include "addax/rng.hpp"

namespace addax {

using Batch = std::span<const DataPoint>;

// Yields the minibatch-loss gradient one layer at a time, in descending
// layer order, all evaluated at the parameters captured when the walker was
// created. The caller may update layer m in place right after layer_grad(m)
// returns; the remaining layers' gradients are unaffected, mirroring how a
// backward pass consumes saved forward state.
class LayerGradWalker {
 public:
  virtual ~LayerGradWalker() = default;

  // m must follow the descending order M-1, M-2, ..., 0.
  virtual std::vector<double> layer_grad(std::size_t m) = 0;
};

// A differentiable test objective: per-sample loss, minibatch loss, and
// analytic per-layer gradients over a fixed dataset.
class Problem {
 public:
  virtual ~Problem() = default;

  virtual std::vector<std::size_t> layer_dims() const = 0;
  std::size_t layer_count() const { return layer_dims().size(); }
  std::size_t dim() const;

  virtual const Dataset& dataset() const = 0;

  // Mean of per-sample losses over batch; batch must be nonempty and theta
  // must match layer_dims().
  virtual double loss(const ParamVector& theta, Batch batch) const = 0;

  // Analytic gradient of loss(theta, batch) wrt layer layer_index.
  std::vector<double> grad_layer(const ParamVector& theta, Batch batch,
                                 std::size_t layer_index) const;

  // Starts a layerwise backward pass at theta.
  virtual std::unique_ptr<LayerGradWalker> backward(const ParamVector& theta,
                                                    Batch batch) const = 0;

  // Full-dataset diagnostics.
  double full_loss(const ParamVector& theta) const;
  std::vector<double> full_gradient_flat(const ParamVector& theta) const;
  double full_grad_norm_sq(const ParamVector& theta) const;

  // Analytic minimizer over the dataset, when one is known.
  virtual std::optional<ParamVector> optimum() const { return std::nullopt; }
  // Loss at the minimizer when known, else a lower bound (0 for the
  // nonnegative losses used here).
  virtual double optimum_loss() const { return 0.0; }

  // Smoothness constant of the per-sample loss: exact for the quadratic,
  // an analytic upper bound for logistic regression.
  virtual std::optional<double> lipschitz_bound() const {
    return std::nullopt;
  }

  // Starting point for an optimizer run; consumes the given stream.
  virtual ParamVector initial_theta(GaussStream& stream) const = 0;

 protected:
  void check_batch(const ParamVector& theta, Batch batch) const;
};

// Central finite difference of the minibatch loss, coordinate by coordinate
// over the flattened parameters. Gradient oracle for verification; h > 0.
std::vector<double> fd_gradient(const Problem& problem,
                                const ParamVector& theta, Batch batch,
                                double h);

// --- Concrete problems ----------------------------------------------------

// Quadratic with diagonal Hessian whose eigenvalues are log-spaced in
// [mu, l_lip]; per-sample loss 0.5 * (theta - x)^T H (theta - x). Targets
// are center + H^{-1} * noise so the per-sample gradient noise has total
// variance sigma^2 at every theta.
struct QuadraticSpec {
  std::size_t dim = 2;
  std::vector<std::size_t> layer_dims_override;  // empty = single layer
  double mu = 1.0;
  double l_lip = 1.0;
  double sigma = 0.0;
  std::size_t n_points = 16;
  double init_radius = 2.0;              // ||theta_0 - theta_star||
  std::vector<double> center;            // empty = zero vector
  std::vector<double> spectrum_override;  // empty = log-spaced
  LengthDistribution lengths;
  std::uint64_t data_seed = 1;
};

// Binary logistic regression: softplus loss on labels in {0,1}, optional
// ridge term.
struct LogisticSpec {
  std::size_t dim = 10;
  double ridge = 0.0;
  std::size_t n_points = 64;
  double init_scale = 0.5;
  LengthDistribution lengths;
  std::uint64_t data_seed = 1;
};

// Fully-connected tanh network with scalar squared-error output, trained
// against a fixed random teacher network plus label noise.
struct MlpSpec {
  std::vector<std::size_t> widths = {4, 8, 1};  // input, hidden..., output=1
  double noise = 0.05;
  std::size_t n_points = 64;
  double init_scale = 0.5;
  LengthDistribution lengths;
  std::uint64_t data_seed = 1;
};

std::unique_ptr<Problem> make_quadratic(const QuadraticSpec& spec);

// Same quadratic objective over caller-supplied points; the generation
// fields of spec are ignored.
std::unique_ptr<Problem> make_quadratic_dataset(const QuadraticSpec& spec,
                                                std::vector<DataPoint> points);
std::unique_ptr<Problem> make_logistic(const LogisticSpec& spec);
std::unique_ptr<Problem> make_mlp(const MlpSpec& spec);

// 1-D double well (theta^2 - 1)^2; the loss ignores the data point. Used by
// the Gaussian-smoothing identity checks.
std::unique_ptr<Problem> make_double_well();

// Access to the quadratic's diagonal Hessian (empty for other kinds); used
// by the validator to compute constants analytically.
const std::vector<double>* quadratic_spectrum(const Problem& problem);

}  // namespace addax
