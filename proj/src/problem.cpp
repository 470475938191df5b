#include "addax/problem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "addax/errors.hpp"

namespace addax {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    s += a[i] * b[i];
  }
  return s;
}

double softplus(double t) {
  // log(1 + exp(t)) without overflow.
  return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

double sigmoid(double t) {
  return t > 0.0 ? 1.0 / (1.0 + std::exp(-t))
                 : std::exp(t) / (1.0 + std::exp(t));
}

}  // namespace

std::size_t Problem::dim() const {
  const auto dims = layer_dims();
  return std::accumulate(dims.begin(), dims.end(), std::size_t{0});
}

void Problem::check_batch(const ParamVector& theta, Batch batch) const {
  if (batch.empty()) {
    throw std::invalid_argument("Problem: batch must be nonempty");
  }
  const auto dims = layer_dims();
  if (theta.layer_count() != dims.size()) {
    throw std::logic_error("Problem: theta layer count mismatch");
  }
  for (std::size_t m = 0; m < dims.size(); ++m) {
    if (theta.layer_dim(m) != dims[m]) {
      throw std::logic_error("Problem: theta layer dimension mismatch");
    }
  }
}

std::vector<double> Problem::grad_layer(const ParamVector& theta, Batch batch,
                                        std::size_t layer_index) const {
  if (layer_index >= layer_count()) {
    throw std::out_of_range("Problem::grad_layer: layer index out of range");
  }
  auto walker = backward(theta, batch);
  for (std::size_t m = layer_count(); m-- > 0;) {
    auto g = walker->layer_grad(m);
    if (m == layer_index) {
      return g;
    }
  }
  throw std::logic_error("Problem::grad_layer: unreachable");
}

double Problem::full_loss(const ParamVector& theta) const {
  return loss(theta, Batch(dataset().points()));
}

std::vector<double> Problem::full_gradient_flat(const ParamVector& theta) const {
  const Batch all(dataset().points());
  auto walker = backward(theta, all);
  std::vector<std::vector<double>> grads(layer_count());
  for (std::size_t m = layer_count(); m-- > 0;) {
    grads[m] = walker->layer_grad(m);
  }
  std::vector<double> flat;
  flat.reserve(dim());
  for (const auto& g : grads) {
    flat.insert(flat.end(), g.begin(), g.end());
  }
  return flat;
}

double Problem::full_grad_norm_sq(const ParamVector& theta) const {
  const auto g = full_gradient_flat(theta);
  return dot(g, g);
}

std::vector<double> fd_gradient(const Problem& problem,
                                const ParamVector& theta, Batch batch,
                                double h) {
  if (!(h > 0.0)) {
    throw std::invalid_argument("fd_gradient: h must be > 0");
  }
  ParamVector work = theta;
  std::vector<double> flat = work.flatten();
  std::vector<double> grad(flat.size());
  for (std::size_t i = 0; i < flat.size(); ++i) {
    const double saved = flat[i];
    flat[i] = saved + h;
    work.assign_flat(flat);
    const double up = problem.loss(work, batch);
    flat[i] = saved - h;
    work.assign_flat(flat);
    const double down = problem.loss(work, batch);
    flat[i] = saved;
    grad[i] = (up - down) / (2.0 * h);
  }
  work.assign_flat(flat);
  return grad;
}

// --- Quadratic --------------------------------------------------------------

namespace {

class QuadraticProblem;

class QuadraticWalker final : public LayerGradWalker {
 public:
  QuadraticWalker(const QuadraticProblem& problem, const ParamVector& theta,
                  Batch batch);
  std::vector<double> layer_grad(std::size_t m) override;

 private:
  const QuadraticProblem& problem_;
  const ParamVector& theta_;
  std::vector<double> batch_mean_;
  std::size_t cursor_;
};

class QuadraticProblem final : public Problem {
 public:
  QuadraticProblem(const QuadraticSpec& spec,
                   std::vector<DataPoint> explicit_points)
      : spec_(spec) {
    const std::size_t d = spec.dim;
    if (d == 0) {
      throw std::invalid_argument("quadratic: dim must be >= 1");
    }
    if (!(spec.mu > 0.0 && spec.mu <= spec.l_lip)) {
      throw std::invalid_argument("quadratic: need 0 < mu <= l_lip");
    }
    if (!spec.spectrum_override.empty()) {
      if (spec.spectrum_override.size() != d) {
        throw std::invalid_argument("quadratic: spectrum size mismatch");
      }
      spectrum_ = spec.spectrum_override;
    } else if (d == 1) {
      spectrum_ = {spec.l_lip};
    } else {
      // Log-spaced eigenvalues hitting mu and l_lip exactly.
      spectrum_.resize(d);
      const double ratio = spec.l_lip / spec.mu;
      for (std::size_t i = 0; i < d; ++i) {
        spectrum_[i] =
            spec.mu * std::pow(ratio, static_cast<double>(i) /
                                          static_cast<double>(d - 1));
      }
    }

    layer_dims_ = spec.layer_dims_override.empty()
                      ? std::vector<std::size_t>{d}
                      : spec.layer_dims_override;
    if (std::accumulate(layer_dims_.begin(), layer_dims_.end(),
                        std::size_t{0}) != d) {
      throw std::invalid_argument("quadratic: layer dims must sum to dim");
    }

    if (!explicit_points.empty()) {
      for (const auto& pt : explicit_points) {
        if (pt.features.size() != d) {
          throw std::invalid_argument("quadratic: point dimension mismatch");
        }
      }
      dataset_.emplace(std::move(explicit_points));
    } else {
      std::vector<double> center = spec.center;
      if (center.empty()) {
        center.assign(d, 0.0);
      } else if (center.size() != d) {
        throw std::invalid_argument("quadratic: center size mismatch");
      }

      GaussStream gen(derive_seed(spec.data_seed, 11));
      GaussStream lens(derive_seed(spec.data_seed, 12));
      const double coord_sd =
          spec.sigma > 0.0 ? spec.sigma / std::sqrt(static_cast<double>(d))
                           : 0.0;
      std::vector<DataPoint> points(spec.n_points);
      for (auto& pt : points) {
        pt.features.resize(d);
        for (std::size_t i = 0; i < d; ++i) {
          const double noise = coord_sd > 0.0 ? coord_sd * gen.next() : 0.0;
          pt.features[i] = center[i] + noise / spectrum_[i];
        }
        pt.seq_len = sample_length(lens, spec.lengths);
      }
      dataset_.emplace(std::move(points));
    }

    // theta_star is the target mean; both it and the loss there are exact.
    mean_target_.assign(d, 0.0);
    for (const auto& pt : dataset_->points()) {
      for (std::size_t i = 0; i < d; ++i) {
        mean_target_[i] += pt.features[i];
      }
    }
    for (double& v : mean_target_) {
      v /= static_cast<double>(dataset_->size());
    }
    optimum_loss_ = 0.0;
    for (const auto& pt : dataset_->points()) {
      for (std::size_t i = 0; i < d; ++i) {
        const double diff = mean_target_[i] - pt.features[i];
        optimum_loss_ += 0.5 * spectrum_[i] * diff * diff;
      }
    }
    optimum_loss_ /= static_cast<double>(dataset_->size());
  }

  std::vector<std::size_t> layer_dims() const override { return layer_dims_; }
  const Dataset& dataset() const override { return *dataset_; }

  double loss(const ParamVector& theta, Batch batch) const override {
    check_batch(theta, batch);
    double total = 0.0;
    for (const auto& pt : batch) {
      std::size_t flat = 0;
      double sample = 0.0;
      for (std::size_t m = 0; m < theta.layer_count(); ++m) {
        for (double v : theta.layer(m)) {
          const double diff = v - pt.features[flat];
          sample += 0.5 * spectrum_[flat] * diff * diff;
          ++flat;
        }
      }
      total += sample;
    }
    return total / static_cast<double>(batch.size());
  }

  std::unique_ptr<LayerGradWalker> backward(const ParamVector& theta,
                                            Batch batch) const override {
    check_batch(theta, batch);
    return std::make_unique<QuadraticWalker>(*this, theta, batch);
  }

  std::optional<ParamVector> optimum() const override {
    ParamVector star = ParamVector::zeros(layer_dims_);
    star.assign_flat(mean_target_);
    return star;
  }

  double optimum_loss() const override { return optimum_loss_; }

  std::optional<double> lipschitz_bound() const override {
    return *std::max_element(spectrum_.begin(), spectrum_.end());
  }

  ParamVector initial_theta(GaussStream& stream) const override {
    // theta_star plus a random direction of exact length init_radius.
    const std::size_t d = spec_.dim;
    std::vector<double> dir = stream.draw(d);
    const double norm = std::sqrt(dot(dir, dir));
    std::vector<double> flat(mean_target_);
    for (std::size_t i = 0; i < d; ++i) {
      flat[i] += spec_.init_radius * dir[i] / norm;
    }
    ParamVector theta = ParamVector::zeros(layer_dims_);
    theta.assign_flat(flat);
    return theta;
  }

  const std::vector<double>& spectrum() const { return spectrum_; }
  std::size_t layer_offset(std::size_t m) const {
    std::size_t off = 0;
    for (std::size_t i = 0; i < m; ++i) {
      off += layer_dims_[i];
    }
    return off;
  }

 private:
  QuadraticSpec spec_;
  std::vector<double> spectrum_;
  std::vector<std::size_t> layer_dims_;
  std::optional<Dataset> dataset_;
  std::vector<double> mean_target_;
  double optimum_loss_ = 0.0;
};

QuadraticWalker::QuadraticWalker(const QuadraticProblem& problem,
                                 const ParamVector& theta, Batch batch)
    : problem_(problem),
      theta_(theta),
      batch_mean_(theta.dim(), 0.0),
      cursor_(theta.layer_count()) {
  for (const auto& pt : batch) {
    for (std::size_t i = 0; i < batch_mean_.size(); ++i) {
      batch_mean_[i] += pt.features[i];
    }
  }
  for (double& v : batch_mean_) {
    v /= static_cast<double>(batch.size());
  }
}

std::vector<double> QuadraticWalker::layer_grad(std::size_t m) {
  if (m + 1 != cursor_) {
    throw std::logic_error("LayerGradWalker: layers must be walked M-1..0");
  }
  cursor_ = m;
  const auto& layer = theta_.layer(m);
  const std::size_t offset = problem_.layer_offset(m);
  const auto& spectrum = problem_.spectrum();
  std::vector<double> g(layer.size());
  for (std::size_t i = 0; i < layer.size(); ++i) {
    g[i] = spectrum[offset + i] * (layer[i] - batch_mean_[offset + i]);
  }
  return g;
}

// --- Logistic regression ----------------------------------------------------

class LogisticProblem final : public Problem {
 public:
  explicit LogisticProblem(const LogisticSpec& spec) : spec_(spec) {
    if (spec.dim == 0) {
      throw std::invalid_argument("logistic: dim must be >= 1");
    }
    if (spec.ridge < 0.0) {
      throw std::invalid_argument("logistic: ridge must be >= 0");
    }
    GaussStream gen(derive_seed(spec.data_seed, 21));
    GaussStream lens(derive_seed(spec.data_seed, 22));
    const double gen_scale = 2.0 / std::sqrt(static_cast<double>(spec.dim));
    std::vector<double> theta_gen = gen.draw(spec.dim);
    for (double& v : theta_gen) {
      v *= gen_scale;
    }
    std::vector<DataPoint> points(spec.n_points);
    for (auto& pt : points) {
      pt.features = gen.draw(spec.dim);
      const double p = sigmoid(dot(theta_gen, pt.features));
      // one engine word per label keeps generation replayable
      const double u =
          static_cast<double>(gen.next_seed() >> 11) * 0x1.0p-53;
      pt.label = u < p ? 1.0 : 0.0;
      pt.seq_len = sample_length(lens, spec.lengths);
    }
    dataset_.emplace(std::move(points));

    double max_sq = 0.0;
    for (const auto& pt : dataset_->points()) {
      max_sq = std::max(max_sq, dot(pt.features, pt.features));
    }
    lipschitz_ = max_sq / 4.0 + spec.ridge;
  }

  std::vector<std::size_t> layer_dims() const override { return {spec_.dim}; }
  const Dataset& dataset() const override { return *dataset_; }

  double loss(const ParamVector& theta, Batch batch) const override {
    check_batch(theta, batch);
    const auto& w = theta.layer(0);
    double total = 0.0;
    for (const auto& pt : batch) {
      const double t = dot(w, pt.features);
      const double sign = pt.label > 0.5 ? 1.0 : -1.0;
      total += softplus(-sign * t);
    }
    double mean = total / static_cast<double>(batch.size());
    if (spec_.ridge > 0.0) {
      mean += 0.5 * spec_.ridge * dot(w, w);
    }
    return mean;
  }

  std::unique_ptr<LayerGradWalker> backward(const ParamVector& theta,
                                            Batch batch) const override {
    check_batch(theta, batch);
    class Walker final : public LayerGradWalker {
     public:
      Walker(const LogisticProblem& p, const ParamVector& theta, Batch batch)
          : p_(p), theta_(theta), batch_(batch) {}
      std::vector<double> layer_grad(std::size_t m) override {
        if (m != 0 || done_) {
          throw std::logic_error("LayerGradWalker: layers must be walked M-1..0");
        }
        done_ = true;
        const auto& w = theta_.layer(0);
        std::vector<double> g(w.size(), 0.0);
        for (const auto& pt : batch_) {
          const double coef =
              sigmoid(dot(w, pt.features)) - pt.label;
          for (std::size_t i = 0; i < g.size(); ++i) {
            g[i] += coef * pt.features[i];
          }
        }
        const double inv = 1.0 / static_cast<double>(batch_.size());
        for (std::size_t i = 0; i < g.size(); ++i) {
          g[i] = g[i] * inv + p_.spec_.ridge * w[i];
        }
        return g;
      }

     private:
      const LogisticProblem& p_;
      const ParamVector& theta_;
      Batch batch_;
      bool done_ = false;
    };
    return std::make_unique<Walker>(*this, theta, batch);
  }

  std::optional<double> lipschitz_bound() const override { return lipschitz_; }

  ParamVector initial_theta(GaussStream& stream) const override {
    std::vector<double> flat = stream.draw(spec_.dim);
    const double scale =
        spec_.init_scale / std::sqrt(static_cast<double>(spec_.dim));
    for (double& v : flat) {
      v *= scale;
    }
    return ParamVector({std::move(flat)});
  }

 private:
  LogisticSpec spec_;
  std::optional<Dataset> dataset_;
  double lipschitz_ = 0.0;
};

// --- Tanh MLP ---------------------------------------------------------------

class MlpProblem final : public Problem {
 public:
  explicit MlpProblem(const MlpSpec& spec) : spec_(spec) {
    if (spec.widths.size() < 2) {
      throw std::invalid_argument("mlp: need at least input and output widths");
    }
    if (spec.widths.back() != 1) {
      throw std::invalid_argument("mlp: output width must be 1");
    }
    for (std::size_t w : spec.widths) {
      if (w == 0) {
        throw std::invalid_argument("mlp: widths must be >= 1");
      }
    }
    const std::size_t n_layers = spec.widths.size() - 1;
    layer_dims_.resize(n_layers);
    for (std::size_t m = 0; m < n_layers; ++m) {
      layer_dims_[m] = spec.widths[m + 1] * spec.widths[m] + spec.widths[m + 1];
    }

    // Teacher network defines the regression target.
    GaussStream gen(derive_seed(spec.data_seed, 31));
    GaussStream lens(derive_seed(spec.data_seed, 32));
    teacher_ = random_params(gen, 1.5);
    std::vector<DataPoint> points(spec.n_points);
    for (auto& pt : points) {
      pt.features = gen.draw(spec.widths.front());
      pt.label = forward(*teacher_, pt.features) + spec.noise * gen.next();
      pt.seq_len = sample_length(lens, spec.lengths);
    }
    dataset_.emplace(std::move(points));
  }

  std::vector<std::size_t> layer_dims() const override { return layer_dims_; }
  const Dataset& dataset() const override { return *dataset_; }

  double loss(const ParamVector& theta, Batch batch) const override {
    check_batch(theta, batch);
    double total = 0.0;
    for (const auto& pt : batch) {
      const double diff = forward(theta, pt.features) - pt.label;
      total += 0.5 * diff * diff;
    }
    return total / static_cast<double>(batch.size());
  }

  std::unique_ptr<LayerGradWalker> backward(const ParamVector& theta,
                                            Batch batch) const override;

  ParamVector initial_theta(GaussStream& stream) const override {
    return random_params(stream, spec_.init_scale);
  }

  const std::vector<std::size_t>& widths() const { return spec_.widths; }

  // Forward pass; if acts is non-null it receives the post-activation
  // values a_0 (input) .. a_M (output).
  double forward(const ParamVector& theta, std::span<const double> x,
                 std::vector<std::vector<double>>* acts = nullptr) const {
    std::vector<double> a(x.begin(), x.end());
    if (acts) {
      acts->clear();
      acts->push_back(a);
    }
    const std::size_t n_layers = layer_dims_.size();
    for (std::size_t m = 0; m < n_layers; ++m) {
      const std::size_t in = spec_.widths[m];
      const std::size_t out = spec_.widths[m + 1];
      const auto& w = theta.layer(m);
      std::vector<double> next(out);
      for (std::size_t r = 0; r < out; ++r) {
        double h = w[in * out + r];  // bias
        const double* row = w.data() + r * in;
        for (std::size_t c = 0; c < in; ++c) {
          h += row[c] * a[c];
        }
        next[r] = (m + 1 < n_layers) ? std::tanh(h) : h;
      }
      a = std::move(next);
      if (acts) {
        acts->push_back(a);
      }
    }
    return a[0];
  }

 private:
  ParamVector random_params(GaussStream& stream, double scale) const {
    std::vector<std::vector<double>> layers(layer_dims_.size());
    for (std::size_t m = 0; m < layer_dims_.size(); ++m) {
      const double s =
          scale / std::sqrt(static_cast<double>(spec_.widths[m]));
      layers[m] = stream.draw(layer_dims_[m]);
      for (double& v : layers[m]) {
        v *= s;
      }
    }
    return ParamVector(std::move(layers));
  }

  MlpSpec spec_;
  std::vector<std::size_t> layer_dims_;
  std::optional<ParamVector> teacher_;
  std::optional<Dataset> dataset_;
};

class MlpWalker final : public LayerGradWalker {
 public:
  MlpWalker(const MlpProblem& problem, const ParamVector& theta, Batch batch)
      : problem_(problem),
        theta_(theta),
        cursor_(theta.layer_count()),
        acts_(batch.size()),
        delta_(batch.size()) {
    // Forward pass per sample; deltas start from the squared-error output.
    const double inv = 1.0 / static_cast<double>(batch.size());
    for (std::size_t s = 0; s < batch.size(); ++s) {
      const double out = problem_.forward(theta, batch[s].features, &acts_[s]);
      delta_[s] = {(out - batch[s].label) * inv};
    }
  }

  std::vector<double> layer_grad(std::size_t m) override {
    if (m + 1 != cursor_) {
      throw std::logic_error("LayerGradWalker: layers must be walked M-1..0");
    }
    cursor_ = m;
    const auto& widths = problem_.widths();
    const std::size_t in = widths[m];
    const std::size_t out = widths[m + 1];
    const auto& w = theta_.layer(m);
    std::vector<double> g(theta_.layer_dim(m), 0.0);
    for (std::size_t s = 0; s < acts_.size(); ++s) {
      const auto& a_prev = acts_[s][m];
      const auto& delta = delta_[s];
      for (std::size_t r = 0; r < out; ++r) {
        const double d = delta[r];
        double* grow = g.data() + r * in;
        for (std::size_t c = 0; c < in; ++c) {
          grow[c] += d * a_prev[c];
        }
        g[in * out + r] += d;  // bias
      }
      if (m > 0) {
        // Propagate through the (not yet updated) weights and tanh.
        std::vector<double> prev(in, 0.0);
        for (std::size_t r = 0; r < out; ++r) {
          const double d = delta[r];
          const double* row = w.data() + r * in;
          for (std::size_t c = 0; c < in; ++c) {
            prev[c] += row[c] * d;
          }
        }
        for (std::size_t c = 0; c < in; ++c) {
          prev[c] *= 1.0 - a_prev[c] * a_prev[c];
        }
        delta_[s] = std::move(prev);
      }
    }
    return g;
  }

 private:
  const MlpProblem& problem_;
  const ParamVector& theta_;
  std::size_t cursor_;
  std::vector<std::vector<std::vector<double>>> acts_;  // [sample][layer]
  std::vector<std::vector<double>> delta_;              // [sample]
};

std::unique_ptr<LayerGradWalker> MlpProblem::backward(const ParamVector& theta,
                                                      Batch batch) const {
  check_batch(theta, batch);
  return std::make_unique<MlpWalker>(*this, theta, batch);
}

// --- 1-D double well --------------------------------------------------------

class DoubleWellProblem final : public Problem {
 public:
  DoubleWellProblem() {
    dataset_.emplace(std::vector<DataPoint>{{{0.0}, 0.0, 1}});
  }

  std::vector<std::size_t> layer_dims() const override { return {1}; }
  const Dataset& dataset() const override { return *dataset_; }

  double loss(const ParamVector& theta, Batch batch) const override {
    check_batch(theta, batch);
    const double t = theta.layer(0)[0];
    const double q = t * t - 1.0;
    return q * q;
  }

  std::unique_ptr<LayerGradWalker> backward(const ParamVector& theta,
                                            Batch batch) const override {
    check_batch(theta, batch);
    class Walker final : public LayerGradWalker {
     public:
      explicit Walker(double t) : t_(t) {}
      std::vector<double> layer_grad(std::size_t m) override {
        if (m != 0 || done_) {
          throw std::logic_error("LayerGradWalker: layers must be walked M-1..0");
        }
        done_ = true;
        return {4.0 * t_ * (t_ * t_ - 1.0)};
      }

     private:
      double t_;
      bool done_ = false;
    };
    return std::make_unique<Walker>(theta.layer(0)[0]);
  }

  ParamVector initial_theta(GaussStream& stream) const override {
    std::vector<std::vector<double>> layers{{0.5 * stream.next()}};
    return ParamVector(std::move(layers));
  }

 private:
  std::optional<Dataset> dataset_;
};

}  // namespace

std::unique_ptr<Problem> make_quadratic(const QuadraticSpec& spec) {
  return std::make_unique<QuadraticProblem>(spec, std::vector<DataPoint>{});
}

std::unique_ptr<Problem> make_quadratic_dataset(
    const QuadraticSpec& spec, std::vector<DataPoint> points) {
  if (points.empty()) {
    throw std::invalid_argument("make_quadratic_dataset: points are empty");
  }
  return std::make_unique<QuadraticProblem>(spec, std::move(points));
}

std::unique_ptr<Problem> make_logistic(const LogisticSpec& spec) {
  return std::make_unique<LogisticProblem>(spec);
}

std::unique_ptr<Problem> make_mlp(const MlpSpec& spec) {
  return std::make_unique<MlpProblem>(spec);
}

std::unique_ptr<Problem> make_double_well() {
  return std::make_unique<DoubleWellProblem>();
}

const std::vector<double>* quadratic_spectrum(const Problem& problem) {
  const auto* q = dynamic_cast<const QuadraticProblem*>(&problem);
  return q ? &q->spectrum() : nullptr;
}

}  // namespace addax
