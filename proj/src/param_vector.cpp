#include "addax/param_vector.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace addax {

ParamVector::ParamVector(std::vector<std::vector<double>> layers)
    : layers_(std::move(layers)), total_dim_(0) {
  if (layers_.empty()) {
    throw std::invalid_argument("ParamVector: layer count must be >= 1");
  }
  for (const auto& layer : layers_) {
    if (layer.empty()) {
      throw std::invalid_argument("ParamVector: every layer must be nonempty");
    }
    total_dim_ += layer.size();
  }
  if (!all_finite()) {
    throw std::invalid_argument("ParamVector: entries must be finite");
  }
}

ParamVector ParamVector::zeros(std::span<const std::size_t> layer_dims) {
  std::vector<std::vector<double>> layers;
  layers.reserve(layer_dims.size());
  for (std::size_t d : layer_dims) {
    layers.emplace_back(d, 0.0);
  }
  return ParamVector(std::move(layers));
}

std::size_t ParamVector::max_layer_dim() const {
  std::size_t best = 0;
  for (const auto& layer : layers_) {
    best = std::max(best, layer.size());
  }
  return best;
}

std::vector<double> ParamVector::flatten() const {
  std::vector<double> flat;
  flat.reserve(total_dim_);
  for (const auto& layer : layers_) {
    flat.insert(flat.end(), layer.begin(), layer.end());
  }
  return flat;
}

void ParamVector::assign_flat(std::span<const double> flat) {
  if (flat.size() != total_dim_) {
    throw std::logic_error("ParamVector::assign_flat: dimension mismatch");
  }
  std::size_t offset = 0;
  for (auto& layer : layers_) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(offset),
                layer.size(), layer.begin());
    offset += layer.size();
  }
}

bool ParamVector::all_finite() const {
  for (const auto& layer : layers_) {
    for (double v : layer) {
      if (!std::isfinite(v)) {
        return false;
      }
    }
  }
  return true;
}

double ParamVector::max_abs() const {
  double best = 0.0;
  for (const auto& layer : layers_) {
    for (double v : layer) {
      best = std::max(best, std::abs(v));
    }
  }
  return best;
}

}  // namespace addax
