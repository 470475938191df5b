#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace addax {

// Layered parameter state. The layer arrays are the objects the optimizers
// mutate in place; everything else in the library treats them as read-only.
class ParamVector {
 public:
  // layers must be nonempty and every layer must be nonempty and finite.
  explicit ParamVector(std::vector<std::vector<double>> layers);

  static ParamVector zeros(std::span<const std::size_t> layer_dims);

  std::size_t layer_count() const { return layers_.size(); }
  std::size_t dim() const { return total_dim_; }
  std::size_t layer_dim(std::size_t m) const { return layers_[m].size(); }
  std::size_t max_layer_dim() const;

  std::vector<double>& layer(std::size_t m) { return layers_[m]; }
  const std::vector<double>& layer(std::size_t m) const { return layers_[m]; }

  // Concatenation of all layers, in layer order.
  std::vector<double> flatten() const;

  // Writes flat (length dim()) back into the layer structure.
  void assign_flat(std::span<const double> flat);

  bool all_finite() const;

  // Largest absolute entry; used for relative restoration checks.
  double max_abs() const;

 private:
  std::vector<std::vector<double>> layers_;
  std::size_t total_dim_;
};

}  // namespace addax
