#include "tscmrar/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <utility>

#include "tscmrar/error.hpp"

namespace tscmrar {

namespace {

void check_rank(std::size_t rank) {
  if (rank < 1 || rank > 3) {
    throw ShapeError("tensor rank must be 1..3, got " + std::to_string(rank));
  }
}

}  // namespace

Shape::Shape(std::initializer_list<std::size_t> extents) : extents_(extents) {
  check_rank(extents_.size());
}

Shape::Shape(std::span<const std::size_t> extents)
    : extents_(extents.begin(), extents.end()) {
  check_rank(extents_.size());
}

std::size_t Shape::numel() const {
  if (extents_.empty()) return 0;
  return std::accumulate(extents_.begin(), extents_.end(), std::size_t{1},
                         std::multiplies<>());
}

std::string Shape::str() const {
  std::string out = "[";
  for (std::size_t i = 0; i < extents_.size(); ++i) {
    if (i) out += 'x';
    out += std::to_string(extents_[i]);
  }
  return out + "]";
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), data_(shape_.numel(), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != shape_.numel()) {
    throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                     " does not match shape " + shape_.str());
  }
}

Tensor Tensor::vector(std::initializer_list<double> values) {
  return Tensor(Shape{values.size()}, std::vector<double>(values));
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

Tensor Tensor::reshaped(Shape shape) const {
  if (shape.numel() != data_.size()) {
    throw ShapeError("cannot reshape " + shape_.str() + " to " + shape.str());
  }
  return Tensor(std::move(shape), data_);
}

bool Tensor::is_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

void Tensor::require_finite(const std::string& what) const {
  if (!is_finite()) throw NumericError(what + " contains NaN or Inf");
}

ParamTensor::ParamTensor(std::string name_in, Tensor value_in, ParamRole role_in)
    : name(std::move(name_in)),
      value(std::move(value_in)),
      grad(value.shape()),
      role(role_in) {}

}  // namespace tscmrar
