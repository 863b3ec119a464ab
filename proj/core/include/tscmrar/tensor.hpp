#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace tscmrar {

// Extents of a dense tensor of rank 1..3, outermost first.
class Shape {
 public:
  Shape() = default;
  Shape(std::initializer_list<std::size_t> extents);
  explicit Shape(std::span<const std::size_t> extents);

  std::size_t rank() const { return extents_.size(); }
  std::size_t operator[](std::size_t axis) const { return extents_[axis]; }
  std::size_t numel() const;
  std::span<const std::size_t> extents() const { return extents_; }

  bool operator==(const Shape&) const = default;

  std::string str() const;  // "[16x37]"

 private:
  std::vector<std::size_t> extents_;
};

// Row-major dense array of doubles.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor vector(std::initializer_list<double> values);
  static Tensor scalar(double value) { return Tensor(Shape{1}, {value}); }

  const Shape& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  // 2-D / 3-D element access (no bounds checks).
  double& at(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
  double at(std::size_t r, std::size_t c) const {
    return data_[r * shape_[1] + c];
  }
  double& at(std::size_t a, std::size_t b, std::size_t c) {
    return data_[(a * shape_[1] + b) * shape_[2] + c];
  }
  double at(std::size_t a, std::size_t b, std::size_t c) const {
    return data_[(a * shape_[1] + b) * shape_[2] + c];
  }

  void fill(double value);
  Tensor reshaped(Shape shape) const;

  // True when every element is finite.
  bool is_finite() const;
  // Throws NumericError naming `what` if any element is NaN/Inf.
  void require_finite(const std::string& what) const;

  bool operator==(const Tensor&) const = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

// Weights take part in L2 regularization, biases do not.
enum class ParamRole { kWeight, kBias };

// A named trainable tensor together with its gradient accumulator.
struct ParamTensor {
  ParamTensor(std::string name, Tensor value, ParamRole role = ParamRole::kWeight);

  std::string name;
  Tensor value;
  Tensor grad;
  ParamRole role;

  void zero_grad() { grad.fill(0.0); }
};

}  // namespace tscmrar
