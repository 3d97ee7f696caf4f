#include "kgeeg/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "kgeeg/error.hpp"

namespace kgeeg {

namespace {

std::size_t product(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

}  // namespace

std::string shape_string(const std::vector<std::size_t>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

bool all_finite(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(),
                     [](double v) { return std::isfinite(v); });
}

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), values_(product(shape_), fill) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(values.begin(), values.end()) {
  if (values_.size() != product(shape_)) {
    throw ShapeError("tensor of shape " + kgeeg::shape_string(shape_) + " given " +
                     std::to_string(values_.size()) + " values");
  }
}

std::size_t Tensor::offset(std::initializer_list<std::size_t> index) const {
  if (index.size() != shape_.size()) throw ShapeError("index rank mismatch");
  std::size_t off = 0;
  std::size_t d = 0;
  for (std::size_t i : index) {
    if (i >= shape_[d]) throw ShapeError("index out of range");
    off = off * shape_[d] + i;
    ++d;
  }
  return off;
}

double& Tensor::at(std::initializer_list<std::size_t> index) {
  return values_[offset(index)];
}

double Tensor::at(std::initializer_list<std::size_t> index) const {
  return values_[offset(index)];
}

void Tensor::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

void Tensor::add(const Tensor& other) {
  if (!same_shape(other)) {
    throw ShapeError("cannot add " + other.shape_string() + " to " + shape_string());
  }
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
}

void Tensor::scale(double s) {
  for (auto& v : values_) v *= s;
}

void Tensor::require_shape(const std::vector<std::size_t>& expected,
                           const char* what) const {
  if (shape_ != expected) {
    throw ShapeError(std::string(what) + ": expected " + kgeeg::shape_string(expected) +
                     ", got " + shape_string());
  }
}

Tensor Tensor::reshaped(std::vector<std::size_t> shape) const {
  if (product(shape) != values_.size()) {
    throw ShapeError("cannot reshape " + shape_string() + " to " +
                     kgeeg::shape_string(shape));
  }
  Tensor out = *this;
  out.shape_ = std::move(shape);
  return out;
}

std::string Tensor::shape_string() const { return kgeeg::shape_string(shape_); }

}  // namespace kgeeg
