#pragma once

#include <cstddef>
#include <initializer_list>
#include <new>
#include <span>
#include <string>
#include <vector>

namespace kgeeg {

// Cache-line aligned storage; vectorized reductions then sum in the same
// order for every buffer.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t alignment{64};

  AlignedAllocator() = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) {}

  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), alignment)); }
  void deallocate(T* p, std::size_t) { ::operator delete(p, alignment); }

  template <class U>
  bool operator==(const AlignedAllocator<U>&) const { return true; }
};

// Dense row-major double tensor. Model activations are laid out
// [batch x channels x time].
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
  Tensor(std::vector<std::size_t> shape, std::vector<double> values);

  static Tensor like(const Tensor& other, double fill = 0.0) {
    return Tensor(other.shape_, fill);
  }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  double& at(std::initializer_list<std::size_t> index);
  double at(std::initializer_list<std::size_t> index) const;

  void fill(double v);
  void add(const Tensor& other);  // elementwise +=, shapes must match
  void scale(double s);

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  // Throws ShapeError when shapes differ.
  void require_shape(const std::vector<std::size_t>& expected, const char* what) const;
  Tensor reshaped(std::vector<std::size_t> shape) const;
  std::string shape_string() const;

  bool operator==(const Tensor& other) const = default;

 private:
  std::size_t offset(std::initializer_list<std::size_t> index) const;

  std::vector<std::size_t> shape_;
  std::vector<double, AlignedAllocator<double>> values_;
};

std::string shape_string(const std::vector<std::size_t>& shape);
bool all_finite(std::span<const double> values);

}  // namespace kgeeg
