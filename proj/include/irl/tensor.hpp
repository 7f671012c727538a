#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace irl {

// Extents of a rank-4 NCHW tensor. Width is the fastest-varying axis.
struct Shape {
  int64_t n = 0;
  int64_t c = 0;
  int64_t h = 0;
  int64_t w = 0;

  int64_t numel() const { return n * c * h * w; }
  int64_t plane() const { return h * w; }
  bool operator==(const Shape&) const = default;
  std::string str() const;
};

namespace detail {

template <typename T>
struct TensorImpl {
  Shape shape;
  std::vector<T> data;
  std::vector<T> grad;  // empty when absent
  bool requires_grad = false;
  bool is_leaf = true;
};

}  // namespace detail

// Handle to shared tensor storage. Copies alias the same buffers; use
// clone() for an independent value.
template <typename T>
class BasicTensor {
 public:
  using value_type = T;
  using Impl = detail::TensorImpl<T>;

  BasicTensor() = default;
  explicit BasicTensor(std::shared_ptr<Impl> impl) : impl_(std::move(impl)) {}

  static BasicTensor zeros(const Shape& shape);
  static BasicTensor full(const Shape& shape, T value);
  static BasicTensor from_data(const Shape& shape, std::vector<T> data);
  // Rank-1 convenience: shape (1, 1, 1, values.size()).
  static BasicTensor vector(std::vector<T> values);
  static BasicTensor scalar(T value);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const { return impl_->shape; }
  int64_t numel() const { return impl_->shape.numel(); }

  std::span<const T> data() const { return impl_->data; }
  // Optimizer updates and initializers write through this; graph ops never do.
  std::span<T> mutable_data() { return impl_->data; }

  T item() const;
  T at(int64_t n, int64_t c, int64_t h, int64_t w) const;

  bool requires_grad() const { return impl_->requires_grad; }
  void set_requires_grad(bool flag);

  bool has_grad() const { return !impl_->grad.empty(); }
  std::span<const T> grad() const { return impl_->grad; }
  std::span<T> mutable_grad();
  void zero_grad();
  void clear_grad() { impl_->grad.clear(); }

  BasicTensor clone() const;   // deep copy of data, no grad, no graph history
  BasicTensor detach() const;  // same as clone(): values only

  Impl* impl() const { return impl_.get(); }
  const std::shared_ptr<Impl>& shared_impl() const { return impl_; }

 private:
  std::shared_ptr<Impl> impl_;
};

using Tensor = BasicTensor<float>;
using Tensor64 = BasicTensor<double>;

// Cast between precisions (values only). Used to mirror a float graph in
// double for finite-difference checks.
template <typename To, typename From>
BasicTensor<To> cast(const BasicTensor<From>& t);

}  // namespace irl
