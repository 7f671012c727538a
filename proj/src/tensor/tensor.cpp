#include "irl/tensor.hpp"

#include <algorithm>
#include <sstream>

#include "irl/autograd.hpp"
#include "irl/errors.hpp"

namespace irl {

std::string Shape::str() const {
  std::ostringstream os;
  os << n << "x" << c << "x" << h << "x" << w;
  return os.str();
}

namespace {

void check_extents(const Shape& s) {
  if (s.n < 0 || s.c < 0 || s.h < 0 || s.w < 0) {
    throw ShapeError("negative tensor extent: " + s.str());
  }
}

}  // namespace

template <typename T>
BasicTensor<T> BasicTensor<T>::zeros(const Shape& shape) {
  return full(shape, T(0));
}

template <typename T>
BasicTensor<T> BasicTensor<T>::full(const Shape& shape, T value) {
  check_extents(shape);
  auto impl = std::make_shared<Impl>();
  impl->shape = shape;
  impl->data.assign(static_cast<size_t>(shape.numel()), value);
  return BasicTensor(std::move(impl));
}

template <typename T>
BasicTensor<T> BasicTensor<T>::from_data(const Shape& shape, std::vector<T> data) {
  check_extents(shape);
  if (static_cast<int64_t>(data.size()) != shape.numel()) {
    throw ShapeError("data length " + std::to_string(data.size()) + " does not match shape " +
                     shape.str());
  }
  auto impl = std::make_shared<Impl>();
  impl->shape = shape;
  impl->data = std::move(data);
  return BasicTensor(std::move(impl));
}

template <typename T>
BasicTensor<T> BasicTensor<T>::vector(std::vector<T> values) {
  const Shape shape{1, 1, 1, static_cast<int64_t>(values.size())};
  return from_data(shape, std::move(values));
}

template <typename T>
BasicTensor<T> BasicTensor<T>::scalar(T value) {
  return full(Shape{1, 1, 1, 1}, value);
}

template <typename T>
T BasicTensor<T>::item() const {
  if (numel() != 1) {
    throw ShapeError("item() on non-scalar tensor " + shape().str());
  }
  return impl_->data[0];
}

template <typename T>
T BasicTensor<T>::at(int64_t n, int64_t c, int64_t h, int64_t w) const {
  const Shape& s = impl_->shape;
  return impl_->data[static_cast<size_t>(((n * s.c + c) * s.h + h) * s.w + w)];
}

template <typename T>
void BasicTensor<T>::set_requires_grad(bool flag) {
  impl_->requires_grad = flag;
  if (!flag) {
    impl_->grad.clear();
  }
}

template <typename T>
std::span<T> BasicTensor<T>::mutable_grad() {
  if (impl_->grad.empty()) {
    impl_->grad.assign(impl_->data.size(), T(0));
  }
  return impl_->grad;
}

template <typename T>
void BasicTensor<T>::zero_grad() {
  if (!impl_->grad.empty()) {
    std::fill(impl_->grad.begin(), impl_->grad.end(), T(0));
  }
}

template <typename T>
BasicTensor<T> BasicTensor<T>::clone() const {
  return from_data(impl_->shape, impl_->data);
}

template <typename T>
BasicTensor<T> BasicTensor<T>::detach() const {
  return clone();
}

template <typename To, typename From>
BasicTensor<To> cast(const BasicTensor<From>& t) {
  std::vector<To> out(t.data().begin(), t.data().end());
  return BasicTensor<To>::from_data(t.shape(), std::move(out));
}

template class BasicTensor<float>;
template class BasicTensor<double>;
template BasicTensor<double> cast<double, float>(const BasicTensor<float>&);
template BasicTensor<float> cast<float, double>(const BasicTensor<double>&);
template BasicTensor<float> cast<float, float>(const BasicTensor<float>&);
template BasicTensor<double> cast<double, double>(const BasicTensor<double>&);

// ---------------------------------------------------------------------------
// Tape

template <typename T>
BasicTape<T>*& active_tape() {
  thread_local BasicTape<T>* tape = nullptr;
  return tape;
}

template BasicTape<float>*& active_tape<float>();
template BasicTape<double>*& active_tape<double>();

NoGradScope::NoGradScope()
    : previous_float_(active_tape<float>()), previous_double_(active_tape<double>()) {
  active_tape<float>() = nullptr;
  active_tape<double>() = nullptr;
}

NoGradScope::~NoGradScope() {
  active_tape<float>() = previous_float_;
  active_tape<double>() = previous_double_;
}

template <typename T>
void BasicTape<T>::backward(const BasicTensor<T>& loss) {
  if (!loss.defined() || loss.numel() != 1) {
    throw ShapeError("backward() needs a scalar loss, got " +
                     (loss.defined() ? loss.shape().str() : std::string("undefined")));
  }
  if (records_.empty()) {
    throw std::logic_error("backward() on an empty tape");
  }
  if (!loss.requires_grad()) {
    throw std::logic_error("backward() on a loss that does not depend on trainable tensors");
  }
  for (auto& rec : records_) {
    rec.output->grad.assign(rec.output->data.size(), T(0));
  }
  auto* out = loss.impl();
  out->grad.assign(1, T(1));
  for (auto it = records_.rbegin(); it != records_.rend(); ++it) {
    it->backward();
  }
}

template class BasicTape<float>;
template class BasicTape<double>;

template <typename T>
void backward(const BasicTensor<T>& loss) {
  auto* tape = active_tape<T>();
  if (tape == nullptr) {
    throw std::logic_error("backward() without an active tape");
  }
  tape->backward(loss);
}

template void backward<float>(const BasicTensor<float>&);
template void backward<double>(const BasicTensor<double>&);

}  // namespace irl
