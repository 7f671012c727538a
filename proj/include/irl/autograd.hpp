#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "irl/tensor.hpp"

namespace irl {

// Records differentiable operations in execution order. An op is recorded
// only while a tape is active on the calling thread and at least one input
// requires a gradient; everything else runs in inference mode.
template <typename T>
class BasicTape {
 public:
  using Impl = detail::TensorImpl<T>;

  struct Record {
    std::string op;
    std::vector<std::shared_ptr<Impl>> inputs;
    std::shared_ptr<Impl> output;
    std::function<void()> backward;
  };

  BasicTape() = default;
  BasicTape(const BasicTape&) = delete;
  BasicTape& operator=(const BasicTape&) = delete;

  void record(Record rec) { records_.push_back(std::move(rec)); }
  size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const std::vector<Record>& records() const { return records_; }
  void clear() { records_.clear(); }

  // Reverse-mode sweep. Intermediate gradients are reset to zero first;
  // leaf gradients accumulate onto whatever the caller left there.
  void backward(const BasicTensor<T>& loss);

 private:
  std::vector<Record> records_;
};

using Tape = BasicTape<float>;
using Tape64 = BasicTape<double>;

// Thread-local pointer to the tape receiving new records (nullptr: none).
template <typename T>
BasicTape<T>*& active_tape();

// Activates a tape for the lifetime of the scope; restores the previous one.
template <typename T>
class BasicTapeScope {
 public:
  explicit BasicTapeScope(BasicTape<T>& tape) : previous_(active_tape<T>()) {
    active_tape<T>() = &tape;
  }
  ~BasicTapeScope() { active_tape<T>() = previous_; }
  BasicTapeScope(const BasicTapeScope&) = delete;
  BasicTapeScope& operator=(const BasicTapeScope&) = delete;

 private:
  BasicTape<T>* previous_;
};

// Suspends recording (both precisions) for the lifetime of the scope.
class NoGradScope {
 public:
  NoGradScope();
  ~NoGradScope();
  NoGradScope(const NoGradScope&) = delete;
  NoGradScope& operator=(const NoGradScope&) = delete;

 private:
  BasicTape<float>* previous_float_;
  BasicTape<double>* previous_double_;
};

using TapeScope = BasicTapeScope<float>;
using TapeScope64 = BasicTapeScope<double>;

// Convenience for tape.backward(loss) on the active tape.
template <typename T>
void backward(const BasicTensor<T>& loss);

}  // namespace irl
