#pragma once

// Central finite-difference oracle, evaluated in 64-bit. Independent of the
// tape: it only calls the forward function under NoGradScope.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "irl/autograd.hpp"
#include "irl/tensor.hpp"

namespace irl::testing {

using LossFn = std::function<Tensor64(const std::vector<Tensor64>&)>;

inline Tensor64 random_tensor(std::mt19937& rng, const Shape& shape, double lo = -1.0,
                              double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(static_cast<size_t>(shape.numel()));
  for (auto& x : v) x = dist(rng);
  return Tensor64::from_data(shape, std::move(v));
}

// Values bounded away from zero, for inputs fed directly into kinks.
inline Tensor64 random_tensor_off_zero(std::mt19937& rng, const Shape& shape, double gap) {
  Tensor64 t = random_tensor(rng, shape);
  for (auto& x : t.mutable_data()) {
    if (std::abs(x) < gap) x = x < 0 ? -gap - std::abs(x) : gap + x;
  }
  return t;
}

inline std::vector<double> numeric_gradient(const LossFn& fn, std::vector<Tensor64> inputs,
                                            size_t which, double delta) {
  NoGradScope no_grad;
  auto values = inputs[which].mutable_data();
  std::vector<double> out(values.size());
  for (size_t i = 0; i < values.size(); ++i) {
    const double saved = values[i];
    values[i] = saved + delta;
    const double plus = fn(inputs).item();
    values[i] = saved - delta;
    const double minus = fn(inputs).item();
    values[i] = saved;
    out[i] = (plus - minus) / (2.0 * delta);
  }
  return out;
}

// ||a - n|| / max(||a||, ||n||, floor)
inline double relative_error(std::span<const double> analytic, std::span<const double> numeric) {
  double diff = 0.0, na = 0.0, nn = 0.0;
  for (size_t i = 0; i < analytic.size(); ++i) {
    diff += (analytic[i] - numeric[i]) * (analytic[i] - numeric[i]);
    na += analytic[i] * analytic[i];
    nn += numeric[i] * numeric[i];
  }
  const double denom = std::max({std::sqrt(na), std::sqrt(nn), 1e-12});
  return std::sqrt(diff) / denom;
}

// Returns the worst relative error over all inputs.
inline double max_gradient_error(const LossFn& fn, std::vector<Tensor64> inputs,
                                 double delta = 1e-3) {
  for (auto& t : inputs) {
    t.set_requires_grad(true);
    t.clear_grad();
  }
  Tape64 tape;
  {
    TapeScope64 scope(tape);
    Tensor64 loss = fn(inputs);
    tape.backward(loss);
  }
  double worst = 0.0;
  for (size_t k = 0; k < inputs.size(); ++k) {
    std::vector<double> analytic(inputs[k].grad().begin(), inputs[k].grad().end());
    if (analytic.empty()) analytic.assign(static_cast<size_t>(inputs[k].numel()), 0.0);
    auto numeric = numeric_gradient(fn, inputs, k, delta);
    worst = std::max(worst, relative_error(analytic, numeric));
  }
  return worst;
}

}  // namespace irl::testing
