#include "irl/adam.hpp"

#include <cmath>

#include "irl/errors.hpp"

namespace irl {

void adam_step(std::span<float> param, std::span<const float> grad, AdamState& state,
               double lr, double beta1, double beta2, double eps) {
  if (!grad.empty() && grad.size() != param.size()) {
    throw ShapeError("adam_step: gradient length " + std::to_string(grad.size()) +
                     " != parameter length " + std::to_string(param.size()));
  }
  if (state.m.empty()) {
    state.m.assign(param.size(), 0.0f);
    state.v.assign(param.size(), 0.0f);
  }
  if (state.m.size() != param.size() || state.v.size() != param.size()) {
    throw ShapeError("adam_step: moment buffers do not match parameter length");
  }
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double bias1 = 1.0 - std::pow(beta1, t);
  const double bias2 = 1.0 - std::pow(beta2, t);
  for (size_t i = 0; i < param.size(); ++i) {
    const double g = grad.empty() ? 0.0 : static_cast<double>(grad[i]);
    const double m = beta1 * state.m[i] + (1.0 - beta1) * g;
    const double v = beta2 * state.v[i] + (1.0 - beta2) * g * g;
    state.m[i] = static_cast<float>(m);
    state.v[i] = static_cast<float>(v);
    const double m_hat = m / bias1;
    const double v_hat = v / bias2;
    param[i] = static_cast<float>(static_cast<double>(param[i]) -
                                  lr * m_hat / (std::sqrt(v_hat) + eps));
  }
}

void Adam::step(std::span<Tensor> params) {
  if (states_.empty()) {
    states_.resize(params.size());
  }
  if (states_.size() != params.size()) {
    throw ShapeError("Adam::step: parameter list changed size between steps");
  }
  for (size_t i = 0; i < params.size(); ++i) {
    Tensor& p = params[i];
    adam_step(p.mutable_data(), p.grad(), states_[i], config_.lr, config_.beta1, config_.beta2,
              config_.eps);
  }
}

}  // namespace irl
