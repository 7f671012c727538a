#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "irl/tensor.hpp"

namespace irl {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.99;
  double eps = 1e-8;
};

// Moments for one parameter tensor.
struct AdamState {
  std::vector<float> m;
  std::vector<float> v;
  int64_t step = 0;
};

// One bias-corrected Adam update of `param` in place. `grad` may be empty,
// which is treated as an all-zero gradient.
void adam_step(std::span<float> param, std::span<const float> grad, AdamState& state,
               double lr, double beta1, double beta2, double eps);

// Owns the moments for an ordered parameter list. The list must be passed in
// the same order on every step.
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  void step(std::span<Tensor> params);
  void step(std::vector<Tensor>& params) { step(std::span<Tensor>(params)); }

  void set_lr(double lr) { config_.lr = lr; }
  const AdamConfig& config() const { return config_; }

  std::vector<AdamState>& states() { return states_; }
  const std::vector<AdamState>& states() const { return states_; }

 private:
  AdamConfig config_;
  std::vector<AdamState> states_;
};

}  // namespace irl
