#include <cmath>
#include <random>

#include "irl/errors.hpp"
#include "irl/model.hpp"
#include "irl/ops.hpp"

namespace irl {

const Tensor& BranchOutput::feature(int stage) const {
  if (stage == 0) return body;
  auto it = taps.find(stage);
  if (it == taps.end()) {
    throw ShapeError("branch exposes no tap for stage " + std::to_string(stage));
  }
  return it->second;
}

Branch::Branch(const ModelConfig& cfg, int index) {
  validate_config(cfg);
  if (index < 0 || index > cfg.residual_count()) {
    throw ConfigError("branch index " + std::to_string(index) + " out of range");
  }
  spec_ = cfg.branches[index];
  n_colors_ = cfg.n_colors;
  res_scale_ = static_cast<float>(cfg.res_scale);

  const auto factors = upsample_factors(cfg.scale);
  const int level = input_level(cfg, index);
  stage_factors_.assign(factors.begin() + level, factors.end());

  if (index == 0) {
    in_channels_ = cfg.n_colors;
  } else {
    for (const TapRef& tap : spec_.input_taps) in_channels_ += cfg.branches[tap.branch].n_feats;
  }

  const int f = spec_.n_feats;
  add_conv("head", in_channels_, f);
  for (int b = 0; b < spec_.n_blocks; ++b) {
    add_conv("body." + std::to_string(b) + ".conv1", f, f);
    add_conv("body." + std::to_string(b) + ".conv2", f, f);
  }
  add_conv("body.tail", f, f);
  for (size_t k = 0; k < stage_factors_.size(); ++k) {
    const int r = stage_factors_[k];
    add_conv("up." + std::to_string(k + 1), f, f * r * r);
  }
  add_conv("out", f, n_colors_);
}

void Branch::add_conv(const std::string& name, int in_ch, int out_ch) {
  Tensor w = Tensor::zeros({out_ch, in_ch, 3, 3});
  Tensor b = Tensor::zeros({1, 1, 1, out_ch});
  w.set_requires_grad(true);
  b.set_requires_grad(true);
  params_.push_back({name + ".weight", w});
  params_.push_back({name + ".bias", b});
}

Tensor& Branch::parameter(const std::string& name) {
  for (auto& p : params_) {
    if (p.name == name) return p.value;
  }
  throw std::out_of_range("no parameter named '" + name + "'");
}

int64_t Branch::parameter_count() const {
  int64_t total = 0;
  for (const auto& p : params_) total += p.value.numel();
  return total;
}

void Branch::initialize(uint64_t seed, bool zero_output) {
  std::mt19937_64 rng(seed);
  for (size_t slot = 0; slot + 1 < params_.size(); slot += 2) {
    Tensor& w = params_[slot].value;
    Tensor& b = params_[slot + 1].value;
    const bool is_output = slot + 2 == params_.size();
    const int64_t fan_in = w.shape().c * w.shape().h * w.shape().w;
    const float bound = 1.0f / std::sqrt(static_cast<float>(fan_in));
    std::uniform_real_distribution<float> dist(-bound, bound);
    for (auto& v : w.mutable_data()) v = is_output && zero_output ? 0.0f : dist(rng);
    for (auto& v : b.mutable_data()) v = is_output && zero_output ? 0.0f : dist(rng);
  }
}

void Branch::freeze() {
  frozen_ = true;
  for (auto& p : params_) p.value.set_requires_grad(false);
}

BranchOutput Branch::forward(const Tensor& input) const {
  if (input.shape().c != in_channels_) {
    throw ShapeError("branch " + std::to_string(spec_.index) + " expects " +
                     std::to_string(in_channels_) + " input channels, got " + input.shape().str());
  }
  size_t slot = 0;
  auto conv = [&](const Tensor& x) {
    Tensor y = conv2d(x, param(slot), param(slot + 1), 1);
    slot += 2;
    return y;
  };

  BranchOutput out;
  const Tensor head = conv(input);
  Tensor x = head;
  for (int b = 0; b < spec_.n_blocks; ++b) {
    Tensor r = conv(relu(conv(x)));
    if (res_scale_ != 1.0f) r = scale(r, res_scale_);
    x = add(x, r);
  }
  x = add(conv(x), head);
  out.body = x;
  for (size_t k = 0; k < stage_factors_.size(); ++k) {
    x = pixel_shuffle(conv(x), stage_factors_[k]);
    out.taps.emplace(static_cast<int>(k + 1), x);
  }
  out.image = conv(x);
  return out;
}

Branch build_master(const ModelConfig& cfg, uint64_t seed, bool zero_output) {
  Branch master(cfg, 0);
  master.initialize(seed, zero_output);
  return master;
}

Branch build_residual_branch(const ModelConfig& cfg, int index,
                             std::span<const Branch> predecessors, uint64_t seed) {
  if (index < 1 || index > cfg.residual_count()) {
    throw ConfigError("residual branch index " + std::to_string(index) + " outside 1.." +
                      std::to_string(cfg.residual_count()));
  }
  if (static_cast<int>(predecessors.size()) != index) {
    throw ConfigError("residual branch " + std::to_string(index) + " needs branches 0.." +
                      std::to_string(index - 1) + " built first, got " +
                      std::to_string(predecessors.size()));
  }
  const auto factors = upsample_factors(cfg.scale);
  const int level = input_level(cfg, index);
  for (const TapRef& tap : cfg.branches[index].input_taps) {
    const Branch& src = predecessors[tap.branch];
    if (src.index() != tap.branch) {
      throw ConfigError("predecessor list out of order at branch " + std::to_string(tap.branch));
    }
    if (tap.stage > static_cast<int>(src.stage_factors().size())) {
      throw ShapeError("branch " + std::to_string(tap.branch) + " has no stage-" +
                       std::to_string(tap.stage) + " tap");
    }
    const int src_level = static_cast<int>(factors.size() - src.stage_factors().size());
    if (src_level + tap.stage != level) {
      throw ShapeError("tap scale mismatch: branch " + std::to_string(tap.branch) + " stage " +
                       std::to_string(tap.stage) + " is not at level " + std::to_string(level));
    }
    if (src.spec().n_feats != cfg.branches[tap.branch].n_feats) {
      throw ShapeError("predecessor width differs from the config");
    }
  }
  Branch branch(cfg, index);
  branch.initialize(seed, /*zero_output=*/true);
  return branch;
}

void freeze(Branch& branch) { branch.freeze(); }

}  // namespace irl
