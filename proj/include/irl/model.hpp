#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "irl/tensor.hpp"

namespace irl {

enum class LossKind { kL1, kL2 };
enum class Variant { kUp, kDown };

std::string to_string(LossKind loss);
std::string to_string(Variant variant);
LossKind parse_loss(const std::string& text);
Variant parse_variant(const std::string& text);

// Reference to the features of branch `branch` after its `stage`-th internal
// upsampling stage (stage 0: body features before any upsampling).
struct TapRef {
  int branch = 0;
  int stage = 0;
  bool operator==(const TapRef&) const = default;
};

struct BranchSpec {
  int index = 0;
  int n_blocks = 1;
  int n_feats = 16;
  LossKind loss = LossKind::kL1;
  Variant variant = Variant::kUp;
  std::vector<TapRef> input_taps;
  bool operator==(const BranchSpec&) const = default;
};

struct ModelConfig {
  int scale = 4;
  int n_colors = 3;
  double res_scale = 1.0;
  std::vector<BranchSpec> branches;  // index 0 is the master

  // Residual branch count n (branches.size() == n + 1).
  int residual_count() const { return static_cast<int>(branches.size()) - 1; }
  bool operator==(const ModelConfig&) const = default;
};

// Upsampling stages for a scale: x2 -> {2}, x3 -> {3}, x4 -> {2, 2}.
std::vector<int> upsample_factors(int scale);

// Residual branches used for a scale: one for x2/x3, two for x4.
int residual_branch_count(int scale);

// Resolution level at which branch `index` consumes its input. Level L means
// "after the first L upsampling stages"; the master starts at level 0.
int input_level(const ModelConfig& cfg, int index);

// Fully wired configuration: block counts halve per branch (floor 1), taps
// follow [F_0^i, F_1^(i-1), ..., F_(i-1)^1] for the up variant and the
// pre-upsample equivalents for the down variant.
ModelConfig make_model_config(int scale, int master_blocks, int n_feats,
                              Variant variant = Variant::kUp,
                              LossKind master_loss = LossKind::kL1,
                              LossKind residual_loss = LossKind::kL2, double res_scale = 1.0);

// Throws ConfigError when the invariants above do not hold.
void validate_config(const ModelConfig& cfg);

struct NamedParam {
  std::string name;
  Tensor value;
};

struct BranchOutput {
  Tensor image;              // P_i, (n, 3, h*s, w*s)
  Tensor body;               // stage-0 features, before any upsampling
  std::map<int, Tensor> taps;  // stage k >= 1 -> features after k-th stage

  const Tensor& feature(int stage) const;
};

// One network of the stack: the master B_0 or a residual branch B_i.
//
// Layout: head conv -> n_blocks x (conv, relu, conv, scaled skip) -> body
// conv + long skip -> one (conv, pixel_shuffle) per remaining upsampling
// stage -> output conv to n_colors.
class Branch {
 public:
  Branch(const ModelConfig& cfg, int index);

  const BranchSpec& spec() const { return spec_; }
  int index() const { return spec_.index; }
  int in_channels() const { return in_channels_; }
  // Factors of the upsampling stages this branch performs itself.
  const std::vector<int>& stage_factors() const { return stage_factors_; }

  BranchOutput forward(const Tensor& input) const;

  std::vector<NamedParam>& parameters() { return params_; }
  const std::vector<NamedParam>& parameters() const { return params_; }
  Tensor& parameter(const std::string& name);
  int64_t parameter_count() const;
  int conv_count() const { return static_cast<int>(params_.size() / 2); }

  // PyTorch-style uniform(+-1/sqrt(fan_in)) init; the output conv is zeroed
  // when `zero_output` is set.
  void initialize(uint64_t seed, bool zero_output);

  bool frozen() const { return frozen_; }
  // Marks every parameter non-trainable and drops its gradient. Idempotent.
  void freeze();

 private:
  const Tensor& param(size_t slot) const { return params_[slot].value; }
  void add_conv(const std::string& name, int in_ch, int out_ch);

  BranchSpec spec_;
  int in_channels_ = 0;
  int n_colors_ = 3;
  float res_scale_ = 1.0f;
  std::vector<int> stage_factors_;
  std::vector<NamedParam> params_;
  bool frozen_ = false;
};

Branch build_master(const ModelConfig& cfg, uint64_t seed, bool zero_output = false);

// Requires `predecessors` to hold branches 0..i-1 exactly; the output conv of
// the new branch starts at zero.
Branch build_residual_branch(const ModelConfig& cfg, int index,
                             std::span<const Branch> predecessors, uint64_t seed);

struct StackOutput {
  std::vector<Tensor> preds;
  std::vector<BranchOutput> branches;
};

// P_0 = B_0(lr); P_i = B_i(concat of declared taps).
StackOutput forward(std::span<const Branch> branches, const Tensor& lr);

// R_i = hr - sum_{k<i} P_k (i == 0: hr). Values only, no graph history.
Tensor residual_label(const Tensor& hr, std::span<const Tensor> preds, int index);

// sum_i P_i, no clipping.
Tensor compose(std::span<const Tensor> preds);

void freeze(Branch& branch);

// Parameters of every non-frozen branch, in branch then declaration order.
std::vector<Tensor> trainable_parameters(std::span<Branch> branches);

// Little-endian float32 dump of every parameter, prefixed by name and shape.
std::vector<uint8_t> serialize_parameters(const Branch& branch);
std::string sha256_hex(std::span<const uint8_t> bytes);
std::string parameter_digest(const Branch& branch);

// Conservative LR-space context radius of the stack: one pixel per conv.
int context_radius(std::span<const Branch> branches);

}  // namespace irl
