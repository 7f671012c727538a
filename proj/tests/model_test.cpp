#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "irl/adam.hpp"
#include "irl/autograd.hpp"
#include "irl/errors.hpp"
#include "irl/model.hpp"
#include "irl/ops.hpp"

namespace irl {
namespace {

Tensor random_image(uint32_t seed, const Shape& shape) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<float> dist(0.f, 1.f);
  std::vector<float> v(static_cast<size_t>(shape.numel()));
  for (auto& x : v) x = dist(rng);
  return Tensor::from_data(shape, std::move(v));
}

std::vector<Branch> build_stack(const ModelConfig& cfg, uint64_t seed) {
  std::vector<Branch> stack;
  stack.push_back(build_master(cfg, seed));
  for (int i = 1; i <= cfg.residual_count(); ++i) {
    stack.push_back(build_residual_branch(cfg, i, stack, seed + i));
  }
  return stack;
}

bool bit_equal(const Tensor& a, const Tensor& b) {
  if (!(a.shape() == b.shape())) return false;
  for (size_t i = 0; i < a.data().size(); ++i) {
    if (a.data()[i] != b.data()[i]) return false;
  }
  return true;
}

TEST(ModelConfig, HalvingRuleAndBranchCount) {
  ModelConfig cfg = make_model_config(4, 8, 16);
  ASSERT_EQ(cfg.residual_count(), 2);
  EXPECT_EQ(cfg.branches[0].n_blocks, 8);
  EXPECT_EQ(cfg.branches[1].n_blocks, 4);
  EXPECT_EQ(cfg.branches[2].n_blocks, 2);
  EXPECT_EQ(make_model_config(2, 4, 8).residual_count(), 1);
  EXPECT_EQ(make_model_config(3, 4, 8).residual_count(), 1);
  EXPECT_EQ(make_model_config(4, 1, 8).branches[2].n_blocks, 1);
  EXPECT_EQ(cfg.branches[0].loss, LossKind::kL1);
  EXPECT_EQ(cfg.branches[1].loss, LossKind::kL2);
}

TEST(ModelConfig, TapWiringFollowsIncrementalRule) {
  ModelConfig up = make_model_config(4, 4, 16, Variant::kUp);
  EXPECT_TRUE(up.branches[0].input_taps.empty());
  EXPECT_EQ(up.branches[1].input_taps, (std::vector<TapRef>{{0, 1}}));
  EXPECT_EQ(up.branches[2].input_taps, (std::vector<TapRef>{{0, 2}, {1, 1}}));
  ModelConfig down = make_model_config(4, 4, 16, Variant::kDown);
  EXPECT_EQ(down.branches[1].input_taps, (std::vector<TapRef>{{0, 0}}));
  EXPECT_EQ(down.branches[2].input_taps, (std::vector<TapRef>{{0, 1}, {1, 1}}));
}

TEST(ModelConfig, RejectsInvalid) {
  EXPECT_THROW(make_model_config(5, 4, 16), ConfigError);
  ModelConfig cfg = make_model_config(4, 8, 16);
  cfg.branches[1].n_blocks = 8;
  EXPECT_THROW(validate_config(cfg), ConfigError);
  cfg = make_model_config(4, 8, 16);
  cfg.branches.pop_back();
  EXPECT_THROW(validate_config(cfg), ConfigError);
  cfg = make_model_config(4, 8, 16);
  cfg.branches[2].input_taps = {{0, 2}};
  EXPECT_THROW(validate_config(cfg), ConfigError);
  EXPECT_THROW(parse_loss("l3"), ConfigError);
  EXPECT_EQ(parse_variant("DOWN"), Variant::kDown);
}

TEST(BuildMaster, ToyShapesAndTaps) {
  ModelConfig cfg = make_model_config(4, 4, 16);
  Branch master = build_master(cfg, 1);
  BranchOutput out = master.forward(random_image(2, {1, 3, 12, 12}));
  EXPECT_EQ(out.image.shape(), (Shape{1, 3, 48, 48}));
  ASSERT_EQ(out.taps.size(), 2u);
  EXPECT_EQ(out.taps.at(1).shape(), (Shape{1, 16, 24, 24}));
  EXPECT_EQ(out.taps.at(2).shape(), (Shape{1, 16, 48, 48}));
  EXPECT_EQ(out.body.shape(), (Shape{1, 16, 12, 12}));
}

TEST(BuildMaster, TapStagesPerScale) {
  Branch x2 = build_master(make_model_config(2, 2, 8), 1);
  BranchOutput o2 = x2.forward(random_image(3, {1, 3, 6, 6}));
  EXPECT_EQ(o2.taps.size(), 1u);
  EXPECT_EQ(o2.image.shape(), (Shape{1, 3, 12, 12}));
  Branch x3 = build_master(make_model_config(3, 2, 8), 1);
  BranchOutput o3 = x3.forward(random_image(3, {1, 3, 6, 6}));
  ASSERT_EQ(o3.taps.size(), 1u);
  EXPECT_EQ(o3.taps.at(1).shape(), (Shape{1, 8, 18, 18}));
  EXPECT_EQ(o3.image.shape(), (Shape{1, 3, 18, 18}));
}

TEST(BuildMaster, ZeroOutputConvGivesZeroImage) {
  Branch master = build_master(make_model_config(4, 2, 8), 5, /*zero_output=*/true);
  BranchOutput out = master.forward(random_image(4, {2, 3, 6, 6}));
  for (float v : out.image.data()) EXPECT_EQ(v, 0.f);
}

TEST(BuildMaster, RejectsWrongChannelCount) {
  Branch master = build_master(make_model_config(2, 1, 4), 1);
  EXPECT_THROW(master.forward(Tensor::zeros({1, 1, 8, 8})), ShapeError);
}

TEST(BuildResidual, UpVariantWiring) {
  ModelConfig cfg = make_model_config(4, 4, 16, Variant::kUp);
  auto stack = build_stack(cfg, 7);
  EXPECT_EQ(stack[1].in_channels(), 16);
  EXPECT_EQ(stack[1].stage_factors(), (std::vector<int>{2}));
  EXPECT_EQ(stack[2].in_channels(), 32);  // feats(B0) + feats(B1)
  EXPECT_TRUE(stack[2].stage_factors().empty());
  EXPECT_EQ(stack[1].spec().n_blocks, 2);
  EXPECT_EQ(stack[2].spec().n_blocks, 1);
}

TEST(BuildResidual, DownVariantWiring) {
  ModelConfig cfg = make_model_config(4, 4, 16, Variant::kDown);
  auto stack = build_stack(cfg, 7);
  EXPECT_EQ(stack[1].stage_factors(), (std::vector<int>{2, 2}));
  EXPECT_EQ(stack[2].stage_factors(), (std::vector<int>{2}));
  EXPECT_EQ(stack[2].in_channels(), 32);
}

TEST(BuildResidual, MissingPredecessorsRejected) {
  ModelConfig cfg = make_model_config(4, 4, 16);
  std::vector<Branch> none;
  EXPECT_THROW(build_residual_branch(cfg, 1, none, 1), ConfigError);
  std::vector<Branch> only_master{build_master(cfg, 1)};
  EXPECT_THROW(build_residual_branch(cfg, 2, only_master, 1), ConfigError);
  EXPECT_THROW(build_residual_branch(cfg, 3, only_master, 1), ConfigError);
}

TEST(BuildResidual, TapScaleMismatchRejected) {
  // A master built for x2 exposes no x4-level tap for an x4 residual branch.
  ModelConfig x4 = make_model_config(4, 4, 8);
  ModelConfig x2 = make_model_config(2, 4, 8);
  std::vector<Branch> wrong{build_master(x2, 1)};
  EXPECT_THROW(build_residual_branch(x4, 1, wrong, 1), ShapeError);
}

TEST(Forward, ShapesAndZeroResiduals) {
  ModelConfig cfg = make_model_config(4, 4, 16);
  auto stack = build_stack(cfg, 3);
  Tensor lr = random_image(9, {1, 3, 12, 12});
  StackOutput master_only = forward(std::span<const Branch>(stack).first(1), lr);
  EXPECT_EQ(master_only.preds.size(), 1u);
  StackOutput full = forward(stack, lr);
  ASSERT_EQ(full.preds.size(), 3u);
  for (const Tensor& p : full.preds) EXPECT_EQ(p.shape(), (Shape{1, 3, 48, 48}));
  for (size_t i = 1; i < 3; ++i)
    for (float v : full.preds[i].data()) ASSERT_EQ(v, 0.f);
  EXPECT_THROW(forward(stack, random_image(1, {1, 3, 3, 3})), ShapeError);
}

TEST(Forward, UpAndDownVariantsShareOutputShapes) {
  for (int scale : {2, 3, 4}) {
    for (Variant v : {Variant::kUp, Variant::kDown}) {
      ModelConfig cfg = make_model_config(scale, 2, 8, v);
      auto stack = build_stack(cfg, 4);
      // Give residual branches non-zero outputs so every path is exercised.
      for (size_t i = 1; i < stack.size(); ++i) stack[i].initialize(40 + i, false);
      StackOutput out = forward(stack, random_image(6, {2, 3, 5, 6}));
      for (const Tensor& p : out.preds) EXPECT_EQ(p.shape(), (Shape{2, 3, 5 * scale, 6 * scale}));
    }
  }
}

TEST(Forward, TapInputMatchesScaledLrDims) {
  ModelConfig cfg = make_model_config(4, 4, 16);
  auto stack = build_stack(cfg, 3);
  StackOutput out = forward(stack, random_image(9, {1, 3, 7, 5}));
  const Tensor& f02 = out.branches[0].feature(2);
  const Tensor& f11 = out.branches[1].feature(1);
  EXPECT_EQ(f02.shape().c + f11.shape().c, stack[2].in_channels());
  EXPECT_EQ(f02.shape().h, 4 * 7);
  EXPECT_EQ(f11.shape().w, 4 * 5);
}

TEST(ResidualLabel, Examples) {
  Tensor hr = Tensor::full({1, 3, 4, 4}, 5.f);
  std::vector<Tensor> preds{Tensor::full(hr.shape(), 3.f), Tensor::full(hr.shape(), 1.f)};
  Tensor r0 = residual_label(hr, preds, 0);
  EXPECT_TRUE(bit_equal(r0, hr));
  const Tensor r2 = residual_label(hr, preds, 2);
  for (float v : r2.data()) EXPECT_EQ(v, 1.f);
  std::vector<Tensor> exact{hr.clone()};
  const Tensor r1 = residual_label(hr, exact, 1);
  for (float v : r1.data()) EXPECT_EQ(v, 0.f);
  EXPECT_THROW(residual_label(hr, preds, 3), ShapeError);
  std::vector<Tensor> bad{Tensor::zeros({1, 3, 2, 2})};
  EXPECT_THROW(residual_label(hr, bad, 1), ShapeError);
}

TEST(ResidualLabel, DetachedFromGraph) {
  Tensor hr = random_image(1, {1, 3, 4, 4});
  Tensor p = random_image(2, {1, 3, 4, 4});
  p.set_requires_grad(true);
  Tape tape;
  TapeScope scope(tape);
  std::vector<Tensor> preds{p};
  Tensor r = residual_label(hr, preds, 1);
  EXPECT_FALSE(r.requires_grad());
  EXPECT_TRUE(tape.empty());
}

TEST(Compose, Examples) {
  Tensor p0 = random_image(1, {1, 3, 4, 4});
  std::vector<Tensor> one{p0};
  EXPECT_TRUE(bit_equal(compose(one), p0));
  std::vector<Tensor> padded{p0, Tensor::zeros(p0.shape()), Tensor::zeros(p0.shape())};
  EXPECT_TRUE(bit_equal(compose(padded), p0));
  std::vector<Tensor> empty;
  EXPECT_THROW(compose(empty), ShapeError);
}

TEST(Compose, LabelConsistencyProperty) {
  for (uint32_t seed = 0; seed < 20; ++seed) {
    Tensor hr = random_image(seed, {2, 3, 6, 6});
    std::vector<Tensor> preds;
    for (uint32_t k = 0; k < 3; ++k) preds.push_back(scale(random_image(100 + seed * 3 + k, hr.shape()), 0.7f));
    for (int i = 1; i <= 3; ++i) {
      Tensor rebuilt = add(compose(std::span<const Tensor>(preds).first(i)), residual_label(hr, preds, i));
      for (size_t e = 0; e < hr.data().size(); ++e) ASSERT_NEAR(rebuilt.data()[e], hr.data()[e], 1e-5);
    }
  }
}

TEST(Compose, FreshResidualsLeaveMasterOutputBitIdentical) {
  ModelConfig cfg = make_model_config(4, 2, 8);
  auto stack = build_stack(cfg, 12);
  for (uint32_t s = 0; s < 5; ++s) {
    Tensor lr = random_image(s, {1, 3, 6, 6});
    StackOutput full = forward(stack, lr);
    StackOutput master = forward(std::span<const Branch>(stack).first(1), lr);
    EXPECT_TRUE(bit_equal(compose(full.preds), master.preds[0]));
  }
}

TEST(Freeze, IdempotentAndExcludedFromOptimizer) {
  ModelConfig cfg = make_model_config(4, 2, 8);
  auto stack = build_stack(cfg, 1);
  int64_t all = 0;
  for (auto& b : stack) all += static_cast<int64_t>(b.parameters().size());
  EXPECT_EQ(static_cast<int64_t>(trainable_parameters(stack).size()), all);
  freeze(stack[0]);
  freeze(stack[0]);
  EXPECT_TRUE(stack[0].frozen());
  const auto trainable = trainable_parameters(stack);
  EXPECT_EQ(trainable.size(), stack[1].parameters().size() + stack[2].parameters().size());
  for (const auto& p : stack[0].parameters()) EXPECT_FALSE(p.value.requires_grad());
}

TEST(Freeze, TrainingLaterBranchLeavesDigestUnchanged) {
  ModelConfig cfg = make_model_config(4, 2, 8);
  std::vector<Branch> stack{build_master(cfg, 2)};
  freeze(stack[0]);
  stack.push_back(build_residual_branch(cfg, 1, stack, 3));
  const std::string before = parameter_digest(stack[0]);
  const auto snapshot = serialize_parameters(stack[0]);

  Tensor lr = random_image(5, {2, 3, 6, 6});
  Tensor hr = random_image(6, {2, 3, 24, 24});
  auto params = trainable_parameters(std::span<Branch>(stack).first(2));
  Adam opt(AdamConfig{1e-2, 0.9, 0.99, 1e-8});
  for (int step = 0; step < 3; ++step) {
    for (auto& p : params) p.zero_grad();
    Tape tape;
    TapeScope scope(tape);
    StackOutput out = forward(std::span<const Branch>(stack).first(2), lr);
    Tensor label = residual_label(hr, out.preds, 1);
    tape.backward(l2_loss(out.preds[1], label));
    for (const auto& p : stack[0].parameters()) ASSERT_FALSE(p.value.has_grad());
    opt.step(params);
  }
  EXPECT_EQ(parameter_digest(stack[0]), before);
  EXPECT_EQ(serialize_parameters(stack[0]), snapshot);
  // The trained branch did move.
  bool moved = false;
  for (float v : stack[1].parameter("out.weight").data()) moved |= v != 0.f;
  EXPECT_TRUE(moved);
}

TEST(Digest, KnownVectorAndSensitivity) {
  const std::string abc = "abc";
  std::vector<uint8_t> bytes(abc.begin(), abc.end());
  EXPECT_EQ(sha256_hex(bytes), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  ModelConfig cfg = make_model_config(2, 1, 4);
  Branch a = build_master(cfg, 1);
  Branch b = build_master(cfg, 1);
  EXPECT_EQ(parameter_digest(a), parameter_digest(b));
  b.parameters()[0].value.mutable_data()[0] += 1e-6f;
  EXPECT_NE(parameter_digest(a), parameter_digest(b));
}

}  // namespace
}  // namespace irl
