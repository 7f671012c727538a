#include <array>
#include <chrono>
#include <cmath>
#include <optional>
#include <random>
#include <sstream>

#include "irl/autograd.hpp"
#include "irl/errors.hpp"
#include "irl/ops.hpp"
#include "irl/training.hpp"

namespace irl {
namespace {

void check_config(const TrainConfig& cfg, const ModelConfig& model, const Dataset& train,
                  const Dataset& val) {
  validate_config(model);
  if (cfg.stage < 0 || cfg.stage > model.residual_count()) {
    throw ConfigError("stage " + std::to_string(cfg.stage) + " outside 0.." +
                      std::to_string(model.residual_count()) + " for x" +
                      std::to_string(model.scale));
  }
  if (cfg.iterations < 0) throw ConfigError("iterations must be >= 0");
  if (cfg.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (cfg.patch_size < 4) throw ConfigError("patch_size must be >= 4");
  if (cfg.validate_every < 0) throw ConfigError("validate_every must be >= 0");
  if (!(cfg.lr_decay_fraction > 0.0) || !(cfg.lr_decay_factor > 0.0)) {
    throw ConfigError("lr decay fraction and factor must be positive");
  }
  if (train.scale != model.scale || val.scale != model.scale) {
    throw ConfigError("dataset scale differs from model scale x" + std::to_string(model.scale));
  }
  if (train.images.empty()) throw DataError("training set is empty");
  for (const auto& img : train.images) {
    if (img.lr.height < cfg.patch_size || img.lr.width < cfg.patch_size) {
      throw DataError("training image '" + img.name + "' is smaller than the LR patch");
    }
  }
}

// Predecessor branches of `prior` must match the requested model.
void check_lineage(const Checkpoint& prior, const ModelConfig& model, int upto) {
  if (prior.model.scale != model.scale || prior.model.n_colors != model.n_colors ||
      prior.model.res_scale != model.res_scale) {
    throw ConfigError("checkpoint model does not match the configured model");
  }
  for (int k = 0; k < upto; ++k) {
    if (!(prior.branches[k].spec() == model.branches[k])) {
      throw ConfigError("checkpoint branch " + std::to_string(k) +
                        " does not match the configured model");
    }
  }
}

uint64_t stage_seed(uint64_t seed, int stage, uint64_t salt) {
  std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                    static_cast<uint32_t>(stage), static_cast<uint32_t>(salt)};
  std::array<uint32_t, 2> words{};
  seq.generate(words.begin(), words.end());
  return (static_cast<uint64_t>(words[0]) << 32) | words[1];
}

std::string rng_to_string(const std::mt19937_64& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

std::mt19937_64 rng_from_string(const std::string& text) {
  std::mt19937_64 rng;
  std::istringstream is(text);
  is >> rng;
  if (!is) throw FormatError("corrupt RNG state in checkpoint");
  return rng;
}

struct Batch {
  Tensor lr;
  Tensor hr;
};

Batch sample_batch(const Dataset& data, const TrainConfig& cfg, std::mt19937_64& rng) {
  std::uniform_int_distribution<size_t> pick(0, data.images.size() - 1);
  std::vector<ImageBuffer> lr, hr;
  lr.reserve(cfg.batch_size);
  hr.reserve(cfg.batch_size);
  for (int b = 0; b < cfg.batch_size; ++b) {
    const size_t i = pick(rng);
    const uint64_t patch_seed = rng();
    auto pairs = sample_patches(data.images[i].hr, data.images[i].lr, data.scale, cfg.patch_size,
                                1, patch_seed, cfg.augment, static_cast<int>(i));
    lr.push_back(std::move(pairs[0].lr_patch));
    hr.push_back(std::move(pairs[0].hr_patch));
  }
  return {images_to_tensor(lr), images_to_tensor(hr)};
}

double stage_lr(const TrainConfig& cfg, int64_t step) {
  const double period = cfg.lr_decay_fraction * static_cast<double>(cfg.iterations);
  if (period <= 0.0) return cfg.adam.lr;
  const double halvings = std::floor(static_cast<double>(step) / period);
  return cfg.adam.lr * std::pow(cfg.lr_decay_factor, halvings);
}

}  // namespace

Checkpoint clone_checkpoint(const Checkpoint& ckpt) {
  Checkpoint out;
  out.model = ckpt.model;
  out.state = ckpt.state;
  out.history = ckpt.history;
  for (const Branch& b : ckpt.branches) {
    Branch copy = b;
    for (auto& p : copy.parameters()) {
      p.value = p.value.clone();
      p.value.set_requires_grad(!copy.frozen());
    }
    out.branches.push_back(std::move(copy));
  }
  return out;
}

Checkpoint train_stage(const TrainConfig& cfg, const ModelConfig& model, const Dataset& train,
                       const Dataset& val, const Checkpoint* prior,
                       const TrainObserver& observer) {
  check_config(cfg, model, train, val);
  const int stage = cfg.stage;

  Checkpoint ck;
  bool resume = false;
  if (prior != nullptr && prior->trained_stages() == stage + 1) {
    check_lineage(*prior, model, stage + 1);
    ck = clone_checkpoint(*prior);
    resume = true;
  } else if (stage == 0) {
    if (prior != nullptr) {
      throw ConfigError("stage 0 takes no prior checkpoint unless resuming the master");
    }
    ck.model = model;
    ck.branches.push_back(build_master(model, stage_seed(cfg.seed, 0, 1)));
  } else {
    if (prior == nullptr) {
      throw ConfigError("stage " + std::to_string(stage) + " requires a stage-" +
                        std::to_string(stage - 1) + " checkpoint");
    }
    if (prior->trained_stages() != stage) {
      throw ConfigError("stage " + std::to_string(stage) + " needs a checkpoint with " +
                        std::to_string(stage) + " trained branches, got " +
                        std::to_string(prior->trained_stages()));
    }
    check_lineage(*prior, model, stage);
    ck = clone_checkpoint(*prior);
    ck.state = {};
    ck.branches.push_back(build_residual_branch(model, stage, ck.branches,
                                                stage_seed(cfg.seed, stage, 1)));
  }
  ck.model = model;
  for (int k = 0; k < stage; ++k) ck.branches[k].freeze();

  std::vector<Tensor> params = trainable_parameters(ck.branches);
  Adam adam(cfg.adam);
  std::mt19937_64 rng(stage_seed(cfg.seed, stage, 2));
  if (resume && !ck.state.rng_state.empty()) {
    if (ck.state.adam.size() != params.size()) {
      throw FormatError("checkpoint optimizer state does not match the trainable parameters");
    }
    adam.states() = ck.state.adam;
    rng = rng_from_string(ck.state.rng_state);
  } else {
    ck.state = {};
  }

  const LossKind loss_kind = model.branches[stage].loss;
  const auto start = std::chrono::steady_clock::now();
  double elapsed_before = 0.0;
  if (resume && !ck.history.empty() && ck.history.back().stage == stage) {
    elapsed_before = ck.history.back().wall_clock_s;
    ck.history.pop_back();
  }

  struct Snapshot {
    std::vector<Tensor> params;
    TrainState state;
    Metrics metrics;
  };
  std::optional<Snapshot> best;
  auto evaluate_now = [&](int64_t step) {
    Metrics m = validate(ck, val);
    if (observer.on_validate) observer.on_validate(step, m);
    if (!best || m.mean_psnr > best->metrics.mean_psnr) {
      Snapshot snap;
      for (const Tensor& p : params) snap.params.push_back(p.clone());
      snap.state = {adam.states(), step, m.mean_psnr, rng_to_string(rng)};
      snap.metrics = std::move(m);
      best = std::move(snap);
    }
  };

  for (int64_t step = ck.state.step; step < cfg.iterations; ++step) {
    adam.set_lr(stage_lr(cfg, step));
    const Batch batch = sample_batch(train, cfg, rng);

    Tape tape;
    Tensor loss;
    {
      TapeScope scope(tape);
      const StackOutput out = forward(std::span<const Branch>(ck.branches), batch.lr);
      const Tensor target = stage == 0 ? batch.hr : residual_label(batch.hr, out.preds, stage);
      loss = loss_kind == LossKind::kL1 ? l1_loss(out.preds[stage], target)
                                        : l2_loss(out.preds[stage], target);
    }
    const double value = loss.item();
    if (!std::isfinite(value)) {
      throw NumericError("non-finite loss at stage " + std::to_string(stage) + " step " +
                         std::to_string(step));
    }
    for (Tensor& p : params) p.zero_grad();
    tape.backward(loss);
    adam.step(params);
    if (observer.on_step) observer.on_step(step, value);

    const int64_t done = step + 1;
    if (cfg.validate_every > 0 && done % cfg.validate_every == 0 && done < cfg.iterations) {
      evaluate_now(done);
    }
  }
  evaluate_now(std::max<int64_t>(cfg.iterations, ck.state.step));

  for (size_t k = 0; k < params.size(); ++k) {
    auto dst = params[k].mutable_data();
    const auto src = best->params[k].data();
    std::copy(src.begin(), src.end(), dst.begin());
    params[k].clear_grad();
  }
  ck.state = best->state;

  const double seconds =
      elapsed_before + std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  ck.history.push_back({stage, cfg.label, cfg.iterations, best->metrics.mean_psnr,
                        best->metrics.mean_ssim, seconds});
  return ck;
}

}  // namespace irl
