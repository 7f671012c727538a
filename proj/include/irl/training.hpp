#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "irl/adam.hpp"
#include "irl/dataset.hpp"
#include "irl/model.hpp"

namespace irl {

// Optimizer moments for the trainable parameters, in trainable_parameters()
// order, plus the sampler RNG so an interrupted stage resumes exactly.
struct TrainState {
  std::vector<AdamState> adam;
  int64_t step = 0;
  double best_psnr = 0.0;
  std::string rng_state;  // textual mt19937_64 state; empty before training
};

// One completed stage (or evaluation) summary.
struct StageRecord {
  int stage = 0;
  std::string label;
  int64_t iterations = 0;
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;
  double wall_clock_s = 0.0;
};

struct Checkpoint {
  static constexpr int kFormatVersion = 1;

  ModelConfig model;             // every planned branch
  std::vector<Branch> branches;  // trained so far; all but the last are frozen
  TrainState state;
  std::vector<StageRecord> history;

  int trained_stages() const { return static_cast<int>(branches.size()); }
};

struct TrainConfig {
  int stage = 0;
  int64_t iterations = 1000;
  int batch_size = 16;
  int patch_size = 12;  // LR side; HR patches are scale times larger
  AdamConfig adam;
  // lr is multiplied by lr_decay_factor after every lr_decay_fraction of the
  // stage budget.
  double lr_decay_fraction = 0.5;
  double lr_decay_factor = 0.5;
  // Validation interval in iterations; 0 validates only at the end. The
  // best-scoring evaluation of the stage is the one returned.
  int64_t validate_every = 0;
  bool augment = true;
  uint64_t seed = 1;
  std::string label;  // free-form tag carried into StageRecord
};

// Per-image and mean scores of the composed output.
struct ImageMetrics {
  std::string name;
  double psnr_db = 0.0;
  double ssim = 0.0;
};

struct Metrics {
  std::vector<ImageMetrics> images;
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;
};

struct InferenceOptions {
  int tile = 0;      // LR tile side; 0 processes the whole image at once
  int overlap = 8;   // LR pixels shared by neighbouring tiles, linearly blended
  int threads = 0;   // per-image workers for validate(); 0 reads IRL_THREADS
};

// Observer hooks; both may be empty.
struct TrainObserver {
  std::function<void(int64_t step, double loss)> on_step;
  std::function<void(int64_t step, const Metrics&)> on_validate;
};

// Runs one stage. Stage 0 trains a fresh master on HR targets; stage i >= 1
// freezes branches 0..i-1 of `prior`, appends branch i and trains it on the
// residual labels. A prior already holding branch i resumes that stage from
// its stored TrainState. Throws ConfigError on precondition violations and
// NumericError on a non-finite loss.
Checkpoint train_stage(const TrainConfig& cfg, const ModelConfig& model, const Dataset& train,
                       const Dataset& val, const Checkpoint* prior = nullptr,
                       const TrainObserver& observer = {});

// Worker count from IRL_THREADS, else the hardware concurrency.
int default_thread_count();

// Super-resolves one LR image. Entry k of the result is the composition of
// branch outputs 0..k on the [0, 255] scale, unclamped.
std::vector<ImageBuffer> super_resolve_levels(std::span<const Branch> branches,
                                              const ImageBuffer& lr,
                                              const InferenceOptions& options = {});
ImageBuffer super_resolve(std::span<const Branch> branches, const ImageBuffer& lr,
                          const InferenceOptions& options = {});

// Composes every branch, clamps and scores Y PSNR/SSIM with shave = scale.
// Throws DataError when an HR image is not larger than 2*scale per side.
Metrics validate(std::span<const Branch> branches, const Dataset& val,
                 const InferenceOptions& options = {});
Metrics validate(const Checkpoint& ckpt, const Dataset& val, const InferenceOptions& options = {});

// Binary format: magic "IRLSR1\0", u64 LE header length, JSON header (config,
// state, history, tensor directory), then LE float32 payloads in directory
// order. Loading throws FormatError on foreign magic, version mismatch,
// malformed header or truncated payload.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Deep copy: the copy shares no tensor storage with `ckpt`.
Checkpoint clone_checkpoint(const Checkpoint& ckpt);

struct AblationAxes {
  bool variant = false;
  bool loss = false;
};

struct AblationRow {
  std::string label;  // e.g. "up/L2"
  Variant variant = Variant::kUp;
  LossKind residual_loss = LossKind::kL2;
  Metrics metrics;
  double wall_clock_s = 0.0;
};

// Trains residual stages 1..`last_stage` for every configuration on the given
// axes, each starting from the same master and seed. Rows are ordered with
// the variant outer (up, down) and the loss inner (L1, L2); an axis that is
// off contributes the base value only.
std::vector<AblationRow> run_ablation(const Checkpoint& master, const TrainConfig& residual_cfg,
                                      AblationAxes axes, Variant base_variant,
                                      LossKind base_loss, int last_stage, const Dataset& train,
                                      const Dataset& val);

std::string ablation_markdown(std::span<const AblationRow> rows);

// Metrics CSV: stage,config,image,psnr_db,ssim,wall_clock_s with one row per
// image followed by a "mean" row.
struct CsvRow {
  int stage = 0;
  std::string config;
  std::string image;
  double psnr_db = 0.0;
  double ssim = 0.0;
  double wall_clock_s = 0.0;
};

std::vector<CsvRow> metrics_rows(int stage, const std::string& config, const Metrics& metrics,
                                 double wall_clock_s);
std::string format_metrics_csv(std::span<const CsvRow> rows, bool with_header = true);
// Appends to `path`, writing the header only when the file is new or empty.
void append_metrics_csv(const std::filesystem::path& path, std::span<const CsvRow> rows);

}  // namespace irl
