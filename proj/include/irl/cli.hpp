#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "irl/model.hpp"
#include "irl/training.hpp"

namespace irl {

// Contents of an experiment INI file. Relative paths are resolved against
// the directory holding the file.
struct ExperimentConfig {
  // [model]
  int scale = 4;
  int master_blocks = 4;
  int n_feats = 16;
  Variant variant = Variant::kUp;
  LossKind master_loss = LossKind::kL1;
  LossKind residual_loss = LossKind::kL2;
  double res_scale = 1.0;

  // [train]; residual_iterations < 0 means 25% of iterations.
  TrainConfig train;
  int64_t residual_iterations = -1;

  // [data]
  std::filesystem::path train_dir;
  std::filesystem::path val_dir;
  bool cache_lr = false;

  // [output]
  std::filesystem::path output_dir;

  ModelConfig model() const;
  // TrainConfig for `stage` with the per-stage iteration budget applied.
  TrainConfig stage_config(int stage) const;
  std::filesystem::path checkpoint_path(int stage) const;
  std::filesystem::path metrics_path() const;
};

// Parses and validates; throws ConfigError naming the file on any problem,
// including unknown sections or keys and missing data directories.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
ExperimentConfig parse_experiment_config(std::istream& in, const std::filesystem::path& base_dir,
                                         const std::string& source_name);

// Entry point of the irl tool. Returns the process exit code:
// 0 success, 2 usage or config error, 3 data or I/O error, 4 numeric failure.
int run_cli(int argc, char** argv);

}  // namespace irl
