#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "irl/cli.hpp"
#include "irl/errors.hpp"
#include "irl/image.hpp"
#include "irl/toy_images.hpp"

namespace irl {
namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory '" + dir.string() + "': " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw DataError("cannot write '" + path.string() + "'");
}

Checkpoint load_existing_checkpoint(const fs::path& path, const std::string& role) {
  if (!fs::exists(path)) throw ConfigError(role + " checkpoint '" + path.string() + "' not found");
  return load_checkpoint(path);
}

TrainObserver progress_observer(int stage, int64_t iterations) {
  const int64_t every = std::max<int64_t>(1, iterations / 20);
  TrainObserver obs;
  obs.on_step = [=](int64_t step, double loss) {
    if ((step + 1) % every == 0 || step + 1 == iterations) {
      std::fprintf(stderr, "stage %d  step %lld/%lld  loss %.6f\n", stage,
                   static_cast<long long>(step + 1), static_cast<long long>(iterations), loss);
    }
  };
  obs.on_validate = [=](int64_t step, const Metrics& m) {
    std::fprintf(stderr, "stage %d  step %lld  val PSNR %.4f dB  SSIM %.4f\n", stage,
                 static_cast<long long>(step), m.mean_psnr, m.mean_ssim);
  };
  return obs;
}

std::string metrics_table(const Metrics& m) {
  std::ostringstream os;
  char line[256];
  os << "| image | PSNR (dB) | SSIM |\n|---|---|---|\n";
  for (const ImageMetrics& r : m.images) {
    std::snprintf(line, sizeof(line), "| %s | %.4f | %.4f |\n", r.name.c_str(), r.psnr_db, r.ssim);
    os << line;
  }
  std::snprintf(line, sizeof(line), "| mean | %.4f | %.4f |\n", m.mean_psnr, m.mean_ssim);
  os << line;
  return os.str();
}

struct TrainArgs {
  fs::path config;
  int stage = 0;
  fs::path resume;
  std::optional<uint64_t> seed;
};

int cmd_train(const TrainArgs& a) {
  ExperimentConfig cfg = load_experiment_config(a.config);
  if (a.seed) cfg.train.seed = *a.seed;
  const ModelConfig model = cfg.model();
  if (a.stage < 0 || a.stage > model.residual_count()) {
    throw ConfigError("stage " + std::to_string(a.stage) + " outside 0.." +
                      std::to_string(model.residual_count()) + " for x" + std::to_string(cfg.scale));
  }
  std::optional<Checkpoint> prior;
  if (!a.resume.empty()) {
    prior = load_existing_checkpoint(a.resume, "resume");
  } else if (a.stage > 0) {
    prior = load_existing_checkpoint(cfg.checkpoint_path(a.stage - 1),
                                     "stage " + std::to_string(a.stage) + " requires the stage-" +
                                         std::to_string(a.stage - 1));
  }
  const Dataset train = load_dataset(cfg.train_dir, cfg.scale, cfg.cache_lr);
  const Dataset val = load_dataset(cfg.val_dir, cfg.scale, cfg.cache_lr);
  ensure_dir(cfg.output_dir);

  const TrainConfig tc = cfg.stage_config(a.stage);
  const Checkpoint ck = train_stage(tc, model, train, val, prior ? &*prior : nullptr,
                                    progress_observer(a.stage, tc.iterations));
  const fs::path out = cfg.checkpoint_path(a.stage);
  save_checkpoint(ck, out);

  const Metrics m = validate(ck, val);
  const double seconds = ck.history.back().wall_clock_s;
  append_metrics_csv(cfg.metrics_path(), metrics_rows(a.stage, tc.label, m, seconds));
  std::cout << metrics_table(m);
  std::printf("stage %d done in %.1f s; checkpoint %s\n", a.stage, seconds, out.string().c_str());
  if (a.stage > 0 && !ck.history.empty() && ck.history.front().wall_clock_s > 0) {
    std::printf("stage %d wall-clock is %.1f%% of the master stage\n", a.stage,
                100.0 * seconds / ck.history.front().wall_clock_s);
  }
  return kExitOk;
}

struct EvalArgs {
  fs::path ckpt;
  fs::path dataset;
  int scale = 0;
  fs::path csv;
  fs::path save_images;
  int tile = 0;
};

int cmd_eval(const EvalArgs& a) {
  const Checkpoint ck = load_checkpoint(a.ckpt);
  if (a.scale != 0 && a.scale != ck.model.scale) {
    throw ConfigError("--scale " + std::to_string(a.scale) + " does not match the x" +
                      std::to_string(ck.model.scale) + " checkpoint");
  }
  if (!fs::is_directory(a.dataset)) throw DataError("dataset '" + a.dataset.string() + "' not found");
  const Dataset ds = load_dataset(a.dataset, ck.model.scale);
  InferenceOptions opts;
  opts.tile = a.tile;
  const Metrics m = validate(ck, ds, opts);
  std::cout << metrics_table(m);

  const int stage = ck.trained_stages() - 1;
  const std::string label = ck.history.empty() ? "eval" : ck.history.back().label;
  const double seconds = ck.history.empty() ? 0.0 : ck.history.back().wall_clock_s;
  fs::path csv = a.csv;
  if (csv.empty()) csv = fs::path(a.ckpt).replace_extension(".eval.csv");
  const auto rows = metrics_rows(stage, label, m, seconds);
  write_text(csv, format_metrics_csv(rows));

  if (!a.save_images.empty()) {
    ensure_dir(a.save_images);
    for (const DatasetImage& img : ds.images) {
      const auto levels = super_resolve_levels(ck.branches, img.lr, opts);
      for (size_t k = 0; k < levels.size(); ++k) {
        save_png(levels[k], a.save_images / (img.name + "_sr" + std::to_string(k) + ".png"));
        if (k == 0) continue;
        // Label residual R_k = HR - (P_0 + ... + P_(k-1)), offset by 128.
        ImageBuffer vis = img.hr;
        for (size_t i = 0; i < vis.pixels.size(); ++i) {
          vis.pixels[i] = img.hr.pixels[i] - levels[k - 1].pixels[i] + 128.0f;
        }
        save_png(vis, a.save_images / (img.name + "_residual" + std::to_string(k) + ".png"));
      }
    }
  }
  return kExitOk;
}

struct SrArgs {
  fs::path ckpt;
  fs::path input;
  fs::path output;
  int tile = 0;
};

int cmd_sr(const SrArgs& a) {
  const Checkpoint ck = load_checkpoint(a.ckpt);
  const ImageBuffer lr = load_png(a.input);
  InferenceOptions opts;
  opts.tile = a.tile;
  save_png(super_resolve(ck.branches, lr, opts), a.output);
  return kExitOk;
}

struct AblateArgs {
  fs::path config;
  std::string axes;
  int stages = 1;
  std::optional<uint64_t> seed;
};

AblationAxes parse_axes(const std::string& text) {
  AblationAxes axes;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "variant") {
      axes.variant = true;
    } else if (item == "loss") {
      axes.loss = true;
    } else {
      throw ConfigError("unknown ablation axis '" + item + "' (expected variant, loss)");
    }
  }
  return axes;
}

int cmd_ablate(const AblateArgs& a) {
  const AblationAxes axes = parse_axes(a.axes);
  ExperimentConfig cfg = load_experiment_config(a.config);
  if (a.seed) cfg.train.seed = *a.seed;
  const Dataset train = load_dataset(cfg.train_dir, cfg.scale, cfg.cache_lr);
  const Dataset val = load_dataset(cfg.val_dir, cfg.scale, cfg.cache_lr);
  ensure_dir(cfg.output_dir);

  const fs::path master_path = cfg.checkpoint_path(0);
  Checkpoint master;
  if (fs::exists(master_path)) {
    master = load_checkpoint(master_path);
    if (!(master.branches.front().spec() == cfg.model().branches.front())) {
      throw ConfigError("master checkpoint '" + master_path.string() + "' does not match the config");
    }
  } else {
    const TrainConfig tc = cfg.stage_config(0);
    master = train_stage(tc, cfg.model(), train, val, nullptr, progress_observer(0, tc.iterations));
    save_checkpoint(master, master_path);
  }

  const auto rows = run_ablation(master, cfg.stage_config(1), axes, cfg.variant,
                                 cfg.residual_loss, a.stages, train, val);
  std::vector<CsvRow> csv;
  for (const AblationRow& r : rows) {
    const auto part = metrics_rows(a.stages, r.label, r.metrics, r.wall_clock_s);
    csv.insert(csv.end(), part.begin(), part.end());
  }
  const std::string text = format_metrics_csv(csv);
  write_text(cfg.output_dir / "ablation.csv", text);
  std::cout << ablation_markdown(rows) << "\n" << text;
  return kExitOk;
}

struct ToyArgs {
  fs::path out;
  int count = 20;
  int height = 96;
  int width = 96;
  uint64_t seed = 1;
};

int cmd_make_toy_data(const ToyArgs& a) {
  if (a.count < 1 || a.height < 8 || a.width < 8) {
    throw ConfigError("make-toy-data needs --count >= 1 and sides >= 8");
  }
  write_toy_dataset(a.out, a.count, a.height, a.width, a.seed);
  std::printf("wrote %d images to %s\n", a.count, a.out.string().c_str());
  return kExitOk;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Incremental residual learning for single-image super-resolution"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "Train one stage (0 = master, i = residual branch i)");
  train->add_option("--config", train_args.config, "Experiment INI file")->required();
  train->add_option("--stage", train_args.stage, "Stage index")->required();
  train->add_option("--resume", train_args.resume,
                    "Checkpoint holding a partially trained branch of this stage");
  train->add_option("--seed", train_args.seed, "Override [train] seed");

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "Score a checkpoint on a dataset (Y-channel PSNR/SSIM)");
  eval->add_option("--ckpt", eval_args.ckpt, "Checkpoint file")->required();
  eval->add_option("--dataset", eval_args.dataset, "Directory of HR PNG images")->required();
  eval->add_option("--scale", eval_args.scale, "Expected scale; must match the checkpoint");
  eval->add_option("--csv", eval_args.csv, "Metrics CSV path (default: <ckpt>.eval.csv)");
  eval->add_option("--save-images", eval_args.save_images,
                   "Write each composition level and the label residuals (+128) here");
  eval->add_option("--tile", eval_args.tile, "LR tile side for tiled inference (0: whole image)");

  SrArgs sr_args;
  auto* sr = app.add_subcommand("sr", "Super-resolve one PNG image");
  sr->add_option("--ckpt", sr_args.ckpt, "Checkpoint file")->required();
  sr->add_option("--input", sr_args.input, "LR PNG input")->required();
  sr->add_option("--output", sr_args.output, "SR PNG output")->required();
  sr->add_option("--tile", sr_args.tile, "LR tile side for tiled inference (0: whole image)");

  AblateArgs ablate_args;
  auto* ablate = app.add_subcommand("ablate", "Compare residual variants and losses from one master");
  ablate->add_option("--config", ablate_args.config, "Experiment INI file")->required();
  ablate->add_option("--axes", ablate_args.axes, "Comma list drawn from: variant, loss")->required();
  ablate->add_option("--stages", ablate_args.stages, "Train residual stages 1..N (default 1)");
  ablate->add_option("--seed", ablate_args.seed, "Override [train] seed");

  ToyArgs toy_args;
  auto* toy = app.add_subcommand("make-toy-data", "Write a deterministic synthetic HR image set");
  toy->add_option("--out", toy_args.out, "Output directory")->required();
  toy->add_option("--count", toy_args.count, "Number of images (default 20)");
  toy->add_option("--height", toy_args.height, "Image height (default 96)");
  toy->add_option("--width", toy_args.width, "Image width (default 96)");
  toy->add_option("--seed", toy_args.seed, "Generator seed (default 1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*train) return cmd_train(train_args);
    if (*eval) return cmd_eval(eval_args);
    if (*sr) return cmd_sr(sr_args);
    if (*ablate) return cmd_ablate(ablate_args);
    if (*toy) return cmd_make_toy_data(toy_args);
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const FormatError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const ShapeError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitConfig;
}

}  // namespace irl
