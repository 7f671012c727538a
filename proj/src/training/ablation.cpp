#include <cstdio>
#include <sstream>

#include "irl/errors.hpp"
#include "irl/training.hpp"

namespace irl {

std::vector<AblationRow> run_ablation(const Checkpoint& master, const TrainConfig& residual_cfg,
                                      AblationAxes axes, Variant base_variant,
                                      LossKind base_loss, int last_stage, const Dataset& train,
                                      const Dataset& val) {
  if (master.branches.empty()) throw ConfigError("ablation needs a trained master checkpoint");
  const BranchSpec& m = master.branches.front().spec();
  const int scale = master.model.scale;
  if (last_stage < 1 || last_stage > residual_branch_count(scale)) {
    throw ConfigError("ablation last stage " + std::to_string(last_stage) + " outside 1.." +
                      std::to_string(residual_branch_count(scale)));
  }

  std::vector<Variant> variants = axes.variant ? std::vector{Variant::kUp, Variant::kDown}
                                               : std::vector{base_variant};
  std::vector<LossKind> losses = axes.loss ? std::vector{LossKind::kL1, LossKind::kL2}
                                           : std::vector{base_loss};

  // The master alone, with no optimizer state carried over.
  Checkpoint base = clone_checkpoint(master);
  base.branches.erase(base.branches.begin() + 1, base.branches.end());
  base.state = {};

  std::vector<AblationRow> rows;
  for (Variant variant : variants) {
    for (LossKind loss : losses) {
      const ModelConfig model = make_model_config(scale, m.n_blocks, m.n_feats, variant, m.loss,
                                                  loss, master.model.res_scale);
      AblationRow row;
      row.label = to_string(variant) + "/" + to_string(loss);
      row.variant = variant;
      row.residual_loss = loss;
      Checkpoint ck = base;
      for (int stage = 1; stage <= last_stage; ++stage) {
        TrainConfig cfg = residual_cfg;
        cfg.stage = stage;
        cfg.label = row.label;
        ck = train_stage(cfg, model, train, val, &ck);
        row.wall_clock_s += ck.history.back().wall_clock_s;
      }
      row.metrics = validate(ck, val);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string ablation_markdown(std::span<const AblationRow> rows) {
  std::ostringstream os;
  os << "| config | variant | residual loss | PSNR (dB) | SSIM | train time (s) |\n";
  os << "|---|---|---|---|---|---|\n";
  char line[256];
  for (const AblationRow& r : rows) {
    std::snprintf(line, sizeof(line), "| %s | %s | %s | %.4f | %.4f | %.1f |\n", r.label.c_str(),
                  to_string(r.variant).c_str(), to_string(r.residual_loss).c_str(),
                  r.metrics.mean_psnr, r.metrics.mean_ssim, r.wall_clock_s);
    os << line;
  }
  return os.str();
}

}  // namespace irl
