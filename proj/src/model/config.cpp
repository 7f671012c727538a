#include <algorithm>
#include <cctype>

#include "irl/errors.hpp"
#include "irl/model.hpp"

namespace irl {

std::string to_string(LossKind loss) { return loss == LossKind::kL1 ? "L1" : "L2"; }

std::string to_string(Variant variant) { return variant == Variant::kUp ? "up" : "down"; }

LossKind parse_loss(const std::string& text) {
  std::string t = text;
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "l1") return LossKind::kL1;
  if (t == "l2") return LossKind::kL2;
  throw ConfigError("unknown loss '" + text + "' (expected L1 or L2)");
}

Variant parse_variant(const std::string& text) {
  std::string t = text;
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "up" || t == "u") return Variant::kUp;
  if (t == "down" || t == "d") return Variant::kDown;
  throw ConfigError("unknown variant '" + text + "' (expected up or down)");
}

std::vector<int> upsample_factors(int scale) {
  switch (scale) {
    case 2:
      return {2};
    case 3:
      return {3};
    case 4:
      return {2, 2};
    default:
      throw ConfigError("unsupported scale " + std::to_string(scale) + " (expected 2, 3 or 4)");
  }
}

int residual_branch_count(int scale) {
  upsample_factors(scale);  // validates
  return scale == 4 ? 2 : 1;
}

namespace {

int input_level_for(Variant variant, int index) {
  if (index == 0) return 0;
  return variant == Variant::kUp ? index : index - 1;
}

std::vector<TapRef> expected_taps(const std::vector<BranchSpec>& specs, int index) {
  std::vector<TapRef> taps;
  if (index == 0) return taps;
  const int level = input_level_for(specs[index].variant, index);
  for (int j = 0; j < index; ++j) {
    taps.push_back({j, level - input_level_for(specs[j].variant, j)});
  }
  return taps;
}

}  // namespace

int input_level(const ModelConfig& cfg, int index) {
  return input_level_for(cfg.branches.at(index).variant, index);
}

ModelConfig make_model_config(int scale, int master_blocks, int n_feats, Variant variant,
                              LossKind master_loss, LossKind residual_loss, double res_scale) {
  ModelConfig cfg;
  cfg.scale = scale;
  cfg.res_scale = res_scale;
  const int n = residual_branch_count(scale);
  int blocks = master_blocks;
  for (int i = 0; i <= n; ++i) {
    BranchSpec spec;
    spec.index = i;
    spec.n_blocks = blocks;
    spec.n_feats = n_feats;
    spec.loss = i == 0 ? master_loss : residual_loss;
    spec.variant = i == 0 ? Variant::kUp : variant;  // master wiring has no variant
    cfg.branches.push_back(spec);
    blocks = std::max(1, blocks / 2);
  }
  for (int i = 1; i <= n; ++i) {
    cfg.branches[i].input_taps = expected_taps(cfg.branches, i);
  }
  validate_config(cfg);
  return cfg;
}

void validate_config(const ModelConfig& cfg) {
  const auto factors = upsample_factors(cfg.scale);
  const int n = residual_branch_count(cfg.scale);
  if (cfg.residual_count() != n) {
    throw ConfigError("scale x" + std::to_string(cfg.scale) + " uses " + std::to_string(n) +
                      " residual branches, config declares " +
                      std::to_string(cfg.residual_count()));
  }
  if (cfg.n_colors < 1) throw ConfigError("n_colors must be positive");
  if (!(cfg.res_scale > 0.0)) throw ConfigError("res_scale must be positive");
  for (int i = 0; i <= n; ++i) {
    const BranchSpec& spec = cfg.branches[i];
    const std::string where = "branch " + std::to_string(i) + ": ";
    if (spec.index != i) throw ConfigError(where + "index field is " + std::to_string(spec.index));
    if (spec.n_feats < 1) throw ConfigError(where + "n_feats must be positive");
    if (spec.n_blocks < 1) throw ConfigError(where + "n_blocks must be positive");
    if (i > 0) {
      const int expected = std::max(1, cfg.branches[i - 1].n_blocks / 2);
      if (spec.n_blocks != expected) {
        throw ConfigError(where + "n_blocks " + std::to_string(spec.n_blocks) +
                          " breaks the halving rule (expected " + std::to_string(expected) + ")");
      }
      if (spec.variant != cfg.branches[1].variant) {
        throw ConfigError(where + "all residual branches must share one variant");
      }
    }
    if (spec.input_taps != expected_taps(cfg.branches, i)) {
      throw ConfigError(where + "input taps do not follow the incremental wiring rule");
    }
    const int level = input_level_for(spec.variant, i);
    if (level > static_cast<int>(factors.size())) {
      throw ConfigError(where + "input level beyond the final scale");
    }
  }
}

}  // namespace irl
