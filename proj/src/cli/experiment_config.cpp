#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "irl/cli.hpp"
#include "irl/errors.hpp"

namespace irl {
namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& allowed_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"model",
       {"scale", "master_blocks", "n_feats", "variant", "master_loss", "residual_loss",
        "res_scale"}},
      {"train",
       {"iterations", "residual_iterations", "batch_size", "patch_size", "lr", "beta1", "beta2",
        "eps", "lr_decay_fraction", "lr_decay_factor", "validate_every", "augment", "seed"}},
      {"data", {"train_dir", "val_dir", "cache_lr"}},
      {"output", {"dir"}},
  };
  return keys;
}

class Reader {
 public:
  Reader(const pt::ptree& tree, std::string source) : tree_(tree), source_(std::move(source)) {}

  template <typename T>
  void get(const std::string& key, T& out) const {
    const auto node = tree_.get_child_optional(pt::ptree::path_type(key, '.'));
    if (!node) return;
    try {
      out = node->get_value<T>();
    } catch (const pt::ptree_bad_data&) {
      fail(key, "cannot parse '" + node->data() + "'");
    }
  }

  std::string text(const std::string& key, const std::string& fallback) const {
    return tree_.get<std::string>(pt::ptree::path_type(key, '.'), fallback);
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw ConfigError(source_ + ": " + key + ": " + what);
  }

 private:
  const pt::ptree& tree_;
  std::string source_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value) {
  std::filesystem::path p(value);
  return p.is_absolute() ? p : (base / p).lexically_normal();
}

}  // namespace

ModelConfig ExperimentConfig::model() const {
  return make_model_config(scale, master_blocks, n_feats, variant, master_loss, residual_loss,
                           res_scale);
}

TrainConfig ExperimentConfig::stage_config(int stage) const {
  TrainConfig cfg = train;
  cfg.stage = stage;
  if (stage > 0) {
    cfg.iterations = residual_iterations >= 0 ? residual_iterations : train.iterations / 4;
  }
  cfg.label = to_string(variant) + "/" + to_string(stage == 0 ? master_loss : residual_loss);
  return cfg;
}

std::filesystem::path ExperimentConfig::checkpoint_path(int stage) const {
  return output_dir / ("stage" + std::to_string(stage) + ".ckpt");
}

std::filesystem::path ExperimentConfig::metrics_path() const { return output_dir / "metrics.csv"; }

ExperimentConfig parse_experiment_config(std::istream& in, const std::filesystem::path& base_dir,
                                         const std::string& source_name) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(source_name + ": line " + std::to_string(e.line()) + ": " + e.message());
  }
  for (const auto& [section, body] : tree) {
    auto it = allowed_keys().find(section);
    if (it == allowed_keys().end()) {
      if (body.empty() && !body.data().empty()) {
        throw ConfigError(source_name + ": key '" + section + "' outside a section");
      }
      throw ConfigError(source_name + ": unknown section [" + section + "]");
    }
    for (const auto& [key, value] : body) {
      if (!it->second.count(key)) {
        throw ConfigError(source_name + ": unknown key '" + key + "' in [" + section + "]");
      }
    }
  }

  const Reader r(tree, source_name);
  ExperimentConfig cfg;
  r.get("model.scale", cfg.scale);
  r.get("model.master_blocks", cfg.master_blocks);
  r.get("model.n_feats", cfg.n_feats);
  r.get("model.res_scale", cfg.res_scale);
  try {
    cfg.variant = parse_variant(r.text("model.variant", "up"));
    cfg.master_loss = parse_loss(r.text("model.master_loss", "L1"));
    cfg.residual_loss = parse_loss(r.text("model.residual_loss", "L2"));
  } catch (const ConfigError& e) {
    throw ConfigError(source_name + ": " + e.what());
  }

  TrainConfig& t = cfg.train;
  r.get("train.iterations", t.iterations);
  r.get("train.residual_iterations", cfg.residual_iterations);
  r.get("train.batch_size", t.batch_size);
  r.get("train.patch_size", t.patch_size);
  r.get("train.lr", t.adam.lr);
  r.get("train.beta1", t.adam.beta1);
  r.get("train.beta2", t.adam.beta2);
  r.get("train.eps", t.adam.eps);
  r.get("train.lr_decay_fraction", t.lr_decay_fraction);
  r.get("train.lr_decay_factor", t.lr_decay_factor);
  r.get("train.validate_every", t.validate_every);
  r.get("train.augment", t.augment);
  r.get("train.seed", t.seed);
  r.get("data.cache_lr", cfg.cache_lr);

  const std::string train_dir = r.text("data.train_dir", "");
  const std::string val_dir = r.text("data.val_dir", "");
  const std::string out_dir = r.text("output.dir", "");
  if (train_dir.empty()) r.fail("data.train_dir", "required");
  if (val_dir.empty()) r.fail("data.val_dir", "required");
  if (out_dir.empty()) r.fail("output.dir", "required");
  cfg.train_dir = resolve(base_dir, train_dir);
  cfg.val_dir = resolve(base_dir, val_dir);
  cfg.output_dir = resolve(base_dir, out_dir);

  if (t.iterations < 0) r.fail("train.iterations", "must be >= 0");
  if (t.batch_size < 1) r.fail("train.batch_size", "must be >= 1");
  if (t.patch_size < 4) r.fail("train.patch_size", "must be >= 4");
  if (!(t.adam.lr > 0)) r.fail("train.lr", "must be positive");
  if (!(t.adam.beta1 >= 0 && t.adam.beta1 < 1)) r.fail("train.beta1", "must lie in [0, 1)");
  if (!(t.adam.beta2 >= 0 && t.adam.beta2 < 1)) r.fail("train.beta2", "must lie in [0, 1)");
  if (!(t.adam.eps > 0)) r.fail("train.eps", "must be positive");
  if (!(t.lr_decay_fraction > 0)) r.fail("train.lr_decay_fraction", "must be positive");
  if (!(t.lr_decay_factor > 0)) r.fail("train.lr_decay_factor", "must be positive");
  try {
    (void)cfg.model();
  } catch (const ConfigError& e) {
    throw ConfigError(source_name + ": [model]: " + e.what());
  }
  for (const auto& [key, dir] : {std::pair{"data.train_dir", cfg.train_dir}, {"data.val_dir", cfg.val_dir}}) {
    if (!std::filesystem::is_directory(dir)) r.fail(key, "directory '" + dir.string() + "' does not exist");
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  return parse_experiment_config(in, std::filesystem::absolute(path).parent_path(), path.string());
}

}  // namespace irl
