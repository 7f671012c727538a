#include <algorithm>
#include <regex>

#include "irl/dataset.hpp"
#include "irl/errors.hpp"

namespace irl {

std::string lr_sibling_name(const std::string& stem, int scale) {
  return stem + "_x" + std::to_string(scale) + ".png";
}

Dataset load_dataset(const std::filesystem::path& dir, int scale, bool cache_lr) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) {
    throw DataError("dataset directory '" + dir.string() + "' does not exist");
  }
  static const std::regex sibling(R"(.*_x[234]$)");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".png") continue;
    if (std::regex_match(entry.path().stem().string(), sibling)) continue;
    files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    throw DataError("dataset directory '" + dir.string() + "' holds no HR PNG images");
  }

  Dataset ds;
  ds.scale = scale;
  for (const auto& path : files) {
    DatasetImage item;
    item.name = path.stem().string();
    item.hr = modcrop(load_png(path), scale);
    const fs::path lr_path = dir / lr_sibling_name(item.name, scale);
    if (fs::exists(lr_path)) {
      item.lr = load_png(lr_path);
      if (item.lr.height * scale != item.hr.height || item.lr.width * scale != item.hr.width) {
        throw DataError("cached LR image '" + lr_path.string() + "' does not match its HR size");
      }
    } else {
      item.lr = degrade(item.hr, scale);
      if (cache_lr) save_png(item.lr, lr_path);
    }
    ds.images.push_back(std::move(item));
  }
  return ds;
}

}  // namespace irl
