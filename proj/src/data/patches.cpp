#include <random>

#include "irl/dataset.hpp"
#include "irl/errors.hpp"

namespace irl {

ImageBuffer degrade(const ImageBuffer& hr, int scale) {
  return quantized(bicubic_resize(modcrop(hr, scale), Ratio{1, scale}));
}

std::vector<PatchPair> sample_patches(const ImageBuffer& hr, const ImageBuffer& lr, int scale,
                                      int patch, int count, uint64_t seed, bool augment_pairs,
                                      int image_id) {
  if (patch < 1 || count < 0 || scale < 1) {
    throw std::invalid_argument("sample_patches: patch and scale must be positive, count >= 0");
  }
  if (lr.height < patch || lr.width < patch) {
    throw DataError("image " + std::to_string(image_id) + " LR size " + std::to_string(lr.height) +
                    "x" + std::to_string(lr.width) + " smaller than patch " + std::to_string(patch));
  }
  if (hr.height < lr.height * scale || hr.width < lr.width * scale) {
    throw DataError("HR image does not cover the scaled LR image");
  }
  std::vector<PatchPair> out;
  out.reserve(static_cast<size_t>(count));
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> top_dist(0, lr.height - patch);
  std::uniform_int_distribution<int> left_dist(0, lr.width - patch);
  std::uniform_int_distribution<int> aug_dist(0, 7);
  for (int i = 0; i < count; ++i) {
    PatchPair p;
    p.image_id = image_id;
    p.lr_top = top_dist(rng);
    p.lr_left = left_dist(rng);
    p.augment_code = augment_pairs ? aug_dist(rng) : 0;
    p.lr_patch = crop(lr, p.lr_top, p.lr_left, patch, patch);
    p.hr_patch = crop(hr, p.lr_top * scale, p.lr_left * scale, patch * scale, patch * scale);
    if (p.augment_code != 0) {
      p.lr_patch = augment(p.lr_patch, p.augment_code);
      p.hr_patch = augment(p.hr_patch, p.augment_code);
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<PatchPair> sample_patches(const ImageBuffer& hr, int scale, int patch, int count,
                                      uint64_t seed, bool augment_pairs, int image_id) {
  const ImageBuffer cropped = modcrop(hr, scale);
  return sample_patches(cropped, degrade(cropped, scale), scale, patch, count, seed, augment_pairs,
                        image_id);
}

}  // namespace irl
