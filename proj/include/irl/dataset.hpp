#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "irl/image.hpp"

namespace irl {

struct PatchPair {
  ImageBuffer lr_patch;  // patch x patch
  ImageBuffer hr_patch;  // (scale*patch) x (scale*patch)
  int image_id = 0;
  int lr_top = 0;
  int lr_left = 0;
  int augment_code = 0;  // see augment()
};

// `count` uniformly placed, scale-aligned pairs: hr window starts at
// (scale*lr_top, scale*lr_left). With `augment`, one random dihedral
// transform is applied identically to both patches. Deterministic in `seed`.
std::vector<PatchPair> sample_patches(const ImageBuffer& hr, const ImageBuffer& lr, int scale,
                                      int patch, int count, uint64_t seed, bool augment = false,
                                      int image_id = 0);

// Same, generating the LR image by bicubic downscaling (quantized to 8 bits).
std::vector<PatchPair> sample_patches(const ImageBuffer& hr, int scale, int patch, int count,
                                      uint64_t seed, bool augment = false, int image_id = 0);

// Standard degradation: modcrop, bicubic 1/scale, 8-bit quantization.
ImageBuffer degrade(const ImageBuffer& hr, int scale);

struct DatasetImage {
  std::string name;  // file stem
  ImageBuffer hr;    // modcropped to a multiple of scale
  ImageBuffer lr;
};

struct Dataset {
  int scale = 0;
  std::vector<DatasetImage> images;
};

// Every *.png in `dir` (sorted by name) except `<name>_x<s>.png` LR siblings.
// LR images come from an existing sibling when present, otherwise from
// degrade(); with `cache_lr` the generated ones are written back as siblings.
Dataset load_dataset(const std::filesystem::path& dir, int scale, bool cache_lr = false);

std::string lr_sibling_name(const std::string& stem, int scale);

}  // namespace irl
