#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "irl/tensor.hpp"

namespace irl {

// Interleaved RGB image, float samples on the [0, 255] scale. Values may
// leave that range in memory; they are clamped only when saved or measured.
struct ImageBuffer {
  int height = 0;
  int width = 0;
  std::vector<float> pixels;  // (y * width + x) * 3 + channel

  static ImageBuffer filled(int height, int width, float value);

  float& at(int y, int x, int c) { return pixels[(static_cast<size_t>(y) * width + x) * 3 + c]; }
  float at(int y, int x, int c) const {
    return pixels[(static_cast<size_t>(y) * width + x) * 3 + c];
  }
  bool operator==(const ImageBuffer&) const = default;
};

// Single-channel double-precision plane (luma, metric maps).
struct Plane {
  int height = 0;
  int width = 0;
  std::vector<double> values;

  double at(int y, int x) const { return values[static_cast<size_t>(y) * width + x]; }
  bool operator==(const Plane&) const = default;
};

// Clamp to [0, 255] and round half away from zero.
uint8_t quantize(float value);
ImageBuffer quantized(const ImageBuffer& img);
ImageBuffer clamped(const ImageBuffer& img);

// 8-bit RGB, grayscale (replicated to three channels) or opaque palette PNG.
// Throws DataError for missing files, 16-bit or sub-byte depth, alpha.
ImageBuffer load_png(const std::filesystem::path& path);
void save_png(const ImageBuffer& img, const std::filesystem::path& path);

struct Ratio {
  int num = 1;
  int den = 1;
  double value() const { return static_cast<double>(num) / den; }
};

// Keys cubic convolution kernel with a = -0.5.
double cubic_kernel(double x);

// Contributions of input samples to one output sample along an axis.
struct ResampleTaps {
  std::vector<int> index;  // edge-clamped input indices
  std::vector<double> weight;
};

// Per-output-sample taps for resampling `in_len` samples by `scale`. When
// downscaling the kernel is stretched by 1/scale (anti-aliasing); weights are
// normalized to sum to one.
std::vector<ResampleTaps> resample_taps(int in_len, int out_len, double scale);

// Separable bicubic resize by one of 1/2, 1/3, 1/4, 2, 3, 4. Output size is
// ceil(dim * factor).
ImageBuffer bicubic_resize(const ImageBuffer& img, Ratio factor);

// BT.601 studio-swing luma: 16 + (65.481 R + 128.553 G + 24.966 B) / 255.
Plane rgb_to_y(const ImageBuffer& img);

ImageBuffer crop(const ImageBuffer& img, int top, int left, int height, int width);
ImageBuffer shave(const ImageBuffer& img, int border);
Plane shave(const Plane& plane, int border);

// Crop so both dimensions are multiples of `scale`.
ImageBuffer modcrop(const ImageBuffer& img, int scale);

// 8-way dihedral augmentation. Bit 0: horizontal flip, bit 1: vertical flip,
// bit 2: transpose (applied last).
ImageBuffer augment(const ImageBuffer& img, int code);

// Batch of equally sized images -> (n, 3, h, w) tensor scaled to [0, 1].
Tensor images_to_tensor(std::span<const ImageBuffer> images);
// Image `index` of an (n, 3, h, w) tensor, rescaled to [0, 255].
ImageBuffer tensor_to_image(const Tensor& t, int64_t index = 0);

}  // namespace irl
