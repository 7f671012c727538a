#include <algorithm>
#include <cmath>

#include "irl/errors.hpp"
#include "irl/image.hpp"

namespace irl {

ImageBuffer ImageBuffer::filled(int height, int width, float value) {
  if (height < 1 || width < 1) {
    throw ShapeError("image dimensions must be >= 1");
  }
  ImageBuffer img;
  img.height = height;
  img.width = width;
  img.pixels.assign(static_cast<size_t>(height) * width * 3, value);
  return img;
}

uint8_t quantize(float value) {
  const double v = std::clamp(static_cast<double>(value), 0.0, 255.0);
  return static_cast<uint8_t>(std::round(v));
}

ImageBuffer quantized(const ImageBuffer& img) {
  ImageBuffer out = img;
  for (auto& v : out.pixels) v = static_cast<float>(quantize(v));
  return out;
}

ImageBuffer clamped(const ImageBuffer& img) {
  ImageBuffer out = img;
  for (auto& v : out.pixels) v = std::clamp(v, 0.0f, 255.0f);
  return out;
}

Plane rgb_to_y(const ImageBuffer& img) {
  Plane y;
  y.height = img.height;
  y.width = img.width;
  y.values.resize(static_cast<size_t>(img.height) * img.width);
  for (size_t i = 0; i < y.values.size(); ++i) {
    const double r = img.pixels[i * 3];
    const double g = img.pixels[i * 3 + 1];
    const double b = img.pixels[i * 3 + 2];
    y.values[i] = 16.0 + (65.481 * r + 128.553 * g + 24.966 * b) / 255.0;
  }
  return y;
}

ImageBuffer crop(const ImageBuffer& img, int top, int left, int height, int width) {
  if (top < 0 || left < 0 || height < 1 || width < 1 || top + height > img.height ||
      left + width > img.width) {
    throw ShapeError("crop window out of bounds");
  }
  ImageBuffer out;
  out.height = height;
  out.width = width;
  out.pixels.resize(static_cast<size_t>(height) * width * 3);
  for (int y = 0; y < height; ++y) {
    const float* src = &img.pixels[(static_cast<size_t>(top + y) * img.width + left) * 3];
    std::copy(src, src + static_cast<size_t>(width) * 3,
              out.pixels.begin() + static_cast<std::ptrdiff_t>(y) * width * 3);
  }
  return out;
}

ImageBuffer shave(const ImageBuffer& img, int border) {
  return crop(img, border, border, img.height - 2 * border, img.width - 2 * border);
}

Plane shave(const Plane& plane, int border) {
  const int h = plane.height - 2 * border;
  const int w = plane.width - 2 * border;
  if (border < 0 || h < 1 || w < 1) {
    throw ShapeError("shave border " + std::to_string(border) + " leaves no pixels");
  }
  Plane out;
  out.height = h;
  out.width = w;
  out.values.reserve(static_cast<size_t>(h) * w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) out.values.push_back(plane.at(y + border, x + border));
  }
  return out;
}

ImageBuffer modcrop(const ImageBuffer& img, int scale) {
  const int h = img.height - img.height % scale;
  const int w = img.width - img.width % scale;
  if (h < 1 || w < 1) {
    throw DataError("image smaller than the scale factor");
  }
  return crop(img, 0, 0, h, w);
}

ImageBuffer augment(const ImageBuffer& img, int code) {
  const bool hflip = code & 1;
  const bool vflip = code & 2;
  const bool transpose = code & 4;
  ImageBuffer out;
  out.height = transpose ? img.width : img.height;
  out.width = transpose ? img.height : img.width;
  out.pixels.resize(img.pixels.size());
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      int sy = transpose ? x : y;
      int sx = transpose ? y : x;
      if (vflip) sy = img.height - 1 - sy;
      if (hflip) sx = img.width - 1 - sx;
      for (int c = 0; c < 3; ++c) out.at(y, x, c) = img.at(sy, sx, c);
    }
  }
  return out;
}

Tensor images_to_tensor(std::span<const ImageBuffer> images) {
  if (images.empty()) {
    throw ShapeError("images_to_tensor: empty batch");
  }
  const int h = images.front().height;
  const int w = images.front().width;
  const int64_t plane = static_cast<int64_t>(h) * w;
  std::vector<float> data(static_cast<size_t>(images.size() * 3 * plane));
  for (size_t n = 0; n < images.size(); ++n) {
    const ImageBuffer& img = images[n];
    if (img.height != h || img.width != w) {
      throw ShapeError("images_to_tensor: images differ in size");
    }
    for (int64_t p = 0; p < plane; ++p) {
      for (int c = 0; c < 3; ++c) {
        data[static_cast<size_t>((static_cast<int64_t>(n) * 3 + c) * plane + p)] =
            img.pixels[static_cast<size_t>(p * 3 + c)] / 255.0f;
      }
    }
  }
  return Tensor::from_data({static_cast<int64_t>(images.size()), 3, h, w}, std::move(data));
}

ImageBuffer tensor_to_image(const Tensor& t, int64_t index) {
  const Shape& s = t.shape();
  if (s.c != 3 || index < 0 || index >= s.n) {
    throw ShapeError("tensor_to_image: expected (n, 3, h, w), got " + s.str());
  }
  ImageBuffer img;
  img.height = static_cast<int>(s.h);
  img.width = static_cast<int>(s.w);
  img.pixels.resize(static_cast<size_t>(s.h * s.w * 3));
  const int64_t plane = s.h * s.w;
  const float* src = t.data().data() + index * 3 * plane;
  for (int64_t p = 0; p < plane; ++p) {
    for (int c = 0; c < 3; ++c) img.pixels[static_cast<size_t>(p * 3 + c)] = src[c * plane + p] * 255.0f;
  }
  return img;
}

}  // namespace irl
