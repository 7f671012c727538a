#include "irl/toy_images.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "irl/errors.hpp"

namespace irl {

ImageBuffer make_toy_image(uint64_t seed, int height, int width) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto color = [&] { return std::array<double, 3>{255 * unit(rng), 255 * unit(rng), 255 * unit(rng)}; };

  ImageBuffer img = ImageBuffer::filled(height, width, 0.0f);
  const auto c0 = color();
  const auto c1 = color();
  const double angle = 2 * std::numbers::pi * unit(rng);
  const double gx = std::cos(angle) / width;
  const double gy = std::sin(angle) / height;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double t = std::clamp(0.5 + gx * (x - width / 2.0) + gy * (y - height / 2.0), 0.0, 1.0);
      for (int c = 0; c < 3; ++c) img.at(y, x, c) = static_cast<float>(c0[c] * (1 - t) + c1[c] * t);
    }
  }

  // Discs filled with an oriented sinusoid.
  const int textures = 2 + static_cast<int>(rng() % 3);
  for (int k = 0; k < textures; ++k) {
    const double cx = width * unit(rng);
    const double cy = height * unit(rng);
    const double radius = std::min(height, width) * (0.15 + 0.25 * unit(rng));
    const double period = 3.0 + 9.0 * unit(rng);
    const double theta = std::numbers::pi * unit(rng);
    const auto tint = color();
    const double amp = 0.3 + 0.6 * unit(rng);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const double dx = x - cx;
        const double dy = y - cy;
        if (dx * dx + dy * dy > radius * radius) continue;
        const double phase = (dx * std::cos(theta) + dy * std::sin(theta)) * 2 * std::numbers::pi / period;
        const double s = 0.5 + 0.5 * amp * std::sin(phase);
        for (int c = 0; c < 3; ++c) img.at(y, x, c) = static_cast<float>(tint[c] * s);
      }
    }
  }

  // Hard-edged rectangles and rings.
  const int shapes = 3 + static_cast<int>(rng() % 4);
  for (int k = 0; k < shapes; ++k) {
    const auto fill = color();
    if (rng() % 2 == 0) {
      const int h = 2 + static_cast<int>(unit(rng) * height / 3);
      const int w = 2 + static_cast<int>(unit(rng) * width / 3);
      const int top = static_cast<int>(unit(rng) * (height - h));
      const int left = static_cast<int>(unit(rng) * (width - w));
      for (int y = top; y < top + h; ++y)
        for (int x = left; x < left + w; ++x)
          for (int c = 0; c < 3; ++c) img.at(y, x, c) = static_cast<float>(fill[c]);
    } else {
      const double cx = width * unit(rng);
      const double cy = height * unit(rng);
      const double outer = 3.0 + std::min(height, width) * 0.2 * unit(rng);
      const double inner = outer * (0.3 + 0.5 * unit(rng));
      for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
          const double r2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
          if (r2 > outer * outer || r2 < inner * inner) continue;
          for (int c = 0; c < 3; ++c) img.at(y, x, c) = static_cast<float>(fill[c]);
        }
      }
    }
  }
  return quantized(img);
}

void write_toy_dataset(const std::filesystem::path& dir, int count, int height, int width,
                       uint64_t seed) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw DataError("cannot create '" + dir.string() + "': " + ec.message());
  }
  for (int k = 0; k < count; ++k) {
    char name[32];
    std::snprintf(name, sizeof(name), "img_%03d.png", k);
    save_png(make_toy_image(seed * 1000003ULL + static_cast<uint64_t>(k), height, width), dir / name);
  }
}

}  // namespace irl
