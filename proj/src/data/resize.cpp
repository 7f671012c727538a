#include <algorithm>
#include <cmath>

#include "irl/errors.hpp"
#include "irl/image.hpp"

namespace irl {

double cubic_kernel(double x) {
  constexpr double a = -0.5;
  const double ax = std::abs(x);
  const double ax2 = ax * ax;
  const double ax3 = ax2 * ax;
  if (ax <= 1.0) return (a + 2.0) * ax3 - (a + 3.0) * ax2 + 1.0;
  if (ax < 2.0) return a * ax3 - 5.0 * a * ax2 + 8.0 * a * ax - 4.0 * a;
  return 0.0;
}

std::vector<ResampleTaps> resample_taps(int in_len, int out_len, double scale) {
  const bool shrink = scale < 1.0;
  const double support = shrink ? 4.0 / scale : 4.0;
  const int count = static_cast<int>(std::ceil(support)) + 2;
  std::vector<ResampleTaps> taps(static_cast<size_t>(out_len));
  for (int x = 0; x < out_len; ++x) {
    // Pixel-centre alignment: output centre x + 0.5 maps to input u + 0.5.
    const double u = (x + 0.5) / scale - 0.5;
    const int left = static_cast<int>(std::floor(u - support / 2.0));
    ResampleTaps& t = taps[static_cast<size_t>(x)];
    double total = 0.0;
    for (int k = 0; k < count; ++k) {
      const int idx = left + k;
      const double d = u - idx;
      const double w = shrink ? scale * cubic_kernel(scale * d) : cubic_kernel(d);
      if (w == 0.0) continue;
      t.index.push_back(std::clamp(idx, 0, in_len - 1));
      t.weight.push_back(w);
      total += w;
    }
    for (double& w : t.weight) w /= total;
  }
  return taps;
}

ImageBuffer bicubic_resize(const ImageBuffer& img, Ratio factor) {
  const bool allowed = (factor.num == 1 && factor.den >= 2 && factor.den <= 4) ||
                       (factor.den == 1 && factor.num >= 2 && factor.num <= 4);
  if (!allowed) {
    throw std::invalid_argument("bicubic_resize: factor " + std::to_string(factor.num) + "/" +
                                std::to_string(factor.den) + " not in {1/4, 1/3, 1/2, 2, 3, 4}");
  }
  const double s = factor.value();
  const int out_h = static_cast<int>(std::ceil(static_cast<double>(img.height) * factor.num / factor.den));
  const int out_w = static_cast<int>(std::ceil(static_cast<double>(img.width) * factor.num / factor.den));
  if (img.height < 1 || img.width < 1 || out_h < 1 || out_w < 1) {
    throw DataError("bicubic_resize: degenerate output size");
  }
  const auto col_taps = resample_taps(img.width, out_w, s);
  const auto row_taps = resample_taps(img.height, out_h, s);

  // Horizontal pass into a double buffer, then vertical.
  std::vector<double> tmp(static_cast<size_t>(img.height) * out_w * 3);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < out_w; ++x) {
      const ResampleTaps& t = col_taps[static_cast<size_t>(x)];
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (size_t k = 0; k < t.index.size(); ++k) acc += t.weight[k] * img.at(y, t.index[k], c);
        tmp[(static_cast<size_t>(y) * out_w + x) * 3 + c] = acc;
      }
    }
  }
  ImageBuffer out;
  out.height = out_h;
  out.width = out_w;
  out.pixels.resize(static_cast<size_t>(out_h) * out_w * 3);
  for (int y = 0; y < out_h; ++y) {
    const ResampleTaps& t = row_taps[static_cast<size_t>(y)];
    for (int x = 0; x < out_w; ++x) {
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (size_t k = 0; k < t.index.size(); ++k) {
          acc += t.weight[k] * tmp[(static_cast<size_t>(t.index[k]) * out_w + x) * 3 + c];
        }
        out.at(y, x, c) = static_cast<float>(acc);
      }
    }
  }
  return out;
}

}  // namespace irl
