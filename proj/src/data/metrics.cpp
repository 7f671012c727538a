#include "irl/metrics.hpp"

#include <cmath>

#include "irl/errors.hpp"

namespace irl {
namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;

void require_same_dims(const Plane& a, const Plane& b) {
  if (a.height != b.height || a.width != b.width) {
    throw ShapeError("metric inputs differ in size: " + std::to_string(a.height) + "x" +
                     std::to_string(a.width) + " vs " + std::to_string(b.height) + "x" +
                     std::to_string(b.width));
  }
}

std::vector<double> gaussian_window() {
  std::vector<double> g(kWindow);
  double total = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double d = i - (kWindow - 1) / 2.0;
    g[i] = std::exp(-(d * d) / (2.0 * kSigma * kSigma));
    total += g[i];
  }
  for (double& v : g) v /= total;
  return g;
}

// Separable 'valid' filtering with the normalized Gaussian.
std::vector<double> filter_valid(const std::vector<double>& src, int h, int w,
                                 const std::vector<double>& g) {
  const int oh = h - kWindow + 1;
  const int ow = w - kWindow + 1;
  std::vector<double> rows(static_cast<size_t>(h) * ow);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += g[k] * src[static_cast<size_t>(y) * w + x + k];
      rows[static_cast<size_t>(y) * ow + x] = acc;
    }
  }
  std::vector<double> out(static_cast<size_t>(oh) * ow);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += g[k] * rows[static_cast<size_t>(y + k) * ow + x];
      out[static_cast<size_t>(y) * ow + x] = acc;
    }
  }
  return out;
}

}  // namespace

double psnr(const Plane& a, const Plane& b, int shave_border, double cap) {
  require_same_dims(a, b);
  const Plane sa = shave(a, shave_border);
  const Plane sb = shave(b, shave_border);
  double sse = 0.0;
  for (size_t i = 0; i < sa.values.size(); ++i) {
    const double d = sa.values[i] - sb.values[i];
    sse += d * d;
  }
  const double mse = sse / static_cast<double>(sa.values.size());
  if (mse == 0.0) return cap;
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

double ssim(const Plane& a, const Plane& b, int shave_border) {
  require_same_dims(a, b);
  const Plane sa = shave(a, shave_border);
  const Plane sb = shave(b, shave_border);
  const int h = sa.height;
  const int w = sa.width;
  if (h < kWindow || w < kWindow) {
    throw ShapeError("ssim needs at least 11x11 pixels after shaving, got " + std::to_string(h) +
                     "x" + std::to_string(w));
  }
  const double c1 = (0.01 * 255.0) * (0.01 * 255.0);
  const double c2 = (0.03 * 255.0) * (0.03 * 255.0);
  const auto g = gaussian_window();
  std::vector<double> xx(sa.values.size()), yy(sa.values.size()), xy(sa.values.size());
  for (size_t i = 0; i < sa.values.size(); ++i) {
    xx[i] = sa.values[i] * sa.values[i];
    yy[i] = sb.values[i] * sb.values[i];
    xy[i] = sa.values[i] * sb.values[i];
  }
  const auto mu_x = filter_valid(sa.values, h, w, g);
  const auto mu_y = filter_valid(sb.values, h, w, g);
  const auto e_xx = filter_valid(xx, h, w, g);
  const auto e_yy = filter_valid(yy, h, w, g);
  const auto e_xy = filter_valid(xy, h, w, g);
  double total = 0.0;
  for (size_t i = 0; i < mu_x.size(); ++i) {
    const double mx = mu_x[i];
    const double my = mu_y[i];
    const double vx = e_xx[i] - mx * mx;
    const double vy = e_yy[i] - my * my;
    const double cov = e_xy[i] - mx * my;
    total += ((2.0 * mx * my + c1) * (2.0 * cov + c2)) /
             ((mx * mx + my * my + c1) * (vx + vy + c2));
  }
  return total / static_cast<double>(mu_x.size());
}

ImageScore evaluate(const ImageBuffer& sr, const ImageBuffer& hr, const EvalProtocol& protocol) {
  const Plane ys = rgb_to_y(clamped(sr));
  const Plane yh = rgb_to_y(clamped(hr));
  return {psnr(ys, yh, protocol.shave, protocol.psnr_cap), ssim(ys, yh, protocol.shave)};
}

}  // namespace irl
