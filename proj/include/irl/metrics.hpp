#pragma once

#include "irl/image.hpp"

namespace irl {

inline constexpr double kPsnrCap = 99.0;

// Peak 255. Returns `cap` when the shaved planes are identical.
double psnr(const Plane& a, const Plane& b, int shave_border, double cap = kPsnrCap);

// Mean local SSIM, 11x11 Gaussian window (sigma 1.5), C1 = (0.01*255)^2,
// C2 = (0.03*255)^2, computed over the valid window positions.
double ssim(const Plane& a, const Plane& b, int shave_border);

// Luma comparison used for every reported number: both images are clamped
// to [0, 255], converted to Y, then shaved by `shave` pixels per side.
struct EvalProtocol {
  int shave = 0;
  double psnr_cap = kPsnrCap;

  static EvalProtocol for_scale(int scale) { return {scale, kPsnrCap}; }
};

struct ImageScore {
  double psnr_db = 0.0;
  double ssim = 0.0;
};

ImageScore evaluate(const ImageBuffer& sr, const ImageBuffer& hr, const EvalProtocol& protocol);

}  // namespace irl
