#include <gtest/gtest.h>
#include <png.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "irl/dataset.hpp"
#include "irl/errors.hpp"
#include "irl/image.hpp"
#include "irl/metrics.hpp"
#include "irl/toy_images.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"

namespace irl {
namespace {

namespace fs = std::filesystem;

using testing::TempDir;

ImageBuffer random_rgb(uint32_t seed, int h, int w) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> dist(0, 255);
  ImageBuffer img = ImageBuffer::filled(h, w, 0.f);
  for (auto& v : img.pixels) v = static_cast<float>(dist(rng));
  return img;
}

// Raw libpng writer for formats save_png never produces.
void write_raw_png(const fs::path& path, int w, int h, int depth, int color_type, bool trns = false) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  ASSERT_NE(f, nullptr);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  png_init_io(png, f);
  png_set_IHDR(png, info, w, h, depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_color palette[2] = {{0, 0, 0}, {200, 100, 50}};
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_PLTE(png, info, palette, 2);
  png_byte alpha[1] = {128};
  if (trns) png_set_tRNS(png, info, alpha, 1, nullptr);
  png_write_info(png, info);
  const int channels = color_type == PNG_COLOR_TYPE_RGB ? 3 : color_type == PNG_COLOR_TYPE_RGB_ALPHA ? 4 : 1;
  std::vector<png_byte> row(static_cast<size_t>(w * channels * (depth == 16 ? 2 : 1)), 0);
  for (size_t i = 0; i < row.size(); ++i) row[i] = static_cast<png_byte>(color_type == PNG_COLOR_TYPE_PALETTE ? i % 2 : (i * 37) % 256);
  for (int y = 0; y < h; ++y) png_write_row(png, row.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(f);
}

TEST(Png, RoundTripIsLossless) {
  TempDir dir;
  const ImageBuffer img = random_rgb(1, 13, 17);
  save_png(img, dir.path() / "a.png");
  EXPECT_EQ(load_png(dir.path() / "a.png"), img);
}

TEST(Png, SaveClampsAndRoundsHalfAway) {
  EXPECT_EQ(quantize(255.7f), 255);
  EXPECT_EQ(quantize(127.5f), 128);
  EXPECT_EQ(quantize(-3.f), 0);
  EXPECT_EQ(quantize(0.49f), 0);
  TempDir dir;
  ImageBuffer img = ImageBuffer::filled(1, 2, 0.f);
  img.at(0, 0, 0) = 255.7f;
  img.at(0, 1, 0) = 127.5f;
  save_png(img, dir.path() / "q.png");
  const ImageBuffer back = load_png(dir.path() / "q.png");
  EXPECT_EQ(back.at(0, 0, 0), 255.f);
  EXPECT_EQ(back.at(0, 1, 0), 128.f);
}

TEST(Png, GrayscaleReplicatedToRgb) {
  TempDir dir;
  write_raw_png(dir.path() / "g.png", 4, 3, 8, PNG_COLOR_TYPE_GRAY);
  const ImageBuffer img = load_png(dir.path() / "g.png");
  ASSERT_EQ(img.height, 3);
  ASSERT_EQ(img.width, 4);
  for (int x = 0; x < 4; ++x) {
    EXPECT_EQ(img.at(1, x, 0), img.at(1, x, 1));
    EXPECT_EQ(img.at(1, x, 0), img.at(1, x, 2));
    EXPECT_EQ(img.at(1, x, 0), static_cast<float>((x * 37) % 256));
  }
}

TEST(Png, RejectsUnsupportedInputs) {
  TempDir dir;
  EXPECT_THROW(load_png(dir.path() / "missing.png"), DataError);
  write_raw_png(dir.path() / "d16.png", 2, 2, 16, PNG_COLOR_TYPE_RGB);
  EXPECT_THROW(load_png(dir.path() / "d16.png"), DataError);
  write_raw_png(dir.path() / "d4.png", 2, 2, 4, PNG_COLOR_TYPE_GRAY);
  EXPECT_THROW(load_png(dir.path() / "d4.png"), DataError);
  write_raw_png(dir.path() / "pa.png", 2, 2, 8, PNG_COLOR_TYPE_PALETTE, /*trns=*/true);
  EXPECT_THROW(load_png(dir.path() / "pa.png"), DataError);
  write_raw_png(dir.path() / "p.png", 2, 2, 8, PNG_COLOR_TYPE_PALETTE);
  const ImageBuffer pal = load_png(dir.path() / "p.png");
  EXPECT_EQ(pal.at(0, 1, 0), 200.f);
  {
    std::FILE* f = std::fopen((dir.path() / "bad.png").c_str(), "wb");
    std::fputs("not a png at all", f);
    std::fclose(f);
  }
  EXPECT_THROW(load_png(dir.path() / "bad.png"), DataError);
}

TEST(Bicubic, KernelPartitionOfUnity) {
  for (int i = 0; i <= 1000; ++i) {
    const double phase = i / 1000.0;
    double sum = 0.0;
    for (int k = -2; k <= 2; ++k) sum += cubic_kernel(phase - k);
    ASSERT_NEAR(sum, 1.0, 1e-12);
  }
  EXPECT_DOUBLE_EQ(cubic_kernel(0.0), 1.0);
  EXPECT_DOUBLE_EQ(cubic_kernel(1.0), 0.0);
  EXPECT_DOUBLE_EQ(cubic_kernel(2.5), 0.0);
}

TEST(Bicubic, TapWeightsSumToOneAtEveryPhase) {
  for (double scale : {0.25, 1.0 / 3.0, 0.5, 2.0, 3.0, 4.0}) {
    const int in_len = 37;
    const int out_len = static_cast<int>(std::ceil(in_len * scale));
    for (const auto& t : resample_taps(in_len, out_len, scale)) {
      double sum = 0.0;
      for (double w : t.weight) sum += w;
      ASSERT_NEAR(sum, 1.0, 1e-6);
    }
  }
}

TEST(Bicubic, ConstantImageStaysConstant) {
  const ImageBuffer img = ImageBuffer::filled(12, 18, 77.f);
  for (Ratio r : {Ratio{1, 2}, Ratio{1, 3}, Ratio{1, 4}, Ratio{2, 1}, Ratio{3, 1}, Ratio{4, 1}}) {
    const ImageBuffer out = bicubic_resize(img, r);
    for (float v : out.pixels) ASSERT_NEAR(v, 77.f, 1e-4);
  }
}

TEST(Bicubic, DimensionsAndErrors) {
  const ImageBuffer img = random_rgb(3, 10, 7);
  const ImageBuffer up = bicubic_resize(img, {2, 1});
  EXPECT_EQ(up.height, 20);
  EXPECT_EQ(up.width, 14);
  const ImageBuffer down = bicubic_resize(random_rgb(3, 12, 8), {1, 4});
  EXPECT_EQ(down.height, 3);
  EXPECT_EQ(down.width, 2);
  EXPECT_THROW(bicubic_resize(img, {3, 2}), std::invalid_argument);
  EXPECT_THROW(bicubic_resize(img, {1, 5}), std::invalid_argument);
}

// Independent brute-force evaluation of the anti-aliased kernel sum along x.
double brute_resample_x(const ImageBuffer& img, int y, int x_out, double scale, int c) {
  const double u = (x_out + 0.5) / scale - 0.5;
  double num = 0.0, den = 0.0;
  for (int i = -64; i < img.width + 64; ++i) {
    const double d = scale < 1 ? scale * (u - i) : u - i;
    const double ad = std::abs(d);
    double k = 0.0;
    if (ad <= 1) k = 1.5 * ad * ad * ad - 2.5 * ad * ad + 1;
    else if (ad < 2) k = -0.5 * ad * ad * ad + 2.5 * ad * ad - 4 * ad + 2;
    if (scale < 1) k *= scale;
    num += k * img.at(y, std::clamp(i, 0, img.width - 1), c);
    den += k;
  }
  return num / den;
}

TEST(Bicubic, HorizontalRampDownscaleIsLinear) {
  const int w = 64;
  ImageBuffer ramp = ImageBuffer::filled(8, w, 0.f);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) ramp.at(y, x, c) = 255.f * x / (w - 1);
  const ImageBuffer out = bicubic_resize(ramp, {1, 2});
  ASSERT_EQ(out.width, w / 2);
  const double range = 255.0;
  for (int x = 3; x < out.width - 3; ++x) {
    // Output sample x sits at input coordinate 2x + 0.5.
    const double analytic = 255.0 * (2.0 * x + 0.5) / (w - 1);
    EXPECT_LT(std::abs(out.at(2, x, 0) - analytic), 0.5 / 255.0 * range) << x;
    EXPECT_NEAR(out.at(2, x, 0), brute_resample_x(ramp, 4, x, 0.5, 0), 1e-3) << x;
  }
}

TEST(Bicubic, MatchesBruteForceOnRandomImage) {
  const ImageBuffer img = random_rgb(8, 1, 40);  // single row isolates the x pass
  for (Ratio r : {Ratio{1, 2}, Ratio{1, 3}, Ratio{3, 1}}) {
    const ImageBuffer out = bicubic_resize(img, r);
    for (int x = 0; x < out.width; ++x)
      for (int c = 0; c < 3; ++c) ASSERT_NEAR(out.at(0, x, c), brute_resample_x(img, 0, x, r.value(), c), 1e-3);
  }
}

TEST(Luma, FormulaValues) {
  auto y_of = [](float r, float g, float b) {
    ImageBuffer px = ImageBuffer::filled(1, 1, 0.f);
    px.at(0, 0, 0) = r;
    px.at(0, 0, 1) = g;
    px.at(0, 0, 2) = b;
    return rgb_to_y(px).values[0];
  };
  EXPECT_NEAR(y_of(255, 255, 255), 235.0, 1e-9);
  EXPECT_NEAR(y_of(0, 0, 0), 16.0, 1e-12);
  EXPECT_NEAR(y_of(128, 128, 128), 16.0 + 219.0 * 128.0 / 255.0, 1e-9);
  EXPECT_NEAR(y_of(128, 128, 128), 125.93, 5e-3);
}

TEST(Luma, RangeProperty) {
  const Plane y = rgb_to_y(random_rgb(12, 32, 32));
  for (double v : y.values) {
    ASSERT_GE(v, 16.0 - 1e-9);
    ASSERT_LE(v, 235.0 + 1e-9);
  }
}

TEST(Luma, ShaveCommutesWithLuma) {
  const ImageBuffer img = random_rgb(13, 20, 24);
  for (int border : {0, 2, 4}) EXPECT_EQ(shave(rgb_to_y(img), border), rgb_to_y(shave(img, border)));
}

TEST(Psnr, ReferenceValues) {
  Plane a{16, 16, std::vector<double>(256, 100.0)};
  Plane b = a;
  EXPECT_EQ(psnr(a, b, 0), 99.0);
  for (double& v : b.values) v += 1.0;
  EXPECT_NEAR(psnr(a, b, 0), 48.1308036087, 1e-6);
  Plane zero{16, 16, std::vector<double>(256, 0.0)};
  Plane full{16, 16, std::vector<double>(256, 255.0)};
  EXPECT_NEAR(psnr(zero, full, 0), 0.0, 1e-12);
  EXPECT_THROW(psnr(a, Plane{16, 15, std::vector<double>(240, 0.0)}, 0), ShapeError);
}

TEST(Psnr, SymmetricAndMonotoneInNoise) {
  const Plane clean = rgb_to_y(make_toy_image(5, 48, 48));
  std::mt19937 rng(2);
  std::uniform_int_distribution<int> sign(0, 1);
  double previous = 1e9;
  for (double amp : {1.0, 2.0, 4.0, 8.0}) {
    Plane noisy = clean;
    std::mt19937 r(7);
    for (double& v : noisy.values) v += (sign(r) ? amp : -amp);
    const double forward = psnr(clean, noisy, 4);
    EXPECT_EQ(forward, psnr(noisy, clean, 4));
    EXPECT_LT(forward, previous);
    previous = forward;
  }
}

TEST(Ssim, IdenticalIsOne) {
  const Plane y = rgb_to_y(make_toy_image(1, 40, 40));
  EXPECT_NEAR(ssim(y, y, 4), 1.0, 1e-9);
}

TEST(Ssim, ShiftAndInversionBands) {
  const ImageBuffer img = make_toy_image(3, 64, 64);
  ImageBuffer shifted = img;
  for (auto& v : shifted.pixels) v += 10.f;
  ImageBuffer inverted = img;
  for (auto& v : inverted.pixels) v = 255.f - v;
  const Plane y = rgb_to_y(img);
  const double s_shift = ssim(y, rgb_to_y(shifted), 4);
  const double s_inv = ssim(y, rgb_to_y(inverted), 4);
  EXPECT_LT(s_shift, 1.0);
  EXPECT_GT(s_shift, 0.5);
  EXPECT_LT(s_inv, 0.5);
  // The brute-force reference agrees on both cases.
  EXPECT_NEAR(s_shift, testing::brute_ssim(y, rgb_to_y(shifted), 4), 1e-6);
  EXPECT_NEAR(s_inv, testing::brute_ssim(y, rgb_to_y(inverted), 4), 1e-6);
}

TEST(Ssim, TooSmallRejected) {
  Plane a{14, 14, std::vector<double>(196, 1.0)};
  EXPECT_THROW(ssim(a, a, 2), ShapeError);
}

TEST(Metrics, MatchBruteForceOnFixedImages) {
  for (uint64_t k = 0; k < 5; ++k) {
    const ImageBuffer hr = make_toy_image(100 + k, 48, 40);
    const ImageBuffer sr = bicubic_resize(bicubic_resize(hr, {1, 4}), {4, 1});
    const Plane a = rgb_to_y(clamped(sr));
    const Plane b = rgb_to_y(hr);
    EXPECT_NEAR(psnr(a, b, 4), testing::brute_psnr(a, b, 4), 1e-6);
    EXPECT_NEAR(ssim(a, b, 4), testing::brute_ssim(a, b, 4), 1e-6);
  }
}

TEST(Evaluate, ClampsBeforeLuma) {
  const ImageBuffer hr = make_toy_image(4, 32, 32);
  ImageBuffer over = hr;
  for (auto& v : over.pixels) v = v > 250.f ? 400.f : v;
  ImageBuffer clipped = over;
  for (auto& v : clipped.pixels) v = std::min(v, 255.f);
  const ImageScore a = evaluate(over, hr, EvalProtocol::for_scale(2));
  const ImageScore b = evaluate(clipped, hr, EvalProtocol::for_scale(2));
  EXPECT_EQ(a.psnr_db, b.psnr_db);
  EXPECT_EQ(evaluate(hr, hr, EvalProtocol::for_scale(4)).psnr_db, 99.0);
}

TEST(Patches, EmptyDeterministicAndErrors) {
  const ImageBuffer hr = make_toy_image(9, 64, 64);
  EXPECT_TRUE(sample_patches(hr, 4, 8, 0, 1).empty());
  const auto a = sample_patches(hr, 4, 8, 16, 42, true);
  const auto b = sample_patches(hr, 4, 8, 16, 42, true);
  ASSERT_EQ(a.size(), 16u);
  for (size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].lr_top, b[i].lr_top);
    EXPECT_EQ(a[i].lr_left, b[i].lr_left);
    EXPECT_EQ(a[i].augment_code, b[i].augment_code);
    EXPECT_EQ(a[i].hr_patch, b[i].hr_patch);
  }
  EXPECT_THROW(sample_patches(hr, 4, 17, 1, 1), DataError);
}

TEST(Patches, AlignmentInvariantOverManyDraws) {
  const ImageBuffer hr = make_toy_image(10, 72, 60);
  const ImageBuffer lr = degrade(hr, 3);
  const auto pairs = sample_patches(hr, lr, 3, 6, 1000, 77, false);
  ASSERT_EQ(pairs.size(), 1000u);
  for (const auto& p : pairs) {
    ASSERT_EQ(p.hr_patch, crop(hr, 3 * p.lr_top, 3 * p.lr_left, 18, 18));
    ASSERT_EQ(p.lr_patch, crop(lr, p.lr_top, p.lr_left, 6, 6));
  }
}

TEST(Patches, AugmentationAppliedToBoth) {
  const ImageBuffer hr = make_toy_image(11, 48, 48);
  const ImageBuffer lr = degrade(hr, 2);
  const auto pairs = sample_patches(hr, lr, 2, 8, 200, 5, true);
  std::vector<int> seen(8, 0);
  for (const auto& p : pairs) {
    seen[p.augment_code]++;
    ASSERT_EQ(p.hr_patch, augment(crop(hr, 2 * p.lr_top, 2 * p.lr_left, 16, 16), p.augment_code));
    ASSERT_EQ(p.lr_patch, augment(crop(lr, p.lr_top, p.lr_left, 8, 8), p.augment_code));
  }
  for (int n : seen) EXPECT_GT(n, 0);
}

TEST(Augment, DihedralGroupProperties) {
  const ImageBuffer img = random_rgb(20, 5, 7);
  EXPECT_EQ(augment(img, 0), img);
  for (int code : {1, 2, 3}) EXPECT_EQ(augment(augment(img, code), code), img);
  EXPECT_EQ(augment(img, 4).height, 7);
}

TEST(TensorConversion, RoundTrip) {
  std::vector<ImageBuffer> batch{random_rgb(1, 6, 5), random_rgb(2, 6, 5)};
  const Tensor t = images_to_tensor(batch);
  EXPECT_EQ(t.shape(), (Shape{2, 3, 6, 5}));
  for (int n = 0; n < 2; ++n) {
    const ImageBuffer back = tensor_to_image(t, n);
    for (size_t i = 0; i < back.pixels.size(); ++i) ASSERT_NEAR(back.pixels[i], batch[n].pixels[i], 1e-3);
  }
}

TEST(Dataset, ListsHrImagesAndCachesLr) {
  TempDir dir;
  write_toy_dataset(dir.path(), 3, 26, 30, 1);
  Dataset ds = load_dataset(dir.path(), 4, /*cache_lr=*/true);
  ASSERT_EQ(ds.images.size(), 3u);
  EXPECT_EQ(ds.images[0].name, "img_000");
  EXPECT_EQ(ds.images[0].hr.height, 24);
  EXPECT_EQ(ds.images[0].hr.width, 28);
  EXPECT_EQ(ds.images[0].lr.height, 6);
  EXPECT_TRUE(fs::exists(dir.path() / lr_sibling_name("img_001", 4)));
  // Second load reads the siblings and yields identical LR data.
  Dataset again = load_dataset(dir.path(), 4);
  ASSERT_EQ(again.images.size(), 3u);
  for (size_t i = 0; i < 3; ++i) EXPECT_EQ(again.images[i].lr, ds.images[i].lr);
  EXPECT_THROW(load_dataset(dir.path() / "nope", 4), DataError);
}

TEST(ToyImages, DeterministicAndTextured) {
  EXPECT_EQ(make_toy_image(3, 32, 32), make_toy_image(3, 32, 32));
  EXPECT_NE(make_toy_image(3, 32, 32), make_toy_image(4, 32, 32));
}

}  // namespace
}  // namespace irl
