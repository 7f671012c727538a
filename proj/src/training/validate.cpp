#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>

#include "irl/autograd.hpp"
#include "irl/errors.hpp"
#include "irl/metrics.hpp"
#include "irl/ops.hpp"
#include "irl/training.hpp"

namespace irl {
namespace {

int stack_scale(std::span<const Branch> branches) {
  int s = 1;
  for (int f : branches.front().stage_factors()) s *= f;
  return s;
}

std::vector<ImageBuffer> run_whole(std::span<const Branch> branches, const ImageBuffer& lr) {
  NoGradScope no_grad;
  const Tensor x = images_to_tensor(std::span<const ImageBuffer>(&lr, 1));
  const StackOutput out = forward(branches, x);
  std::vector<ImageBuffer> levels;
  // Same accumulation order as compose().
  Tensor acc = out.preds.front();
  levels.push_back(tensor_to_image(acc));
  for (size_t k = 1; k < out.preds.size(); ++k) {
    acc = add(acc, out.preds[k]);
    levels.push_back(tensor_to_image(acc));
  }
  return levels;
}

// Tile origins covering [0, len); the last tile is flush with the end.
std::vector<int> tile_starts(int len, int tile, int overlap) {
  std::vector<int> starts;
  if (len <= tile) return {0};
  for (int s = 0;; s += tile - overlap) {
    if (s + tile >= len) {
      starts.push_back(len - tile);
      break;
    }
    starts.push_back(s);
  }
  return starts;
}

// Blend weight of HR sample `u` in a tile of `len` HR samples. Ramps run over
// `ramp` samples on every side that borders another tile.
double ramp_weight(int u, int len, int ramp, bool ramp_lo, bool ramp_hi) {
  double w = 1.0;
  if (ramp_lo) w = std::min(w, (u + 0.5) / ramp);
  if (ramp_hi) w = std::min(w, (len - u - 0.5) / ramp);
  return w;
}

}  // namespace

int default_thread_count() {
  if (const char* env = std::getenv("IRL_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n > 0) return static_cast<int>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<ImageBuffer> super_resolve_levels(std::span<const Branch> branches,
                                              const ImageBuffer& lr,
                                              const InferenceOptions& options) {
  if (branches.empty()) throw ConfigError("super_resolve: no branches");
  const int tile = options.tile;
  if (tile <= 0 || (lr.height <= tile && lr.width <= tile)) return run_whole(branches, lr);
  if (options.overlap < 0 || tile <= options.overlap) {
    throw ConfigError("tile size " + std::to_string(tile) + " must exceed overlap " +
                      std::to_string(options.overlap));
  }

  const int s = stack_scale(branches);
  const int halo = context_radius(branches);
  const int th = std::min(tile, lr.height);
  const int tw = std::min(tile, lr.width);
  const auto ys = tile_starts(lr.height, th, options.overlap);
  const auto xs = tile_starts(lr.width, tw, options.overlap);
  const int out_h = lr.height * s;
  const int out_w = lr.width * s;
  const int ramp = std::max(1, options.overlap * s);

  std::vector<std::vector<double>> acc(branches.size(),
                                       std::vector<double>(static_cast<size_t>(out_h) * out_w * 3));
  std::vector<double> weight(static_cast<size_t>(out_h) * out_w, 0.0);

  for (size_t iy = 0; iy < ys.size(); ++iy) {
    for (size_t ix = 0; ix < xs.size(); ++ix) {
      const int y0 = ys[iy], x0 = xs[ix];
      const int cy0 = std::max(0, y0 - halo), cx0 = std::max(0, x0 - halo);
      const int cy1 = std::min(lr.height, y0 + th + halo);
      const int cx1 = std::min(lr.width, x0 + tw + halo);
      const auto levels = run_whole(branches, crop(lr, cy0, cx0, cy1 - cy0, cx1 - cx0));
      const int oy = (y0 - cy0) * s, ox = (x0 - cx0) * s;
      for (int v = 0; v < th * s; ++v) {
        const double wy = ramp_weight(v, th * s, ramp, iy > 0, iy + 1 < ys.size());
        for (int u = 0; u < tw * s; ++u) {
          const double w = wy * ramp_weight(u, tw * s, ramp, ix > 0, ix + 1 < xs.size());
          const size_t dst = static_cast<size_t>(y0 * s + v) * out_w + (x0 * s + u);
          weight[dst] += w;
          for (size_t k = 0; k < levels.size(); ++k) {
            for (int c = 0; c < 3; ++c) acc[k][dst * 3 + c] += w * levels[k].at(oy + v, ox + u, c);
          }
        }
      }
    }
  }

  std::vector<ImageBuffer> out;
  for (const auto& a : acc) {
    ImageBuffer img = ImageBuffer::filled(out_h, out_w, 0.0f);
    for (size_t i = 0; i < weight.size(); ++i)
      for (int c = 0; c < 3; ++c) img.pixels[i * 3 + c] = static_cast<float>(a[i * 3 + c] / weight[i]);
    out.push_back(std::move(img));
  }
  return out;
}

ImageBuffer super_resolve(std::span<const Branch> branches, const ImageBuffer& lr,
                          const InferenceOptions& options) {
  return super_resolve_levels(branches, lr, options).back();
}

Metrics validate(std::span<const Branch> branches, const Dataset& val,
                 const InferenceOptions& options) {
  if (branches.empty()) throw ConfigError("validate: no branches");
  if (val.images.empty()) throw DataError("validate: empty validation set");
  const int s = stack_scale(branches);
  if (val.scale != s) {
    throw ConfigError("validation set is x" + std::to_string(val.scale) + ", model is x" +
                      std::to_string(s));
  }
  for (const auto& img : val.images) {
    if (img.hr.height <= 2 * s || img.hr.width <= 2 * s) {
      throw DataError("validation image '" + img.name + "' is too small for x" + std::to_string(s));
    }
  }

  Metrics m;
  m.images.resize(val.images.size());
  const EvalProtocol protocol = EvalProtocol::for_scale(s);
  auto work = [&](size_t i) {
    const DatasetImage& img = val.images[i];
    const ImageScore score = evaluate(super_resolve(branches, img.lr, options), img.hr, protocol);
    m.images[i] = {img.name, score.psnr_db, score.ssim};
  };

  const int threads = std::min<int>(options.threads > 0 ? options.threads : default_thread_count(),
                                    static_cast<int>(val.images.size()));
  if (threads <= 1) {
    for (size_t i = 0; i < val.images.size(); ++i) work(i);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (size_t i; (i = next.fetch_add(1)) < val.images.size();) work(i);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  for (const auto& r : m.images) {
    m.mean_psnr += r.psnr_db;
    m.mean_ssim += r.ssim;
  }
  m.mean_psnr /= static_cast<double>(m.images.size());
  m.mean_ssim /= static_cast<double>(m.images.size());
  return m;
}

Metrics validate(const Checkpoint& ckpt, const Dataset& val, const InferenceOptions& options) {
  return validate(std::span<const Branch>(ckpt.branches), val, options);
}

}  // namespace irl
