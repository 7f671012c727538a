#include "irl/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>

#include "irl/autograd.hpp"
#include "irl/errors.hpp"

namespace irl {
namespace {

template <typename T>
using ImplPtr = std::shared_ptr<detail::TensorImpl<T>>;

template <typename T>
bool recording(std::initializer_list<const BasicTensor<T>*> inputs) {
  if (active_tape<T>() == nullptr) {
    return false;
  }
  return std::any_of(inputs.begin(), inputs.end(),
                     [](const BasicTensor<T>* t) { return t->requires_grad(); });
}

template <typename T>
bool recording(std::span<const BasicTensor<T>> inputs) {
  if (active_tape<T>() == nullptr) {
    return false;
  }
  return std::any_of(inputs.begin(), inputs.end(),
                     [](const BasicTensor<T>& t) { return t.requires_grad(); });
}

template <typename T>
void attach(BasicTensor<T>& out, const char* op, std::vector<ImplPtr<T>> inputs,
            std::function<void()> backward_fn) {
  auto* impl = out.impl();
  impl->requires_grad = true;
  impl->is_leaf = false;
  active_tape<T>()->record({op, std::move(inputs), out.shared_impl(), std::move(backward_fn)});
}

// Gradient buffer of an input that should receive one, else nullptr.
template <typename T>
T* grad_sink(detail::TensorImpl<T>* impl) {
  if (!impl->requires_grad) {
    return nullptr;
  }
  if (impl->grad.empty()) {
    impl->grad.assign(impl->data.size(), T(0));
  }
  return impl->grad.data();
}

void require_same_shape(const Shape& a, const Shape& b, const char* op) {
  if (!(a == b)) {
    throw ShapeError(std::string(op) + ": shape mismatch " + a.str() + " vs " + b.str());
  }
}

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;

struct ConvGeometry {
  int64_t ci, h, w, k, pad, ho, wo;
  int64_t rows() const { return ci * k * k; }
  int64_t cols() const { return ho * wo; }
};

// Unfold one image (ci, h, w) into a (ci*k*k, ho*wo) patch matrix whose rows
// are `ld` elements apart.
template <typename T>
void im2col(const T* src, const ConvGeometry& g, int64_t ld, T* dst) {
  for (int64_t c = 0; c < g.ci; ++c) {
    const T* plane = src + c * g.h * g.w;
    for (int64_t ky = 0; ky < g.k; ++ky) {
      for (int64_t kx = 0; kx < g.k; ++kx) {
        T* row = dst + ((c * g.k + ky) * g.k + kx) * ld;
        const int64_t x_lo = std::max<int64_t>(0, g.pad - kx);
        const int64_t x_hi = std::min<int64_t>(g.wo, g.w + g.pad - kx);
        for (int64_t oy = 0; oy < g.ho; ++oy) {
          T* out = row + oy * g.wo;
          const int64_t iy = oy + ky - g.pad;
          if (iy < 0 || iy >= g.h || x_lo >= x_hi) {
            std::fill(out, out + g.wo, T(0));
            continue;
          }
          const T* in = plane + iy * g.w + (kx - g.pad);
          std::fill(out, out + x_lo, T(0));
          std::copy(in + x_lo, in + x_hi, out + x_lo);
          std::fill(out + x_hi, out + g.wo, T(0));
        }
      }
    }
  }
}

// Adjoint of im2col: scatter-add the patch matrix back onto the image.
template <typename T>
void col2im(const T* src, const ConvGeometry& g, int64_t ld, T* dst) {
  for (int64_t c = 0; c < g.ci; ++c) {
    T* plane = dst + c * g.h * g.w;
    for (int64_t ky = 0; ky < g.k; ++ky) {
      for (int64_t kx = 0; kx < g.k; ++kx) {
        const T* row = src + ((c * g.k + ky) * g.k + kx) * ld;
        const int64_t x_lo = std::max<int64_t>(0, g.pad - kx);
        const int64_t x_hi = std::min<int64_t>(g.wo, g.w + g.pad - kx);
        for (int64_t oy = 0; oy < g.ho; ++oy) {
          const int64_t iy = oy + ky - g.pad;
          if (iy < 0 || iy >= g.h) {
            continue;
          }
          const T* in = row + oy * g.wo;
          T* out = plane + iy * g.w + (kx - g.pad);
          for (int64_t ox = x_lo; ox < x_hi; ++ox) {
            out[ox] += in[ox];
          }
        }
      }
    }
  }
}

// Direct convolution for narrow outputs, where an im2col GEMM would be
// bound by the patch matrix traffic. Rows of valid taps are accumulated with
// contiguous inner loops.
template <typename T>
void direct_conv_forward(const T* in, const T* w, const T* b, const ConvGeometry& g, int64_t batch,
                         int64_t co, T* out) {
  for (int64_t n = 0; n < batch; ++n) {
    for (int64_t o = 0; o < co; ++o) {
      T* op = out + (n * co + o) * g.cols();
      std::fill(op, op + g.cols(), b[o]);
      for (int64_t c = 0; c < g.ci; ++c) {
        const T* plane = in + (n * g.ci + c) * g.h * g.w;
        for (int64_t ky = 0; ky < g.k; ++ky) {
          for (int64_t kx = 0; kx < g.k; ++kx) {
            const T wv = w[((o * g.ci + c) * g.k + ky) * g.k + kx];
            const int64_t x_lo = std::max<int64_t>(0, g.pad - kx);
            const int64_t x_hi = std::min<int64_t>(g.wo, g.w + g.pad - kx);
            for (int64_t oy = 0; oy < g.ho; ++oy) {
              const int64_t iy = oy + ky - g.pad;
              if (iy < 0 || iy >= g.h) continue;
              const T* src = plane + iy * g.w + (kx - g.pad);
              T* dst = op + oy * g.wo;
              for (int64_t ox = x_lo; ox < x_hi; ++ox) dst[ox] += wv * src[ox];
            }
          }
        }
      }
    }
  }
}

template <typename T>
void direct_conv_backward(const T* in, const T* w, const T* gout, const ConvGeometry& g,
                          int64_t batch, int64_t co, T* gin, T* gw, T* gb) {
  for (int64_t n = 0; n < batch; ++n) {
    for (int64_t o = 0; o < co; ++o) {
      const T* go = gout + (n * co + o) * g.cols();
      if (gb) {
        T acc = 0;
        for (int64_t j = 0; j < g.cols(); ++j) acc += go[j];
        gb[o] += acc;
      }
      for (int64_t c = 0; c < g.ci; ++c) {
        const T* plane = in + (n * g.ci + c) * g.h * g.w;
        T* gplane = gin ? gin + (n * g.ci + c) * g.h * g.w : nullptr;
        for (int64_t ky = 0; ky < g.k; ++ky) {
          for (int64_t kx = 0; kx < g.k; ++kx) {
            const int64_t widx = ((o * g.ci + c) * g.k + ky) * g.k + kx;
            const T wv = w[widx];
            const int64_t x_lo = std::max<int64_t>(0, g.pad - kx);
            const int64_t x_hi = std::min<int64_t>(g.wo, g.w + g.pad - kx);
            T acc = 0;
            for (int64_t oy = 0; oy < g.ho; ++oy) {
              const int64_t iy = oy + ky - g.pad;
              if (iy < 0 || iy >= g.h) continue;
              const int64_t shift = iy * g.w + (kx - g.pad);
              const T* grow = go + oy * g.wo;
              if (gw && x_hi > x_lo) {
                using Vec = Eigen::Map<const Eigen::Array<T, Eigen::Dynamic, 1>>;
                acc += (Vec(plane + shift + x_lo, x_hi - x_lo) * Vec(grow + x_lo, x_hi - x_lo)).sum();
              }
              if (gplane) {
                T* dst = gplane + shift;
                for (int64_t ox = x_lo; ox < x_hi; ++ox) dst[ox] += wv * grow[ox];
              }
            }
            if (gw) gw[widx] += acc;
          }
        }
      }
    }
  }
}

// Output channel count at or below which conv2d takes the direct path.
constexpr int64_t kDirectConvMaxOut = 4;

}  // namespace

template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& input, const BasicTensor<T>& weight,
                      const BasicTensor<T>& bias, int padding) {
  const Shape& is = input.shape();
  const Shape& ws = weight.shape();
  if (padding < 0) {
    throw ShapeError("conv2d: negative padding");
  }
  if (ws.h != ws.w) {
    throw ShapeError("conv2d: kernel must be square, got " + ws.str());
  }
  if (ws.c != is.c) {
    throw ShapeError("conv2d: input has " + std::to_string(is.c) + " channels, weight expects " +
                     std::to_string(ws.c));
  }
  if (bias.numel() != ws.n) {
    throw ShapeError("conv2d: bias has " + std::to_string(bias.numel()) + " elements, expected " +
                     std::to_string(ws.n));
  }
  const ConvGeometry g{is.c, is.h, is.w, ws.h, padding, is.h + 2 * padding - ws.h + 1,
                       is.w + 2 * padding - ws.w + 1};
  if (g.ho < 1 || g.wo < 1) {
    throw ShapeError("conv2d: kernel " + std::to_string(ws.h) + " larger than padded input " +
                     is.str());
  }
  const int64_t co = ws.n;
  BasicTensor<T> out = BasicTensor<T>::zeros(Shape{is.n, co, g.ho, g.wo});

  const bool rec = recording<T>({&input, &weight, &bias});
  if (co <= kDirectConvMaxOut) {
    direct_conv_forward(input.data().data(), weight.data().data(), bias.data().data(), g, is.n, co,
                        out.mutable_data().data());
    if (rec) {
      auto* in_impl = input.impl();
      auto* w_impl = weight.impl();
      auto* b_impl = bias.impl();
      auto* o_impl = out.impl();
      const int64_t batch = is.n;
      attach(out, "conv2d", {input.shared_impl(), weight.shared_impl(), bias.shared_impl()},
             [=]() {
               direct_conv_backward(in_impl->data.data(), w_impl->data.data(),
                                    o_impl->grad.data(), g, batch, co, grad_sink(in_impl),
                                    grad_sink(w_impl), grad_sink(b_impl));
             });
    }
    return out;
  }
  // One GEMM over the whole batch: sample n owns patch columns
  // [n*cols, (n+1)*cols). The patch matrix is kept for backward when recording.
  const int64_t batch = is.n;
  const int64_t cols = g.cols();
  const int64_t ld = batch * cols;
  auto patches = std::make_shared<std::vector<T>>(static_cast<size_t>(g.rows() * ld));
  const T* iptr = input.data().data();
  for (int64_t n = 0; n < batch; ++n) {
    im2col(iptr + n * is.c * g.h * g.w, g, ld, patches->data() + n * cols);
  }
  ConstMatMap<T> wmat(weight.data().data(), co, g.rows());
  ConstMatMap<T> cmat(patches->data(), g.rows(), ld);
  RowMat<T> prod = wmat * cmat;
  const T* bptr = bias.data().data();
  T* optr = out.mutable_data().data();
  for (int64_t n = 0; n < batch; ++n) {
    for (int64_t o = 0; o < co; ++o) {
      const T* src = prod.data() + o * ld + n * cols;
      T* dst = optr + (n * co + o) * cols;
      for (int64_t j = 0; j < cols; ++j) dst[j] = src[j] + bptr[o];
    }
  }

  if (rec) {
    auto* in_impl = input.impl();
    auto* w_impl = weight.impl();
    auto* b_impl = bias.impl();
    auto* o_impl = out.impl();
    attach(out, "conv2d", {input.shared_impl(), weight.shared_impl(), bias.shared_impl()},
           [=]() {
             T* gin = grad_sink(in_impl);
             T* gw = grad_sink(w_impl);
             T* gb = grad_sink(b_impl);
             RowMat<T> dout(co, ld);
             for (int64_t n = 0; n < batch; ++n) {
               for (int64_t o = 0; o < co; ++o) {
                 const T* src = o_impl->grad.data() + (n * co + o) * cols;
                 std::copy(src, src + cols, dout.data() + o * ld + n * cols);
               }
             }
             if (gw) {
               ConstMatMap<T> cm(patches->data(), g.rows(), ld);
               MatMap<T> gwm(gw, co, g.rows());
               gwm.noalias() += dout * cm.transpose();
             }
             if (gb) {
               for (int64_t o = 0; o < co; ++o) gb[o] += dout.row(o).sum();
             }
             if (gin) {
               ConstMatMap<T> wm(w_impl->data.data(), co, g.rows());
               RowMat<T> dcol = wm.transpose() * dout;
               for (int64_t n = 0; n < batch; ++n) {
                 col2im(dcol.data() + n * cols, g, ld, gin + n * g.ci * g.h * g.w);
               }
             }
           });
  }
  return out;
}

template <typename T>
BasicTensor<T> relu(const BasicTensor<T>& input) {
  BasicTensor<T> out = BasicTensor<T>::zeros(input.shape());
  auto src = input.data();
  auto dst = out.mutable_data();
  for (size_t i = 0; i < src.size(); ++i) {
    dst[i] = src[i] > T(0) ? src[i] : T(0);
  }
  if (recording<T>({&input})) {
    auto* in_impl = input.impl();
    auto* o_impl = out.impl();
    attach(out, "relu", {input.shared_impl()}, [=]() {
      T* gin = grad_sink(in_impl);
      if (!gin) return;
      for (size_t i = 0; i < in_impl->data.size(); ++i) {
        if (in_impl->data[i] > T(0)) {
          gin[i] += o_impl->grad[i];
        }
      }
    });
  }
  return out;
}

template <typename T>
BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_same_shape(a.shape(), b.shape(), "add");
  BasicTensor<T> out = BasicTensor<T>::zeros(a.shape());
  auto x = a.data();
  auto y = b.data();
  auto z = out.mutable_data();
  for (size_t i = 0; i < z.size(); ++i) {
    z[i] = x[i] + y[i];
  }
  if (recording<T>({&a, &b})) {
    auto* a_impl = a.impl();
    auto* b_impl = b.impl();
    auto* o_impl = out.impl();
    attach(out, "add", {a.shared_impl(), b.shared_impl()}, [=]() {
      const auto& go = o_impl->grad;
      if (T* ga = grad_sink(a_impl)) {
        for (size_t i = 0; i < go.size(); ++i) ga[i] += go[i];
      }
      if (T* gb = grad_sink(b_impl)) {
        for (size_t i = 0; i < go.size(); ++i) gb[i] += go[i];
      }
    });
  }
  return out;
}

template <typename T>
BasicTensor<T> sub(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_same_shape(a.shape(), b.shape(), "sub");
  BasicTensor<T> out = BasicTensor<T>::zeros(a.shape());
  auto x = a.data();
  auto y = b.data();
  auto z = out.mutable_data();
  for (size_t i = 0; i < z.size(); ++i) {
    z[i] = x[i] - y[i];
  }
  if (recording<T>({&a, &b})) {
    auto* a_impl = a.impl();
    auto* b_impl = b.impl();
    auto* o_impl = out.impl();
    attach(out, "sub", {a.shared_impl(), b.shared_impl()}, [=]() {
      const auto& go = o_impl->grad;
      if (T* ga = grad_sink(a_impl)) {
        for (size_t i = 0; i < go.size(); ++i) ga[i] += go[i];
      }
      if (T* gb = grad_sink(b_impl)) {
        for (size_t i = 0; i < go.size(); ++i) gb[i] -= go[i];
      }
    });
  }
  return out;
}

template <typename T>
BasicTensor<T> scale(const BasicTensor<T>& a, T factor) {
  BasicTensor<T> out = BasicTensor<T>::zeros(a.shape());
  auto x = a.data();
  auto z = out.mutable_data();
  for (size_t i = 0; i < z.size(); ++i) {
    z[i] = x[i] * factor;
  }
  if (recording<T>({&a})) {
    auto* a_impl = a.impl();
    auto* o_impl = out.impl();
    attach(out, "scale", {a.shared_impl()}, [=]() {
      if (T* ga = grad_sink(a_impl)) {
        const auto& go = o_impl->grad;
        for (size_t i = 0; i < go.size(); ++i) ga[i] += go[i] * factor;
      }
    });
  }
  return out;
}

template <typename T>
BasicTensor<T> concat_channels(std::span<const BasicTensor<T>> parts) {
  if (parts.empty()) {
    throw ShapeError("concat_channels: no inputs");
  }
  const Shape& first = parts.front().shape();
  int64_t channels = 0;
  for (const auto& p : parts) {
    const Shape& s = p.shape();
    if (s.n != first.n || s.h != first.h || s.w != first.w) {
      throw ShapeError("concat_channels: batch/spatial mismatch " + first.str() + " vs " + s.str());
    }
    channels += s.c;
  }
  const Shape out_shape{first.n, channels, first.h, first.w};
  BasicTensor<T> out = BasicTensor<T>::zeros(out_shape);
  const int64_t plane = first.plane();
  T* dst = out.mutable_data().data();
  for (int64_t n = 0; n < first.n; ++n) {
    int64_t c0 = 0;
    for (const auto& p : parts) {
      const int64_t block = p.shape().c * plane;
      const T* src = p.data().data() + n * block;
      std::copy(src, src + block, dst + (n * channels + c0) * plane);
      c0 += p.shape().c;
    }
  }
  if (recording<T>(parts)) {
    std::vector<ImplPtr<T>> inputs;
    std::vector<detail::TensorImpl<T>*> raw;
    for (const auto& p : parts) {
      inputs.push_back(p.shared_impl());
      raw.push_back(p.impl());
    }
    auto* o_impl = out.impl();
    attach(out, "concat_channels", std::move(inputs), [=]() {
      const T* go = o_impl->grad.data();
      for (int64_t n = 0; n < out_shape.n; ++n) {
        int64_t c0 = 0;
        for (auto* part : raw) {
          const int64_t block = part->shape.c * plane;
          if (T* gp = grad_sink(part)) {
            const T* src = go + (n * out_shape.c + c0) * plane;
            T* dstg = gp + n * block;
            for (int64_t i = 0; i < block; ++i) dstg[i] += src[i];
          }
          c0 += part->shape.c;
        }
      }
    });
  }
  return out;
}

namespace {

// Index map shared by pixel_shuffle and its inverse: for every element of
// the shuffled (n, c, h*r, w*r) tensor, its offset in the (n, c*r*r, h, w) one.
std::vector<int64_t> shuffle_index(const Shape& packed, int r) {
  const int64_t c_out = packed.c / (r * r);
  const int64_t ho = packed.h * r;
  const int64_t wo = packed.w * r;
  std::vector<int64_t> index(static_cast<size_t>(packed.numel()));
  size_t k = 0;
  for (int64_t n = 0; n < packed.n; ++n) {
    for (int64_t c = 0; c < c_out; ++c) {
      for (int64_t y = 0; y < ho; ++y) {
        const int64_t i = y % r;
        const int64_t h = y / r;
        for (int64_t x = 0; x < wo; ++x) {
          const int64_t j = x % r;
          const int64_t w = x / r;
          const int64_t src_c = c * r * r + i * r + j;
          index[k++] = ((n * packed.c + src_c) * packed.h + h) * packed.w + w;
        }
      }
    }
  }
  return index;
}

}  // namespace

template <typename T>
BasicTensor<T> pixel_shuffle(const BasicTensor<T>& input, int r) {
  const Shape& s = input.shape();
  if (r < 1 || s.c % (static_cast<int64_t>(r) * r) != 0) {
    throw ShapeError("pixel_shuffle: channels " + std::to_string(s.c) +
                     " not divisible by r^2 for r=" + std::to_string(r));
  }
  const Shape out_shape{s.n, s.c / (r * r), s.h * r, s.w * r};
  BasicTensor<T> out = BasicTensor<T>::zeros(out_shape);
  auto index = std::make_shared<std::vector<int64_t>>(shuffle_index(s, r));
  auto src = input.data();
  auto dst = out.mutable_data();
  for (size_t k = 0; k < dst.size(); ++k) {
    dst[k] = src[static_cast<size_t>((*index)[k])];
  }
  if (recording<T>({&input})) {
    auto* in_impl = input.impl();
    auto* o_impl = out.impl();
    attach(out, "pixel_shuffle", {input.shared_impl()}, [=]() {
      if (T* gin = grad_sink(in_impl)) {
        const auto& go = o_impl->grad;
        for (size_t k = 0; k < go.size(); ++k) gin[(*index)[k]] += go[k];
      }
    });
  }
  return out;
}

template <typename T>
BasicTensor<T> pixel_unshuffle(const BasicTensor<T>& input, int r) {
  const Shape& s = input.shape();
  if (r < 1 || s.h % r != 0 || s.w % r != 0) {
    throw ShapeError("pixel_unshuffle: spatial dims of " + s.str() + " not divisible by " +
                     std::to_string(r));
  }
  const Shape packed{s.n, s.c * r * r, s.h / r, s.w / r};
  BasicTensor<T> out = BasicTensor<T>::zeros(packed);
  auto index = std::make_shared<std::vector<int64_t>>(shuffle_index(packed, r));
  auto src = input.data();
  auto dst = out.mutable_data();
  for (size_t k = 0; k < src.size(); ++k) {
    dst[static_cast<size_t>((*index)[k])] = src[k];
  }
  if (recording<T>({&input})) {
    auto* in_impl = input.impl();
    auto* o_impl = out.impl();
    attach(out, "pixel_unshuffle", {input.shared_impl()}, [=]() {
      if (T* gin = grad_sink(in_impl)) {
        const auto& go = o_impl->grad;
        for (size_t k = 0; k < index->size(); ++k) gin[k] += go[(*index)[k]];
      }
    });
  }
  return out;
}

template <typename T>
BasicTensor<T> mean(const BasicTensor<T>& input) {
  const int64_t count = input.numel();
  if (count == 0) {
    throw ShapeError("mean of an empty tensor");
  }
  double acc = 0.0;
  for (T v : input.data()) acc += static_cast<double>(v);
  BasicTensor<T> out = BasicTensor<T>::scalar(static_cast<T>(acc / static_cast<double>(count)));
  if (recording<T>({&input})) {
    auto* in_impl = input.impl();
    auto* o_impl = out.impl();
    attach(out, "mean", {input.shared_impl()}, [=]() {
      if (T* gin = grad_sink(in_impl)) {
        const T g = o_impl->grad[0] / static_cast<T>(count);
        for (int64_t i = 0; i < count; ++i) gin[i] += g;
      }
    });
  }
  return out;
}

namespace {

enum class Norm { kL1, kL2 };

template <typename T>
BasicTensor<T> pointwise_loss(const BasicTensor<T>& pred, const BasicTensor<T>& target,
                              Norm norm) {
  require_same_shape(pred.shape(), target.shape(), norm == Norm::kL1 ? "l1_loss" : "l2_loss");
  const int64_t count = pred.numel();
  if (count == 0) {
    throw ShapeError("loss over an empty tensor");
  }
  auto p = pred.data();
  auto t = target.data();
  double acc = 0.0;
  for (int64_t i = 0; i < count; ++i) {
    const double d = static_cast<double>(p[i]) - static_cast<double>(t[i]);
    acc += norm == Norm::kL1 ? std::abs(d) : d * d;
  }
  BasicTensor<T> out = BasicTensor<T>::scalar(static_cast<T>(acc / static_cast<double>(count)));
  if (recording<T>({&pred, &target})) {
    auto* p_impl = pred.impl();
    auto* t_impl = target.impl();
    auto* o_impl = out.impl();
    attach(out, norm == Norm::kL1 ? "l1_loss" : "l2_loss",
           {pred.shared_impl(), target.shared_impl()}, [=]() {
             T* gp = grad_sink(p_impl);
             T* gt = grad_sink(t_impl);
             const T upstream = o_impl->grad[0] / static_cast<T>(count);
             for (int64_t i = 0; i < count; ++i) {
               const T d = p_impl->data[i] - t_impl->data[i];
               T g;
               if (norm == Norm::kL1) {
                 g = d > T(0) ? upstream : (d < T(0) ? -upstream : T(0));
               } else {
                 g = T(2) * d * upstream;
               }
               if (gp) gp[i] += g;
               if (gt) gt[i] -= g;
             }
           });
  }
  return out;
}

}  // namespace

template <typename T>
BasicTensor<T> l1_loss(const BasicTensor<T>& pred, const BasicTensor<T>& target) {
  return pointwise_loss(pred, target, Norm::kL1);
}

template <typename T>
BasicTensor<T> l2_loss(const BasicTensor<T>& pred, const BasicTensor<T>& target) {
  return pointwise_loss(pred, target, Norm::kL2);
}

#define IRL_INSTANTIATE_OPS(T)                                                                   \
  template BasicTensor<T> conv2d(const BasicTensor<T>&, const BasicTensor<T>&,                    \
                                 const BasicTensor<T>&, int);                                     \
  template BasicTensor<T> relu(const BasicTensor<T>&);                                            \
  template BasicTensor<T> add(const BasicTensor<T>&, const BasicTensor<T>&);                      \
  template BasicTensor<T> sub(const BasicTensor<T>&, const BasicTensor<T>&);                      \
  template BasicTensor<T> scale(const BasicTensor<T>&, T);                                        \
  template BasicTensor<T> concat_channels(std::span<const BasicTensor<T>>);                       \
  template BasicTensor<T> pixel_shuffle(const BasicTensor<T>&, int);                              \
  template BasicTensor<T> pixel_unshuffle(const BasicTensor<T>&, int);                            \
  template BasicTensor<T> mean(const BasicTensor<T>&);                                            \
  template BasicTensor<T> l1_loss(const BasicTensor<T>&, const BasicTensor<T>&);                  \
  template BasicTensor<T> l2_loss(const BasicTensor<T>&, const BasicTensor<T>&);

IRL_INSTANTIATE_OPS(float)
IRL_INSTANTIATE_OPS(double)

#undef IRL_INSTANTIATE_OPS

}  // namespace irl
