#pragma once

#include <span>
#include <vector>

#include "irl/tensor.hpp"

namespace irl {

// Stride-1 square-kernel convolution.
//   input  (n, ci, h, w)
//   weight (co, ci, k, k)
//   bias   (1, 1, 1, co)   any shape with co elements is accepted
// Output is (n, co, h + 2p - k + 1, w + 2p - k + 1), zero padded.
template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& input, const BasicTensor<T>& weight,
                      const BasicTensor<T>& bias, int padding);

template <typename T>
BasicTensor<T> relu(const BasicTensor<T>& input);

template <typename T>
BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b);

template <typename T>
BasicTensor<T> sub(const BasicTensor<T>& a, const BasicTensor<T>& b);

template <typename T>
BasicTensor<T> scale(const BasicTensor<T>& a, T factor);

// Channel-wise concatenation; parts must agree on n, h, w.
template <typename T>
BasicTensor<T> concat_channels(std::span<const BasicTensor<T>> parts);

template <typename T>
BasicTensor<T> concat_channels(const std::vector<BasicTensor<T>>& parts) {
  return concat_channels(std::span<const BasicTensor<T>>(parts));
}

// (n, c*r*r, h, w) -> (n, c, h*r, w*r)
//   out[n, c, h*r + i, w*r + j] = in[n, c*r*r + i*r + j, h, w]
template <typename T>
BasicTensor<T> pixel_shuffle(const BasicTensor<T>& input, int r);

// Exact inverse permutation of pixel_shuffle.
template <typename T>
BasicTensor<T> pixel_unshuffle(const BasicTensor<T>& input, int r);

// Scalar reductions; the result has shape (1, 1, 1, 1).
template <typename T>
BasicTensor<T> mean(const BasicTensor<T>& input);

template <typename T>
BasicTensor<T> l1_loss(const BasicTensor<T>& pred, const BasicTensor<T>& target);

template <typename T>
BasicTensor<T> l2_loss(const BasicTensor<T>& pred, const BasicTensor<T>& target);

}  // namespace irl
