#include <openssl/evp.h>

#include <bit>
#include <cstring>
#include <iomanip>
#include <memory>
#include <sstream>

#include "irl/autograd.hpp"
#include "irl/errors.hpp"
#include "irl/model.hpp"
#include "irl/ops.hpp"

namespace irl {

StackOutput forward(std::span<const Branch> branches, const Tensor& lr) {
  if (branches.empty()) {
    throw ConfigError("forward: empty branch list");
  }
  if (lr.shape().h < 4 || lr.shape().w < 4) {
    throw ShapeError("forward: LR input must be at least 4x4, got " + lr.shape().str());
  }
  StackOutput out;
  for (size_t i = 0; i < branches.size(); ++i) {
    const Branch& branch = branches[i];
    if (branch.index() != static_cast<int>(i)) {
      throw ConfigError("forward: branch " + std::to_string(branch.index()) + " at position " +
                        std::to_string(i));
    }
    BranchOutput result;
    if (i == 0) {
      result = branch.forward(lr);
    } else {
      std::vector<Tensor> parts;
      for (const TapRef& tap : branch.spec().input_taps) {
        parts.push_back(out.branches.at(tap.branch).feature(tap.stage));
      }
      for (const Tensor& p : parts) {
        if (p.shape().h != parts.front().shape().h || p.shape().w != parts.front().shape().w) {
          throw ShapeError("tap scale mismatch feeding branch " + std::to_string(i));
        }
      }
      result = branch.forward(parts.size() == 1 ? parts.front() : concat_channels(parts));
    }
    out.preds.push_back(result.image);
    out.branches.push_back(std::move(result));
  }
  return out;
}

Tensor compose(std::span<const Tensor> preds) {
  if (preds.empty()) {
    throw ShapeError("compose: no predictions");
  }
  Tensor sum = preds.front();
  for (size_t i = 1; i < preds.size(); ++i) sum = add(sum, preds[i]);
  return sum;
}

Tensor residual_label(const Tensor& hr, std::span<const Tensor> preds, int index) {
  if (index < 0 || static_cast<int>(preds.size()) < index) {
    throw ShapeError("residual_label: need " + std::to_string(index) + " predictions, have " +
                     std::to_string(preds.size()));
  }
  for (int k = 0; k < index; ++k) {
    if (!(preds[k].shape() == hr.shape())) {
      throw ShapeError("residual_label: prediction " + std::to_string(k) + " has shape " +
                       preds[k].shape().str() + ", HR is " + hr.shape().str());
    }
  }
  NoGradScope no_grad;
  if (index == 0) return hr.clone();
  // Same summation order as compose() so that compose + label == hr.
  return sub(hr, compose(preds.first(static_cast<size_t>(index))));
}

std::vector<Tensor> trainable_parameters(std::span<Branch> branches) {
  std::vector<Tensor> out;
  for (Branch& b : branches) {
    if (b.frozen()) continue;
    for (auto& p : b.parameters()) out.push_back(p.value);
  }
  return out;
}

std::vector<uint8_t> serialize_parameters(const Branch& branch) {
  static_assert(std::endian::native == std::endian::little, "little-endian host required");
  std::vector<uint8_t> bytes;
  auto append = [&bytes](const void* src, size_t len) {
    const auto* p = static_cast<const uint8_t*>(src);
    bytes.insert(bytes.end(), p, p + len);
  };
  for (const auto& p : branch.parameters()) {
    append(p.name.data(), p.name.size());
    bytes.push_back(0);
    const Shape& s = p.value.shape();
    const int64_t dims[4] = {s.n, s.c, s.h, s.w};
    append(dims, sizeof(dims));
    append(p.value.data().data(), p.value.data().size() * sizeof(float));
  }
  return bytes;
}

std::string sha256_hex(std::span<const uint8_t> bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
    throw std::runtime_error("SHA-256 computation failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) {
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return os.str();
}

std::string parameter_digest(const Branch& branch) {
  return sha256_hex(serialize_parameters(branch));
}

int context_radius(std::span<const Branch> branches) {
  int radius = 0;
  for (const Branch& b : branches) radius += b.conv_count();
  return radius;
}

}  // namespace irl
