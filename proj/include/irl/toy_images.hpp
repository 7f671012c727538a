#pragma once

#include <cstdint>
#include <filesystem>

#include "irl/image.hpp"

namespace irl {

// Deterministic synthetic "natural-ish" image: smooth colour gradient,
// oriented sinusoidal textures and hard-edged shapes, quantized to 8 bits.
ImageBuffer make_toy_image(uint64_t seed, int height, int width);

// Writes `count` toy images named img_000.png ... into `dir` (created if
// needed). Image k uses seed `seed * 1000003 + k`.
void write_toy_dataset(const std::filesystem::path& dir, int count, int height, int width,
                       uint64_t seed);

}  // namespace irl
