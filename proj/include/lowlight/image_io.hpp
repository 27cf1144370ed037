#pragma once

#include <filesystem>

#include "lowlight/image.hpp"

namespace lowlight {

/// Decodes an 8/16-bit PNG or an 8-bit JPEG into [0, 1] (value / (2^bits - 1)).
/// Alpha is dropped; grey images decode to one channel. Throws InvalidInput.
ImageTensor read_image(const std::filesystem::path& path);

/// Encodes as PNG (8 or 16 bit), rounding half away from zero after clamping to [0, 1].
void write_png(const std::filesystem::path& path, const ImageTensor& img, int bit_depth = 8);

/// Baseline 8-bit JPEG.
void write_jpeg(const std::filesystem::path& path, const ImageTensor& img, int quality = 95);

/// The 8-bit code an intensity encodes to.
int to_8bit(double v) noexcept;

}  // namespace lowlight
