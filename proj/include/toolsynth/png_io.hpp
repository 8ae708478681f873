#pragma once

#include "toolsynth/image.hpp"

#include <filesystem>

namespace toolsynth {

// 8-bit PNG only. Failures throw IoError carrying the path and the cause.

/// Grayscale files load as RGB, gray+alpha as RGBA; RGB/RGBA are kept as is.
RasterImage load_image_png(const std::filesystem::path& path);

/// Binarizes at 128 (>= 128 -> 1). Colour files use integer luma; alpha is ignored.
BinaryMask load_mask_png(const std::filesystem::path& path);

/// Creates missing parent directories.
void save_png(const RasterImage& img, const std::filesystem::path& path);

/// Single-channel PNG with values {0,255}.
void save_png(const BinaryMask& mask, const std::filesystem::path& path);

}  // namespace toolsynth
