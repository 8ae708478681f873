#pragma once

#include "toolsynth/image.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace toolsynth {

// Procedural stand-ins for real seed photographs, for demos and tests.

/// Tissue-like RGB texture.
RasterImage demo_background(int width, int height, std::uint64_t seed);

/// RGBA instrument cut-out on a transparent background. The silhouette
/// family depends on class_id, the pose on (seed, variant).
RasterImage demo_instrument(int class_id, int variant, int size, std::uint64_t seed);

/// Writes <dir>/background.png and <dir>/<class>/<k>.png for k in [0, per_class).
void write_demo_seeds(const std::filesystem::path& dir, const std::vector<std::string>& classes,
                      int per_class, std::uint64_t seed, int background_size = 512, int sprite_size = 256);

}  // namespace toolsynth
