#pragma once

#include "toolsynth/blend.hpp"
#include "toolsynth/image.hpp"
#include "toolsynth/pools.hpp"
#include "toolsynth/rng.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace toolsynth {

/// Sprite -> canvas mapping: p = (dx, dy) + scale * R(rotation) * (q - anchor),
/// where anchor is the centre of the sprite mask's bounding box.
struct Placement {
  double scale = 1.0;
  double rotation_deg = 0.0;
  double dx = 0.0;
  double dy = 0.0;
  int z = 0;

  friend bool operator==(const Placement&, const Placement&) = default;
};

/// Placement sampling bounds (config `dataset.placement`).
struct PlacementBounds {
  double min_extent = 0.4;  ///< longer mask side as a fraction of canvas width
  double max_extent = 0.9;
  double rotation_deg = 180.0;
  double min_visible = 0.25;  ///< fraction of placed mask pixels inside the canvas
  int max_attempts = 50;

  friend bool operator==(const PlacementBounds&, const PlacementBounds&) = default;
};

struct Canvas {
  int width = 512;
  int height = 512;

  friend bool operator==(const Canvas&, const Canvas&) = default;
};

enum class Rounding { HalfAwayFromZero, Truncate };

std::string_view to_string(Rounding r);
Rounding rounding_from_string(std::string_view name);

/// round(f * k) under the given rule; products within 1e-9 of an integer snap to it.
std::size_t fraction_count(double fraction, std::size_t k, Rounding rounding);

struct DatasetSpec {
  std::string name = "Syn-S3-F1F2";
  int seeds_per_instrument = 3;
  double p_single = 0.2;  ///< fg_distribution[1]
  double p_double = 0.8;  ///< fg_distribution[2]
  std::size_t count = 2235;
  BlendMode blend = BlendMode::Laplacian;
  int levels = kDefaultPyramidLevels;
  std::uint64_t master_seed = 0;
  Canvas canvas;
  PlacementBounds placement;
  Rounding rounding = Rounding::HalfAwayFromZero;

  friend bool operator==(const DatasetSpec&, const DatasetSpec&) = default;
};

/// Throws ConfigError on an inconsistent spec.
void validate(const DatasetSpec& spec);

/// Number of single-instrument samples a DatasetSpec asks for.
std::size_t single_count(const DatasetSpec& spec);

struct ScenePair {
  RasterImage image;
  BinaryMask mask;
  std::vector<Placement> placements;  ///< one per sprite, in blend order
  BlendMode mode = BlendMode::Alpha;
};

struct ComposeOptions {
  BlendMode mode = BlendMode::Alpha;
  int levels = kDefaultPyramidLevels;
  Canvas canvas;
  PlacementBounds bounds;
};

/// Bounding box of the set pixels: {x0, y0, x1, y1}, inclusive. Mask must be non-empty.
std::array<int, 4> mask_bbox(const BinaryMask& mask);

/// Sprite -> canvas transform for a placement.
Eigen::Matrix3d placement_transform(const Sprite& sprite, const Placement& p);

/// The sprite mask rendered at the placement, clipped to the canvas.
BinaryMask placed_mask(const Sprite& sprite, const Placement& p, const Canvas& canvas);

/// Placed mask area inside the canvas over the unclipped placed area.
double visible_fraction(const Sprite& sprite, const Placement& p, const Canvas& canvas);

/// Scale so the longer mask side covers [min_extent, max_extent] of the canvas
/// width, any rotation within bounds, translation resampled until the visible
/// fraction reaches bounds.min_visible. Throws InvariantError after max_attempts.
Placement sample_placement(const Sprite& sprite, const Canvas& canvas, Rng& rng,
                           const PlacementBounds& bounds = {});

/// Blends sprites in order over bg (resized to the canvas). Deterministic.
ScenePair render_scene(const RasterImage& bg, std::span<const Sprite* const> sprites,
                       std::span<const Placement> placements, const ComposeOptions& options);

/// Samples placements for 1-2 sprites of distinct classes, then render_scene.
ScenePair compose_scene(const RasterImage& bg, std::span<const Sprite* const> sprites,
                        const ComposeOptions& options, Rng& rng);

// Dataset manifests ------------------------------------------------------

struct BackgroundUse {
  int index = 0;
  std::uint64_t chain_seed = 0;
  friend bool operator==(const BackgroundUse&, const BackgroundUse&) = default;
};

struct SpriteUse {
  int class_id = 0;
  int index = 0;
  Placement placement;
  friend bool operator==(const SpriteUse&, const SpriteUse&) = default;
};

struct SampleRecord {
  int id = 0;
  std::string image;  ///< relative to the manifest directory
  std::string mask;
  std::optional<BackgroundUse> background;  ///< synthetic samples only
  std::vector<SpriteUse> sprites;
  std::optional<BlendMode> blend;
  std::string source = "synthetic";  ///< "real" or "augmented" otherwise

  bool is_synthetic() const { return source == "synthetic"; }
  friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

struct Manifest {
  int version = 1;
  DatasetSpec spec;
  std::uint64_t master_seed = 0;
  std::vector<SampleRecord> samples;

  friend bool operator==(const Manifest&, const Manifest&) = default;
};

/// Sample i is fixed by (spec, pools, i); parallelism never changes output.
/// Writes images/{id:06}.png, masks/{id:06}.png and manifest.json.
Manifest generate_dataset(const DatasetSpec& spec, const PoolSet& pools,
                          const std::filesystem::path& out_dir, int jobs = 1);

/// Picks the background, sprites and placements of sample i without writing anything.
SampleRecord plan_sample(const DatasetSpec& spec, const PoolSet& pools, std::size_t i, bool single);

/// Regenerates a synthetic sample from its record.
ScenePair replay_sample(const SampleRecord& record, const DatasetSpec& spec, const PoolSet& pools);

struct MixRecipe {
  enum class Kind { Replace, Augment };
  Kind kind = Kind::Augment;
  double fraction = 0.0;
};

/// Joins synthetic samples with real image/mask pairs from real_dir
/// (images/*.png with same-named masks/*.png). Paths in the result are
/// relative to out_manifest's directory. Ids are renumbered in order.
Manifest mix_datasets(const Manifest& synthetic, const std::filesystem::path& synthetic_dir,
                      const std::filesystem::path& real_dir, MixRecipe recipe, std::uint64_t seed,
                      Rounding rounding, const std::filesystem::path& out_manifest);

}  // namespace toolsynth
