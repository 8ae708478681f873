#pragma once

#include "toolsynth/augment.hpp"
#include "toolsynth/image.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace toolsynth {

/// A foreground seed: RGBA instrument cut-out plus its binary mask.
struct SpriteSource {
  RasterImage image;
  BinaryMask mask;
};

/// Build a seed from an RGBA cut-out; mask = alpha >= 128.
SpriteSource sprite_source_from_rgba(const RasterImage& rgba);

/// Augmented instrument. The alpha channel is 255 exactly where mask == 1.
struct Sprite {
  RasterImage image;
  BinaryMask mask;
  int class_id = 0;
  int seed_index = 0;
  TransformChainRecord chain;
};

struct BackgroundEntry {
  RasterImage image;
  TransformChainRecord chain;
};

struct PoolSet {
  std::vector<BackgroundEntry> backgrounds;
  std::vector<std::vector<Sprite>> foregrounds;  ///< indexed by class id
  std::uint64_t master_seed = 0;
  int seeds_per_instrument = 0;
};

/// Chain sampler hook; tests substitute deterministic stubs.
using ChainSampler = std::function<TransformChainRecord(Rng&, Profile)>;

ChainSampler default_chain_sampler(const AugmentRanges& ranges);

struct PoolOptions {
  AugmentRanges ranges;
  int jobs = 1;
  /// A transformed sprite whose mask area drops below this fraction of the
  /// seed's area is rejected and resampled.
  double min_area_fraction = 0.01;
  int max_attempts = 20;
  ChainSampler sampler;  ///< empty -> default_chain_sampler(ranges)
};

/// Entry i depends only on (seed, master_seed, i).
std::vector<BackgroundEntry> build_background_pool(const RasterImage& seed, int m,
                                                   std::uint64_t master_seed,
                                                   const PoolOptions& options = {});

/// seeds[c] holds the 1..3 seed cut-outs of class c. Sprite j of class c
/// depends only on (seeds[c], master_seed, c, j).
std::vector<std::vector<Sprite>> build_foreground_pools(
    const std::vector<std::vector<SpriteSource>>& seeds, int n, std::uint64_t master_seed,
    const PoolOptions& options = {});

/// Re-applies a stored record to its seed. Alpha is rebuilt from the mask.
Sprite replay_sprite(const SpriteSource& seed, int class_id, const TransformChainRecord& chain);

/// The on-disk form of a sprite is an RGBA PNG; this rebuilds the mask from alpha > 0.
Sprite sprite_from_stored(const RasterImage& rgba, int class_id, const TransformChainRecord& chain);

}  // namespace toolsynth
