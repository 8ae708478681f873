#include "toolsynth/pools.hpp"

#include "toolsynth/errors.hpp"
#include "toolsynth/parallel.hpp"

#include <stdexcept>
#include <string>

namespace toolsynth {

namespace {

RasterImage matte_from_mask(const RasterImage& img, const BinaryMask& mask) {
  RasterImage out = with_channels(img, Channels::RGBA);
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x) out.at(x, y, 3) = mask.at(x, y) ? 255 : 0;
  return out;
}

const ChainSampler& pick_sampler(const PoolOptions& options, ChainSampler& fallback) {
  if (options.sampler) return options.sampler;
  fallback = default_chain_sampler(options.ranges);
  return fallback;
}

}  // namespace

SpriteSource sprite_source_from_rgba(const RasterImage& rgba) {
  if (!rgba.has_alpha())
    throw std::invalid_argument("sprite seed must be RGBA with a transparent background");
  return SpriteSource{rgba, alpha_to_mask(rgba)};
}

ChainSampler default_chain_sampler(const AugmentRanges& ranges) {
  return [ranges](Rng& rng, Profile profile) { return sample_chain(rng, profile, ranges); };
}

std::vector<BackgroundEntry> build_background_pool(const RasterImage& seed, int m,
                                                   std::uint64_t master_seed,
                                                   const PoolOptions& options) {
  if (m < 1) throw std::invalid_argument("build_background_pool: m must be >= 1");
  ChainSampler fallback;
  const ChainSampler& sampler = pick_sampler(options, fallback);
  const RasterImage base = with_channels(seed, Channels::RGB);

  std::vector<BackgroundEntry> pool(m);
  parallel_for(pool.size(), options.jobs, [&](std::size_t i) {
    const std::uint64_t seed_i = derive_seed(master_seed, "background", {i});
    Rng rng(seed_i);
    TransformChainRecord chain = sampler(rng, Profile::Background);
    chain.source_seed_index = 0;
    chain.derivation_seed = seed_i;
    pool[i] = BackgroundEntry{apply_chain(base, std::nullopt, chain).image, std::move(chain)};
  });
  return pool;
}

Sprite replay_sprite(const SpriteSource& seed, int class_id, const TransformChainRecord& chain) {
  auto out = apply_chain(seed.image, seed.mask, chain);
  Sprite s;
  s.image = matte_from_mask(out.image, *out.mask);
  s.mask = std::move(*out.mask);
  s.class_id = class_id;
  s.seed_index = chain.source_seed_index;
  s.chain = chain;
  return s;
}

Sprite sprite_from_stored(const RasterImage& rgba, int class_id, const TransformChainRecord& chain) {
  if (!rgba.has_alpha()) throw std::invalid_argument("stored sprite must be RGBA");
  Sprite s;
  s.mask = alpha_to_mask(rgba, 1);
  s.image = matte_from_mask(rgba, s.mask);
  s.class_id = class_id;
  s.seed_index = chain.source_seed_index;
  s.chain = chain;
  return s;
}

std::vector<std::vector<Sprite>> build_foreground_pools(
    const std::vector<std::vector<SpriteSource>>& seeds, int n, std::uint64_t master_seed,
    const PoolOptions& options) {
  if (n < 1) throw std::invalid_argument("build_foreground_pools: n must be >= 1");
  if (seeds.empty()) throw std::invalid_argument("build_foreground_pools: no classes");
  for (std::size_t c = 0; c < seeds.size(); ++c) {
    if (seeds[c].empty())
      throw std::invalid_argument("build_foreground_pools: class " + std::to_string(c) +
                                  " has no seed images");
    for (std::size_t k = 0; k < seeds[c].size(); ++k) {
      require_same_size(seeds[c][k].image, seeds[c][k].mask, "build_foreground_pools");
      if (mask_area(seeds[c][k].mask) == 0)
        throw std::invalid_argument("build_foreground_pools: class " + std::to_string(c) +
                                    " seed " + std::to_string(k) + " has an empty mask");
    }
  }
  ChainSampler fallback;
  const ChainSampler& sampler = pick_sampler(options, fallback);

  const std::size_t classes = seeds.size();
  std::vector<std::vector<Sprite>> pools(classes, std::vector<Sprite>(n));
  parallel_for(classes * n, options.jobs, [&](std::size_t flat) {
    const std::size_t c = flat / n;
    const std::size_t j = flat % n;
    const std::uint64_t seed_cj = derive_seed(master_seed, "foreground", {c, j});
    Rng rng(seed_cj);
    const int seed_index = rng.uniform_int(0, static_cast<int>(seeds[c].size()) - 1);
    const SpriteSource& src = seeds[c][seed_index];
    const double min_area = options.min_area_fraction * static_cast<double>(mask_area(src.mask));
    for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
      TransformChainRecord chain = sampler(rng, Profile::Foreground);
      chain.source_seed_index = seed_index;
      chain.derivation_seed = seed_cj;
      Sprite s = replay_sprite(src, static_cast<int>(c), chain);
      const auto area = mask_area(s.mask);
      if (area > 0 && static_cast<double>(area) >= min_area) {
        pools[c][j] = std::move(s);
        return;
      }
    }
    throw InvariantError("foreground pool: class " + std::to_string(c) + " entry " +
                         std::to_string(j) + " lost its instrument in " +
                         std::to_string(options.max_attempts) + " attempts");
  });
  return pools;
}

}  // namespace toolsynth
