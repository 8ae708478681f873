#pragma once

#include "toolsynth/augment.hpp"
#include "toolsynth/compose.hpp"
#include "toolsynth/pools.hpp"
#include "toolsynth/trainaug.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace toolsynth {

constexpr int kConfigVersion = 1;

std::vector<std::string> default_class_roster();

struct PoolSettings {
  std::filesystem::path dir = "pools";
  int m = 500;
  int n = 200;
};

struct TrainAugSettings {
  HybridConfig hybrid;
  std::size_t batch_size = 8;
  int epochs = 1;
  std::string stream = "stdout";  ///< "stdout" or "tcp:<port>"
};

/// Everything a run needs. Relative paths in a config file are resolved
/// against the file's directory.
struct EngineConfig {
  int version = kConfigVersion;
  std::optional<std::uint64_t> master_seed;
  std::filesystem::path seeds_dir = "seeds";
  std::vector<std::string> classes = default_class_roster();
  PoolSettings pools;
  AugmentRanges augment;
  DatasetSpec dataset;  ///< dataset.master_seed mirrors master_seed once resolved
  TrainAugSettings trainaug;
  std::filesystem::path output_dir = "out";
};

/// Throws ConfigError on unknown keys or out-of-range values.
EngineConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
nlohmann::json to_json(const EngineConfig& cfg);

EngineConfig load_config(const std::filesystem::path& path);

/// Applies a --seed override; throws ConfigError if no seed is known at all.
void resolve_seed(EngineConfig& cfg, std::optional<std::uint64_t> override_seed);

nlohmann::json to_json(const HybridConfig& cfg);
HybridConfig hybrid_config_from_json(const nlohmann::json& j, HybridConfig base = {});

// Seeds -----------------------------------------------------------------

struct SeedSet {
  RasterImage background;
  std::vector<std::vector<SpriteSource>> foregrounds;  ///< per class, in roster order
};

/// Reads seeds_dir/background.png and the first `per_class` PNGs (by name) of
/// seeds_dir/<class>/. A class with fewer files is a ConfigError naming it.
SeedSet load_seeds(const std::filesystem::path& seeds_dir, const std::vector<std::string>& classes,
                   int per_class);

// Pool cache --------------------------------------------------------------
//
// <dir>/pools.json                      chain records + fingerprint
// <dir>/backgrounds/{i:06}.png          RGB
// <dir>/foregrounds/<class>/{j:06}.png  RGBA, alpha = 255 * mask

/// Hash of everything the pools depend on: seed pixels, roster, m, n, seed, ranges.
std::uint64_t pool_fingerprint(const SeedSet& seeds, const EngineConfig& cfg);

PoolSet build_pools(const SeedSet& seeds, const EngineConfig& cfg, int jobs);

/// Writes into a sibling temporary directory and renames it into place; the
/// temporary is removed if anything fails.
void save_pool_cache(const PoolSet& pools, const EngineConfig& cfg, std::uint64_t fingerprint,
                     const std::filesystem::path& dir, int jobs);

/// Throws ConfigError when the stored fingerprint differs from `expected`.
PoolSet load_pool_cache(const std::filesystem::path& dir, const EngineConfig& cfg,
                        std::optional<std::uint64_t> expected, int jobs);

}  // namespace toolsynth
