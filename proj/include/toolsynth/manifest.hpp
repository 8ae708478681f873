#pragma once

#include "toolsynth/augment.hpp"
#include "toolsynth/compose.hpp"

#include <json.hpp>

#include <filesystem>

namespace toolsynth {

// JSON forms of the engine records. Readers reject unknown fields and throw
// ConfigError naming the offending key.

constexpr int kManifestVersion = 1;

nlohmann::json to_json(const TransformParams& t);
TransformParams transform_from_json(const nlohmann::json& j);

nlohmann::json to_json(const TransformChainRecord& chain);
TransformChainRecord chain_from_json(const nlohmann::json& j);

nlohmann::json to_json(const AugmentRanges& ranges);
/// Missing keys keep their defaults.
AugmentRanges ranges_from_json(const nlohmann::json& j, AugmentRanges base = {});

nlohmann::json to_json(const PlacementBounds& bounds);
PlacementBounds placement_bounds_from_json(const nlohmann::json& j, PlacementBounds base = {});

nlohmann::json to_json(const DatasetSpec& spec);
DatasetSpec dataset_spec_from_json(const nlohmann::json& j, DatasetSpec base = {});

nlohmann::json to_json(const Manifest& manifest);
Manifest manifest_from_json(const nlohmann::json& j);

Manifest read_manifest(const std::filesystem::path& path);
void write_manifest(const Manifest& manifest, const std::filesystem::path& path);

/// Throws ConfigError if j has a key outside `allowed`.
void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                         const char* where);

}  // namespace toolsynth
