#pragma once

#include "toolsynth/compose.hpp"
#include "toolsynth/image.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace toolsynth {

/// Dice similarity 2|a n b| / (|a| + |b|); two empty masks score 1.
/// Throws std::invalid_argument on a dimension mismatch.
double dsc(const BinaryMask& pred, const BinaryMask& gt);

struct EvalEntry {
  std::string name;
  double dsc = 0.0;
};

struct EvalReport {
  std::vector<EvalEntry> samples;  ///< lexicographic by file name
  double mean = 0.0;
  double std = 0.0;  ///< population standard deviation
  std::size_t count = 0;
};

/// Mean and population std over the given values; zeros when empty.
EvalReport summarize(std::vector<EvalEntry> entries);

/// Pairs *.png files by name. Unpaired files are listed in the ConfigError;
/// differing dimensions are a ConfigError too.
EvalReport evaluate_dir(const std::filesystem::path& pred_dir, const std::filesystem::path& gt_dir,
                        int jobs = 1);

nlohmann::json to_json(const EvalReport& report);
std::string to_text(const EvalReport& report);

struct DatasetStats {
  std::size_t samples = 0;
  std::map<int, std::size_t> class_usage;       ///< sprite count per class id
  std::map<int, std::size_t> instruments;       ///< sprites per image -> samples
  std::map<std::string, std::size_t> blend_modes;
  std::map<std::string, std::size_t> sources;   ///< synthetic / real / augmented
  double mean_coverage = 0.0;                   ///< mean fraction of mask pixels set
};

/// Masks are read relative to base_dir for the coverage figure.
DatasetStats dataset_stats(const Manifest& manifest, const std::filesystem::path& base_dir,
                           int jobs = 1);

nlohmann::json to_json(const DatasetStats& stats);
std::string to_text(const DatasetStats& stats);

}  // namespace toolsynth
