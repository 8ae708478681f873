#include "toolsynth/evaluate.hpp"

#include "toolsynth/errors.hpp"
#include "toolsynth/parallel.hpp"
#include "toolsynth/png_io.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <set>
#include <sstream>

namespace toolsynth {

namespace fs = std::filesystem;

double dsc(const BinaryMask& pred, const BinaryMask& gt) {
  require_same_size(pred.width(), pred.height(), gt.width(), gt.height(), "dsc");
  const auto a = pred.data();
  const auto b = gt.data();
  std::size_t both = 0, sum = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    both += a[i] & b[i];
    sum += a[i] + b[i];
  }
  if (sum == 0) return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(sum);
}

EvalReport summarize(std::vector<EvalEntry> entries) {
  EvalReport r;
  r.count = entries.size();
  r.samples = std::move(entries);
  if (r.count == 0) return r;
  double sum = 0;
  for (const auto& e : r.samples) sum += e.dsc;
  r.mean = sum / static_cast<double>(r.count);
  double sq = 0;
  for (const auto& e : r.samples) sq += (e.dsc - r.mean) * (e.dsc - r.mean);
  r.std = std::sqrt(sq / static_cast<double>(r.count));
  return r;
}

namespace {

std::set<std::string> png_names(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError(dir, "not a directory");
  std::set<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".png")
      names.insert(entry.path().filename().string());
  return names;
}

}  // namespace

EvalReport evaluate_dir(const fs::path& pred_dir, const fs::path& gt_dir, int jobs) {
  const auto pred = png_names(pred_dir);
  const auto gt = png_names(gt_dir);
  std::vector<std::string> only_pred, only_gt, paired;
  std::set_difference(pred.begin(), pred.end(), gt.begin(), gt.end(), std::back_inserter(only_pred));
  std::set_difference(gt.begin(), gt.end(), pred.begin(), pred.end(), std::back_inserter(only_gt));
  if (!only_pred.empty() || !only_gt.empty()) {
    std::string msg = "eval: unpaired files;";
    for (const auto& n : only_pred) msg += " pred-only:" + n;
    for (const auto& n : only_gt) msg += " gt-only:" + n;
    throw ConfigError(msg);
  }
  std::set_intersection(pred.begin(), pred.end(), gt.begin(), gt.end(), std::back_inserter(paired));

  std::vector<EvalEntry> entries(paired.size());
  parallel_for(paired.size(), jobs, [&](std::size_t i) {
    const auto p = load_mask_png(pred_dir / paired[i]);
    const auto g = load_mask_png(gt_dir / paired[i]);
    if (p.width() != g.width() || p.height() != g.height())
      throw ConfigError(fmt::format("eval: {} is {}x{} in pred but {}x{} in gt", paired[i], p.width(),
                                    p.height(), g.width(), g.height()));
    entries[i] = EvalEntry{paired[i], dsc(p, g)};
  });
  return summarize(std::move(entries));
}

nlohmann::json to_json(const EvalReport& report) {
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& e : report.samples) samples.push_back({{"name", e.name}, {"dsc", e.dsc}});
  return {{"count", report.count}, {"mean", report.mean}, {"std", report.std}, {"samples", samples}};
}

std::string to_text(const EvalReport& report) {
  std::size_t width = 4;
  for (const auto& e : report.samples) width = std::max(width, e.name.size());
  std::ostringstream out;
  out << fmt::format("{:<{}}  {:>8}\n", "file", width, "dsc");
  for (const auto& e : report.samples) out << fmt::format("{:<{}}  {:>8.6f}\n", e.name, width, e.dsc);
  out << fmt::format("{:<{}}  {:>8}\n", "count", width, report.count);
  out << fmt::format("{:<{}}  {:>8.6f}\n", "mean", width, report.mean);
  out << fmt::format("{:<{}}  {:>8.6f}\n", "std", width, report.std);
  return out.str();
}

DatasetStats dataset_stats(const Manifest& manifest, const fs::path& base_dir, int jobs) {
  DatasetStats s;
  s.samples = manifest.samples.size();
  for (const auto& rec : manifest.samples) {
    ++s.sources[rec.source];
    if (rec.is_synthetic()) {
      ++s.instruments[static_cast<int>(rec.sprites.size())];
      for (const auto& u : rec.sprites) ++s.class_usage[u.class_id];
    }
    if (rec.blend) ++s.blend_modes[std::string(to_string(*rec.blend))];
  }
  std::vector<double> coverage(s.samples);
  parallel_for(s.samples, jobs, [&](std::size_t i) {
    const auto mask = load_mask_png(base_dir / manifest.samples[i].mask);
    coverage[i] = static_cast<double>(mask_area(mask)) / (static_cast<double>(mask.width()) * mask.height());
  });
  double sum = 0;
  for (double c : coverage) sum += c;
  s.mean_coverage = s.samples ? sum / static_cast<double>(s.samples) : 0.0;
  return s;
}

namespace {

template <typename K>
nlohmann::json tally(const std::map<K, std::size_t>& m) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : m) {
    if constexpr (std::is_same_v<K, std::string>)
      j[k] = v;
    else
      j[std::to_string(k)] = v;
  }
  return j;
}

}  // namespace

nlohmann::json to_json(const DatasetStats& stats) {
  return {{"samples", stats.samples},
          {"class_usage", tally(stats.class_usage)},
          {"instruments_per_image", tally(stats.instruments)},
          {"blend_modes", tally(stats.blend_modes)},
          {"sources", tally(stats.sources)},
          {"mean_coverage", stats.mean_coverage}};
}

std::string to_text(const DatasetStats& stats) {
  std::ostringstream out;
  const auto row = [&](const std::string& key, const std::string& value) {
    out << fmt::format("{:<28}{:>12}\n", key, value);
  };
  row("samples", std::to_string(stats.samples));
  row("mean_coverage", fmt::format("{:.6f}", stats.mean_coverage));
  for (const auto& [k, v] : stats.instruments) row(fmt::format("instruments[{}]", k), std::to_string(v));
  for (const auto& [k, v] : stats.class_usage) row(fmt::format("class_usage[{}]", k), std::to_string(v));
  for (const auto& [k, v] : stats.blend_modes) row("blend[" + k + "]", std::to_string(v));
  for (const auto& [k, v] : stats.sources) row("source[" + k + "]", std::to_string(v));
  return out.str();
}

}  // namespace toolsynth
