#include "toolsynth/manifest.hpp"

#include "toolsynth/errors.hpp"
#include "json_util.hpp"

#include <fstream>
#include <set>
#include <string>

namespace toolsynth {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

using detail::get;
using detail::get_opt;

std::string_view rounding_key(Rounding r) { return to_string(r); }

}  // namespace

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed, const char* where) {
  if (!j.is_object()) throw ConfigError(std::string(where) + ": expected an object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items())
    if (!keys.count(k)) throw ConfigError(std::string(where) + ": unknown field '" + k + "'");
}

json to_json(const TransformParams& t) {
  json j;
  j["kind"] = std::string(to_string(kind_of(t)));
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, xform::Crop>) {
          j["left"] = p.left;
          j["top"] = p.top;
          j["keep_width"] = p.keep_width;
          j["keep_height"] = p.keep_height;
        } else if constexpr (std::is_same_v<P, xform::Affine>) {
          j["rotation_deg"] = p.rotation_deg;
          j["scale"] = p.scale;
          j["translate_x"] = p.translate_x;
          j["translate_y"] = p.translate_y;
          j["shear_deg"] = p.shear_deg;
        } else if constexpr (std::is_same_v<P, xform::Perspective>) {
          j["corner_shift"] = p.corner_shift;
        } else if constexpr (std::is_same_v<P, xform::HueSaturation>) {
          j["hue_shift"] = p.hue_shift;
          j["saturation_shift"] = p.saturation_shift;
        } else if constexpr (std::is_same_v<P, xform::LinearContrast>) {
          j["factor"] = p.factor;
        } else if constexpr (std::is_same_v<P, xform::GaussianBlur> ||
                             std::is_same_v<P, xform::AverageBlur> ||
                             std::is_same_v<P, xform::MedianBlur>) {
          j["kernel"] = p.kernel;
        } else if constexpr (std::is_same_v<P, xform::Sharpen> || std::is_same_v<P, xform::Emboss>) {
          j["alpha"] = p.alpha;
        } else if constexpr (std::is_same_v<P, xform::AdditiveGaussianNoise>) {
          j["sigma"] = p.sigma;
          j["seed"] = p.seed;
        }
      },
      t);
  return j;
}

TransformParams transform_from_json(const json& j) {
  constexpr const char* where = "transform";
  const auto name = get<std::string>(j, "kind", where);
  const auto kind = transform_kind_from_string(name);
  if (!kind) throw ConfigError(std::string(where) + ": unknown kind '" + name + "'");
  switch (*kind) {
    case TransformKind::HFlip:
      reject_unknown_keys(j, {"kind"}, where);
      return xform::HFlip{};
    case TransformKind::VFlip:
      reject_unknown_keys(j, {"kind"}, where);
      return xform::VFlip{};
    case TransformKind::Crop:
      reject_unknown_keys(j, {"kind", "left", "top", "keep_width", "keep_height"}, where);
      return xform::Crop{get<double>(j, "left", where), get<double>(j, "top", where),
                         get<double>(j, "keep_width", where), get<double>(j, "keep_height", where)};
    case TransformKind::Affine:
      reject_unknown_keys(j, {"kind", "rotation_deg", "scale", "translate_x", "translate_y", "shear_deg"},
                          where);
      return xform::Affine{get<double>(j, "rotation_deg", where), get<double>(j, "scale", where),
                           get<double>(j, "translate_x", where), get<double>(j, "translate_y", where),
                           get<double>(j, "shear_deg", where)};
    case TransformKind::Perspective:
      reject_unknown_keys(j, {"kind", "corner_shift"}, where);
      return xform::Perspective{get<std::array<double, 8>>(j, "corner_shift", where)};
    case TransformKind::HueSaturation:
      reject_unknown_keys(j, {"kind", "hue_shift", "saturation_shift"}, where);
      return xform::HueSaturation{get<double>(j, "hue_shift", where),
                                  get<double>(j, "saturation_shift", where)};
    case TransformKind::LinearContrast:
      reject_unknown_keys(j, {"kind", "factor"}, where);
      return xform::LinearContrast{get<double>(j, "factor", where)};
    case TransformKind::GaussianBlur:
      reject_unknown_keys(j, {"kind", "kernel"}, where);
      return xform::GaussianBlur{get<int>(j, "kernel", where)};
    case TransformKind::AverageBlur:
      reject_unknown_keys(j, {"kind", "kernel"}, where);
      return xform::AverageBlur{get<int>(j, "kernel", where)};
    case TransformKind::MedianBlur:
      reject_unknown_keys(j, {"kind", "kernel"}, where);
      return xform::MedianBlur{get<int>(j, "kernel", where)};
    case TransformKind::Sharpen:
      reject_unknown_keys(j, {"kind", "alpha"}, where);
      return xform::Sharpen{get<double>(j, "alpha", where)};
    case TransformKind::Emboss:
      reject_unknown_keys(j, {"kind", "alpha"}, where);
      return xform::Emboss{get<double>(j, "alpha", where)};
    case TransformKind::AdditiveGaussianNoise:
      reject_unknown_keys(j, {"kind", "sigma", "seed"}, where);
      return xform::AdditiveGaussianNoise{get<double>(j, "sigma", where),
                                          get<std::uint64_t>(j, "seed", where)};
  }
  throw ConfigError("transform: unhandled kind");
}

json to_json(const TransformChainRecord& chain) {
  json transforms = json::array();
  for (const auto& t : chain.transforms) transforms.push_back(to_json(t));
  return json{{"source_seed_index", chain.source_seed_index},
              {"derivation_seed", chain.derivation_seed},
              {"transforms", std::move(transforms)}};
}

TransformChainRecord chain_from_json(const json& j) {
  constexpr const char* where = "chain";
  reject_unknown_keys(j, {"source_seed_index", "derivation_seed", "transforms"}, where);
  TransformChainRecord rec;
  rec.source_seed_index = get<int>(j, "source_seed_index", where);
  rec.derivation_seed = get<std::uint64_t>(j, "derivation_seed", where);
  const auto transforms = get<json>(j, "transforms", where);
  if (!transforms.is_array()) throw ConfigError("chain.transforms: expected an array");
  for (const auto& t : transforms) rec.transforms.push_back(transform_from_json(t));
  return rec;
}

json to_json(const AugmentRanges& r) {
  return json{{"crop_keep_min", r.crop_keep_min},
              {"crop_keep_max", r.crop_keep_max},
              {"rotation_deg", r.rotation_deg},
              {"scale_min", r.scale_min},
              {"scale_max", r.scale_max},
              {"translate", r.translate},
              {"shear_deg", r.shear_deg},
              {"perspective_max", r.perspective_max},
              {"hue_saturation_shift", r.hue_saturation_shift},
              {"contrast_min", r.contrast_min},
              {"contrast_max", r.contrast_max},
              {"blur_kernels", r.blur_kernels},
              {"sharpen_alpha_max", r.sharpen_alpha_max},
              {"emboss_alpha_max", r.emboss_alpha_max},
              {"noise_sigma_max", r.noise_sigma_max},
              {"chain_min", r.chain_min},
              {"chain_max", r.chain_max}};
}

AugmentRanges ranges_from_json(const json& j, AugmentRanges r) {
  constexpr const char* where = "augment.ranges";
  reject_unknown_keys(j,
                      {"crop_keep_min", "crop_keep_max", "rotation_deg", "scale_min", "scale_max",
                       "translate", "shear_deg", "perspective_max", "hue_saturation_shift",
                       "contrast_min", "contrast_max", "blur_kernels", "sharpen_alpha_max",
                       "emboss_alpha_max", "noise_sigma_max", "chain_min", "chain_max"},
                      where);
  get_opt(j, "crop_keep_min", r.crop_keep_min, where);
  get_opt(j, "crop_keep_max", r.crop_keep_max, where);
  get_opt(j, "rotation_deg", r.rotation_deg, where);
  get_opt(j, "scale_min", r.scale_min, where);
  get_opt(j, "scale_max", r.scale_max, where);
  get_opt(j, "translate", r.translate, where);
  get_opt(j, "shear_deg", r.shear_deg, where);
  get_opt(j, "perspective_max", r.perspective_max, where);
  get_opt(j, "hue_saturation_shift", r.hue_saturation_shift, where);
  get_opt(j, "contrast_min", r.contrast_min, where);
  get_opt(j, "contrast_max", r.contrast_max, where);
  get_opt(j, "blur_kernels", r.blur_kernels, where);
  get_opt(j, "sharpen_alpha_max", r.sharpen_alpha_max, where);
  get_opt(j, "emboss_alpha_max", r.emboss_alpha_max, where);
  get_opt(j, "noise_sigma_max", r.noise_sigma_max, where);
  get_opt(j, "chain_min", r.chain_min, where);
  get_opt(j, "chain_max", r.chain_max, where);
  try {
    validate(r);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return r;
}

json to_json(const PlacementBounds& b) {
  return json{{"min_extent", b.min_extent},
              {"max_extent", b.max_extent},
              {"rotation_deg", b.rotation_deg},
              {"min_visible", b.min_visible},
              {"max_attempts", b.max_attempts}};
}

PlacementBounds placement_bounds_from_json(const json& j, PlacementBounds b) {
  constexpr const char* where = "placement";
  reject_unknown_keys(j, {"min_extent", "max_extent", "rotation_deg", "min_visible", "max_attempts"},
                      where);
  get_opt(j, "min_extent", b.min_extent, where);
  get_opt(j, "max_extent", b.max_extent, where);
  get_opt(j, "rotation_deg", b.rotation_deg, where);
  get_opt(j, "min_visible", b.min_visible, where);
  get_opt(j, "max_attempts", b.max_attempts, where);
  return b;
}

json to_json(const DatasetSpec& s) {
  return json{{"name", s.name},
              {"seeds_per_instrument", s.seeds_per_instrument},
              {"fg_distribution", {{"1", s.p_single}, {"2", s.p_double}}},
              {"count", s.count},
              {"blend", std::string(to_string(s.blend))},
              {"levels", s.levels},
              {"master_seed", s.master_seed},
              {"canvas", {{"width", s.canvas.width}, {"height", s.canvas.height}}},
              {"placement", to_json(s.placement)},
              {"rounding", std::string(rounding_key(s.rounding))}};
}

DatasetSpec dataset_spec_from_json(const json& j, DatasetSpec s) {
  constexpr const char* where = "spec";
  reject_unknown_keys(j,
                      {"name", "seeds_per_instrument", "fg_distribution", "count", "blend", "levels",
                       "master_seed", "canvas", "placement", "rounding"},
                      where);
  get_opt(j, "name", s.name, where);
  get_opt(j, "seeds_per_instrument", s.seeds_per_instrument, where);
  if (j.contains("fg_distribution")) {
    const auto& d = j.at("fg_distribution");
    reject_unknown_keys(d, {"1", "2"}, "spec.fg_distribution");
    s.p_single = d.contains("1") ? get<double>(d, "1", "spec.fg_distribution") : 0.0;
    s.p_double = d.contains("2") ? get<double>(d, "2", "spec.fg_distribution") : 0.0;
  }
  get_opt(j, "count", s.count, where);
  if (j.contains("blend")) {
    try {
      s.blend = blend_mode_from_string(get<std::string>(j, "blend", where));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  get_opt(j, "levels", s.levels, where);
  get_opt(j, "master_seed", s.master_seed, where);
  if (j.contains("canvas")) {
    const auto& c = j.at("canvas");
    reject_unknown_keys(c, {"width", "height"}, "spec.canvas");
    get_opt(c, "width", s.canvas.width, "spec.canvas");
    get_opt(c, "height", s.canvas.height, "spec.canvas");
  }
  if (j.contains("placement")) s.placement = placement_bounds_from_json(j.at("placement"), s.placement);
  if (j.contains("rounding")) {
    try {
      s.rounding = rounding_from_string(get<std::string>(j, "rounding", where));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  return s;
}

json to_json(const Manifest& m) {
  json samples = json::array();
  for (const auto& s : m.samples) {
    json e{{"id", s.id}, {"image", s.image}, {"mask", s.mask}};
    if (s.background) e["background"] = {{"index", s.background->index}, {"chain_seed", s.background->chain_seed}};
    if (s.is_synthetic()) {
      json sprites = json::array();
      for (const auto& u : s.sprites) {
        const auto& p = u.placement;
        sprites.push_back({{"class", u.class_id},
                           {"index", u.index},
                           {"placement", {{"scale", p.scale}, {"rot", p.rotation_deg}, {"dx", p.dx}, {"dy", p.dy}, {"z", p.z}}}});
      }
      e["sprites"] = std::move(sprites);
    } else {
      e["source"] = s.source;
    }
    if (s.blend) e["blend"] = std::string(to_string(*s.blend));
    samples.push_back(std::move(e));
  }
  return json{{"version", m.version}, {"spec", to_json(m.spec)}, {"master_seed", m.master_seed},
              {"samples", std::move(samples)}};
}

Manifest manifest_from_json(const json& j) {
  reject_unknown_keys(j, {"version", "spec", "master_seed", "samples"}, "manifest");
  Manifest m;
  m.version = get<int>(j, "version", "manifest");
  if (m.version != kManifestVersion)
    throw ConfigError("manifest: unsupported version " + std::to_string(m.version));
  m.spec = dataset_spec_from_json(get<json>(j, "spec", "manifest"));
  m.master_seed = get<std::uint64_t>(j, "master_seed", "manifest");
  const auto samples = get<json>(j, "samples", "manifest");
  if (!samples.is_array()) throw ConfigError("manifest.samples: expected an array");
  for (const auto& e : samples) {
    constexpr const char* where = "manifest.samples[]";
    reject_unknown_keys(e, {"id", "image", "mask", "background", "sprites", "blend", "source"}, where);
    SampleRecord s;
    s.id = get<int>(e, "id", where);
    s.image = get<std::string>(e, "image", where);
    s.mask = get<std::string>(e, "mask", where);
    get_opt(e, "source", s.source, where);
    if (s.source != "synthetic" && s.source != "real" && s.source != "augmented")
      throw ConfigError(std::string(where) + ": unknown source '" + s.source + "'");
    if (e.contains("background")) {
      const auto& b = e.at("background");
      reject_unknown_keys(b, {"index", "chain_seed"}, "manifest.samples[].background");
      s.background = BackgroundUse{get<int>(b, "index", "background"),
                                   get<std::uint64_t>(b, "chain_seed", "background")};
    }
    if (e.contains("sprites")) {
      for (const auto& u : e.at("sprites")) {
        reject_unknown_keys(u, {"class", "index", "placement"}, "manifest.samples[].sprites[]");
        const auto p = get<json>(u, "placement", "manifest.samples[].sprites[]");
        reject_unknown_keys(p, {"scale", "rot", "dx", "dy", "z"}, "placement");
        s.sprites.push_back(SpriteUse{
            get<int>(u, "class", "sprite"), get<int>(u, "index", "sprite"),
            Placement{get<double>(p, "scale", "placement"), get<double>(p, "rot", "placement"),
                      get<double>(p, "dx", "placement"), get<double>(p, "dy", "placement"),
                      get<int>(p, "z", "placement")}});
      }
    }
    if (e.contains("blend")) {
      try {
        s.blend = blend_mode_from_string(get<std::string>(e, "blend", where));
      } catch (const std::invalid_argument& ex) {
        throw ConfigError(ex.what());
      }
    }
    if (s.is_synthetic() && (!s.background || s.sprites.empty() || !s.blend))
      throw ConfigError("manifest: synthetic sample " + std::to_string(s.id) +
                        " lacks background, sprites or blend");
    m.samples.push_back(std::move(s));
  }
  return m;
}

Manifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path, "cannot open manifest");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": malformed JSON: " + e.what());
  }
  try {
    return manifest_from_json(j);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_manifest(const Manifest& manifest, const fs::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path, "cannot open for writing");
  out << to_json(manifest).dump(2) << '\n';
  if (!out) throw IoError(path, "write failed");
}

}  // namespace toolsynth
