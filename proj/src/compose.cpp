#include "toolsynth/compose.hpp"

#include "toolsynth/errors.hpp"
#include "toolsynth/manifest.hpp"
#include "toolsynth/parallel.hpp"
#include "toolsynth/png_io.hpp"
#include "toolsynth/warp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <regex>
#include <stdexcept>

namespace toolsynth {

namespace fs = std::filesystem;

namespace {

std::string sample_name(std::size_t id) {
  std::string s = std::to_string(id);
  if (s.size() < 6) s.insert(0, 6 - s.size(), '0');
  return s + ".png";
}

// Removes only engine-named files so a rerun starts from the same state.
void clear_generated(const fs::path& dir) {
  static const std::regex generated(R"(\d{6}\.png)");
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && std::regex_match(entry.path().filename().string(), generated))
      fs::remove(entry.path());
  }
}

// The placed sprite mask rendered unclipped over the transformed bounding box
// of its set pixels.
// Canvas pixel (x, y) is window pixel (x - ox, y - oy).
struct Window {
  int ox = 0, oy = 0;
  Eigen::Matrix3d window_to_src;
  BinaryMask mask;
};

Window placed_window(const Sprite& sprite, const Placement& p) {
  const Eigen::Matrix3d fwd = placement_transform(sprite, p);
  const auto box = mask_bbox(sprite.mask);
  const double l = box[0] - 0.5, t = box[1] - 0.5, r = box[2] + 0.5, b = box[3] + 0.5;
  double minx = 1e300, miny = 1e300, maxx = -1e300, maxy = -1e300;
  for (const auto& corner : {Eigen::Vector2d(l, t), Eigen::Vector2d(r, t), Eigen::Vector2d(r, b),
                             Eigen::Vector2d(l, b)}) {
    const Eigen::Vector2d q = (fwd * corner.homogeneous()).hnormalized();
    minx = std::min(minx, q.x());
    maxx = std::max(maxx, q.x());
    miny = std::min(miny, q.y());
    maxy = std::max(maxy, q.y());
  }
  Window win;
  win.ox = static_cast<int>(std::floor(minx)) - 1;
  win.oy = static_cast<int>(std::floor(miny)) - 1;
  const int bw = static_cast<int>(std::ceil(maxx)) - win.ox + 2;
  const int bh = static_cast<int>(std::ceil(maxy)) - win.oy + 2;
  Eigen::Matrix3d shift = Eigen::Matrix3d::Identity();
  shift(0, 2) = win.ox;
  shift(1, 2) = win.oy;
  win.window_to_src = fwd.inverse() * shift;
  win.mask = warp_nearest(sprite.mask, win.window_to_src, bw, bh);
  return win;
}

// Sprite-on-canvas used as the blend foreground: sprite colours where the
// placed mask is set, the current composite elsewhere.
RasterImage render_foreground(const Sprite& sprite, const Window& win, const RasterImage& composite) {
  const RasterImage colour = warp_bilinear(sprite.image, win.window_to_src, win.mask.width(),
                                           win.mask.height(), Border::Zero);
  RasterImage fg = with_channels(composite, Channels::RGBA);
  for (int y = 0; y < fg.height(); ++y)
    for (int x = 0; x < fg.width(); ++x) fg.at(x, y, 3) = 0;
  const int x0 = std::max(0, win.ox), x1 = std::min(fg.width(), win.ox + win.mask.width());
  const int y0 = std::max(0, win.oy), y1 = std::min(fg.height(), win.oy + win.mask.height());
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) {
      if (!win.mask.at(x - win.ox, y - win.oy)) continue;
      for (int c = 0; c < 3; ++c) fg.at(x, y, c) = colour.at(x - win.ox, y - win.oy, c);
      fg.at(x, y, 3) = 255;
    }
  return fg;
}

BinaryMask clip_to_canvas(const Window& win, const Canvas& canvas) {
  BinaryMask out(canvas.width, canvas.height);
  const int x0 = std::max(0, win.ox), x1 = std::min(canvas.width, win.ox + win.mask.width());
  const int y0 = std::max(0, win.oy), y1 = std::min(canvas.height, win.oy + win.mask.height());
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x)
      if (win.mask.at(x - win.ox, y - win.oy)) out.set(x, y, true);
  return out;
}

}  // namespace

std::string_view to_string(Rounding r) {
  return r == Rounding::Truncate ? "truncate" : "half_away";
}

Rounding rounding_from_string(std::string_view name) {
  if (name == "half_away") return Rounding::HalfAwayFromZero;
  if (name == "truncate") return Rounding::Truncate;
  throw std::invalid_argument("unknown rounding rule '" + std::string(name) +
                              "' (expected half_away or truncate)");
}

std::size_t fraction_count(double fraction, std::size_t k, Rounding rounding) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw std::invalid_argument("fraction must be in [0,1]");
  const double x = fraction * static_cast<double>(k);
  const double nearest = std::round(x);
  if (std::fabs(x - nearest) < 1e-9) return static_cast<std::size_t>(nearest);
  return static_cast<std::size_t>(rounding == Rounding::Truncate ? std::floor(x) : nearest);
}

void validate(const DatasetSpec& s) {
  if (s.seeds_per_instrument < 1 || s.seeds_per_instrument > 3)
    throw ConfigError("spec: seeds_per_instrument must be 1, 2 or 3");
  if (s.p_single < 0 || s.p_double < 0 || std::fabs(s.p_single + s.p_double - 1.0) > 1e-9)
    throw ConfigError("spec: fg_distribution must be non-negative and sum to 1");
  if (s.canvas.width < 1 || s.canvas.height < 1) throw ConfigError("spec: canvas must be non-empty");
  const auto& b = s.placement;
  if (!(b.min_extent > 0 && b.min_extent <= b.max_extent))
    throw ConfigError("spec: placement extent range invalid");
  if (!(b.min_visible > 0 && b.min_visible <= 1)) throw ConfigError("spec: min_visible must be in (0,1]");
  if (b.max_attempts < 1) throw ConfigError("spec: placement max_attempts must be >= 1");
  if (s.blend == BlendMode::Laplacian) {
    try {
      check_pyramid_levels(s.canvas.width, s.canvas.height, s.levels);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("spec: ") + e.what());
    }
  }
}

std::size_t single_count(const DatasetSpec& spec) {
  return fraction_count(spec.p_single, spec.count, spec.rounding);
}

std::array<int, 4> mask_bbox(const BinaryMask& mask) {
  int x0 = mask.width(), y0 = mask.height(), x1 = -1, y1 = -1;
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      if (mask.at(x, y)) {
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
      }
  if (x1 < 0) throw std::invalid_argument("mask_bbox: empty mask");
  return {x0, y0, x1, y1};
}

Eigen::Matrix3d placement_transform(const Sprite& sprite, const Placement& p) {
  const auto box = mask_bbox(sprite.mask);
  const Eigen::Vector2d anchor((box[0] + box[2]) / 2.0, (box[1] + box[3]) / 2.0);
  const double th = p.rotation_deg * std::numbers::pi / 180.0;
  Eigen::Matrix2d lin;
  lin << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  lin *= p.scale;
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  m.topLeftCorner<2, 2>() = lin;
  m.topRightCorner<2, 1>() = Eigen::Vector2d(p.dx, p.dy) - lin * anchor;
  return m;
}

BinaryMask placed_mask(const Sprite& sprite, const Placement& p, const Canvas& canvas) {
  return clip_to_canvas(placed_window(sprite, p), canvas);
}

double visible_fraction(const Sprite& sprite, const Placement& p, const Canvas& canvas) {
  const Window win = placed_window(sprite, p);
  const auto total = mask_area(win.mask);
  if (total == 0) return 0.0;
  std::size_t visible = 0;
  const int x0 = std::max(0, win.ox), x1 = std::min(canvas.width, win.ox + win.mask.width());
  const int y0 = std::max(0, win.oy), y1 = std::min(canvas.height, win.oy + win.mask.height());
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) visible += win.mask.at(x - win.ox, y - win.oy);
  return static_cast<double>(visible) / static_cast<double>(total);
}

Placement sample_placement(const Sprite& sprite, const Canvas& canvas, Rng& rng,
                           const PlacementBounds& bounds) {
  if (mask_area(sprite.mask) == 0) throw std::invalid_argument("sample_placement: sprite mask is empty");
  const auto box = mask_bbox(sprite.mask);
  const double longer = std::max(box[2] - box[0] + 1, box[3] - box[1] + 1);
  Placement p;
  const double extent = rng.uniform(bounds.min_extent, bounds.max_extent);
  p.scale = extent * canvas.width / longer;
  p.rotation_deg = rng.uniform(-bounds.rotation_deg, bounds.rotation_deg);
  for (int attempt = 0; attempt < bounds.max_attempts; ++attempt) {
    p.dx = rng.uniform(0.0, canvas.width);
    p.dy = rng.uniform(0.0, canvas.height);
    if (visible_fraction(sprite, p, canvas) >= bounds.min_visible) return p;
  }
  throw InvariantError("sample_placement: no placement with >= " +
                       std::to_string(bounds.min_visible) + " visibility after " +
                       std::to_string(bounds.max_attempts) + " attempts");
}

ScenePair render_scene(const RasterImage& bg, std::span<const Sprite* const> sprites,
                       std::span<const Placement> placements, const ComposeOptions& options) {
  if (sprites.empty()) throw std::invalid_argument("render_scene: no sprites");
  if (sprites.size() != placements.size())
    throw std::invalid_argument("render_scene: one placement per sprite required");

  ScenePair scene;
  scene.mode = options.mode;
  scene.image = resize_bilinear(with_channels(bg, Channels::RGB), options.canvas.width, options.canvas.height);
  scene.mask = BinaryMask(options.canvas.width, options.canvas.height);

  std::vector<std::size_t> order(sprites.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return placements[a].z < placements[b].z; });

  for (std::size_t i : order) {
    const Sprite& sprite = *sprites[i];
    const Window win = placed_window(sprite, placements[i]);
    const BinaryMask placed = clip_to_canvas(win, options.canvas);
    if (mask_area(placed) == 0) throw InvariantError("render_scene: placed sprite is not visible");
    const RasterImage fg = render_foreground(sprite, win, scene.image);
    switch (options.mode) {
      case BlendMode::Alpha:
        scene.image = alpha_blend(fg, scene.image);
        break;
      case BlendMode::Gaussian:
        scene.image = gaussian_blend(fg, scene.image, placed).image;
        break;
      case BlendMode::Laplacian:
        scene.image = laplacian_blend(fg, scene.image, placed, options.levels);
        break;
    }
    scene.mask = mask_union(scene.mask, placed);
  }
  scene.placements.assign(placements.begin(), placements.end());
  return scene;
}

ScenePair compose_scene(const RasterImage& bg, std::span<const Sprite* const> sprites,
                        const ComposeOptions& options, Rng& rng) {
  if (sprites.empty() || sprites.size() > 2)
    throw std::invalid_argument("compose_scene: expected one or two sprites");
  if (sprites.size() == 2 && sprites[0]->class_id == sprites[1]->class_id)
    throw std::invalid_argument("compose_scene: two sprites must have different classes");
  std::vector<Placement> placements;
  for (std::size_t i = 0; i < sprites.size(); ++i) {
    Placement p = sample_placement(*sprites[i], options.canvas, rng, options.bounds);
    p.z = static_cast<int>(i);
    placements.push_back(p);
  }
  return render_scene(bg, sprites, placements, options);
}

SampleRecord plan_sample(const DatasetSpec& spec, const PoolSet& pools, std::size_t i, bool single) {
  const int classes = static_cast<int>(pools.foregrounds.size());
  Rng rng(derive_seed(spec.master_seed, "sample", {i}));
  SampleRecord rec;
  rec.id = static_cast<int>(i);
  rec.image = "images/" + sample_name(i);
  rec.mask = "masks/" + sample_name(i);
  rec.blend = spec.blend;

  const int bg = rng.uniform_int(0, static_cast<int>(pools.backgrounds.size()) - 1);
  rec.background = BackgroundUse{bg, pools.backgrounds[bg].chain.derivation_seed};

  std::vector<int> chosen{rng.uniform_int(0, classes - 1)};
  if (!single) {
    int second = rng.uniform_int(0, classes - 2);
    if (second >= chosen[0]) ++second;
    chosen.push_back(second);
  }
  for (std::size_t s = 0; s < chosen.size(); ++s) {
    const auto& pool = pools.foregrounds[chosen[s]];
    const int index = rng.uniform_int(0, static_cast<int>(pool.size()) - 1);
    Placement p = sample_placement(pool[index], spec.canvas, rng, spec.placement);
    p.z = static_cast<int>(s);
    rec.sprites.push_back(SpriteUse{chosen[s], index, p});
  }
  return rec;
}

ScenePair replay_sample(const SampleRecord& record, const DatasetSpec& spec, const PoolSet& pools) {
  if (!record.is_synthetic() || !record.background || !record.blend)
    throw std::invalid_argument("replay_sample: not a synthetic sample record");
  const auto bg = static_cast<std::size_t>(record.background->index);
  if (bg >= pools.backgrounds.size()) throw ConfigError("replay_sample: background index out of range");
  std::vector<const Sprite*> sprites;
  std::vector<Placement> placements;
  for (const auto& use : record.sprites) {
    if (use.class_id < 0 || static_cast<std::size_t>(use.class_id) >= pools.foregrounds.size() ||
        use.index < 0 || static_cast<std::size_t>(use.index) >= pools.foregrounds[use.class_id].size())
      throw ConfigError("replay_sample: sprite reference out of range");
    sprites.push_back(&pools.foregrounds[use.class_id][use.index]);
    placements.push_back(use.placement);
  }
  ComposeOptions options{*record.blend, spec.levels, spec.canvas, spec.placement};
  return render_scene(pools.backgrounds[bg].image, sprites, placements, options);
}

Manifest generate_dataset(const DatasetSpec& spec, const PoolSet& pools, const fs::path& out_dir, int jobs) {
  validate(spec);
  if (pools.backgrounds.empty() || pools.foregrounds.empty())
    throw ConfigError("generate_dataset: pools are empty");
  for (const auto& pool : pools.foregrounds)
    if (pool.empty()) throw ConfigError("generate_dataset: a foreground class pool is empty");
  if (pools.seeds_per_instrument != spec.seeds_per_instrument)
    throw ConfigError("generate_dataset: pools were built with " +
                      std::to_string(pools.seeds_per_instrument) + " seeds per instrument, spec asks for " +
                      std::to_string(spec.seeds_per_instrument));
  const std::size_t singles = single_count(spec);
  if (singles < spec.count && pools.foregrounds.size() < 2)
    throw ConfigError("generate_dataset: two-instrument scenes need at least two classes");

  // Exactly `singles` single-instrument samples, positions fixed by the seed.
  std::vector<std::size_t> order(spec.count);
  std::iota(order.begin(), order.end(), 0);
  Rng layout(derive_seed(spec.master_seed, "layout"));
  std::shuffle(order.begin(), order.end(), layout.engine());
  std::vector<char> is_single(spec.count, 0);
  for (std::size_t i = 0; i < singles; ++i) is_single[order[i]] = 1;

  std::error_code ec;
  fs::create_directories(out_dir / "images", ec);
  if (ec) throw IoError(out_dir, "cannot create output directory: " + ec.message());
  fs::create_directories(out_dir / "masks", ec);
  clear_generated(out_dir / "images");
  clear_generated(out_dir / "masks");

  Manifest manifest;
  manifest.spec = spec;
  manifest.master_seed = spec.master_seed;
  manifest.samples.resize(spec.count);
  parallel_for(spec.count, jobs, [&](std::size_t i) {
    SampleRecord rec = plan_sample(spec, pools, i, is_single[i] != 0);
    const ScenePair scene = replay_sample(rec, spec, pools);
    save_png(scene.image, out_dir / rec.image);
    save_png(scene.mask, out_dir / rec.mask);
    manifest.samples[i] = std::move(rec);
  });
  write_manifest(manifest, out_dir / "manifest.json");
  return manifest;
}

Manifest mix_datasets(const Manifest& synthetic, const fs::path& synthetic_dir, const fs::path& real_dir,
                      MixRecipe recipe, std::uint64_t seed, Rounding rounding, const fs::path& out_manifest) {
  const std::size_t k = synthetic.samples.size();
  const std::size_t real_count = fraction_count(recipe.fraction, k, rounding);

  std::vector<std::string> real_names;
  if (real_count > 0) {
    std::error_code ec;
    if (!fs::is_directory(real_dir / "images", ec) || !fs::is_directory(real_dir / "masks", ec))
      throw IoError(real_dir, "expected images/ and masks/ subdirectories");
    for (const auto& e : fs::directory_iterator(real_dir / "images"))
      if (e.is_regular_file() && e.path().extension() == ".png") real_names.push_back(e.path().filename().string());
    std::sort(real_names.begin(), real_names.end());
    for (const auto& name : real_names)
      if (!fs::exists(real_dir / "masks" / name)) throw IoError(real_dir / "masks" / name, "missing mask for real image");
    if (real_names.size() < real_count)
      throw ConfigError("mix: need " + std::to_string(real_count) + " real samples, " + real_dir.string() +
                        " has " + std::to_string(real_names.size()));
  }

  const fs::path out_dir = fs::absolute(out_manifest).parent_path().lexically_normal();
  const fs::path syn_dir = fs::absolute(synthetic_dir).lexically_normal();
  const fs::path real_abs = fs::absolute(real_dir).lexically_normal();
  auto rebase = [&](const fs::path& base, const std::string& rel) {
    return (base / rel).lexically_normal().lexically_relative(out_dir).generic_string();
  };

  std::vector<char> keep(k, 1);
  if (recipe.kind == MixRecipe::Kind::Replace && real_count > 0) {
    std::vector<std::size_t> idx(k);
    std::iota(idx.begin(), idx.end(), 0);
    Rng drop(derive_seed(seed, "mix-drop"));
    std::shuffle(idx.begin(), idx.end(), drop.engine());
    for (std::size_t i = 0; i < real_count; ++i) keep[idx[i]] = 0;
  }

  Manifest out;
  out.version = synthetic.version;
  out.spec = synthetic.spec;
  out.master_seed = synthetic.master_seed;
  for (std::size_t i = 0; i < k; ++i) {
    if (!keep[i]) continue;
    SampleRecord rec = synthetic.samples[i];
    rec.id = static_cast<int>(out.samples.size());
    rec.image = rebase(syn_dir, rec.image);
    rec.mask = rebase(syn_dir, rec.mask);
    out.samples.push_back(std::move(rec));
  }
  if (real_count > 0) {
    Rng pick(derive_seed(seed, "mix-real"));
    std::shuffle(real_names.begin(), real_names.end(), pick.engine());
    real_names.resize(real_count);
    std::sort(real_names.begin(), real_names.end());
    for (const auto& name : real_names) {
      SampleRecord rec;
      rec.id = static_cast<int>(out.samples.size());
      rec.image = rebase(real_abs, "images/" + name);
      rec.mask = rebase(real_abs, "masks/" + name);
      rec.source = "real";
      out.samples.push_back(std::move(rec));
    }
  }
  return out;
}

}  // namespace toolsynth
