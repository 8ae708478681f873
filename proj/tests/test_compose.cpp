#include "support.hpp"

#include "toolsynth/compose.hpp"
#include "toolsynth/demo_seeds.hpp"
#include "toolsynth/errors.hpp"
#include "toolsynth/manifest.hpp"
#include "toolsynth/png_io.hpp"

#include <Eigen/Geometry>
#include <doctest.h>

#include <map>
#include <set>

using namespace toolsynth;
using testing::TempDir;
namespace fs = std::filesystem;

namespace {

ChainSampler identity_sampler() {
  return [](Rng&, Profile) { return TransformChainRecord{}; };
}

// Three classes, small sprites, small canvas: cheap enough for thousands of samples.
const PoolSet& small_pools() {
  static const PoolSet pools = [] {
    PoolSet p;
    PoolOptions opts;
    opts.sampler = identity_sampler();
    for (int b = 0; b < 3; ++b) p.backgrounds.push_back(build_background_pool(demo_background(48, 48, b), 1, 1, opts)[0]);
    std::vector<std::vector<SpriteSource>> seeds(3);
    for (int c = 0; c < 3; ++c)
      for (int k = 0; k < 2; ++k) seeds[c].push_back(sprite_source_from_rgba(demo_instrument(c, k, 32, 5)));
    p.foregrounds = build_foreground_pools(seeds, 4, 9);
    p.master_seed = 9;
    p.seeds_per_instrument = 2;
    return p;
  }();
  return pools;
}

DatasetSpec small_spec(std::size_t count, BlendMode mode = BlendMode::Alpha) {
  DatasetSpec s;
  s.count = count;
  s.blend = mode;
  s.seeds_per_instrument = 2;
  s.canvas = {48, 48};
  s.master_seed = 31;
  return s;
}

Sprite solid_sprite(int size, int class_id, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  Sprite s;
  s.image = RasterImage(size, size, Channels::RGBA);
  s.mask = BinaryMask(size, size);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      s.image.at(x, y, 0) = r;
      s.image.at(x, y, 1) = g;
      s.image.at(x, y, 2) = b;
      s.image.at(x, y, 3) = 255;
      s.mask.set(x, y, true);
    }
  s.class_id = class_id;
  return s;
}

std::map<std::string, std::vector<unsigned char>> tree_bytes(const fs::path& dir) {
  std::map<std::string, std::vector<unsigned char>> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).generic_string()] = testing::read_bytes(e.path());
  return out;
}

bool strictly_binary_png(const fs::path& p) {
  const RasterImage img = load_image_png(p);
  for (auto v : img.data())
    if (v != 0 && v != 255) return false;
  return true;
}

}  // namespace

TEST_SUITE("counts and rounding") {
  TEST_CASE("fraction counts for the reference dataset size") {
    CHECK(fraction_count(0.2, 2235, Rounding::HalfAwayFromZero) == 447);
    CHECK(fraction_count(0.2, 2235, Rounding::Truncate) == 447);
    CHECK(fraction_count(0.8, 2235, Rounding::Truncate) == 1788);
    CHECK(fraction_count(0.1, 2235, Rounding::HalfAwayFromZero) == 224);
    CHECK(fraction_count(0.1, 2235, Rounding::Truncate) == 223);
    CHECK(fraction_count(0.0, 2235, Rounding::HalfAwayFromZero) == 0);
    CHECK(fraction_count(1.0, 2235, Rounding::Truncate) == 2235);
    CHECK(fraction_count(0.5, 3, Rounding::HalfAwayFromZero) == 2);
    CHECK_THROWS_AS(fraction_count(1.5, 10, Rounding::Truncate), std::invalid_argument);
    CHECK_THROWS_AS(fraction_count(-0.1, 10, Rounding::Truncate), std::invalid_argument);
  }

  TEST_CASE("rounding names") {
    for (auto r : {Rounding::HalfAwayFromZero, Rounding::Truncate}) CHECK(rounding_from_string(to_string(r)) == r);
    CHECK_THROWS_AS(rounding_from_string("floor"), std::invalid_argument);
  }

  TEST_CASE("single/double split") {
    DatasetSpec f1f2;
    CHECK(single_count(f1f2) == 447);
    CHECK(f1f2.count - single_count(f1f2) == 1788);
    DatasetSpec f1;
    f1.count = 10;
    f1.p_single = 1.0;
    f1.p_double = 0.0;
    CHECK(single_count(f1) == 10);
  }

  TEST_CASE("spec validation") {
    CHECK_NOTHROW(validate(DatasetSpec{}));
    auto bad = [](auto edit) {
      DatasetSpec s;
      edit(s);
      CHECK_THROWS_AS(validate(s), ConfigError);
    };
    bad([](DatasetSpec& s) { s.p_single = 0.3; });
    bad([](DatasetSpec& s) { s.p_single = -0.2; s.p_double = 1.2; });
    bad([](DatasetSpec& s) { s.seeds_per_instrument = 4; });
    bad([](DatasetSpec& s) { s.seeds_per_instrument = 0; });
    bad([](DatasetSpec& s) { s.canvas = {0, 10}; });
    bad([](DatasetSpec& s) { s.placement.min_extent = 0.95; });
    bad([](DatasetSpec& s) { s.placement.min_visible = 0.0; });
    bad([](DatasetSpec& s) { s.placement.max_attempts = 0; });
    bad([](DatasetSpec& s) { s.canvas = {6, 6}; });  // 4 pyramid levels need 8 px
  }
}

TEST_SUITE("placement") {
  TEST_CASE("1000 samples respect extent, rotation and visibility") {
    const Sprite sprite = small_pools().foregrounds[1][0];
    const auto box = mask_bbox(sprite.mask);
    const double longer = std::max(box[2] - box[0] + 1, box[3] - box[1] + 1);
    const Canvas canvas{96, 80};
    const Canvas huge{4000, 4000};
    Rng rng(123);
    for (int i = 0; i < 1000; ++i) {
      const Placement p = sample_placement(sprite, canvas, rng);
      CHECK(p.scale * longer >= 0.4 * canvas.width - 1e-9);
      CHECK(p.scale * longer <= 0.9 * canvas.width + 1e-9);
      CHECK(std::abs(p.rotation_deg) <= 180.0);
      // Unclipped area: the same placement moved into the middle of a huge canvas.
      Placement centred = p;
      centred.dx += 2000;
      centred.dy += 2000;
      const double full = static_cast<double>(mask_area(placed_mask(sprite, centred, huge)));
      const double inside = static_cast<double>(mask_area(placed_mask(sprite, p, canvas)));
      REQUIRE(full > 0);
      CHECK(inside / full >= 0.25);
    }
  }

  TEST_CASE("oversized sprites are scaled into range") {
    const Sprite big = solid_sprite(300, 0, 1, 2, 3);
    Rng rng(4);
    const Placement p = sample_placement(big, Canvas{64, 64}, rng);
    CHECK(p.scale * 300 <= 0.9 * 64 + 1e-9);
    CHECK(p.scale * 300 >= 0.4 * 64 - 1e-9);
  }

  TEST_CASE("placement replays from the same rng state") {
    const Sprite& s = small_pools().foregrounds[0][2];
    Rng a(77), b(77);
    CHECK(sample_placement(s, Canvas{}, a) == sample_placement(s, Canvas{}, b));
  }

  TEST_CASE("impossible visibility is reported after the attempt budget") {
    PlacementBounds strict;
    strict.min_extent = strict.max_extent = 2.0;  // twice the canvas
    strict.rotation_deg = 0;
    strict.min_visible = 1.0;
    Rng rng(5);
    CHECK_THROWS_AS(sample_placement(solid_sprite(10, 0, 0, 0, 0), Canvas{32, 32}, rng, strict), InvariantError);
    Sprite empty = solid_sprite(4, 0, 0, 0, 0);
    empty.mask = BinaryMask(4, 4);
    CHECK_THROWS_AS(sample_placement(empty, Canvas{32, 32}, rng), std::invalid_argument);
  }

  TEST_CASE("placement maps the mask bbox centre to (dx, dy)") {
    Sprite s = solid_sprite(8, 0, 0, 0, 0);
    s.mask = testing::rect_mask(8, 8, 2, 2, 6, 6);  // centre (3.5, 3.5)
    const Placement p{2.0, 90.0, 20.25, 10.25, 0};
    const Eigen::Vector2d q = (placement_transform(s, p) * Eigen::Vector3d(3.5, 3.5, 1)).hnormalized();
    CHECK(q.x() == doctest::Approx(20.25));
    CHECK(q.y() == doctest::Approx(10.25));
    // Source span [1.5, 5.5) lands on [16.25, 24.25) in both axes.
    const auto m = placed_mask(s, p, Canvas{40, 40});
    CHECK(mask_area(m) == 64u);
    CHECK(mask_bbox(m) == std::array<int, 4>{17, 7, 24, 14});
  }
}

TEST_SUITE("scenes") {
  TEST_CASE("one sprite, alpha: background untouched outside the placed mask") {
    const auto& pools = small_pools();
    const Sprite* sprites[] = {&pools.foregrounds[2][1]};
    ComposeOptions opts;
    opts.canvas = {48, 48};
    Rng rng(8);
    const RasterImage& bg = pools.backgrounds[0].image;
    const ScenePair scene = compose_scene(bg, sprites, opts, rng);
    CHECK(scene.mask == placed_mask(*sprites[0], scene.placements[0], opts.canvas));
    for (int y = 0; y < 48; ++y)
      for (int x = 0; x < 48; ++x)
        if (!scene.mask.at(x, y))
          for (int c = 0; c < 3; ++c) CHECK(scene.image.at(x, y, c) == bg.at(x, y, c));
  }

  TEST_CASE("two disjoint sprites: areas add") {
    const Sprite a = solid_sprite(6, 0, 255, 0, 0);
    const Sprite b = solid_sprite(6, 1, 0, 0, 255);
    const Sprite* sprites[] = {&a, &b};
    const Placement places[] = {{1.0, 0.0, 10.0, 10.0, 0}, {1.0, 0.0, 30.0, 30.0, 1}};
    ComposeOptions opts;
    opts.canvas = {48, 48};
    const auto scene = render_scene(testing::constant_image(48, 48, 9, 9, 9), sprites, places, opts);
    CHECK(mask_area(scene.mask) == 72u);
  }

  TEST_CASE("overlap shows the sprite with the higher z order") {
    const Sprite red = solid_sprite(10, 0, 255, 0, 0);
    const Sprite blue = solid_sprite(10, 1, 0, 0, 255);
    const Sprite* sprites[] = {&red, &blue};
    ComposeOptions opts;
    opts.canvas = {40, 40};
    const auto bg = testing::constant_image(40, 40, 0, 255, 0);
    for (int top : {0, 1}) {
      const Placement places[] = {{1.0, 0.0, 15.0, 15.0, top == 0 ? 1 : 0}, {1.0, 0.0, 20.0, 20.0, top == 1 ? 1 : 0}};
      const auto scene = render_scene(bg, sprites, places, opts);
      CHECK(scene.mask == mask_union(placed_mask(red, places[0], opts.canvas), placed_mask(blue, places[1], opts.canvas)));
      // (17, 17) lies inside both squares.
      CHECK(scene.image.at(17, 17, 0) == (top == 0 ? 255 : 0));
      CHECK(scene.image.at(17, 17, 2) == (top == 1 ? 255 : 0));
      CHECK(scene.image.at(12, 12, 0) == 255);
      CHECK(scene.image.at(23, 23, 2) == 255);
    }
  }

  TEST_CASE("sprites of the same class are refused") {
    const Sprite a = solid_sprite(6, 2, 1, 1, 1);
    const Sprite b = solid_sprite(6, 2, 2, 2, 2);
    const Sprite* sprites[] = {&a, &b};
    Rng rng(1);
    CHECK_THROWS_AS(compose_scene(testing::constant_image(32, 32, 0, 0, 0), sprites, ComposeOptions{}, rng),
                    std::invalid_argument);
  }

  TEST_CASE("every blend mode yields a binary mask and canvas-sized image") {
    const auto& pools = small_pools();
    const Sprite* sprites[] = {&pools.foregrounds[0][0], &pools.foregrounds[1][3]};
    for (auto mode : {BlendMode::Alpha, BlendMode::Gaussian, BlendMode::Laplacian}) {
      ComposeOptions opts;
      opts.mode = mode;
      opts.canvas = {48, 40};
      Rng rng(6);
      const auto scene = compose_scene(pools.backgrounds[1].image, sprites, opts, rng);
      CHECK(scene.image.width() == 48);
      CHECK(scene.image.height() == 40);
      CHECK(scene.mask.width() == 48);
      CHECK(mask_area(scene.mask) > 0);
      CHECK(scene.mode == mode);
    }
  }
}

TEST_SUITE("datasets") {
  TEST_CASE("2235 samples: 447 singles, 1788 doubles, distinct classes, binary non-empty masks") {
    TempDir dir("compose_f1f2");
    const auto spec = small_spec(2235);
    const Manifest m = generate_dataset(spec, small_pools(), dir.path(), 2);
    REQUIRE(m.samples.size() == 2235u);
    std::size_t singles = 0, doubles = 0;
    for (const auto& s : m.samples) {
      if (s.sprites.size() == 1) ++singles;
      if (s.sprites.size() == 2) {
        ++doubles;
        CHECK(s.sprites[0].class_id != s.sprites[1].class_id);
      }
    }
    CHECK(singles == 447);
    CHECK(doubles == 1788);
    int non_binary = 0, empty = 0;
    for (const auto& s : m.samples) {
      non_binary += !strictly_binary_png(dir / s.mask);
      empty += mask_area(load_mask_png(dir / s.mask)) == 0;
    }
    CHECK(non_binary == 0);
    CHECK(empty == 0);
    CHECK(fs::exists(dir / "manifest.json"));
    CHECK(read_manifest(dir / "manifest.json") == m);
  }

  TEST_CASE("F1 spec produces only singles") {
    TempDir dir("compose_f1");
    auto spec = small_spec(10);
    spec.p_single = 1.0;
    spec.p_double = 0.0;
    const Manifest m = generate_dataset(spec, small_pools(), dir.path());
    for (const auto& s : m.samples) CHECK(s.sprites.size() == 1u);
  }

  TEST_CASE("output is independent of worker count and reruns") {
    TempDir a("compose_det_a"), b("compose_det_b");
    const auto spec = small_spec(24, BlendMode::Laplacian);
    generate_dataset(spec, small_pools(), a.path(), 1);
    generate_dataset(spec, small_pools(), b.path(), 4);
    const auto first = tree_bytes(a.path());
    CHECK(first.size() == 49u);
    CHECK(first == tree_bytes(b.path()));
    generate_dataset(spec, small_pools(), a.path(), 3);
    CHECK(first == tree_bytes(a.path()));
  }

  TEST_CASE("any sample replays to identical PNG bytes") {
    TempDir dir("compose_replay");
    const auto spec = small_spec(12, BlendMode::Gaussian);
    const Manifest m = generate_dataset(spec, small_pools(), dir.path());
    for (const auto& rec : m.samples) {
      const auto scene = replay_sample(rec, spec, small_pools());
      save_png(scene.image, dir / "replay_image.png");
      save_png(scene.mask, dir / "replay_mask.png");
      CHECK(testing::read_bytes(dir / "replay_image.png") == testing::read_bytes(dir / rec.image));
      CHECK(testing::read_bytes(dir / "replay_mask.png") == testing::read_bytes(dir / rec.mask));
      CHECK(plan_sample(spec, small_pools(), rec.id, rec.sprites.size() == 1) == rec);
    }
  }

  TEST_CASE("stale sample files are cleared, foreign files kept") {
    TempDir dir("compose_clear");
    testing::write_bytes(dir / "images/000999.png", {1, 2, 3});
    testing::write_bytes(dir / "images/notes.txt", {1});
    generate_dataset(small_spec(3), small_pools(), dir.path());
    CHECK_FALSE(fs::exists(dir / "images/000999.png"));
    CHECK(fs::exists(dir / "images/notes.txt"));
    CHECK(fs::exists(dir / "images/000002.png"));
  }

  TEST_CASE("pool/spec mismatch and unwritable output are rejected") {
    TempDir dir("compose_errors");
    auto spec = small_spec(2);
    spec.seeds_per_instrument = 3;
    CHECK_THROWS_AS(generate_dataset(spec, small_pools(), dir.path()), ConfigError);
    testing::write_bytes(dir / "file", {0});
    CHECK_THROWS_AS(generate_dataset(small_spec(2), small_pools(), dir / "file" / "out"), IoError);
    PoolSet one_class = small_pools();
    one_class.foregrounds.resize(1);
    CHECK_THROWS_AS(generate_dataset(small_spec(5), one_class, dir / "x"), ConfigError);
  }
}

TEST_SUITE("mixing") {
  struct Fixture {
    TempDir dir{"compose_mix"};
    Manifest synthetic;
    Fixture(std::size_t k, int real) {
      synthetic.spec = small_spec(k);
      for (std::size_t i = 0; i < k; ++i) {
        SampleRecord r;
        r.id = static_cast<int>(i);
        r.image = "images/" + std::to_string(i) + ".png";
        r.mask = "masks/" + std::to_string(i) + ".png";
        r.background = BackgroundUse{0, 0};
        r.blend = BlendMode::Alpha;
        synthetic.samples.push_back(r);
      }
      fs::create_directories(dir / "syn");
      for (int i = 0; i < real; ++i) {
        const std::string name = "real" + std::to_string(1000 + i) + ".png";
        save_png(testing::constant_image(2, 2, 1, 2, 3), dir / ("real/images/" + name));
        save_png(testing::rect_mask(2, 2, 0, 0, 1, 1), dir / ("real/masks/" + name));
      }
    }
    Manifest mix(MixRecipe::Kind kind, double f, Rounding r = Rounding::HalfAwayFromZero, std::uint64_t seed = 3) {
      return mix_datasets(synthetic, dir / "syn", dir / "real", {kind, f}, seed, r, dir / "syn/mixed.json");
    }
  };

  std::size_t count_source(const Manifest& m, const std::string& source) {
    return static_cast<std::size_t>(std::count_if(m.samples.begin(), m.samples.end(),
                                                  [&](const SampleRecord& s) { return s.source == source; }));
  }

  TEST_CASE("replace and augment at 10% of 2235") {
    Fixture fx(2235, 240);
    const auto replace = fx.mix(MixRecipe::Kind::Replace, 0.1);
    CHECK(replace.samples.size() == 2235u);
    CHECK(count_source(replace, "synthetic") == 2011u);
    CHECK(count_source(replace, "real") == 224u);

    const auto augment = fx.mix(MixRecipe::Kind::Augment, 0.1);
    CHECK(augment.samples.size() == 2459u);
    CHECK(count_source(augment, "real") == 224u);
    const auto truncated = fx.mix(MixRecipe::Kind::Augment, 0.1, Rounding::Truncate);
    CHECK(truncated.samples.size() == 2458u);
    CHECK(count_source(truncated, "real") == 223u);

    for (std::size_t i = 0; i < augment.samples.size(); ++i) CHECK(augment.samples[i].id == static_cast<int>(i));
  }

  TEST_CASE("real samples are drawn without replacement and seeded") {
    Fixture fx(100, 40);
    const auto a = fx.mix(MixRecipe::Kind::Replace, 0.3);
    const auto b = fx.mix(MixRecipe::Kind::Replace, 0.3);
    const auto c = fx.mix(MixRecipe::Kind::Replace, 0.3, Rounding::HalfAwayFromZero, 4);
    CHECK(a == b);
    CHECK_FALSE(a == c);
    std::set<std::string> names;
    for (const auto& s : a.samples)
      if (s.source == "real") {
        names.insert(s.image);
        CHECK(s.image.rfind("../real/images/", 0) == 0);
        CHECK(fs::exists(fx.dir / "syn" / s.image));
        CHECK_FALSE(s.background.has_value());
      }
    CHECK(names.size() == 30u);
  }

  TEST_CASE("augment with nothing added keeps the synthetic manifest") {
    Fixture fx(20, 0);
    const auto m = mix_datasets(fx.synthetic, fx.dir / "syn", fx.dir / "missing", {MixRecipe::Kind::Augment, 0.0}, 1,
                                Rounding::HalfAwayFromZero, fx.dir / "syn/manifest.json");
    CHECK(m == fx.synthetic);
  }

  TEST_CASE("too few real samples or a missing mask") {
    Fixture fx(100, 5);
    CHECK_THROWS_AS(fx.mix(MixRecipe::Kind::Augment, 0.1), ConfigError);
    fs::remove(fx.dir / "real/masks/real1002.png");
    CHECK_THROWS_AS(fx.mix(MixRecipe::Kind::Augment, 0.01), IoError);
  }
}
