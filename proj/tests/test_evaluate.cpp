#include "support.hpp"

#include "toolsynth/errors.hpp"
#include "toolsynth/evaluate.hpp"
#include "toolsynth/png_io.hpp"

#include <doctest.h>

#include <cmath>

using namespace toolsynth;
using testing::TempDir;

namespace {

double ref_dsc(const BinaryMask& a, const BinaryMask& b) {
  long inter = 0, na = 0, nb = 0;
  for (int y = 0; y < a.height(); ++y)
    for (int x = 0; x < a.width(); ++x) {
      na += a.at(x, y);
      nb += b.at(x, y);
      inter += a.at(x, y) && b.at(x, y);
    }
  return na + nb == 0 ? 1.0 : 2.0 * inter / (na + nb);
}

BinaryMask bits(int w, std::initializer_list<int> set_pixels) {
  BinaryMask m(w, 1);
  for (int x : set_pixels) m.set(x, 0, true);
  return m;
}

}  // namespace

TEST_SUITE("dsc") {
  TEST_CASE("worked examples") {
    const auto a = bits(4, {0, 1});
    CHECK(dsc(a, a) == 1.0);
    CHECK(dsc(a, bits(4, {2, 3})) == 0.0);
    CHECK(dsc(a, bits(4, {1, 2})) == 0.5);
    CHECK(dsc(BinaryMask(4, 4), BinaryMask(4, 4)) == 1.0);
    CHECK(dsc(BinaryMask(4, 1), a) == 0.0);
  }

  TEST_CASE("100 random pairs agree with pixel counting") {
    std::mt19937_64 g(1);
    for (int t = 0; t < 100; ++t) {
      const int w = 1 + static_cast<int>(g() % 50), h = 1 + static_cast<int>(g() % 50);
      const double p = (t % 10) / 10.0;
      const auto a = testing::random_mask(g, w, h, p);
      const auto b = testing::random_mask(g, w, h, 1 - p);
      CHECK(std::abs(dsc(a, b) - ref_dsc(a, b)) <= 1e-12);
      CHECK(dsc(a, b) == dsc(b, a));
      CHECK(dsc(a, b) >= 0.0);
      CHECK(dsc(a, b) <= 1.0);
      CHECK(dsc(a, a) == 1.0);
    }
  }

  TEST_CASE("growing overlap at fixed areas increases the score") {
    // |a| = |b| = 10 on a 30-pixel row; shift b left to add overlap one pixel at a time.
    const auto a = testing::rect_mask(30, 1, 10, 0, 20, 1);
    double last = -1;
    for (int start = 20; start >= 10; --start) {
      const auto b = testing::rect_mask(30, 1, start, 0, start + 10, 1);
      const double d = dsc(a, b);
      CHECK(d > last);
      last = d;
    }
    CHECK(last == 1.0);
  }

  TEST_CASE("dimension mismatch") {
    CHECK_THROWS_AS(dsc(BinaryMask(3, 3), BinaryMask(3, 4)), std::invalid_argument);
  }
}

TEST_SUITE("evaluate_dir") {
  TEST_CASE("summary statistics use the population std") {
    const auto r = summarize({{"a", 0.5}, {"b", 1.0}});
    CHECK(r.mean == doctest::Approx(0.75));
    CHECK(r.std == doctest::Approx(0.25));
    CHECK(r.count == 2u);
    const auto empty = summarize({});
    CHECK(empty.count == 0u);
    CHECK(empty.mean == 0.0);
    CHECK(empty.std == 0.0);
  }

  TEST_CASE("identical directories score 1 with zero spread") {
    TempDir pred("eval_same_pred"), gt("eval_same_gt");
    std::mt19937_64 g(2);
    for (int i = 0; i < 5; ++i) {
      const auto m = testing::random_mask(g, 16, 16);
      save_png(m, pred / (std::to_string(i) + ".png"));
      save_png(m, gt / (std::to_string(i) + ".png"));
    }
    const auto r = evaluate_dir(pred.path(), gt.path());
    CHECK(r.count == 5u);
    CHECK(r.mean == 1.0);
    CHECK(r.std == 0.0);
  }

  TEST_CASE("two pairs at 0.5 and 1.0") {
    TempDir pred("eval_two_pred"), gt("eval_two_gt");
    save_png(bits(4, {0, 1}), pred / "b.png");
    save_png(bits(4, {1, 2}), gt / "b.png");
    save_png(bits(4, {3}), pred / "a.png");
    save_png(bits(4, {3}), gt / "a.png");
    const auto r = evaluate_dir(pred.path(), gt.path());
    REQUIRE(r.samples.size() == 2u);
    CHECK(r.samples[0].name == "a.png");
    CHECK(r.samples[1].dsc == 0.5);
    CHECK(r.mean == 0.75);
    CHECK(r.std == 0.25);
    const auto j = to_json(r);
    CHECK(j["count"] == 2);
    CHECK(j["mean"] == 0.75);
    CHECK(j["samples"][1]["name"] == "b.png");
    CHECK(to_text(r).find("b.png") != std::string::npos);
  }

  TEST_CASE("100 random pairs: mean and std match an independent recomputation") {
    TempDir pred("eval_rand_pred"), gt("eval_rand_gt");
    std::mt19937_64 g(3);
    std::vector<double> ref;
    for (int i = 0; i < 100; ++i) {
      const auto a = testing::random_mask(g, 20, 12, 0.3);
      const auto b = testing::random_mask(g, 20, 12, 0.6);
      char name[16];
      std::snprintf(name, sizeof name, "%03d.png", i);
      save_png(a, pred / name);
      save_png(b, gt / name);
      ref.push_back(ref_dsc(a, b));
    }
    double mean = 0;
    for (double d : ref) mean += d;
    mean /= 100;
    double var = 0;
    for (double d : ref) var += (d - mean) * (d - mean);
    const auto serial = evaluate_dir(pred.path(), gt.path(), 1);
    const auto parallel = evaluate_dir(pred.path(), gt.path(), 4);
    CHECK(std::abs(serial.mean - mean) < 1e-12);
    CHECK(std::abs(serial.std - std::sqrt(var / 100)) < 1e-12);
    for (int i = 0; i < 100; ++i) {
      CHECK(std::abs(serial.samples[i].dsc - ref[i]) < 1e-12);
      CHECK(serial.samples[i].dsc == parallel.samples[i].dsc);
    }
  }

  TEST_CASE("unpaired files are named") {
    TempDir pred("eval_unpaired_pred"), gt("eval_unpaired_gt");
    save_png(bits(2, {0}), pred / "x.png");
    save_png(bits(2, {0}), gt / "y.png");
    save_png(bits(2, {0}), pred / "z.png");
    save_png(bits(2, {0}), gt / "z.png");
    try {
      evaluate_dir(pred.path(), gt.path());
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("x.png") != std::string::npos);
      CHECK(msg.find("y.png") != std::string::npos);
      CHECK(msg.find("z.png") == std::string::npos);
    }
  }

  TEST_CASE("differing dimensions are an error, not a resize") {
    TempDir pred("eval_dims_pred"), gt("eval_dims_gt");
    save_png(BinaryMask(4, 4), pred / "a.png");
    save_png(BinaryMask(4, 5), gt / "a.png");
    CHECK_THROWS_AS(evaluate_dir(pred.path(), gt.path()), ConfigError);
  }
}

TEST_SUITE("dataset_stats") {
  TEST_CASE("empty manifest gives an all-zero report") {
    TempDir dir("stats_empty");
    const auto s = dataset_stats(Manifest{}, dir.path());
    CHECK(s.samples == 0u);
    CHECK(s.class_usage.empty());
    CHECK(s.instruments.empty());
    CHECK(s.mean_coverage == 0.0);
    CHECK(to_json(s)["samples"] == 0);
    CHECK_FALSE(to_text(s).empty());
  }

  TEST_CASE("histograms and coverage") {
    TempDir dir("stats_hist");
    Manifest m;
    for (int i = 0; i < 4; ++i) {
      SampleRecord r;
      r.id = i;
      r.image = "images/" + std::to_string(i) + ".png";
      r.mask = "masks/" + std::to_string(i) + ".png";
      r.background = BackgroundUse{0, 0};
      r.blend = i < 3 ? BlendMode::Laplacian : BlendMode::Alpha;
      r.sprites.push_back(SpriteUse{i % 2, 0, {}});
      if (i > 0) r.sprites.push_back(SpriteUse{2, 0, {}});
      m.samples.push_back(r);
      save_png(testing::rect_mask(4, 4, 0, 0, i + 1, 4), dir / r.mask);
    }
    SampleRecord real;
    real.id = 4;
    real.mask = "masks/real.png";
    real.source = "real";
    m.samples.push_back(real);
    save_png(BinaryMask(4, 4), dir / real.mask);

    const auto s = dataset_stats(m, dir.path(), 2);
    CHECK(s.samples == 5u);
    CHECK(s.instruments == std::map<int, std::size_t>{{1, 1}, {2, 3}});  // real samples carry no sprites
    CHECK(s.class_usage == std::map<int, std::size_t>{{0, 2}, {1, 2}, {2, 3}});
    CHECK(s.blend_modes == std::map<std::string, std::size_t>{{"alpha", 1}, {"laplacian", 3}});
    CHECK(s.sources == std::map<std::string, std::size_t>{{"real", 1}, {"synthetic", 4}});
    CHECK(s.mean_coverage == doctest::Approx((0.25 + 0.5 + 0.75 + 1.0 + 0.0) / 5));
    const auto j = to_json(s);
    CHECK(j["instruments_per_image"]["2"] == 3);
  }

  TEST_CASE("missing mask files surface as I/O errors") {
    TempDir dir("stats_missing");
    Manifest m;
    SampleRecord r;
    r.mask = "masks/none.png";
    m.samples.push_back(r);
    CHECK_THROWS_AS(dataset_stats(m, dir.path()), IoError);
  }
}
