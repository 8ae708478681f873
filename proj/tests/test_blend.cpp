#include "support.hpp"

#include "toolsynth/blend.hpp"

#include <doctest.h>

#include <cmath>

using namespace toolsynth;

namespace {

// Naive dense-raster pyramid used as the reference.
struct Raster {
  int w = 0, h = 0;
  std::vector<double> v;
  double& at(int x, int y) { return v[y * w + x]; }
  double at(int x, int y) const { return v[y * w + x]; }
};

Raster channel(const RasterImage& img, int c) {
  Raster r{img.width(), img.height(), {}};
  for (int y = 0; y < r.h; ++y)
    for (int x = 0; x < r.w; ++x) r.v.push_back(img.at(x, y, c) / 255.0);
  return r;
}

Raster channel(const BinaryMask& m) {
  Raster r{m.width(), m.height(), {}};
  for (int y = 0; y < r.h; ++y)
    for (int x = 0; x < r.w; ++x) r.v.push_back(m.at(x, y) ? 1.0 : 0.0);
  return r;
}

Raster pad(const Raster& r, int multiple) {
  Raster out{(r.w + multiple - 1) / multiple * multiple, (r.h + multiple - 1) / multiple * multiple, {}};
  for (int y = 0; y < out.h; ++y)
    for (int x = 0; x < out.w; ++x) out.v.push_back(r.at(testing::ref_reflect(x, r.w), testing::ref_reflect(y, r.h)));
  return out;
}

Raster blur(const Raster& r, double gain) {
  auto k = testing::outer(testing::ref_binomial(5), testing::ref_binomial(5));
  for (auto& row : k)
    for (auto& e : row) e *= gain;
  return Raster{r.w, r.h, testing::ref_convolve(r.v, r.w, r.h, k)};
}

Raster down(const Raster& r) {
  const Raster b = blur(r, 1.0);
  Raster out{(r.w + 1) / 2, (r.h + 1) / 2, {}};
  for (int y = 0; y < out.h; ++y)
    for (int x = 0; x < out.w; ++x) out.v.push_back(b.at(2 * x, 2 * y));
  return out;
}

Raster up(const Raster& r, int w, int h) {
  Raster z{w, h, std::vector<double>(static_cast<std::size_t>(w) * h, 0.0)};
  for (int y = 0; y < r.h && 2 * y < h; ++y)
    for (int x = 0; x < r.w && 2 * x < w; ++x) z.at(2 * x, 2 * y) = r.at(x, y);
  return blur(z, 4.0);
}

std::vector<Raster> gauss(const Raster& r, int levels) {
  std::vector<Raster> g{pad(r, 1 << (levels - 1))};
  for (int i = 1; i < levels; ++i) g.push_back(down(g.back()));
  return g;
}

std::vector<Raster> lap(const Raster& r, int levels) {
  auto g = gauss(r, levels);
  for (int i = 0; i + 1 < levels; ++i) {
    const Raster u = up(g[i + 1], g[i].w, g[i].h);
    for (std::size_t k = 0; k < u.v.size(); ++k) g[i].v[k] -= u.v[k];
  }
  return g;
}

Raster collapse_ref(std::vector<Raster> l, int w, int h) {
  Raster cur = l.back();
  for (int i = static_cast<int>(l.size()) - 2; i >= 0; --i) {
    const Raster u = up(cur, l[i].w, l[i].h);
    for (std::size_t k = 0; k < u.v.size(); ++k) l[i].v[k] += u.v[k];
    cur = l[i];
  }
  Raster out{w, h, {}};
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out.v.push_back(cur.at(x, y));
  return out;
}

RasterImage ref_laplacian_blend(const RasterImage& fg, const RasterImage& bg, const BinaryMask& m, int levels) {
  const auto gm = gauss(channel(m), levels);
  RasterImage out(bg.width(), bg.height(), Channels::RGB);
  for (int c = 0; c < 3; ++c) {
    auto lf = lap(channel(fg, c), levels);
    auto lb = lap(channel(bg, c), levels);
    for (int i = 0; i < levels; ++i)
      for (std::size_t k = 0; k < lb[i].v.size(); ++k)
        lb[i].v[k] = gm[i].v[k] * lf[i].v[k] + (1 - gm[i].v[k]) * lb[i].v[k];
    const Raster r = collapse_ref(lb, bg.width(), bg.height());
    for (int y = 0; y < r.h; ++y)
      for (int x = 0; x < r.w; ++x) out.at(x, y, c) = static_cast<std::uint8_t>(testing::ref_round(255.0 * r.at(x, y)));
  }
  return out;
}

RasterImage ref_gaussian_blend(const RasterImage& fg, const RasterImage& bg, const BinaryMask& m) {
  const int w = m.width(), h = m.height();
  Raster eroded{w, h, {}};
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      int v = 1;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx)
          v = std::min<int>(v, m.at(testing::ref_reflect(x + dx, w), testing::ref_reflect(y + dy, h)));
      eroded.v.push_back(v);
    }
  const Raster a = blur(eroded, 1.0);
  RasterImage out = bg;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c)
        out.at(x, y, c) = static_cast<std::uint8_t>(
            testing::ref_round(a.at(x, y) * fg.at(x, y, c) + (1 - a.at(x, y)) * bg.at(x, y, c)));
  return out;
}

RasterImage with_alpha(const RasterImage& rgb, const BinaryMask& m) {
  RasterImage out = with_channels(rgb, Channels::RGBA);
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) out.at(x, y, 3) = m.at(x, y) ? 255 : 0;
  return out;
}

double max_diff(const Plane<double>& p, const Raster& r) {
  REQUIRE(p.cols() == r.w);
  REQUIRE(p.rows() == r.h);
  double worst = 0;
  for (int y = 0; y < r.h; ++y)
    for (int x = 0; x < r.w; ++x) worst = std::max(worst, std::abs(p(y, x) - r.at(x, y)));
  return worst;
}

int channel_diff(const RasterImage& a, const RasterImage& b) {
  int worst = 0;
  for (int y = 0; y < a.height(); ++y)
    for (int x = 0; x < a.width(); ++x)
      for (int c = 0; c < 3; ++c) worst = std::max(worst, std::abs(int(a.at(x, y, c)) - int(b.at(x, y, c))));
  return worst;
}

}  // namespace

TEST_SUITE("pyramids") {
  TEST_CASE("level sizes halve with ceiling") {
    std::mt19937_64 g(1);
    const auto img = testing::random_image(g, 37, 21);
    const auto pyr = build_gaussian_pyramid<double>(img, 4);
    REQUIRE(pyr.levels.size() == 4u);
    CHECK(pyr.levels[0][0].cols() == 40);
    CHECK(pyr.levels[0][0].rows() == 24);
    for (int i = 1; i < 4; ++i) {
      CHECK(pyr.levels[i][0].cols() == (pyr.levels[i - 1][0].cols() + 1) / 2);
      CHECK(pyr.levels[i][0].rows() == (pyr.levels[i - 1][0].rows() + 1) / 2);
    }
  }

  TEST_CASE("constant image gives constant levels and zero detail") {
    const auto img = testing::constant_image(24, 24, 90, 90, 90);
    const auto g = build_gaussian_pyramid<double>(img, 4);
    for (const auto& lvl : g.levels) CHECK((lvl[0] - 90.0 / 255).abs().maxCoeff() < 1e-12);
    const auto l = build_laplacian_pyramid<double>(img, 4);
    for (int i = 0; i < 3; ++i) CHECK(l.levels[i][0].abs().maxCoeff() <= 1.0 / 255);
    CHECK((l.levels[3][0] - 90.0 / 255).abs().maxCoeff() < 1e-12);
  }

  TEST_CASE("levels=1 is the input itself") {
    std::mt19937_64 g(2);
    const auto img = testing::random_image(g, 9, 7);
    const auto pyr = build_laplacian_pyramid<double>(img, 1);
    REQUIRE(pyr.levels.size() == 1u);
    CHECK(collapse(pyr, Channels::RGB) == img);
  }

  TEST_CASE("16x16 gradient, 3 levels: matches the brute-force oracle") {
    RasterImage img(16, 16, Channels::RGB);
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x < 16; ++x)
        for (int c = 0; c < 3; ++c) img.at(x, y, c) = static_cast<std::uint8_t>(x * 9 + y * 5 + c * 3);
    const auto pyr = build_gaussian_pyramid<double>(img, 3);
    for (int c = 0; c < 3; ++c) {
      const auto ref = gauss(channel(img, c), 3);
      for (int i = 0; i < 3; ++i) CHECK(max_diff(pyr.levels[i][c], ref[i]) < 1e-12);
    }
  }

  TEST_CASE("odd sizes and every level count agree with the oracle") {
    std::mt19937_64 g(3);
    for (int w : {5, 8, 13})
      for (int h : {4, 11})
        for (int levels = 1; (1 << (levels - 1)) <= std::min(w, h); ++levels) {
          const auto img = testing::random_image(g, w, h);
          const auto pyr = build_laplacian_pyramid<double>(img, levels);
          const auto ref = lap(channel(img, 1), levels);
          for (int i = 0; i < levels; ++i) CHECK(max_diff(pyr.levels[i][1], ref[i]) < 1e-12);
        }
  }

  TEST_CASE("impulse, 2 levels: detail level equals the direct formula") {
    RasterImage img(8, 8, Channels::RGB);
    img.at(3, 4, 0) = 255;
    const auto pyr = build_laplacian_pyramid<double>(img, 2);
    const auto ref = lap(channel(img, 0), 2);
    CHECK(max_diff(pyr.levels[0][0], ref[0]) < 1e-12);
    CHECK(max_diff(pyr.levels[1][0], ref[1]) < 1e-12);
    CHECK(pyr.levels[0][1].abs().maxCoeff() == 0.0);
  }

  TEST_CASE("reconstruction stays within 2 per sample") {
    std::mt19937_64 g(4);
    for (int trial = 0; trial < 20; ++trial) {
      const int w = 8 + static_cast<int>(g() % 60), h = 8 + static_cast<int>(g() % 60);
      const auto img = testing::random_image(g, w, h, trial % 2 ? Channels::RGBA : Channels::RGB);
      const auto pyr = build_laplacian_pyramid<double>(img, 4);
      CHECK(testing::max_abs_diff(collapse(pyr, img.channels()), img) <= 2);
    }
  }

  TEST_CASE("collapse of zeros is a zero image") {
    Pyramid<double> pyr;
    pyr.kind = PyramidKind::Laplacian;
    pyr.width = 16;
    pyr.height = 16;
    for (int s : {16, 8, 4}) pyr.levels.push_back(Planes<double>(3, Plane<double>::Zero(s, s)));
    CHECK(collapse(pyr, Channels::RGB) == RasterImage(16, 16, Channels::RGB));
  }

  TEST_CASE("collapse rejects a Gaussian pyramid") {
    const auto pyr = build_gaussian_pyramid<double>(testing::constant_image(8, 8, 1, 2, 3), 2);
    CHECK_THROWS_AS(collapse(pyr, Channels::RGB), std::invalid_argument);
  }

  TEST_CASE("level count validation") {
    CHECK_NOTHROW(check_pyramid_levels(8, 8, 4));
    CHECK_THROWS_AS(check_pyramid_levels(8, 8, 5), std::invalid_argument);
    CHECK_THROWS_AS(check_pyramid_levels(64, 7, 4), std::invalid_argument);
    CHECK_THROWS_AS(check_pyramid_levels(8, 8, 0), std::invalid_argument);
    CHECK_THROWS_AS(build_gaussian_pyramid<double>(testing::constant_image(4, 4, 0, 0, 0), 4),
                    std::invalid_argument);
  }

  TEST_CASE("float pyramids agree with double pyramids") {
    std::mt19937_64 g(5);
    const auto img = testing::random_image(g, 32, 24);
    CHECK(testing::max_abs_diff(collapse(build_laplacian_pyramid<float>(img, 4), Channels::RGB),
                                collapse(build_laplacian_pyramid<double>(img, 4), Channels::RGB)) <= 1);
  }
}

TEST_SUITE("blend modes") {
  TEST_CASE("mode names round trip") {
    for (auto m : {BlendMode::Alpha, BlendMode::Gaussian, BlendMode::Laplacian})
      CHECK(blend_mode_from_string(to_string(m)) == m);
    CHECK_THROWS_AS(blend_mode_from_string("poisson"), std::invalid_argument);
    CHECK_THROWS_AS(blend_mode_from_string("Alpha"), std::invalid_argument);
  }

  TEST_CASE("alpha blend: full, empty and half mattes") {
    std::mt19937_64 g(6);
    const auto fg = testing::random_image(g, 16, 12, Channels::RGBA);
    const auto bg = testing::random_image(g, 16, 12);
    const auto ones = with_alpha(with_channels(fg, Channels::RGB), testing::rect_mask(16, 12, 0, 0, 16, 12));
    const auto zeros = with_alpha(with_channels(fg, Channels::RGB), BinaryMask(16, 12));
    CHECK(alpha_blend(ones, bg) == with_channels(fg, Channels::RGB));
    CHECK(alpha_blend(zeros, bg) == bg);

    const auto f = testing::constant_image(4, 4, 200, 200, 200);
    const auto b = testing::constant_image(4, 4, 100, 100, 100);
    const SoftMask half(Plane<double>::Constant(4, 4, 0.5));
    CHECK(alpha_blend(f, b, half) == testing::constant_image(4, 4, 150, 150, 150));
  }

  TEST_CASE("alpha blend keeps the background alpha channel") {
    std::mt19937_64 g(7);
    const auto fg = testing::random_image(g, 8, 8, Channels::RGBA);
    const auto bg = testing::random_image(g, 8, 8, Channels::RGBA);
    const auto out = alpha_blend(fg, bg);
    for (int y = 0; y < 8; ++y)
      for (int x = 0; x < 8; ++x) CHECK(out.at(x, y, 3) == bg.at(x, y, 3));
  }

  TEST_CASE("alpha blend is convex per channel") {
    std::mt19937_64 g(8);
    const auto fg = testing::random_image(g, 20, 20, Channels::RGBA);
    const auto bg = testing::random_image(g, 20, 20);
    const auto out = alpha_blend(fg, bg);
    for (int y = 0; y < 20; ++y)
      for (int x = 0; x < 20; ++x)
        for (int c = 0; c < 3; ++c) {
          CHECK(out.at(x, y, c) >= std::min(fg.at(x, y, c), bg.at(x, y, c)));
          CHECK(out.at(x, y, c) <= std::max(fg.at(x, y, c), bg.at(x, y, c)));
        }
  }

  TEST_CASE("dimension mismatches are rejected") {
    const auto a = testing::constant_image(8, 8, 0, 0, 0);
    const auto b = testing::constant_image(8, 9, 0, 0, 0);
    CHECK_THROWS_AS(alpha_blend(with_channels(a, Channels::RGBA), b), std::invalid_argument);
    CHECK_THROWS_AS(alpha_blend(a, a), std::invalid_argument);
    CHECK_THROWS_AS(gaussian_blend(a, b, BinaryMask(8, 8)), std::invalid_argument);
    CHECK_THROWS_AS(gaussian_blend(a, a, BinaryMask(8, 9)), std::invalid_argument);
    CHECK_THROWS_AS(laplacian_blend(a, b, BinaryMask(8, 8)), std::invalid_argument);
    CHECK_THROWS_AS(laplacian_blend(a, a, BinaryMask(8, 8), 5), std::invalid_argument);
  }

  TEST_CASE("gaussian blend: boundary identities") {
    std::mt19937_64 g(9);
    const auto fg = testing::random_image(g, 24, 24);
    const auto bg = testing::random_image(g, 24, 24);
    const auto ones = testing::rect_mask(24, 24, 0, 0, 24, 24);
    const auto full = gaussian_blend(fg, bg, ones);
    CHECK(full.image == fg);  // reflect-101 keeps an all-ones mask all ones after erosion
    CHECK(gaussian_blend(fg, bg, BinaryMask(24, 24)).image == bg);
  }

  TEST_CASE("gaussian blend: 9x9 block matches the brute-force oracle") {
    std::mt19937_64 g(10);
    const auto fg = testing::random_image(g, 21, 19);
    const auto bg = testing::random_image(g, 21, 19);
    const auto m = testing::rect_mask(21, 19, 5, 4, 14, 13);
    const auto res = gaussian_blend(fg, bg, m);
    CHECK(channel_diff(res.image, ref_gaussian_blend(fg, bg, m)) <= 1);
    CHECK(res.matte.at(9, 8) == doctest::Approx(1.0));
    CHECK(res.matte.at(0, 0) == 0.0);
  }

  TEST_CASE("gaussian blend: random masks vs oracle, matte in [0,1]") {
    std::mt19937_64 g(11);
    for (int trial = 0; trial < 10; ++trial) {
      const auto fg = testing::random_image(g, 32, 32);
      const auto bg = testing::random_image(g, 32, 32);
      const auto m = testing::random_mask(g, 32, 32, 0.8);
      const auto res = gaussian_blend(fg, bg, m);
      CHECK(channel_diff(res.image, ref_gaussian_blend(fg, bg, m)) <= 1);
      CHECK(res.matte.weights().minCoeff() >= 0.0);
      CHECK(res.matte.weights().maxCoeff() <= 1.0);
    }
  }

  TEST_CASE("laplacian blend: boundary identities") {
    std::mt19937_64 g(12);
    const auto fg = testing::random_image(g, 40, 33);
    const auto bg = testing::random_image(g, 40, 33);
    CHECK(channel_diff(laplacian_blend(fg, bg, testing::rect_mask(40, 33, 0, 0, 40, 33)), fg) <= 2);
    CHECK(channel_diff(laplacian_blend(fg, bg, BinaryMask(40, 33)), bg) <= 2);
  }

  TEST_CASE("laplacian blend: 64x64 random scenes vs independent oracle") {
    std::mt19937_64 g(13);
    for (int trial = 0; trial < 3; ++trial) {
      const auto fg = testing::random_image(g, 64, 64);
      const auto bg = testing::random_image(g, 64, 64);
      const auto m = testing::rect_mask(64, 64, 10 + trial, 7, 50, 45 + trial);
      CHECK(channel_diff(laplacian_blend(fg, bg, m), ref_laplacian_blend(fg, bg, m, 4)) <= 2);
    }
  }

  TEST_CASE("laplacian blend: half-plane transition between constants") {
    const auto fg = testing::constant_image(32, 32, 200, 200, 200);
    const auto bg = testing::constant_image(32, 32, 100, 100, 100);
    const auto m = testing::rect_mask(32, 32, 0, 0, 16, 32);
    const auto out = laplacian_blend(fg, bg, m);
    CHECK(channel_diff(out, ref_laplacian_blend(fg, bg, m, 4)) <= 1);
    for (int y = 0; y < 32; ++y)
      for (int x = 1; x < 32; ++x) CHECK(out.at(x, y, 0) <= out.at(x - 1, y, 0));
    CHECK(out.at(0, 0, 0) > 190);
    CHECK(out.at(31, 0, 0) < 110);

    // With room for the coarsest band the far field settles exactly.
    const auto wide = laplacian_blend(testing::constant_image(128, 32, 200, 200, 200),
                                      testing::constant_image(128, 32, 100, 100, 100),
                                      testing::rect_mask(128, 32, 0, 0, 64, 32));
    for (int y = 0; y < 32; ++y) {
      CHECK(wide.at(20, y, 0) == 200);
      CHECK(wide.at(107, y, 0) == 100);
      for (int x = 1; x < 128; ++x) CHECK(wide.at(x, y, 0) <= wide.at(x - 1, y, 0));
    }
  }

  TEST_CASE("alpha and gaussian agree with fg 5 px inside a solid region") {
    std::mt19937_64 g(14);
    const auto fg = testing::random_image(g, 48, 48);
    const auto bg = testing::random_image(g, 48, 48);
    const auto m = testing::rect_mask(48, 48, 8, 8, 40, 40);
    const auto a = alpha_blend(with_alpha(fg, m), bg);
    const auto gb = gaussian_blend(fg, bg, m).image;
    for (int y = 13; y < 35; ++y)
      for (int x = 13; x < 35; ++x)
        for (int c = 0; c < 3; ++c) {
          CHECK(a.at(x, y, c) == fg.at(x, y, c));
          CHECK(std::abs(gb.at(x, y, c) - fg.at(x, y, c)) <= 2);
        }
  }

  TEST_CASE("laplacian agrees with fg once past the coarsest band") {
    // The top level of a 4-level pyramid spreads the seam over about 2^(levels+1) px.
    std::mt19937_64 g(15);
    const auto m = testing::rect_mask(128, 128, 16, 16, 112, 112);
    const std::vector<std::pair<RasterImage, RasterImage>> scenes{
        {testing::random_image(g, 128, 128), testing::random_image(g, 128, 128)},
        {testing::constant_image(128, 128, 255, 255, 255), testing::constant_image(128, 128, 0, 0, 0)}};
    for (const auto& [fg, bg] : scenes) {
      const auto lb = laplacian_blend(fg, bg, m);
      for (int y = 36; y < 92; ++y)
        for (int x = 36; x < 92; ++x)
          for (int c = 0; c < 3; ++c) CHECK(std::abs(lb.at(x, y, c) - fg.at(x, y, c)) <= 2);
    }
  }

  TEST_CASE("laplacian interior error near the seam follows the oracle") {
    // 5 px inside the mask, strong contrast still leaks through the low bands.
    const auto fg = testing::constant_image(64, 64, 255, 255, 255);
    const auto bg = testing::constant_image(64, 64, 0, 0, 0);
    const auto m = testing::rect_mask(64, 64, 8, 8, 56, 56);
    const auto lb = laplacian_blend(fg, bg, m);
    const auto ref = ref_laplacian_blend(fg, bg, m, 4);
    CHECK(channel_diff(lb, ref) <= 1);
    CHECK(lb.at(13, 32, 0) < 250);
  }

  TEST_CASE("mask pyramid weights stay in [0,1]") {
    std::mt19937_64 g(15);
    const auto m = testing::random_mask(g, 37, 29, 0.3);
    const auto pyr = build_gaussian_pyramid(Planes<double>{to_plane<double>(m)}, 4);
    for (const auto& lvl : pyr.levels) {
      CHECK(lvl[0].minCoeff() >= 0.0);
      CHECK(lvl[0].maxCoeff() <= 1.0 + 1e-12);
    }
  }
}
