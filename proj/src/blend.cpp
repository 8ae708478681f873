#include "toolsynth/blend.hpp"

#include <string>

namespace toolsynth {

namespace {

// Convex combination of the colour channels, matte given per pixel.
template <typename MatteFn>
RasterImage combine(const RasterImage& fg, const RasterImage& bg, MatteFn&& matte) {
  RasterImage out = bg;
  for (int y = 0; y < bg.height(); ++y)
    for (int x = 0; x < bg.width(); ++x) {
      const double a = matte(x, y);
      if (a == 0.0) continue;
      for (int c = 0; c < 3; ++c)
        out.at(x, y, c) = quantize(a * fg.at(x, y, c) + (1.0 - a) * bg.at(x, y, c));
    }
  return out;
}

}  // namespace

std::string_view to_string(BlendMode mode) {
  switch (mode) {
    case BlendMode::Alpha: return "alpha";
    case BlendMode::Gaussian: return "gaussian";
    case BlendMode::Laplacian: return "laplacian";
  }
  return "?";
}

BlendMode blend_mode_from_string(std::string_view name) {
  if (name == "alpha") return BlendMode::Alpha;
  if (name == "gaussian") return BlendMode::Gaussian;
  if (name == "laplacian") return BlendMode::Laplacian;
  throw std::invalid_argument("unknown blend mode '" + std::string(name) +
                              "' (expected alpha, gaussian or laplacian)");
}

void check_pyramid_levels(int width, int height, int levels) {
  if (levels < 1) throw std::invalid_argument("pyramid levels must be >= 1");
  if (levels > 30 || (1 << (levels - 1)) > std::min(width, height))
    throw std::invalid_argument("pyramid levels " + std::to_string(levels) +
                                " exceed log2 of the smaller image side (" +
                                std::to_string(std::min(width, height)) + ")");
}

RasterImage alpha_blend(const RasterImage& fg, const RasterImage& bg) {
  require_same_size(fg, bg, "alpha_blend");
  if (!fg.has_alpha()) throw std::invalid_argument("alpha_blend: foreground has no alpha channel");
  return combine(fg, bg, [&](int x, int y) { return fg.at(x, y, 3) / 255.0; });
}

RasterImage alpha_blend(const RasterImage& fg, const RasterImage& bg, const SoftMask& matte) {
  require_same_size(fg, bg, "alpha_blend");
  require_same_size(fg, matte, "alpha_blend");
  return combine(fg, bg, [&](int x, int y) { return matte.at(x, y); });
}

SoftMask gaussian_matte(const BinaryMask& mask) {
  Plane<double> soft = convolve_separable(to_plane<double>(erode(mask, 3)), pyramid_kernel());
  // Kernel weights sum to exactly 1; clamp away any ulp overshoot.
  soft = soft.max(0.0).min(1.0);
  return SoftMask(std::move(soft));
}

GaussianBlendResult gaussian_blend(const RasterImage& fg, const RasterImage& bg,
                                   const BinaryMask& mask) {
  require_same_size(fg, bg, "gaussian_blend");
  require_same_size(fg, mask, "gaussian_blend");
  SoftMask matte = gaussian_matte(mask);
  RasterImage image = alpha_blend(fg, bg, matte);
  return GaussianBlendResult{std::move(image), std::move(matte)};
}

RasterImage laplacian_blend(const RasterImage& fg, const RasterImage& bg, const BinaryMask& mask,
                            int levels) {
  require_same_size(fg, bg, "laplacian_blend");
  require_same_size(fg, mask, "laplacian_blend");
  check_pyramid_levels(bg.width(), bg.height(), levels);

  const auto lf = build_laplacian_pyramid(to_planes<double>(fg, 3), levels);
  auto blended = build_laplacian_pyramid(to_planes<double>(bg, 3), levels);
  const auto gm = build_gaussian_pyramid(Planes<double>{to_plane<double>(mask)}, levels);
  for (int i = 0; i < levels; ++i) {
    const auto& weight = gm.levels[i][0];
    for (int c = 0; c < 3; ++c) {
      auto& out = blended.levels[i][c];
      out = weight * lf.levels[i][c] + (1.0 - weight) * out;
    }
  }
  const RasterImage rgb = collapse(blended, Channels::RGB);
  if (!bg.has_alpha()) return rgb;
  RasterImage out = bg;
  for (int y = 0; y < bg.height(); ++y)
    for (int x = 0; x < bg.width(); ++x)
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = rgb.at(x, y, c);
  return out;
}

}  // namespace toolsynth
