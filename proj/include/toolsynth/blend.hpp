#pragma once

#include "toolsynth/filters.hpp"
#include "toolsynth/image.hpp"

#include <array>
#include <stdexcept>
#include <type_traits>
#include <string>
#include <vector>

namespace toolsynth {

enum class BlendMode { Alpha, Gaussian, Laplacian };

std::string_view to_string(BlendMode mode);
BlendMode blend_mode_from_string(std::string_view name);

enum class PyramidKind { Gaussian, Laplacian };

/// Multi-resolution decomposition. Level 0 is the reflection-padded input at
/// full resolution; samples are on the unit scale (8-bit value / 255).
template <typename Scalar>
struct Pyramid {
  PyramidKind kind = PyramidKind::Gaussian;
  std::vector<Planes<Scalar>> levels;
  int width = 0;   ///< unpadded source width
  int height = 0;  ///< unpadded source height
};

/// [1,4,6,4,1]/16, shared by the pyramids and the Gaussian blend matte.
inline const std::vector<double>& pyramid_kernel() {
  static const std::vector<double> k = binomial_kernel(5);
  return k;
}

/// Throws std::invalid_argument unless 1 <= levels and 2^(levels-1) <= min(w, h).
void check_pyramid_levels(int width, int height, int levels);

/// Extends to the next multiple of `multiple` on the right/bottom edges (reflect-101).
template <typename Scalar>
Plane<Scalar> pad_reflect(const Plane<Scalar>& src, int multiple) {
  const int h = static_cast<int>(src.rows());
  const int w = static_cast<int>(src.cols());
  const int ph = (h + multiple - 1) / multiple * multiple;
  const int pw = (w + multiple - 1) / multiple * multiple;
  if (ph == h && pw == w) return src;
  Plane<Scalar> out(ph, pw);
  for (int y = 0; y < ph; ++y)
    for (int x = 0; x < pw; ++x) out(y, x) = src(reflect101(y, h), reflect101(x, w));
  return out;
}

namespace detail {

template <typename T>
auto to_plain(const T& v) {
  if constexpr (std::is_arithmetic_v<T>)
    return v;
  else
    return v.eval();
}

// Pyramid taps [1 4 6 4 1] / 16.
template <typename Get>
auto down_tap(Get&& get, int i, int n) {
  const int c = 2 * i;
  if (c >= 2 && c + 2 < n)
    return to_plain((get(c - 2) + get(c + 2) + 4 * (get(c - 1) + get(c + 1)) + 6 * get(c)) / 16);
  return to_plain((get(reflect101(c - 2, n)) + get(reflect101(c + 2, n)) +
                   4 * (get(reflect101(c - 1, n)) + get(reflect101(c + 1, n))) + 6 * get(c)) /
                  16);
}

/// Sample i of the zero-inserted signal (length n, source length m) blurred
/// with twice the pyramid taps under reflect-101.
template <typename Get>
auto up_tap(Get&& get, int i, int n, int m) {
  if (i >= 2 && i + 2 < n && i / 2 + 1 < m) {
    const int h = i / 2;
    if (i % 2 == 0) return to_plain((get(h - 1) + 6 * get(h) + get(h + 1)) / 8);
    return to_plain((get(h) + get(h + 1)) / 2);
  }
  constexpr int taps[5] = {1, 4, 6, 4, 1};
  auto acc = to_plain(0 * get(0));
  for (int t = -2; t <= 2; ++t) {
    const int j = reflect101(i + t, n);
    if (j % 2 == 0 && j / 2 < m) acc = acc + taps[t + 2] * get(j / 2);
  }
  return to_plain(acc / 8);
}

}  // namespace detail

/// Blur with the 5-tap kernel, keep even rows and columns.
template <typename Scalar>
Plane<Scalar> pyr_down(const Plane<Scalar>& src) {
  const int h = static_cast<int>(src.rows());
  const int w = static_cast<int>(src.cols());
  const int oh = (h + 1) / 2;
  const int ow = (w + 1) / 2;
  Plane<Scalar> rows(h, ow);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < ow; ++x) rows(y, x) = detail::down_tap([&](int i) { return src(y, i); }, x, w);
  Plane<Scalar> out(oh, ow);
  for (int y = 0; y < oh; ++y)
    out.row(y) = detail::down_tap([&](int i) { return rows.row(i); }, y, h);
  return out;
}

/// Zero insertion to (rows, cols), then blur with 4x the 5-tap kernel.
template <typename Scalar>
Plane<Scalar> pyr_up(const Plane<Scalar>& src, int rows, int cols) {
  const int sh = static_cast<int>(src.rows());
  const int sw = static_cast<int>(src.cols());
  Plane<Scalar> wide(sh, cols);
  for (int y = 0; y < sh; ++y)
    for (int x = 0; x < cols; ++x) wide(y, x) = detail::up_tap([&](int i) { return src(y, i); }, x, cols, sw);
  Plane<Scalar> out(rows, cols);
  for (int y = 0; y < rows; ++y)
    out.row(y) = detail::up_tap([&](int i) { return wide.row(i); }, y, rows, sh);
  return out;
}

template <typename Scalar>
Pyramid<Scalar> build_gaussian_pyramid(const Planes<Scalar>& img, int levels) {
  if (img.empty()) throw std::invalid_argument("build_gaussian_pyramid: no channels");
  const int h = static_cast<int>(img.front().rows());
  const int w = static_cast<int>(img.front().cols());
  check_pyramid_levels(w, h, levels);
  const int multiple = 1 << (levels - 1);
  Pyramid<Scalar> pyr;
  pyr.kind = PyramidKind::Gaussian;
  pyr.width = w;
  pyr.height = h;
  Planes<Scalar> base;
  base.reserve(img.size());
  for (const auto& p : img) base.push_back(pad_reflect(p, multiple));
  pyr.levels.push_back(std::move(base));
  for (int i = 1; i < levels; ++i) {
    Planes<Scalar> next;
    for (const auto& p : pyr.levels.back()) next.push_back(pyr_down(p));
    pyr.levels.push_back(std::move(next));
  }
  return pyr;
}

/// L_i = G_i - up(G_{i+1}); the top level keeps G_top.
template <typename Scalar>
Pyramid<Scalar> build_laplacian_pyramid(const Planes<Scalar>& img, int levels) {
  Pyramid<Scalar> pyr = build_gaussian_pyramid(img, levels);
  for (int i = 0; i + 1 < levels; ++i)
    for (std::size_t c = 0; c < pyr.levels[i].size(); ++c) {
      auto& cur = pyr.levels[i][c];
      cur -= pyr_up(pyr.levels[i + 1][c], static_cast<int>(cur.rows()), static_cast<int>(cur.cols()));
    }
  pyr.kind = PyramidKind::Laplacian;
  return pyr;
}

/// Real-valued reconstruction, cropped to the unpadded size. No quantization.
template <typename Scalar>
Planes<Scalar> collapse_planes(const Pyramid<Scalar>& pyr) {
  if (pyr.kind != PyramidKind::Laplacian)
    throw std::invalid_argument("collapse: pyramid is not a Laplacian pyramid");
  if (pyr.levels.empty()) throw std::invalid_argument("collapse: empty pyramid");
  Planes<Scalar> cur = pyr.levels.back();
  for (int i = static_cast<int>(pyr.levels.size()) - 2; i >= 0; --i)
    for (std::size_t c = 0; c < cur.size(); ++c) {
      const auto& detail = pyr.levels[i][c];
      cur[c] = detail + pyr_up(cur[c], static_cast<int>(detail.rows()), static_cast<int>(detail.cols()));
    }
  for (auto& p : cur) p = p.topLeftCorner(pyr.height, pyr.width).eval();
  return cur;
}

/// Collapse and quantize once to 8-bit.
template <typename Scalar>
RasterImage collapse(const Pyramid<Scalar>& pyr, Channels channels) {
  return from_planes(collapse_planes(pyr), channels);
}

template <typename Scalar>
Pyramid<Scalar> build_gaussian_pyramid(const RasterImage& img, int levels) {
  return build_gaussian_pyramid(to_planes<Scalar>(img), levels);
}

template <typename Scalar>
Pyramid<Scalar> build_laplacian_pyramid(const RasterImage& img, int levels) {
  return build_laplacian_pyramid(to_planes<Scalar>(img), levels);
}

// Blending. fg and bg share dimensions; the output takes bg's channel layout,
// blends the three colour channels and copies bg's alpha if it has one.

/// Matte from fg's alpha channel (fg must be RGBA); binary alpha is a hard copy.
RasterImage alpha_blend(const RasterImage& fg, const RasterImage& bg);

/// out = a * fg + (1 - a) * bg per pixel.
RasterImage alpha_blend(const RasterImage& fg, const RasterImage& bg, const SoftMask& matte);

struct GaussianBlendResult {
  RasterImage image;
  SoftMask matte;  ///< blur5(erode3(mask))
};

GaussianBlendResult gaussian_blend(const RasterImage& fg, const RasterImage& bg,
                                   const BinaryMask& mask);

/// Soft matte used by gaussian_blend.
SoftMask gaussian_matte(const BinaryMask& mask);

constexpr int kDefaultPyramidLevels = 4;

RasterImage laplacian_blend(const RasterImage& fg, const RasterImage& bg, const BinaryMask& mask,
                            int levels = kDefaultPyramidLevels);

}  // namespace toolsynth
