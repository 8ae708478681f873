#pragma once

#include "toolsynth/image.hpp"

#include <span>
#include <vector>

namespace toolsynth {

/// Reflect-101 border index (dcb|abcd|cba). Valid for any integer i.
inline int reflect101(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * n - 2;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

/// Normalized binomial kernel of odd length 1..9, e.g. 5 -> [1,4,6,4,1]/16.
std::vector<double> binomial_kernel(int size);

/// Correlates rows with kx then columns with ky; reflect-101 borders.
template <typename Scalar>
Plane<Scalar> convolve_separable(const Plane<Scalar>& src, std::span<const double> kx,
                                 std::span<const double> ky) {
  const int h = static_cast<int>(src.rows());
  const int w = static_cast<int>(src.cols());
  const int rx = static_cast<int>(kx.size()) / 2;
  const int ry = static_cast<int>(ky.size()) / 2;
  Plane<Scalar> tmp(h, w);
  for (int y = 0; y < h; ++y) {
    const Scalar* row = &src(y, 0);
    for (int x = 0; x < w; ++x) {
      Scalar acc = 0;
      if (x >= rx && x + rx < w) {
        for (int k = -rx; k <= rx; ++k) acc += Scalar(kx[k + rx]) * row[x + k];
      } else {
        for (int k = -rx; k <= rx; ++k) acc += Scalar(kx[k + rx]) * row[reflect101(x + k, w)];
      }
      tmp(y, x) = acc;
    }
  }
  Plane<Scalar> out = Plane<Scalar>::Zero(h, w);
  for (int y = 0; y < h; ++y)
    for (int k = -ry; k <= ry; ++k) {
      const Scalar weight = Scalar(ky[k + ry]);
      out.row(y) += weight * tmp.row(reflect101(y + k, h));
    }
  return out;
}

template <typename Scalar>
Plane<Scalar> convolve_separable(const Plane<Scalar>& src, std::span<const double> kernel) {
  return convolve_separable(src, kernel, kernel);
}

/// Full 2-D correlation with an odd square kernel; reflect-101 borders.
template <typename Scalar>
Plane<Scalar> convolve2d(const Plane<Scalar>& src, const Eigen::MatrixXd& kernel) {
  const int h = static_cast<int>(src.rows());
  const int w = static_cast<int>(src.cols());
  const int r = static_cast<int>(kernel.rows()) / 2;
  Plane<Scalar> out(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      Scalar acc = 0;
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx)
          acc += Scalar(kernel(dy + r, dx + r)) * src(reflect101(y + dy, h), reflect101(x + dx, w));
      out(y, x) = acc;
    }
  return out;
}

/// Morphological erosion with a k x k square; reflect-101 borders.
BinaryMask erode(const BinaryMask& mask, int k);

/// Per-channel k x k median over the colour channels; alpha is copied.
RasterImage median_filter(const RasterImage& img, int k);

/// Applies fn to each colour plane (alpha untouched) and re-quantizes.
template <typename Fn>
RasterImage map_color_planes(const RasterImage& img, Fn&& fn) {
  auto planes = to_planes<double>(img);
  for (int c = 0; c < 3; ++c) planes[c] = fn(planes[c]);
  return from_planes(planes, img.channels());
}

}  // namespace toolsynth
