#include "toolsynth/filters.hpp"

#include <algorithm>
#include <stdexcept>

namespace toolsynth {

std::vector<double> binomial_kernel(int size) {
  if (size < 1 || size > 9 || size % 2 == 0)
    throw std::invalid_argument("binomial_kernel: size must be odd and in [1,9]");
  std::vector<double> row{1.0};
  for (int n = 1; n < size; ++n) {
    std::vector<double> next(row.size() + 1, 0.0);
    for (std::size_t i = 0; i < row.size(); ++i) {
      next[i] += row[i];
      next[i + 1] += row[i];
    }
    row = std::move(next);
  }
  const double norm = static_cast<double>(1u << (size - 1));
  for (double& v : row) v /= norm;
  return row;
}

BinaryMask erode(const BinaryMask& mask, int k) {
  if (k < 1 || k % 2 == 0) throw std::invalid_argument("erode: kernel size must be odd");
  const int r = k / 2;
  const int w = mask.width();
  const int h = mask.height();
  BinaryMask out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      bool all = true;
      for (int dy = -r; dy <= r && all; ++dy)
        for (int dx = -r; dx <= r && all; ++dx)
          all = mask.at(reflect101(x + dx, w), reflect101(y + dy, h)) != 0;
      out.set(x, y, all);
    }
  return out;
}

RasterImage median_filter(const RasterImage& img, int k) {
  if (k < 1 || k % 2 == 0) throw std::invalid_argument("median_filter: kernel size must be odd");
  const int r = k / 2;
  const int w = img.width();
  const int h = img.height();
  RasterImage out = img;
  std::vector<std::uint8_t> window(static_cast<std::size_t>(k) * k);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) {
        std::size_t n = 0;
        for (int dy = -r; dy <= r; ++dy)
          for (int dx = -r; dx <= r; ++dx)
            window[n++] = img.at(reflect101(x + dx, w), reflect101(y + dy, h), c);
        auto mid = window.begin() + window.size() / 2;
        std::nth_element(window.begin(), mid, window.end());
        out.at(x, y, c) = *mid;
      }
  return out;
}

}  // namespace toolsynth
