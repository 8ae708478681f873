#pragma once

#include "toolsynth/image.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

namespace testing {

/// Fresh directory under the build tree, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& name) {
    path_ = std::filesystem::path(TOOLSYNTH_TEST_DATA) / name;
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

inline void write_bytes(const std::filesystem::path& p, const std::vector<unsigned char>& bytes) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

inline std::vector<unsigned char> read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline toolsynth::RasterImage random_image(std::mt19937_64& g, int w, int h,
                                           toolsynth::Channels ch = toolsynth::Channels::RGB) {
  std::uniform_int_distribution<int> d(0, 255);
  std::vector<std::uint8_t> data(static_cast<std::size_t>(w) * h * toolsynth::channel_count(ch));
  for (auto& v : data) v = static_cast<std::uint8_t>(d(g));
  return toolsynth::RasterImage(w, h, ch, std::move(data));
}

inline toolsynth::BinaryMask random_mask(std::mt19937_64& g, int w, int h, double p = 0.5) {
  std::bernoulli_distribution d(p);
  std::vector<std::uint8_t> data(static_cast<std::size_t>(w) * h);
  for (auto& v : data) v = d(g) ? 1 : 0;
  return toolsynth::BinaryMask(w, h, std::move(data));
}

inline toolsynth::BinaryMask rect_mask(int w, int h, int x0, int y0, int x1, int y1) {
  toolsynth::BinaryMask m(w, h);
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) m.set(x, y, true);
  return m;
}

inline toolsynth::RasterImage constant_image(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  toolsynth::RasterImage img(w, h, toolsynth::Channels::RGB);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      img.at(x, y, 0) = r;
      img.at(x, y, 1) = g;
      img.at(x, y, 2) = b;
    }
  return img;
}

inline int max_abs_diff(const toolsynth::RasterImage& a, const toolsynth::RasterImage& b) {
  int worst = 0;
  for (std::size_t i = 0; i < a.data().size(); ++i)
    worst = std::max(worst, std::abs(int(a.data()[i]) - int(b.data()[i])));
  return worst;
}

// Reference implementations kept deliberately naive.

inline int ref_reflect(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) i = i < 0 ? -i : 2 * (n - 1) - i;
  return i;
}

inline std::vector<double> ref_binomial(int size) {
  std::vector<double> row{1.0};
  for (int i = 1; i < size; ++i) {
    std::vector<double> next(row.size() + 1, 0.0);
    for (std::size_t j = 0; j < row.size(); ++j) {
      next[j] += row[j];
      next[j + 1] += row[j];
    }
    row = next;
  }
  double sum = 0;
  for (double v : row) sum += v;
  for (double& v : row) v /= sum;
  return row;
}

/// Correlation with an arbitrary 2-D kernel under reflect-101 borders.
inline std::vector<double> ref_convolve(const std::vector<double>& img, int w, int h,
                                        const std::vector<std::vector<double>>& k) {
  const int ry = static_cast<int>(k.size()) / 2;
  const int rx = static_cast<int>(k.front().size()) / 2;
  std::vector<double> out(img.size(), 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0;
      for (int dy = -ry; dy <= ry; ++dy)
        for (int dx = -rx; dx <= rx; ++dx)
          acc += k[dy + ry][dx + rx] * img[ref_reflect(y + dy, h) * w + ref_reflect(x + dx, w)];
      out[y * w + x] = acc;
    }
  return out;
}

inline std::vector<std::vector<double>> outer(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<std::vector<double>> k(a.size(), std::vector<double>(b.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) k[i][j] = a[i] * b[j];
  return k;
}

inline long ref_round(double v) {
  const long r = static_cast<long>(v < 0 ? -std::floor(-v + 0.5) : std::floor(v + 0.5));
  return std::clamp(r, 0L, 255L);
}

}  // namespace testing
