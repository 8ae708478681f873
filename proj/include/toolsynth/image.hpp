#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace toolsynth {

/// Dense real-valued raster, one channel, row-major (rows = height).
template <typename Scalar>
using Plane = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// One plane per colour channel.
template <typename Scalar>
using Planes = std::vector<Plane<Scalar>>;

enum class Channels { RGB = 3, RGBA = 4 };

constexpr int channel_count(Channels c) { return static_cast<int>(c); }

/// Round half away from zero and clamp to [0,255]. The single rule used for
/// every real -> 8-bit conversion in the engine.
template <typename Scalar>
inline std::uint8_t quantize(Scalar v) {
  const Scalar r = std::round(v);
  if (!(r > Scalar(0))) return 0;
  if (r >= Scalar(255)) return 255;
  return static_cast<std::uint8_t>(r);
}

class RasterImage {
 public:
  RasterImage() = default;
  RasterImage(int width, int height, Channels channels, std::uint8_t fill = 0);
  RasterImage(int width, int height, Channels channels, std::vector<std::uint8_t> data);

  int width() const { return width_; }
  int height() const { return height_; }
  Channels channels() const { return channels_; }
  int channel_count() const { return toolsynth::channel_count(channels_); }
  bool has_alpha() const { return channels_ == Channels::RGBA; }
  bool empty() const { return data_.empty(); }

  std::span<const std::uint8_t> data() const { return data_; }
  std::span<std::uint8_t> data() { return data_; }

  std::uint8_t at(int x, int y, int c) const {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channel_count() + c];
  }
  std::uint8_t& at(int x, int y, int c) {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channel_count() + c];
  }

  friend bool operator==(const RasterImage&, const RasterImage&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  Channels channels_ = Channels::RGB;
  std::vector<std::uint8_t> data_;
};

/// Per-pixel {0,1} annotation.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height, std::uint8_t fill = 0);
  BinaryMask(int width, int height, std::vector<std::uint8_t> data);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return data_.empty(); }

  std::span<const std::uint8_t> data() const { return data_; }

  std::uint8_t at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  void set(int x, int y, bool on) { data_[static_cast<std::size_t>(y) * width_ + x] = on ? 1 : 0; }

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Real-valued matte with weights in [0,1].
class SoftMask {
 public:
  SoftMask() = default;
  explicit SoftMask(Plane<double> weights);

  int width() const { return static_cast<int>(weights_.cols()); }
  int height() const { return static_cast<int>(weights_.rows()); }
  const Plane<double>& weights() const { return weights_; }
  double at(int x, int y) const { return weights_(y, x); }

 private:
  Plane<double> weights_;
};

std::size_t mask_area(const BinaryMask& mask);
BinaryMask mask_union(const BinaryMask& a, const BinaryMask& b);
BinaryMask mask_intersection(const BinaryMask& a, const BinaryMask& b);

SoftMask to_soft(const BinaryMask& mask);

/// Throws std::invalid_argument unless the two rasters share width and height.
void require_same_size(int w0, int h0, int w1, int h1, const char* what);

template <typename A, typename B>
void require_same_size(const A& a, const B& b, const char* what) {
  require_same_size(a.width(), a.height(), b.width(), b.height(), what);
}

/// Split into per-channel planes scaled to [0,1].
template <typename Scalar>
Planes<Scalar> to_planes(const RasterImage& img, int max_channels = 4) {
  const int n = std::min(img.channel_count(), max_channels);
  Planes<Scalar> out(n, Plane<Scalar>(img.height(), img.width()));
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < n; ++c) out[c](y, x) = Scalar(img.at(x, y, c)) / Scalar(255);
  return out;
}

/// Inverse of to_planes; quantizes with the engine rounding rule.
template <typename Scalar>
RasterImage from_planes(const Planes<Scalar>& planes, Channels channels) {
  if (static_cast<int>(planes.size()) != channel_count(channels))
    throw std::invalid_argument("from_planes: plane count does not match channel layout");
  const int h = static_cast<int>(planes.front().rows());
  const int w = static_cast<int>(planes.front().cols());
  RasterImage out(w, h, channels);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < channel_count(channels); ++c)
        out.at(x, y, c) = quantize(planes[c](y, x) * Scalar(255));
  return out;
}

template <typename Scalar>
Plane<Scalar> to_plane(const BinaryMask& mask) {
  Plane<Scalar> out(mask.height(), mask.width());
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x) out(y, x) = Scalar(mask.at(x, y));
  return out;
}

/// Drop or add the alpha channel. Added alpha is opaque.
RasterImage with_channels(const RasterImage& img, Channels channels);

/// Binary mask from an alpha channel (alpha >= threshold -> 1).
BinaryMask alpha_to_mask(const RasterImage& rgba, int threshold = 128);

}  // namespace toolsynth
