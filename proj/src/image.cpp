#include "toolsynth/image.hpp"

#include <algorithm>
#include <numeric>

namespace toolsynth {

namespace {

void check_dims(int width, int height, const char* what) {
  if (width < 1 || height < 1)
    throw std::invalid_argument(std::string(what) + ": width and height must be >= 1");
}

}  // namespace

RasterImage::RasterImage(int width, int height, Channels channels, std::uint8_t fill)
    : width_(width), height_(height), channels_(channels) {
  check_dims(width, height, "RasterImage");
  data_.assign(static_cast<std::size_t>(width) * height * toolsynth::channel_count(channels), fill);
}

RasterImage::RasterImage(int width, int height, Channels channels, std::vector<std::uint8_t> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
  check_dims(width, height, "RasterImage");
  if (data_.size() != static_cast<std::size_t>(width) * height * toolsynth::channel_count(channels))
    throw std::invalid_argument("RasterImage: data length != width * height * channels");
}

BinaryMask::BinaryMask(int width, int height, std::uint8_t fill) : width_(width), height_(height) {
  check_dims(width, height, "BinaryMask");
  data_.assign(static_cast<std::size_t>(width) * height, fill ? 1 : 0);
}

BinaryMask::BinaryMask(int width, int height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
  check_dims(width, height, "BinaryMask");
  if (data_.size() != static_cast<std::size_t>(width) * height)
    throw std::invalid_argument("BinaryMask: data length != width * height");
  if (std::any_of(data_.begin(), data_.end(), [](std::uint8_t v) { return v > 1; }))
    throw std::invalid_argument("BinaryMask: values must be 0 or 1");
}

SoftMask::SoftMask(Plane<double> weights) : weights_(std::move(weights)) {
  if (weights_.size() == 0) throw std::invalid_argument("SoftMask: empty");
  if ((weights_ < 0.0).any() || (weights_ > 1.0).any())
    throw std::invalid_argument("SoftMask: weights outside [0,1]");
}

std::size_t mask_area(const BinaryMask& mask) {
  return std::accumulate(mask.data().begin(), mask.data().end(), std::size_t{0});
}

BinaryMask mask_union(const BinaryMask& a, const BinaryMask& b) {
  require_same_size(a, b, "mask_union");
  std::vector<std::uint8_t> out(a.data().size());
  std::transform(a.data().begin(), a.data().end(), b.data().begin(), out.begin(),
                 [](std::uint8_t x, std::uint8_t y) -> std::uint8_t { return x | y; });
  return BinaryMask(a.width(), a.height(), std::move(out));
}

BinaryMask mask_intersection(const BinaryMask& a, const BinaryMask& b) {
  require_same_size(a, b, "mask_intersection");
  std::vector<std::uint8_t> out(a.data().size());
  std::transform(a.data().begin(), a.data().end(), b.data().begin(), out.begin(),
                 [](std::uint8_t x, std::uint8_t y) -> std::uint8_t { return x & y; });
  return BinaryMask(a.width(), a.height(), std::move(out));
}

SoftMask to_soft(const BinaryMask& mask) { return SoftMask(to_plane<double>(mask)); }

void require_same_size(int w0, int h0, int w1, int h1, const char* what) {
  if (w0 != w1 || h0 != h1)
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" + std::to_string(w0) +
                                "x" + std::to_string(h0) + " vs " + std::to_string(w1) + "x" +
                                std::to_string(h1) + ")");
}

RasterImage with_channels(const RasterImage& img, Channels channels) {
  if (img.channels() == channels) return img;
  RasterImage out(img.width(), img.height(), channels, 255);
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = img.at(x, y, c);
  return out;
}

BinaryMask alpha_to_mask(const RasterImage& rgba, int threshold) {
  if (!rgba.has_alpha()) throw std::invalid_argument("alpha_to_mask: image has no alpha channel");
  BinaryMask out(rgba.width(), rgba.height());
  for (int y = 0; y < rgba.height(); ++y)
    for (int x = 0; x < rgba.width(); ++x) out.set(x, y, rgba.at(x, y, 3) >= threshold);
  return out;
}

}  // namespace toolsynth
