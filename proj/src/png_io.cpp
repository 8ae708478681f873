#include "toolsynth/png_io.hpp"

#include "toolsynth/errors.hpp"

#include <png.h>

#include <cstring>
#include <system_error>

namespace toolsynth {

namespace fs = std::filesystem;

namespace {

struct PngReadResult {
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  png_uint_32 format = 0;
  std::vector<std::uint8_t> pixels;
};

// Decodes keeping the file's own colour/alpha layout (palette expanded).
PngReadResult read_native(const fs::path& path) {
  std::error_code ec;
  if (!fs::exists(path, ec)) throw IoError(path, "file does not exist");
  if (fs::is_directory(path, ec)) throw IoError(path, "is a directory");

  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str()))
    throw IoError(path, std::string("invalid PNG: ") + image.message);

  if (image.format & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&image);
    throw IoError(path, "not an 8-bit PNG (16-bit samples are unsupported)");
  }
  if (image.width == 0 || image.height == 0) {
    png_image_free(&image);
    throw IoError(path, "zero-sized image");
  }

  PngReadResult out;
  out.width = image.width;
  out.height = image.height;
  out.format = image.format & (PNG_FORMAT_FLAG_COLOR | PNG_FORMAT_FLAG_ALPHA);
  image.format = out.format;
  out.pixels.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, out.pixels.data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw IoError(path, "decode failed: " + msg);
  }
  return out;
}

void write_png(const fs::path& path, int width, int height, png_uint_32 format,
               const std::uint8_t* pixels) {
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError(path, "cannot create parent directory: " + ec.message());
  }
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = format;
  image.flags = PNG_IMAGE_FLAG_FAST;
  if (!png_image_write_to_file(&image, path.c_str(), 0, pixels, 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw IoError(path, "cannot write PNG: " + msg);
  }
}

}  // namespace

RasterImage load_image_png(const fs::path& path) {
  auto png = read_native(path);
  const bool color = png.format & PNG_FORMAT_FLAG_COLOR;
  const bool alpha = png.format & PNG_FORMAT_FLAG_ALPHA;
  const int w = static_cast<int>(png.width);
  const int h = static_cast<int>(png.height);
  if (color) {
    return RasterImage(w, h, alpha ? Channels::RGBA : Channels::RGB, std::move(png.pixels));
  }
  RasterImage out(w, h, alpha ? Channels::RGBA : Channels::RGB);
  const int src_ch = alpha ? 2 : 1;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::uint8_t* p = &png.pixels[(static_cast<std::size_t>(y) * w + x) * src_ch];
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = p[0];
      if (alpha) out.at(x, y, 3) = p[1];
    }
  return out;
}

BinaryMask load_mask_png(const fs::path& path) {
  auto png = read_native(path);
  const bool color = png.format & PNG_FORMAT_FLAG_COLOR;
  const bool alpha = png.format & PNG_FORMAT_FLAG_ALPHA;
  const int w = static_cast<int>(png.width);
  const int h = static_cast<int>(png.height);
  const int ch = (color ? 3 : 1) + (alpha ? 1 : 0);
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(w) * h);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    const std::uint8_t* p = &png.pixels[i * ch];
    int value = p[0];
    if (color) value = (299 * p[0] + 587 * p[1] + 114 * p[2] + 500) / 1000;
    bits[i] = value >= 128 ? 1 : 0;
  }
  return BinaryMask(w, h, std::move(bits));
}

void save_png(const RasterImage& img, const fs::path& path) {
  if (img.empty()) throw std::invalid_argument("save_png: empty image");
  write_png(path, img.width(), img.height(),
            img.has_alpha() ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB, img.data().data());
}

void save_png(const BinaryMask& mask, const fs::path& path) {
  if (mask.empty()) throw std::invalid_argument("save_png: empty mask");
  std::vector<std::uint8_t> gray(mask.data().size());
  for (std::size_t i = 0; i < gray.size(); ++i) gray[i] = mask.data()[i] ? 255 : 0;
  write_png(path, mask.width(), mask.height(), PNG_FORMAT_GRAY, gray.data());
}

}  // namespace toolsynth
