#pragma once

#include "toolsynth/image.hpp"
#include "toolsynth/rng.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

namespace toolsynth {

enum class TransformKind {
  HFlip,
  VFlip,
  Crop,
  Affine,
  Perspective,
  HueSaturation,
  LinearContrast,
  GaussianBlur,
  AverageBlur,
  MedianBlur,
  Sharpen,
  Emboss,
  AdditiveGaussianNoise,
};

std::string_view to_string(TransformKind kind);
std::optional<TransformKind> transform_kind_from_string(std::string_view name);
bool is_geometric(TransformKind kind);

namespace xform {

struct HFlip {
  friend bool operator==(const HFlip&, const HFlip&) = default;
};
struct VFlip {
  friend bool operator==(const VFlip&, const VFlip&) = default;
};
/// Keeps a sub-rectangle (fractions of each side) and resizes it back to full size.
struct Crop {
  double left = 0, top = 0, keep_width = 1, keep_height = 1;
  friend bool operator==(const Crop&, const Crop&) = default;
};
/// About the image centre; translation as a fraction of width/height.
struct Affine {
  double rotation_deg = 0, scale = 1, translate_x = 0, translate_y = 0, shear_deg = 0;
  friend bool operator==(const Affine&, const Affine&) = default;
};
/// Inward shift of each source corner (x, y per corner, clockwise from
/// top-left) as a fraction of width/height; the quad is stretched to full size.
struct Perspective {
  std::array<double, 8> corner_shift{};
  friend bool operator==(const Perspective&, const Perspective&) = default;
};
/// Hue shift in degrees, saturation shift on the 0..255 scale.
struct HueSaturation {
  double hue_shift = 0, saturation_shift = 0;
  friend bool operator==(const HueSaturation&, const HueSaturation&) = default;
};
/// v -> 128 + factor * (v - 128)
struct LinearContrast {
  double factor = 1;
  friend bool operator==(const LinearContrast&, const LinearContrast&) = default;
};
/// Binomial kernel of the given size.
struct GaussianBlur {
  int kernel = 3;
  friend bool operator==(const GaussianBlur&, const GaussianBlur&) = default;
};
struct AverageBlur {
  int kernel = 3;
  friend bool operator==(const AverageBlur&, const AverageBlur&) = default;
};
struct MedianBlur {
  int kernel = 3;
  friend bool operator==(const MedianBlur&, const MedianBlur&) = default;
};
struct Sharpen {
  double alpha = 0;
  friend bool operator==(const Sharpen&, const Sharpen&) = default;
};
struct Emboss {
  double alpha = 0;
  friend bool operator==(const Emboss&, const Emboss&) = default;
};
/// Per-sample N(0, sigma) noise on the 0..255 scale; `seed` makes it replayable.
struct AdditiveGaussianNoise {
  double sigma = 0;
  std::uint64_t seed = 0;
  friend bool operator==(const AdditiveGaussianNoise&, const AdditiveGaussianNoise&) = default;
};

}  // namespace xform

using TransformParams =
    std::variant<xform::HFlip, xform::VFlip, xform::Crop, xform::Affine, xform::Perspective,
                 xform::HueSaturation, xform::LinearContrast, xform::GaussianBlur,
                 xform::AverageBlur, xform::MedianBlur, xform::Sharpen, xform::Emboss,
                 xform::AdditiveGaussianNoise>;

TransformKind kind_of(const TransformParams& t);

/// Sampling ranges for every transform. Lives in the engine config under
/// `augment.ranges`.
struct AugmentRanges {
  double crop_keep_min = 0.7;
  double crop_keep_max = 1.0;
  double rotation_deg = 45.0;
  double scale_min = 0.7;
  double scale_max = 1.3;
  double translate = 0.1;
  double shear_deg = 10.0;
  double perspective_max = 0.1;
  double hue_saturation_shift = 30.0;
  double contrast_min = 0.6;
  double contrast_max = 1.4;
  std::vector<int> blur_kernels{3, 5, 7};
  double sharpen_alpha_max = 1.0;
  double emboss_alpha_max = 1.0;
  double noise_sigma_max = 0.05 * 255.0;
  int chain_min = 2;
  int chain_max = 6;

  friend bool operator==(const AugmentRanges&, const AugmentRanges&) = default;
};

/// Throws std::invalid_argument if the ranges are inconsistent.
void validate(const AugmentRanges& ranges);

/// Throws std::invalid_argument if t lies outside the declared ranges.
void validate(const TransformParams& t, const AugmentRanges& ranges);

struct TransformChainRecord {
  std::vector<TransformParams> transforms;
  int source_seed_index = 0;
  std::uint64_t derivation_seed = 0;

  friend bool operator==(const TransformChainRecord&, const TransformChainRecord&) = default;
};

enum class Profile {
  Background,  ///< every transform kind
  Foreground,  ///< flips, crop, blurs and affine only
};

TransformChainRecord sample_chain(Rng& rng, Profile profile, const AugmentRanges& ranges = {});

/// Intensity transforms touch the colour channels only; alpha is preserved.
RasterImage apply_intensity(const RasterImage& img, const TransformParams& t);

struct Transformed {
  RasterImage image;
  std::optional<BinaryMask> mask;
};

/// Bilinear with reflection border for the image, nearest with zero border for
/// the mask, through the same spatial map.
Transformed apply_geometric(const RasterImage& img, const std::optional<BinaryMask>& mask,
                            const TransformParams& t);

Transformed apply_chain(const RasterImage& img, const std::optional<BinaryMask>& mask,
                        const TransformChainRecord& chain);

}  // namespace toolsynth
