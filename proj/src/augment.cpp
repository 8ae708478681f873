#include "toolsynth/augment.hpp"

#include "toolsynth/filters.hpp"
#include "toolsynth/warp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace toolsynth {

namespace {

constexpr std::array<std::pair<TransformKind, std::string_view>, 13> kKindNames{{
    {TransformKind::HFlip, "HFlip"},
    {TransformKind::VFlip, "VFlip"},
    {TransformKind::Crop, "Crop"},
    {TransformKind::Affine, "Affine"},
    {TransformKind::Perspective, "Perspective"},
    {TransformKind::HueSaturation, "HueSaturation"},
    {TransformKind::LinearContrast, "LinearContrast"},
    {TransformKind::GaussianBlur, "GaussianBlur"},
    {TransformKind::AverageBlur, "AverageBlur"},
    {TransformKind::MedianBlur, "MedianBlur"},
    {TransformKind::Sharpen, "Sharpen"},
    {TransformKind::Emboss, "Emboss"},
    {TransformKind::AdditiveGaussianNoise, "AdditiveGaussianNoise"},
}};

double radians(double deg) { return deg * std::numbers::pi / 180.0; }

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void require_in(double v, double lo, double hi, const char* what) {
  if (!(v >= lo - 1e-12 && v <= hi + 1e-12))
    throw std::invalid_argument(std::string(what) + " = " + std::to_string(v) + " outside [" +
                                std::to_string(lo) + ", " + std::to_string(hi) + "]");
}

void require_kernel(int k, const AugmentRanges& r, const char* what) {
  if (std::find(r.blur_kernels.begin(), r.blur_kernels.end(), k) == r.blur_kernels.end())
    throw std::invalid_argument(std::string(what) + ": kernel " + std::to_string(k) +
                                " not in the configured set");
}

// Output -> source map for the warping transforms.
Eigen::Matrix3d spatial_map(const TransformParams& t, int w, int h) {
  const double cx = (w - 1) / 2.0;
  const double cy = (h - 1) / 2.0;
  return std::visit(
      overloaded{
          [&](const xform::Crop& c) -> Eigen::Matrix3d {
            Eigen::Matrix3d m;
            m << c.keep_width, 0, c.left * w + 0.5 * c.keep_width - 0.5,  //
                0, c.keep_height, c.top * h + 0.5 * c.keep_height - 0.5,  //
                0, 0, 1;
            return m;
          },
          [&](const xform::Affine& a) -> Eigen::Matrix3d {
            const double th = radians(a.rotation_deg);
            Eigen::Matrix2d rot;
            rot << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
            Eigen::Matrix2d shear;
            shear << 1, std::tan(radians(a.shear_deg)), 0, 1;
            const Eigen::Matrix2d lin = rot * shear * a.scale;
            const Eigen::Vector2d c(cx, cy);
            const Eigen::Vector2d t(a.translate_x * w, a.translate_y * h);
            Eigen::Matrix3d fwd = Eigen::Matrix3d::Identity();
            fwd.topLeftCorner<2, 2>() = lin;
            fwd.topRightCorner<2, 1>() = c + t - lin * c;
            return fwd.inverse();
          },
          [&](const xform::Perspective& p) -> Eigen::Matrix3d {
            const double x0 = -0.5, y0 = -0.5, x1 = w - 0.5, y1 = h - 0.5;
            const std::array<Eigen::Vector2d, 4> out{Eigen::Vector2d(x0, y0), Eigen::Vector2d(x1, y0),
                                                     Eigen::Vector2d(x1, y1), Eigen::Vector2d(x0, y1)};
            const std::array<double, 4> sx{1, -1, -1, 1};
            const std::array<double, 4> sy{1, 1, -1, -1};
            std::array<Eigen::Vector2d, 4> src;
            for (int i = 0; i < 4; ++i)
              src[i] = out[i] + Eigen::Vector2d(sx[i] * p.corner_shift[2 * i] * w,
                                                sy[i] * p.corner_shift[2 * i + 1] * h);
            return homography_from_points(out, src);
          },
          [&](const auto&) -> Eigen::Matrix3d {
            throw std::invalid_argument("spatial_map: not a warping transform");
          },
      },
      t);
}

RasterImage flip(const RasterImage& img, bool horizontal) {
  RasterImage out(img.width(), img.height(), img.channels());
  const int w = img.width(), h = img.height();
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int sx = horizontal ? w - 1 - x : x;
      const int sy = horizontal ? y : h - 1 - y;
      for (int c = 0; c < img.channel_count(); ++c) out.at(x, y, c) = img.at(sx, sy, c);
    }
  return out;
}

BinaryMask flip(const BinaryMask& mask, bool horizontal) {
  BinaryMask out(mask.width(), mask.height());
  const int w = mask.width(), h = mask.height();
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      out.set(x, y, horizontal ? mask.at(w - 1 - x, y) : mask.at(x, h - 1 - y));
  return out;
}

void rgb_to_hsv(double r, double g, double b, double& hue, double& sat, double& val) {
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double d = mx - mn;
  val = mx;
  sat = mx > 0 ? d / mx : 0;
  if (d == 0) {
    hue = 0;
  } else if (mx == r) {
    hue = 60.0 * std::fmod((g - b) / d + 6.0, 6.0);
  } else if (mx == g) {
    hue = 60.0 * ((b - r) / d + 2.0);
  } else {
    hue = 60.0 * ((r - g) / d + 4.0);
  }
}

void hsv_to_rgb(double hue, double sat, double val, double& r, double& g, double& b) {
  const double c = val * sat;
  const double hp = hue / 60.0;
  const double x = c * (1 - std::fabs(std::fmod(hp, 2.0) - 1));
  double r1 = 0, g1 = 0, b1 = 0;
  switch (static_cast<int>(hp) % 6) {
    case 0: r1 = c; g1 = x; break;
    case 1: r1 = x; g1 = c; break;
    case 2: g1 = c; b1 = x; break;
    case 3: g1 = x; b1 = c; break;
    case 4: r1 = x; b1 = c; break;
    default: r1 = c; b1 = x; break;
  }
  const double m = val - c;
  r = r1 + m;
  g = g1 + m;
  b = b1 + m;
}

RasterImage hue_saturation(const RasterImage& img, const xform::HueSaturation& hs) {
  RasterImage out = img;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      double hue, sat, val;
      rgb_to_hsv(img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2), hue, sat, val);
      hue = std::fmod(hue + hs.hue_shift + 360.0, 360.0);
      sat = std::clamp(sat + hs.saturation_shift / 255.0, 0.0, 1.0);
      double r, g, b;
      hsv_to_rgb(hue, sat, val, r, g, b);
      out.at(x, y, 0) = quantize(r);
      out.at(x, y, 1) = quantize(g);
      out.at(x, y, 2) = quantize(b);
    }
  return out;
}

Eigen::MatrixXd blend_with_identity(const Eigen::MatrixXd& effect, double alpha) {
  Eigen::MatrixXd ident = Eigen::MatrixXd::Zero(3, 3);
  ident(1, 1) = 1;
  return (1 - alpha) * ident + alpha * effect;
}

xform::Crop sample_crop(Rng& rng, const AugmentRanges& r) {
  xform::Crop c;
  c.keep_width = rng.uniform(r.crop_keep_min, r.crop_keep_max);
  c.keep_height = rng.uniform(r.crop_keep_min, r.crop_keep_max);
  c.left = rng.uniform(0.0, 1.0 - c.keep_width);
  c.top = rng.uniform(0.0, 1.0 - c.keep_height);
  return c;
}

xform::Affine sample_affine(Rng& rng, const AugmentRanges& r) {
  xform::Affine a;
  a.rotation_deg = rng.uniform(-r.rotation_deg, r.rotation_deg);
  a.scale = rng.uniform(r.scale_min, r.scale_max);
  a.translate_x = rng.uniform(-r.translate, r.translate);
  a.translate_y = rng.uniform(-r.translate, r.translate);
  a.shear_deg = rng.uniform(-r.shear_deg, r.shear_deg);
  return a;
}

int sample_kernel(Rng& rng, const AugmentRanges& r) {
  return r.blur_kernels[rng.uniform_int(0, static_cast<int>(r.blur_kernels.size()) - 1)];
}

TransformParams sample_params(TransformKind kind, Rng& rng, const AugmentRanges& r) {
  switch (kind) {
    case TransformKind::HFlip: return xform::HFlip{};
    case TransformKind::VFlip: return xform::VFlip{};
    case TransformKind::Crop: return sample_crop(rng, r);
    case TransformKind::Affine: return sample_affine(rng, r);
    case TransformKind::Perspective: {
      xform::Perspective p;
      for (double& s : p.corner_shift) s = rng.uniform(0.0, r.perspective_max);
      return p;
    }
    case TransformKind::HueSaturation: {
      const double hue = rng.uniform(-r.hue_saturation_shift, r.hue_saturation_shift);
      const double sat = rng.uniform(-r.hue_saturation_shift, r.hue_saturation_shift);
      return xform::HueSaturation{hue, sat};
    }
    case TransformKind::LinearContrast:
      return xform::LinearContrast{rng.uniform(r.contrast_min, r.contrast_max)};
    case TransformKind::GaussianBlur: return xform::GaussianBlur{sample_kernel(rng, r)};
    case TransformKind::AverageBlur: return xform::AverageBlur{sample_kernel(rng, r)};
    case TransformKind::MedianBlur: return xform::MedianBlur{sample_kernel(rng, r)};
    case TransformKind::Sharpen: return xform::Sharpen{rng.uniform(0.0, r.sharpen_alpha_max)};
    case TransformKind::Emboss: return xform::Emboss{rng.uniform(0.0, r.emboss_alpha_max)};
    case TransformKind::AdditiveGaussianNoise: {
      const double sigma = rng.uniform(0.0, r.noise_sigma_max);
      return xform::AdditiveGaussianNoise{sigma, rng.next_u64()};
    }
  }
  throw std::logic_error("sample_params: unhandled kind");
}

}  // namespace

std::string_view to_string(TransformKind kind) {
  for (const auto& [k, name] : kKindNames)
    if (k == kind) return name;
  return "?";
}

std::optional<TransformKind> transform_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kKindNames)
    if (n == name) return k;
  return std::nullopt;
}

bool is_geometric(TransformKind kind) {
  switch (kind) {
    case TransformKind::HFlip:
    case TransformKind::VFlip:
    case TransformKind::Crop:
    case TransformKind::Affine:
    case TransformKind::Perspective:
      return true;
    default:
      return false;
  }
}

TransformKind kind_of(const TransformParams& t) { return static_cast<TransformKind>(t.index()); }

void validate(const AugmentRanges& r) {
  auto fail = [](const char* what) { throw std::invalid_argument(std::string("augment.ranges: ") + what); };
  if (!(r.crop_keep_min > 0 && r.crop_keep_min <= r.crop_keep_max && r.crop_keep_max <= 1))
    fail("crop keep range must satisfy 0 < min <= max <= 1");
  if (!(r.scale_min > 0 && r.scale_min <= r.scale_max)) fail("scale range invalid");
  if (r.rotation_deg < 0 || r.translate < 0 || r.shear_deg < 0 || r.shear_deg >= 90)
    fail("rotation/translate/shear must be non-negative (shear < 90)");
  if (r.perspective_max < 0 || r.perspective_max >= 0.5) fail("perspective_max must be in [0, 0.5)");
  if (r.hue_saturation_shift < 0) fail("hue_saturation_shift must be non-negative");
  if (!(r.contrast_min >= 0 && r.contrast_min <= r.contrast_max)) fail("contrast range invalid");
  if (r.blur_kernels.empty()) fail("blur_kernels must not be empty");
  for (int k : r.blur_kernels)
    if (k < 1 || k > 9 || k % 2 == 0) fail("blur kernels must be odd and in [1,9]");
  if (r.sharpen_alpha_max < 0 || r.sharpen_alpha_max > 1 || r.emboss_alpha_max < 0 ||
      r.emboss_alpha_max > 1)
    fail("sharpen/emboss alpha must be in [0,1]");
  if (r.noise_sigma_max < 0) fail("noise_sigma_max must be non-negative");
  if (r.chain_min < 1 || r.chain_min > r.chain_max) fail("chain length range invalid");
}

void validate(const TransformParams& t, const AugmentRanges& r) {
  std::visit(overloaded{
                 [](const xform::HFlip&) {},
                 [](const xform::VFlip&) {},
                 [&](const xform::Crop& c) {
                   require_in(c.keep_width, r.crop_keep_min, r.crop_keep_max, "Crop.keep_width");
                   require_in(c.keep_height, r.crop_keep_min, r.crop_keep_max, "Crop.keep_height");
                   require_in(c.left, 0, 1 - c.keep_width, "Crop.left");
                   require_in(c.top, 0, 1 - c.keep_height, "Crop.top");
                 },
                 [&](const xform::Affine& a) {
                   require_in(a.rotation_deg, -r.rotation_deg, r.rotation_deg, "Affine.rotation_deg");
                   require_in(a.scale, r.scale_min, r.scale_max, "Affine.scale");
                   require_in(a.translate_x, -r.translate, r.translate, "Affine.translate_x");
                   require_in(a.translate_y, -r.translate, r.translate, "Affine.translate_y");
                   require_in(a.shear_deg, -r.shear_deg, r.shear_deg, "Affine.shear_deg");
                 },
                 [&](const xform::Perspective& p) {
                   for (double s : p.corner_shift)
                     require_in(s, 0, r.perspective_max, "Perspective.corner_shift");
                 },
                 [&](const xform::HueSaturation& h) {
                   require_in(h.hue_shift, -r.hue_saturation_shift, r.hue_saturation_shift,
                              "HueSaturation.hue_shift");
                   require_in(h.saturation_shift, -r.hue_saturation_shift, r.hue_saturation_shift,
                              "HueSaturation.saturation_shift");
                 },
                 [&](const xform::LinearContrast& c) {
                   require_in(c.factor, r.contrast_min, r.contrast_max, "LinearContrast.factor");
                 },
                 [&](const xform::GaussianBlur& b) { require_kernel(b.kernel, r, "GaussianBlur"); },
                 [&](const xform::AverageBlur& b) { require_kernel(b.kernel, r, "AverageBlur"); },
                 [&](const xform::MedianBlur& b) { require_kernel(b.kernel, r, "MedianBlur"); },
                 [&](const xform::Sharpen& s) { require_in(s.alpha, 0, r.sharpen_alpha_max, "Sharpen.alpha"); },
                 [&](const xform::Emboss& e) { require_in(e.alpha, 0, r.emboss_alpha_max, "Emboss.alpha"); },
                 [&](const xform::AdditiveGaussianNoise& n) {
                   require_in(n.sigma, 0, r.noise_sigma_max, "AdditiveGaussianNoise.sigma");
                 },
             },
             t);
}

TransformChainRecord sample_chain(Rng& rng, Profile profile, const AugmentRanges& ranges) {
  TransformChainRecord rec;
  const int length = rng.uniform_int(ranges.chain_min, ranges.chain_max);
  rec.transforms.reserve(length);
  for (int i = 0; i < length; ++i) {
    TransformKind kind;
    if (profile == Profile::Background) {
      kind = static_cast<TransformKind>(rng.uniform_int(0, static_cast<int>(kKindNames.size()) - 1));
    } else {
      // flip | crop | blur | affine, then the concrete variant
      switch (rng.uniform_int(0, 3)) {
        case 0: kind = rng.bernoulli(0.5) ? TransformKind::HFlip : TransformKind::VFlip; break;
        case 1: kind = TransformKind::Crop; break;
        case 2: {
          constexpr std::array blurs{TransformKind::GaussianBlur, TransformKind::AverageBlur,
                                     TransformKind::MedianBlur};
          kind = blurs[rng.uniform_int(0, 2)];
          break;
        }
        default: kind = TransformKind::Affine; break;
      }
    }
    rec.transforms.push_back(sample_params(kind, rng, ranges));
  }
  return rec;
}

RasterImage apply_intensity(const RasterImage& img, const TransformParams& t) {
  if (is_geometric(kind_of(t)))
    throw std::invalid_argument(std::string("apply_intensity: ") + std::string(to_string(kind_of(t))) +
                                " is a geometric transform");
  return std::visit(
      overloaded{
          [&](const xform::HueSaturation& hs) { return hue_saturation(img, hs); },
          [&](const xform::LinearContrast& lc) {
            RasterImage out = img;
            for (int y = 0; y < img.height(); ++y)
              for (int x = 0; x < img.width(); ++x)
                for (int c = 0; c < 3; ++c)
                  out.at(x, y, c) = quantize(128.0 + lc.factor * (img.at(x, y, c) - 128.0));
            return out;
          },
          [&](const xform::GaussianBlur& b) {
            const auto k = binomial_kernel(b.kernel);
            return map_color_planes(img, [&](const Plane<double>& p) { return convolve_separable(p, k); });
          },
          [&](const xform::AverageBlur& b) {
            const std::vector<double> k(b.kernel, 1.0 / b.kernel);
            return map_color_planes(img, [&](const Plane<double>& p) { return convolve_separable(p, k); });
          },
          [&](const xform::MedianBlur& b) { return median_filter(img, b.kernel); },
          [&](const xform::Sharpen& s) {
            Eigen::MatrixXd effect(3, 3);
            effect << -1, -1, -1, -1, 9, -1, -1, -1, -1;
            const Eigen::MatrixXd k = blend_with_identity(effect, s.alpha);
            return map_color_planes(img, [&](const Plane<double>& p) { return convolve2d(p, k); });
          },
          [&](const xform::Emboss& e) {
            Eigen::MatrixXd effect(3, 3);
            effect << -2, -1, 0, -1, 1, 1, 0, 1, 2;
            const Eigen::MatrixXd k = blend_with_identity(effect, e.alpha);
            return map_color_planes(img, [&](const Plane<double>& p) { return convolve2d(p, k); });
          },
          [&](const xform::AdditiveGaussianNoise& n) {
            Rng rng(n.seed);
            RasterImage out = img;
            for (int y = 0; y < img.height(); ++y)
              for (int x = 0; x < img.width(); ++x)
                for (int c = 0; c < 3; ++c)
                  out.at(x, y, c) = quantize(img.at(x, y, c) + rng.normal(0.0, n.sigma));
            return out;
          },
          [&](const auto&) -> RasterImage { throw std::logic_error("apply_intensity: unreachable"); },
      },
      t);
}

Transformed apply_geometric(const RasterImage& img, const std::optional<BinaryMask>& mask,
                            const TransformParams& t) {
  const TransformKind kind = kind_of(t);
  if (!is_geometric(kind))
    throw std::invalid_argument(std::string("apply_geometric: ") + std::string(to_string(kind)) +
                                " is an intensity transform");
  if (mask) require_same_size(img, *mask, "apply_geometric");

  if (kind == TransformKind::HFlip || kind == TransformKind::VFlip) {
    const bool horizontal = kind == TransformKind::HFlip;
    Transformed out{flip(img, horizontal), std::nullopt};
    if (mask) out.mask = flip(*mask, horizontal);
    return out;
  }
  const Eigen::Matrix3d map = spatial_map(t, img.width(), img.height());
  Transformed out{warp_bilinear(img, map, img.width(), img.height(), Border::Reflect), std::nullopt};
  if (mask) out.mask = warp_nearest(*mask, map, img.width(), img.height());
  return out;
}

Transformed apply_chain(const RasterImage& img, const std::optional<BinaryMask>& mask,
                        const TransformChainRecord& chain) {
  Transformed cur{img, mask};
  for (const auto& t : chain.transforms) {
    if (is_geometric(kind_of(t))) {
      cur = apply_geometric(cur.image, cur.mask, t);
    } else {
      cur.image = apply_intensity(cur.image, t);
    }
  }
  return cur;
}

}  // namespace toolsynth
