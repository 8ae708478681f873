#include "toolsynth/trainaug.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace toolsynth {

namespace {

RasterImage map_lut(const RasterImage& img, const std::array<std::array<std::uint8_t, 256>, 3>& lut) {
  RasterImage out = img;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = lut[c][img.at(x, y, c)];
  return out;
}

RasterImage autocontrast(const RasterImage& img) {
  std::array<std::array<std::uint8_t, 256>, 3> lut;
  for (int c = 0; c < 3; ++c) {
    int lo = 255, hi = 0;
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x) {
        lo = std::min<int>(lo, img.at(x, y, c));
        hi = std::max<int>(hi, img.at(x, y, c));
      }
    for (int v = 0; v < 256; ++v)
      lut[c][v] = hi > lo ? quantize((v - lo) * 255.0 / (hi - lo)) : static_cast<std::uint8_t>(v);
  }
  return map_lut(img, lut);
}

// Cumulative-histogram equalization with the same step rule as PIL.
RasterImage equalize(const RasterImage& img) {
  std::array<std::array<std::uint8_t, 256>, 3> lut;
  for (int c = 0; c < 3; ++c) {
    std::array<long, 256> hist{};
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x) ++hist[img.at(x, y, c)];
    long total = 0;
    int last = 0;
    for (int v = 0; v < 256; ++v) {
      total += hist[v];
      if (hist[v]) last = v;
    }
    const long step = (total - hist[last]) / 255;
    if (step == 0) {
      for (int v = 0; v < 256; ++v) lut[c][v] = static_cast<std::uint8_t>(v);
      continue;
    }
    long n = step / 2;
    for (int v = 0; v < 256; ++v) {
      lut[c][v] = static_cast<std::uint8_t>(std::min<long>(255, n / step));
      n += hist[v];
    }
  }
  return map_lut(img, lut);
}

double luma(const RasterImage& img, int x, int y) {
  return (299.0 * img.at(x, y, 0) + 587.0 * img.at(x, y, 1) + 114.0 * img.at(x, y, 2)) / 1000.0;
}

template <typename DegenerateFn>
RasterImage enhance(const RasterImage& img, double factor, DegenerateFn&& degenerate) {
  RasterImage out = img;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < 3; ++c) {
        const double d = degenerate(x, y, c);
        out.at(x, y, c) = quantize(d + factor * (img.at(x, y, c) - d));
      }
  return out;
}

}  // namespace

void validate(const Batch& batch) {
  if (batch.samples.empty()) throw std::invalid_argument("batch is empty");
  const auto& first = batch.samples.front().image;
  for (const auto& s : batch.samples) {
    require_same_size(s.image, s.mask, "batch");
    require_same_size(s.image, first, "batch");
  }
}

std::string_view to_string(CamOpKind kind) {
  switch (kind) {
    case CamOpKind::Autocontrast: return "autocontrast";
    case CamOpKind::Equalize: return "equalize";
    case CamOpKind::Posterize: return "posterize";
    case CamOpKind::Solarize: return "solarize";
    case CamOpKind::Color: return "color";
    case CamOpKind::Contrast: return "contrast";
    case CamOpKind::Brightness: return "brightness";
    case CamOpKind::Sharpness: return "sharpness";
  }
  return "?";
}

void validate(const CamConfig& cfg) {
  if (cfg.severity < 1 || cfg.severity > 10) throw std::invalid_argument("cam.severity must be in [1,10]");
  if (cfg.width < 1) throw std::invalid_argument("cam.width must be >= 1");
  if (cfg.depth_min < 1 || cfg.depth_min > cfg.depth_max) throw std::invalid_argument("cam depth range invalid");
  if (!(cfg.alpha > 0)) throw std::invalid_argument("cam.alpha must be > 0");
}

std::vector<CamOpKind> cam_ops(CamOpSet set) {
  std::vector<CamOpKind> ops{CamOpKind::Autocontrast, CamOpKind::Equalize, CamOpKind::Posterize,
                             CamOpKind::Solarize};
  if (set == CamOpSet::Hard) {
    ops.insert(ops.end(), {CamOpKind::Color, CamOpKind::Contrast, CamOpKind::Brightness, CamOpKind::Sharpness});
  }
  return ops;
}

CamPlan sample_cam_plan(const CamConfig& cfg, Rng& rng) {
  validate(cfg);
  CamPlan plan;
  double total = 0;
  for (int i = 0; i < cfg.width; ++i) {
    plan.weights.push_back(rng.gamma(cfg.alpha));
    total += plan.weights.back();
  }
  for (double& w : plan.weights) w = total > 0 ? w / total : 1.0 / cfg.width;
  const double a = rng.gamma(cfg.alpha);
  const double b = rng.gamma(cfg.alpha);
  plan.mix = a + b > 0 ? a / (a + b) : 0.5;

  const auto ops = cam_ops(cfg.op_set);
  const int sev = cfg.severity;
  for (int i = 0; i < cfg.width; ++i) {
    std::vector<CamOp> chain;
    const int depth = rng.uniform_int(cfg.depth_min, cfg.depth_max);
    for (int d = 0; d < depth; ++d) {
      CamOp op{ops[rng.uniform_int(0, static_cast<int>(ops.size()) - 1)], 0.0};
      switch (op.kind) {
        case CamOpKind::Posterize: op.value = 8 - std::ceil(sev * 4 / 10.0); break;
        case CamOpKind::Solarize: op.value = 256 - std::ceil(sev * 25.6); break;
        case CamOpKind::Color:
        case CamOpKind::Contrast:
        case CamOpKind::Brightness:
        case CamOpKind::Sharpness:
          op.value = 1.0 + (rng.bernoulli(0.5) ? 1.0 : -1.0) * 0.09 * sev;
          break;
        default: break;
      }
      chain.push_back(op);
    }
    plan.chains.push_back(std::move(chain));
  }
  return plan;
}

RasterImage apply_cam_op(const RasterImage& img, const CamOp& op) {
  switch (op.kind) {
    case CamOpKind::Autocontrast: return autocontrast(img);
    case CamOpKind::Equalize: return equalize(img);
    case CamOpKind::Posterize: {
      const int bits = std::clamp(static_cast<int>(op.value), 1, 8);
      const auto keep = static_cast<std::uint8_t>(0xFF << (8 - bits));
      RasterImage out = img;
      for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
          for (int c = 0; c < 3; ++c) out.at(x, y, c) = img.at(x, y, c) & keep;
      return out;
    }
    case CamOpKind::Solarize: {
      RasterImage out = img;
      for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
          for (int c = 0; c < 3; ++c)
            if (img.at(x, y, c) >= op.value) out.at(x, y, c) = 255 - img.at(x, y, c);
      return out;
    }
    case CamOpKind::Color:
      return enhance(img, op.value, [&](int x, int y, int) { return luma(img, x, y); });
    case CamOpKind::Contrast: {
      double mean = 0;
      for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) mean += luma(img, x, y);
      mean /= static_cast<double>(img.width()) * img.height();
      return enhance(img, op.value, [&](int, int, int) { return mean; });
    }
    case CamOpKind::Brightness:
      return enhance(img, op.value, [](int, int, int) { return 0.0; });
    case CamOpKind::Sharpness: {
      // 3x3 smoothing [1 1 1; 1 5 1; 1 1 1] / 13, border pixels kept.
      return enhance(img, op.value, [&](int x, int y, int c) -> double {
        if (x == 0 || y == 0 || x == img.width() - 1 || y == img.height() - 1) return img.at(x, y, c);
        double acc = 4.0 * img.at(x, y, c);
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) acc += img.at(x + dx, y + dy, c);
        return acc / 13.0;
      });
    }
  }
  throw std::logic_error("apply_cam_op: unhandled op");
}

RasterImage apply_cam(const RasterImage& img, const CamPlan& plan) {
  if (plan.weights.size() != plan.chains.size())
    throw std::invalid_argument("apply_cam: one weight per chain required");
  Planes<double> acc(3, Plane<double>::Zero(img.height(), img.width()));
  for (std::size_t i = 0; i < plan.chains.size(); ++i) {
    if (plan.weights[i] == 0.0) continue;
    RasterImage aug = img;
    for (const auto& op : plan.chains[i]) aug = apply_cam_op(aug, op);
    const auto p = to_planes<double>(aug, 3);
    for (int c = 0; c < 3; ++c) acc[c] += plan.weights[i] * p[c];
  }
  const auto orig = to_planes<double>(img, 3);
  RasterImage out = img;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < 3; ++c)
        out.at(x, y, c) = quantize(255.0 * (plan.mix * orig[c](y, x) + (1.0 - plan.mix) * acc[c](y, x)));
  return out;
}

RasterImage cam(const RasterImage& img, const CamConfig& cfg, Rng& rng) {
  return apply_cam(img, sample_cam_plan(cfg, rng));
}

void validate(const CdoConfig& cfg) {
  if (cfg.num_min < 0 || cfg.num_min > cfg.num_max) throw std::invalid_argument("cdo region count range invalid");
  if (!(cfg.size_min > 0 && cfg.size_min <= cfg.size_max && cfg.size_max <= 1))
    throw std::invalid_argument("cdo size range must satisfy 0 < min <= max <= 1");
  if (cfg.apply_prob < 0 || cfg.apply_prob > 1) throw std::invalid_argument("cdo.apply_prob must be in [0,1]");
}

bool DropRegion::contains(int px, int py) const {
  if (px < x || py < y || px >= x + width || py >= y + height) return false;
  if (shape == DropShape::Rect) return true;
  const double rx = width / 2.0, ry = height / 2.0;
  const double dx = (px + 0.5 - x - rx) / rx;
  const double dy = (py + 0.5 - y - ry) / ry;
  return dx * dx + dy * dy <= 1.0;
}

CdoPlan sample_cdo_plan(int width, int height, const CdoConfig& cfg, Rng& rng) {
  validate(cfg);
  CdoPlan plan;
  if (!rng.bernoulli(cfg.apply_prob)) return plan;
  const int count = rng.uniform_int(cfg.num_min, cfg.num_max);
  for (int i = 0; i < count; ++i) {
    DropRegion r;
    r.shape = rng.bernoulli(0.5) ? DropShape::Circle : DropShape::Rect;
    const double fw = rng.uniform(cfg.size_min, cfg.size_max);
    const double fh = rng.uniform(cfg.size_min, cfg.size_max);
    if (r.shape == DropShape::Circle) {
      r.width = r.height = std::max(1, static_cast<int>(std::round(fw * std::min(width, height))));
    } else {
      r.width = std::max(1, static_cast<int>(std::round(fw * width)));
      r.height = std::max(1, static_cast<int>(std::round(fh * height)));
    }
    r.width = std::min(r.width, width);
    r.height = std::min(r.height, height);
    r.x = rng.uniform_int(0, width - r.width);
    r.y = rng.uniform_int(0, height - r.height);
    plan.regions.push_back(r);
  }
  return plan;
}

SamplePair apply_cdo(const SamplePair& pair, const CdoPlan& plan) {
  require_same_size(pair.image, pair.mask, "cdo");
  SamplePair out = pair;
  for (const auto& r : plan.regions) {
    const int x1 = std::min(r.x + r.width, pair.image.width());
    const int y1 = std::min(r.y + r.height, pair.image.height());
    for (int y = std::max(r.y, 0); y < y1; ++y)
      for (int x = std::max(r.x, 0); x < x1; ++x) {
        if (!r.contains(x, y)) continue;
        for (int c = 0; c < out.image.channel_count(); ++c) out.image.at(x, y, c) = 0;
        out.mask.set(x, y, false);
      }
  }
  return out;
}

SamplePair cdo(const SamplePair& pair, const CdoConfig& cfg, Rng& rng) {
  return apply_cdo(pair, sample_cdo_plan(pair.image.width(), pair.image.height(), cfg, rng));
}

EpmPatch cutmix_rect(int width, int height, double lambda, double cx, double cy, int partner) {
  const double ratio = std::sqrt(std::clamp(1.0 - lambda, 0.0, 1.0));
  const int cut_w = static_cast<int>(width * ratio);
  const int cut_h = static_cast<int>(height * ratio);
  const int icx = static_cast<int>(cx);
  const int icy = static_cast<int>(cy);
  EpmPatch p;
  p.partner = partner;
  p.x0 = std::clamp(icx - cut_w / 2, 0, width);
  p.y0 = std::clamp(icy - cut_h / 2, 0, height);
  p.x1 = std::clamp(icx + cut_w / 2, 0, width);
  p.y1 = std::clamp(icy + cut_h / 2, 0, height);
  return p;
}

EpmPlan sample_epm_plan(const Batch& batch, const EpmConfig& cfg, Rng& rng) {
  validate(batch);
  if (cfg.prob < 0 || cfg.prob > 1) throw std::invalid_argument("epm.prob must be in [0,1]");
  const int n = static_cast<int>(batch.samples.size());
  if (n < 2 && cfg.prob > 0) throw std::invalid_argument("epm: batch of size 1 cannot mix patches");
  const int w = batch.samples.front().image.width();
  const int h = batch.samples.front().image.height();
  EpmPlan plan;
  plan.patches.resize(n);
  for (int i = 0; i < n; ++i) {
    if (!rng.bernoulli(cfg.prob)) continue;
    int partner = rng.uniform_int(0, n - 2);
    if (partner >= i) ++partner;
    const double lambda = rng.uniform(0.0, 1.0);
    const double cx = rng.uniform(0.0, w);
    const double cy = rng.uniform(0.0, h);
    plan.patches[i] = cutmix_rect(w, h, lambda, cx, cy, partner);
  }
  return plan;
}

Batch apply_epm(const Batch& batch, const EpmPlan& plan) {
  validate(batch);
  if (plan.patches.size() != batch.samples.size())
    throw std::invalid_argument("apply_epm: plan does not match batch size");
  Batch out = batch;
  for (std::size_t i = 0; i < plan.patches.size(); ++i) {
    if (!plan.patches[i]) continue;
    const EpmPatch& p = *plan.patches[i];
    if (p.partner < 0 || static_cast<std::size_t>(p.partner) >= batch.samples.size() ||
        static_cast<std::size_t>(p.partner) == i)
      throw std::invalid_argument("apply_epm: invalid partner index");
    const SamplePair& src = batch.samples[p.partner];
    SamplePair& dst = out.samples[i];
    for (int y = p.y0; y < p.y1; ++y)
      for (int x = p.x0; x < p.x1; ++x) {
        for (int c = 0; c < dst.image.channel_count(); ++c) dst.image.at(x, y, c) = src.image.at(x, y, c);
        dst.mask.set(x, y, src.mask.at(x, y) != 0);
      }
  }
  return out;
}

Batch epm(const Batch& batch, const EpmConfig& cfg, Rng& rng) {
  return apply_epm(batch, sample_epm_plan(batch, cfg, rng));
}

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::Epm: return "epm";
    case Stage::Cam: return "cam";
    case Stage::Cdo: return "cdo";
  }
  return "?";
}

Stage stage_from_string(std::string_view name) {
  if (name == "epm") return Stage::Epm;
  if (name == "cam") return Stage::Cam;
  if (name == "cdo") return Stage::Cdo;
  throw std::invalid_argument("unknown augmentation stage '" + std::string(name) + "'");
}

Batch hybrid(const Batch& batch, const HybridConfig& cfg, Rng& rng) {
  validate(batch);
  Batch out = batch;
  for (Stage stage : cfg.order) {
    switch (stage) {
      case Stage::Epm:
        if (cfg.use_epm) out = epm(out, cfg.epm, rng);
        break;
      case Stage::Cam:
        if (cfg.use_cam)
          for (auto& s : out.samples) s.image = cam(s.image, cfg.cam, rng);
        break;
      case Stage::Cdo:
        if (cfg.use_cdo)
          for (auto& s : out.samples) s = cdo(s, cfg.cdo, rng);
        break;
    }
  }
  return out;
}

}  // namespace toolsynth
