#pragma once

#include "toolsynth/image.hpp"
#include "toolsynth/rng.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace toolsynth {

// Training-time augmentation: chained augmentation mixing (CAM), coarse
// dropout (CDO) and element-wise patch mixing (EPM). Each operator splits into
// a sampled plan and a pure apply step so plans can be fixed in tests.

struct SamplePair {
  RasterImage image;
  BinaryMask mask;
  friend bool operator==(const SamplePair&, const SamplePair&) = default;
};

struct Batch {
  std::vector<SamplePair> samples;
  int epoch = 0;
  int batch_index = 0;
  friend bool operator==(const Batch&, const Batch&) = default;
};

/// Throws std::invalid_argument unless non-empty and all pairs share dimensions.
void validate(const Batch& batch);

// CAM ---------------------------------------------------------------------

enum class CamOpKind { Autocontrast, Equalize, Posterize, Solarize, Color, Contrast, Brightness, Sharpness };

std::string_view to_string(CamOpKind kind);

enum class CamOpSet { Soft, Hard };

struct CamOp {
  CamOpKind kind = CamOpKind::Autocontrast;
  double value = 0;  ///< bits, threshold or enhancement factor depending on kind
  friend bool operator==(const CamOp&, const CamOp&) = default;
};

struct CamConfig {
  int severity = 3;
  int width = 3;
  int depth_min = 1;
  int depth_max = 3;
  double alpha = 1.0;
  CamOpSet op_set = CamOpSet::Soft;
};

void validate(const CamConfig& cfg);

/// Soft: Autocontrast, Equalize, Posterize, Solarize. Hard adds Color,
/// Contrast, Brightness, Sharpness.
std::vector<CamOpKind> cam_ops(CamOpSet set);

struct CamPlan {
  double mix = 1.0;              ///< weight of the original image
  std::vector<double> weights;   ///< one per chain, sums to 1
  std::vector<std::vector<CamOp>> chains;
};

CamPlan sample_cam_plan(const CamConfig& cfg, Rng& rng);

/// One augmentation op on 8-bit data (colour channels only).
RasterImage apply_cam_op(const RasterImage& img, const CamOp& op);

/// mix * img + (1 - mix) * sum_i w_i * chain_i(img), quantized once.
RasterImage apply_cam(const RasterImage& img, const CamPlan& plan);

RasterImage cam(const RasterImage& img, const CamConfig& cfg, Rng& rng);

// CDO ---------------------------------------------------------------------

struct CdoConfig {
  int num_min = 1;
  int num_max = 8;
  double size_min = 0.05;  ///< fraction of the image side
  double size_max = 0.20;
  double apply_prob = 0.5;
};

void validate(const CdoConfig& cfg);

enum class DropShape { Rect, Circle };

/// Axis-aligned box [x, x + width) x [y, y + height); circles are inscribed.
struct DropRegion {
  DropShape shape = DropShape::Rect;
  int x = 0, y = 0, width = 0, height = 0;

  bool contains(int px, int py) const;
  friend bool operator==(const DropRegion&, const DropRegion&) = default;
};

struct CdoPlan {
  std::vector<DropRegion> regions;  ///< empty when not applied
};

CdoPlan sample_cdo_plan(int width, int height, const CdoConfig& cfg, Rng& rng);

/// Image samples and mask set to 0 inside every region; untouched elsewhere.
SamplePair apply_cdo(const SamplePair& pair, const CdoPlan& plan);

SamplePair cdo(const SamplePair& pair, const CdoConfig& cfg, Rng& rng);

// EPM ---------------------------------------------------------------------

struct EpmConfig {
  double prob = 0.5;
};

/// Rectangle [x0, x1) x [y0, y1) copied from `partner` into the element.
struct EpmPatch {
  int partner = 0;
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  friend bool operator==(const EpmPatch&, const EpmPatch&) = default;
};

struct EpmPlan {
  std::vector<std::optional<EpmPatch>> patches;  ///< one per element
};

/// CutMix geometry: side ratio sqrt(1 - lambda), lambda ~ U(0,1), uniform centre, clipped.
EpmPatch cutmix_rect(int width, int height, double lambda, double cx, double cy, int partner);

EpmPlan sample_epm_plan(const Batch& batch, const EpmConfig& cfg, Rng& rng);

/// Patches always come from the input batch, never from already-mixed elements.
Batch apply_epm(const Batch& batch, const EpmPlan& plan);

Batch epm(const Batch& batch, const EpmConfig& cfg, Rng& rng);

// Hybrid ------------------------------------------------------------------

enum class Stage { Epm, Cam, Cdo };

std::string_view to_string(Stage s);
Stage stage_from_string(std::string_view name);

struct HybridConfig {
  CamConfig cam;
  CdoConfig cdo;
  EpmConfig epm;
  bool use_cam = true;
  bool use_cdo = true;
  bool use_epm = true;
  std::array<Stage, 3> order{Stage::Epm, Stage::Cam, Stage::Cdo};
};

/// Runs the enabled stages in `order`; with every stage disabled it is the identity.
Batch hybrid(const Batch& batch, const HybridConfig& cfg, Rng& rng);

}  // namespace toolsynth
