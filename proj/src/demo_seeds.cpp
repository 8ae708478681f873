#include "toolsynth/demo_seeds.hpp"

#include "toolsynth/png_io.hpp"
#include "toolsynth/rng.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace toolsynth {

namespace {

struct Capsule {
  Eigen::Vector2d a, b;
  double radius;

  /// Signed distance to the capsule surface, with the axial coordinate t in [0,1].
  double distance(const Eigen::Vector2d& p, double& t) const {
    const Eigen::Vector2d ab = b - a;
    t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
    return (p - (a + t * ab)).norm() - radius;
  }
};

std::uint8_t to_byte(double v) { return quantize<double>(std::clamp(v, 0.0, 255.0)); }

}  // namespace

RasterImage demo_background(int width, int height, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "demo-background"));
  struct Wave {
    double fx, fy, phase, amp;
  };
  std::vector<Wave> waves;
  for (int i = 0; i < 12; ++i)
    waves.push_back({rng.uniform(-0.06, 0.06), rng.uniform(-0.06, 0.06), rng.uniform(0, 2 * std::numbers::pi),
                     rng.uniform(0.3, 1.0) / (1 + i / 4)});
  std::vector<Capsule> vessels;
  for (int i = 0; i < 6; ++i) {
    Eigen::Vector2d a(rng.uniform(0, width), rng.uniform(0, height));
    Eigen::Vector2d b(rng.uniform(0, width), rng.uniform(0, height));
    vessels.push_back({a, b, rng.uniform(1.0, 3.5)});
  }
  RasterImage img(width, height, Channels::RGB);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double n = 0;
      for (const auto& w : waves) n += w.amp * std::sin(w.fx * x + w.fy * y + w.phase);
      double vessel = 0;
      const Eigen::Vector2d p(x + 0.5, y + 0.5);
      for (const auto& v : vessels) {
        double t;
        vessel = std::max(vessel, std::clamp(-v.distance(p, t) / v.radius, 0.0, 1.0));
      }
      const double shade = 0.75 + 0.08 * n;
      img.at(x, y, 0) = to_byte(shade * 215 - 40 * vessel);
      img.at(x, y, 1) = to_byte(shade * 105 - 45 * vessel);
      img.at(x, y, 2) = to_byte(shade * 100 - 25 * vessel);
    }
  }
  return img;
}

RasterImage demo_instrument(int class_id, int variant, int size, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "demo-instrument",
                      {static_cast<std::uint64_t>(class_id), static_cast<std::uint64_t>(variant)}));
  const double s = size;
  const double angle = rng.uniform(-0.5, 0.5) + std::numbers::pi / 4;
  const Eigen::Vector2d dir(std::cos(angle), std::sin(angle));
  const Eigen::Vector2d normal(-dir.y(), dir.x());
  const Eigen::Vector2d tip = Eigen::Vector2d(0.55 * s, 0.55 * s) + rng.uniform(-0.08, 0.08) * s * normal;
  const Eigen::Vector2d base = tip - 0.75 * s * dir;
  const double shaft_r = s * (0.045 + 0.006 * (class_id % 4));

  std::vector<Capsule> shaft{{base, tip - 0.12 * s * dir, shaft_r}};
  std::vector<Capsule> metal;
  const Eigen::Vector2d wrist = tip - 0.12 * s * dir;
  const double jaw_len = s * (0.12 + 0.02 * (class_id % 3));
  const double open = rng.uniform(0.05, 0.35) * ((class_id % 2) ? 1.0 : 0.6);
  switch (class_id % 4) {
    case 0:  // two jaws
    case 1:
      for (double sign : {-1.0, 1.0}) {
        const double a = angle + sign * open;
        metal.push_back({wrist, wrist + jaw_len * Eigen::Vector2d(std::cos(a), std::sin(a)), shaft_r * 0.55});
      }
      break;
    case 2:  // single straight blade
      metal.push_back({wrist, wrist + jaw_len * 1.3 * dir, shaft_r * 0.45});
      break;
    default:  // probe with a rounded head
      metal.push_back({wrist, wrist + jaw_len * dir, shaft_r * 0.7});
      metal.push_back({wrist + jaw_len * dir, wrist + jaw_len * dir, shaft_r * 1.1});
      break;
  }
  if (class_id >= 4) metal.push_back({wrist - 0.03 * s * dir, wrist + 0.02 * s * dir, shaft_r * 1.15});

  const double tint = 0.6 + 0.05 * class_id;
  RasterImage img(size, size, Channels::RGBA, 0);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const Eigen::Vector2d p(x + 0.5, y + 0.5);
      double t, best = 1e9, across = 0;
      bool is_metal = false;
      for (const auto& c : metal) {
        const double d = c.distance(p, t);
        if (d < best) best = d, is_metal = true, across = d / c.radius;
      }
      for (const auto& c : shaft) {
        const double d = c.distance(p, t);
        if (d < best) best = d, is_metal = false, across = d / c.radius;
      }
      if (best > 0) continue;
      const double light = 0.55 + 0.45 * std::sqrt(std::max(0.0, -across));
      if (is_metal) {
        img.at(x, y, 0) = to_byte(200 * light);
        img.at(x, y, 1) = to_byte(205 * light);
        img.at(x, y, 2) = to_byte(215 * light);
      } else {
        img.at(x, y, 0) = to_byte(60 * light * tint);
        img.at(x, y, 1) = to_byte(62 * light * tint);
        img.at(x, y, 2) = to_byte(70 * light);
      }
      img.at(x, y, 3) = 255;
    }
  }
  return img;
}

void write_demo_seeds(const std::filesystem::path& dir, const std::vector<std::string>& classes,
                      int per_class, std::uint64_t seed, int background_size, int sprite_size) {
  save_png(demo_background(background_size, background_size, seed), dir / "background.png");
  for (std::size_t c = 0; c < classes.size(); ++c)
    for (int k = 0; k < per_class; ++k)
      save_png(demo_instrument(static_cast<int>(c), k, sprite_size, seed),
               dir / classes[c] / (std::to_string(k) + ".png"));
}

}  // namespace toolsynth
