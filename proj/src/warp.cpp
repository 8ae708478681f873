#include "toolsynth/warp.hpp"

#include "toolsynth/filters.hpp"

#include <cmath>
#include <stdexcept>

namespace toolsynth {

namespace {

Eigen::Vector2d apply_map(const Eigen::Matrix3d& m, double x, double y) {
  const Eigen::Vector3d p = m * Eigen::Vector3d(x, y, 1.0);
  return p.hnormalized();
}

}  // namespace

RasterImage warp_bilinear(const RasterImage& src, const Eigen::Matrix3d& out_to_src, int out_width,
                          int out_height, Border border) {
  RasterImage out(out_width, out_height, src.channels());
  const int w = src.width();
  const int h = src.height();
  const int nc = src.channel_count();
  double sample[4];
  for (int y = 0; y < out_height; ++y)
    for (int x = 0; x < out_width; ++x) {
      const Eigen::Vector2d p = apply_map(out_to_src, x, y);
      const double fx0 = std::floor(p.x());
      const double fy0 = std::floor(p.y());
      const double ax = p.x() - fx0;
      const double ay = p.y() - fy0;
      const int x0 = static_cast<int>(fx0);
      const int y0 = static_cast<int>(fy0);
      for (int c = 0; c < nc; ++c) sample[c] = 0.0;
      for (int j = 0; j < 2; ++j)
        for (int i = 0; i < 2; ++i) {
          const double wgt = (i ? ax : 1.0 - ax) * (j ? ay : 1.0 - ay);
          if (wgt == 0.0) continue;
          int sx = x0 + i;
          int sy = y0 + j;
          if (border == Border::Reflect) {
            sx = reflect101(sx, w);
            sy = reflect101(sy, h);
          } else if (sx < 0 || sy < 0 || sx >= w || sy >= h) {
            continue;
          }
          for (int c = 0; c < nc; ++c) sample[c] += wgt * src.at(sx, sy, c);
        }
      for (int c = 0; c < nc; ++c) out.at(x, y, c) = quantize(sample[c]);
    }
  return out;
}

BinaryMask warp_nearest(const BinaryMask& src, const Eigen::Matrix3d& out_to_src, int out_width,
                        int out_height) {
  BinaryMask out(out_width, out_height);
  for (int y = 0; y < out_height; ++y)
    for (int x = 0; x < out_width; ++x) {
      const Eigen::Vector2d p = apply_map(out_to_src, x, y);
      const double rx = std::floor(p.x() + 0.5);
      const double ry = std::floor(p.y() + 0.5);
      if (rx < 0 || ry < 0 || rx >= src.width() || ry >= src.height()) continue;
      out.set(x, y, src.at(static_cast<int>(rx), static_cast<int>(ry)) != 0);
    }
  return out;
}

Eigen::Matrix3d scale_map(double src_w, double src_h, double dst_w, double dst_h) {
  // x_dst + 0.5 = (x_src + 0.5) * dst_w / src_w
  const double sx = dst_w / src_w;
  const double sy = dst_h / src_h;
  Eigen::Matrix3d m;
  m << sx, 0, 0.5 * sx - 0.5, 0, sy, 0.5 * sy - 0.5, 0, 0, 1;
  return m;
}

RasterImage resize_bilinear(const RasterImage& src, int width, int height) {
  if (src.width() == width && src.height() == height) return src;
  return warp_bilinear(src, scale_map(width, height, src.width(), src.height()), width, height,
                       Border::Reflect);
}

BinaryMask resize_nearest(const BinaryMask& src, int width, int height) {
  if (src.width() == width && src.height() == height) return src;
  return warp_nearest(src, scale_map(width, height, src.width(), src.height()), width, height);
}

Eigen::Matrix3d homography_from_points(const std::array<Eigen::Vector2d, 4>& from,
                                       const std::array<Eigen::Vector2d, 4>& to) {
  Eigen::Matrix<double, 8, 8> a = Eigen::Matrix<double, 8, 8>::Zero();
  Eigen::Matrix<double, 8, 1> b;
  for (int i = 0; i < 4; ++i) {
    const double x = from[i].x(), y = from[i].y();
    const double u = to[i].x(), v = to[i].y();
    a.row(2 * i) << x, y, 1, 0, 0, 0, -u * x, -u * y;
    a.row(2 * i + 1) << 0, 0, 0, x, y, 1, -v * x, -v * y;
    b(2 * i) = u;
    b(2 * i + 1) = v;
  }
  Eigen::FullPivLU<Eigen::Matrix<double, 8, 8>> lu(a);
  if (!lu.isInvertible()) throw std::invalid_argument("homography_from_points: degenerate points");
  const Eigen::Matrix<double, 8, 1> hvec = lu.solve(b);
  Eigen::Matrix3d hmat;
  hmat << hvec(0), hvec(1), hvec(2), hvec(3), hvec(4), hvec(5), hvec(6), hvec(7), 1.0;
  return hmat;
}

}  // namespace toolsynth
