#pragma once

#include "toolsynth/image.hpp"

#include <Eigen/Dense>

#include <array>

namespace toolsynth {

// Coordinates are pixel centres: pixel (x, y) sits at (x, y); the image
// spans [-0.5, w - 0.5] x [-0.5, h - 0.5]. Maps are given output -> source.

enum class Border { Reflect, Zero };

/// Bilinear resampling of every channel.
RasterImage warp_bilinear(const RasterImage& src, const Eigen::Matrix3d& out_to_src, int out_width,
                          int out_height, Border border);

/// Nearest-neighbour resampling; pixels mapping outside the source are 0.
BinaryMask warp_nearest(const BinaryMask& src, const Eigen::Matrix3d& out_to_src, int out_width,
                        int out_height);

RasterImage resize_bilinear(const RasterImage& src, int width, int height);
BinaryMask resize_nearest(const BinaryMask& src, int width, int height);

/// Maps the rectangle [0,src_w) x [0,src_h) (pixel edges) onto [0,dst_w) x [0,dst_h).
Eigen::Matrix3d scale_map(double src_w, double src_h, double dst_w, double dst_h);

/// Homography H with H * from[i] ~ to[i] for four point correspondences.
Eigen::Matrix3d homography_from_points(const std::array<Eigen::Vector2d, 4>& from,
                                       const std::array<Eigen::Vector2d, 4>& to);

}  // namespace toolsynth
