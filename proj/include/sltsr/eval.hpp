#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sltsr/image.hpp"
#include "sltsr/superres.hpp"

namespace sltsr {

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

/// Camera-frame points of the valid, finite pixels of a depth map (pinhole
/// with the principal point at the image centre).
std::vector<Point3> back_project(const ImageD& depth_mm, const Mask& valid, double focal_px);

/// RMS orthogonal distance to the total-least-squares plane. Throws
/// DegenerateGeometry for fewer than 3 points or collinear points.
double fit_plane_rmse(std::span<const Point3> points);
double fit_plane_rmse(const ImageD& depth_mm, const Mask& valid, double focal_px);

/// RMS of est - truth over pixels that are valid and finite in both.
double depth_rmse(const ImageD& est_mm, const ImageD& truth_mm, const Mask& valid);

/// CSV with one row per interval: mean velocity over the valid pixels of
/// `region`.
std::string export_velocity_profile(const ShapeSequence& sequence, const Rect& region);

enum class Texture { uniform, checker, noise, grain };

Texture parse_texture(const std::string& name);
std::string texture_name(Texture texture);

/// Multiplicative surface albedo in [0, 1]. `period_px` is the checker cell or
/// grain correlation length.
ImageF make_albedo(Texture texture, int width, int height, int period_px, std::uint64_t seed);

}  // namespace sltsr
