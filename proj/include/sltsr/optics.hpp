#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sltsr/image.hpp"
#include "sltsr/patterns.hpp"
#include "sltsr/schedule.hpp"

namespace sltsr {

/// Rectified projector-camera rig with a thin-lens defocus model.
///
/// A projector column u lands on camera column u + disparity(d) - offset for a
/// surface at depth d, where disparity(d) = focal_px * baseline_mm / d. The
/// offset only recenters the projector so every camera column sees the pattern
/// over the working range; it defaults to ceil(disparity(d_min)).
struct Rig {
  double focal_px = 600.0;
  double baseline_mm = 100.0;
  int cam_width = 160;
  int cam_height = 120;
  double d_min_mm = 500.0;
  double d_max_mm = 800.0;
  double focus_depth_mm = 650.0;
  /// Blur sigma in px per unit of |1/d - 1/focus| (px * mm).
  double defocus_gain = 4300.0;
  double noise_sigma = 0.0;
  /// Exposure at which a fully lit surface point reads intensity 1.
  double exposure_unit_s = 1.0 / 3.0;
  /// Radiometric gain applied to every render.
  double gain = 1.0;
  std::optional<double> projector_offset_px;

  double disparity(double depth_mm) const { return focal_px * baseline_mm / depth_mm; }
  double blur_sigma(double depth_mm) const;
  double offset_px() const;
  /// Projector columns needed to cover the camera over [d_min, d_max].
  int projector_width() const;
  void validate() const;
};

/// Axial motion of the scene during one exposure.
///
/// Velocity is piecewise constant per projector interval: entry q applies while
/// the q-th pattern of the exposure is on (the last entry repeats). An optional
/// constant acceleration is added on top: v(t) = v_q + a * t.
struct SceneMotion {
  ImageD depth0;
  std::vector<double> velocities_mm_s;
  double acceleration_mm_s2 = 0.0;
  double t_e = 1.0 / 3.0;
  double t_proj = 1.0 / 18.0;
  double start_phase = 0.0;
  /// Multiplicative surface albedo in camera coordinates; empty means 1.
  ImageF albedo;

  /// floor(T_E / T_proj).
  int n_p() const;
  /// Displacement along the optical axis since exposure start (mm).
  double displacement(double t) const;
  double velocity(double t) const;
  /// Mean velocity while the q-th pattern of the exposure is on.
  double interval_mean_velocity(int q) const;

  /// Fronto-parallel plane at `depth_mm` with T_proj = t_e / n_p.
  static SceneMotion plane(const Rig& rig, double depth_mm, std::vector<double> velocities_mm_s, double t_e,
                           int n_p);
};

struct CapturedImage {
  ImageF intensity;
  double t_e = 0.0;
  /// Ground truth; only known in simulation.
  ExposureSchedule true_schedule;
};

/// Noise-free unit-exposure render of a plane, accumulated into `acc` with
/// the given weight. Measurement rows only; the marker strip is untouched.
void add_plane(const Rig& rig, const DotPattern& pattern, double depth_mm, double weight, ImageD& acc);

/// Static image of a fronto-parallel plane: the pattern shifted by the
/// disparity, blurred by the defocus sigma and scaled by exposure/unit.
/// Noise is added when rig.noise_sigma > 0.
ImageF render_static(const Rig& rig, const DotPattern& pattern, double depth_mm, double exposure_s,
                     std::uint64_t noise_seed = 0);

struct CaptureOptions {
  /// Midpoint-rule sub-steps per full projector interval (at least 8).
  int substeps = 8;
  std::uint64_t noise_seed = 0;
};

/// Integrates the moving scene over one exposure while the projector cycles
/// through `patterns` (the first entry is the one on at exposure start,
/// `scene.start_phase` of it already elapsed). The marker strip integrates
/// each pattern's slot for the time it was on.
CapturedImage render_capture(const Rig& rig, std::span<const DotPattern> patterns, const SceneMotion& scene,
                             const CaptureOptions& options = {});

/// Rotates a cyclic pattern set so pattern `first_id` comes first.
std::vector<DotPattern> rotate_to(std::span<const DotPattern> patterns, int first_id);

}  // namespace sltsr
