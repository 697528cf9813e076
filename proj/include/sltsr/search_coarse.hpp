#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sltsr/image.hpp"
#include "sltsr/refdb.hpp"
#include "sltsr/schedule.hpp"

namespace sltsr {

/// Velocity axis of the (depth, velocity) search. The depth axis is always
/// every database slice.
struct SearchGrid {
  double v_max_mm_s = 100.0;
  /// Defaults to step / interval duration, i.e. one velocity step changes the
  /// per-interval sweep by exactly one database slice.
  std::optional<double> v_step_mm_s;
};

struct ResolvedGrid {
  int n_depths = 0;
  int k_max = 0;
  double v_step_mm_s = 0.0;

  int n_velocities() const { return 2 * k_max + 1; }
  /// Signed velocity step for velocity index vi in [0, n_velocities).
  int steps_of(int vi) const { return vi - k_max; }
  double velocity(int steps) const { return steps * v_step_mm_s; }
};

ResolvedGrid resolve_grid(const SearchGrid& grid, const ReferenceDatabase& db, const ExposureSchedule& schedule);

/// Per-pixel NCC scores over depth. The velocity axis is reduced by max
/// (ties to the smaller velocity) because a full (depth, velocity) volume of a
/// full frame does not fit in memory; `full` keeps it on request.
struct CostVolume {
  int width = 0;
  int height = 0;
  int n_depths = 0;
  int n_velocities = 0;
  /// [depth][y][x]; NaN where no hypothesis at that depth was scoreable.
  std::vector<double> depth_score;
  /// [depth][y][x] signed velocity steps achieving depth_score.
  std::vector<std::int16_t> depth_velocity;
  /// Optional [depth][velocity][y][x].
  std::vector<float> full;

  CostVolume() = default;
  CostVolume(int width, int height, int n_depths, int n_velocities, bool keep_full);

  std::size_t at(int x, int y, int d) const {
    return (static_cast<std::size_t>(d) * static_cast<std::size_t>(height) + static_cast<std::size_t>(y)) *
               static_cast<std::size_t>(width) + static_cast<std::size_t>(x);
  }
  double score(int x, int y, int d) const { return depth_score[at(x, y, d)]; }
  float full_score(int x, int y, int d, int vi) const;
};

/// Depth and per-interval velocity per pixel, in grid units.
struct MotionEstimate {
  Image<std::int32_t> depth_index;
  /// One map per scheduled pattern interval, in signed velocity steps.
  std::vector<Image<std::int32_t>> velocity_steps;
  ImageF score;
  Mask valid;
  double d_min_mm = 0.0;
  double step_mm = 0.0;
  double v_step_mm_s = 0.0;

  int n_intervals() const { return static_cast<int>(velocity_steps.size()); }
  /// Depth in mm; NaN where invalid.
  ImageF depth_mm() const;
  ImageF velocity_mm_s(int interval) const;
  std::size_t valid_count() const;
};

struct CoarseOptions {
  int window = 12;
  double score_min = 0.3;
  int threads = 1;
  /// Pixels usable for matching (e.g. above the marker strip). Only pixels
  /// whose whole window lies inside are estimated. Defaults to the frame.
  std::optional<Rect> region;
  bool keep_full_volume = false;
};

struct CoarseResult {
  MotionEstimate estimate;
  CostVolume volume;
  ResolvedGrid grid;
};

/// Output pixels whose window lies inside `region`.
Rect estimable_rect(const Rect& region, int window);

/// Initial per-pixel depth and constant velocity: the argmax over every
/// (depth slice, velocity) of NCC(synthesized patch, captured patch). Ties go
/// to the smaller depth index, then the smaller velocity. Hypotheses sweeping
/// outside the database are skipped; pixels with no scoreable hypothesis or a
/// best score below score_min are invalid.
CoarseResult estimate_initial(const ReferenceDatabase& db, const ImageF& capture, const ExposureSchedule& schedule,
                              const SearchGrid& grid, const CoarseOptions& options);

}  // namespace sltsr
