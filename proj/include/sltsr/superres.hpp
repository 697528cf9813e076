#pragma once

#include <vector>

#include "sltsr/image.hpp"
#include "sltsr/refdb.hpp"
#include "sltsr/schedule.hpp"
#include "sltsr/search_coarse.hpp"

namespace sltsr {

/// N_p depth maps recovered from one capture, one per pattern interval.
/// Frame n is the depth at the start of interval n; velocities[n] is the
/// velocity during interval n.
struct ShapeSequence {
  std::vector<ImageD> frames;
  std::vector<ImageD> velocities;
  Mask valid;
  /// Seconds since exposure start, one per frame.
  std::vector<double> timestamps_s;

  int n_frames() const { return static_cast<int>(frames.size()); }
};

/// frame_0 = d0, frame_n = frame_{n-1} + v_{n-1} * dt_{n-1}, where dt_n is the
/// time pattern n of the schedule was on. Invalid pixels are NaN.
ShapeSequence accumulate(const ImageD& d0_mm, const std::vector<ImageD>& velocities_mm_s, const Mask& valid,
                         const ExposureSchedule& schedule);

/// accumulate() on a motion estimate expressed in grid units.
ShapeSequence accumulate(const MotionEstimate& estimate, const ExposureSchedule& schedule);

/// Forward-time sequence from an estimate of the time-reversed problem
/// (start depth = depth at exposure end, reversed and negated velocities):
/// frames are integrated backwards from the end depth.
ShapeSequence accumulate_reverse(const MotionEstimate& reverse_estimate, const ExposureSchedule& schedule);

/// Per-frame, per-pixel mean of two aligned sequences. Valid where both are.
ShapeSequence accumulate_bidirectional(const ShapeSequence& forward, const ShapeSequence& reverse);

}  // namespace sltsr
