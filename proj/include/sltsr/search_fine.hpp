#pragma once

#include <optional>

#include "sltsr/image.hpp"
#include "sltsr/refdb.hpp"
#include "sltsr/schedule.hpp"
#include "sltsr/search_coarse.hpp"

namespace sltsr {

struct FineOptions {
  int window = 12;
  /// Search radius around the initial estimate, in depth slices and in
  /// velocity steps per interval.
  int local_radius = 1;
  /// Largest allowed velocity change between adjacent intervals (mm/s).
  /// Defaults to two velocity steps.
  std::optional<double> v_adjacency_max_mm_s;
  double score_min = 0.3;
  int threads = 1;
  std::optional<Rect> region;
};

struct FineResult {
  MotionEstimate estimate;
  /// Depth axis only: best score over the admissible velocity vectors at each
  /// searched depth (NaN elsewhere). depth_velocity holds the first
  /// interval's velocity steps of that vector.
  CostVolume volume;
};

/// Refines every valid pixel of `initial` to a start depth and one velocity
/// per interval. Depths within local_radius slices of the initial depth and
/// velocity vectors within local_radius steps of the initial per-interval
/// velocities are enumerated depth-first; a vector is admissible when every
/// adjacent pair differs by at most v_adjacency_max. Candidates within 1e-9 of
/// the best score are tied; the one with the smallest L1 distance (in steps)
/// from the initial estimate wins, then the first in (depth, v_1, ..., v_Np)
/// lexicographic order. Invalid initial pixels stay invalid.
FineResult refine(const ReferenceDatabase& db, const ImageF& capture, const ExposureSchedule& schedule,
                  const ResolvedGrid& grid, const MotionEstimate& initial, const FineOptions& options);

/// Maps a forward estimate to the time-reversed parameterization: the start
/// depth becomes the depth reached at the end of the exposure and velocities
/// are negated and reversed. Pixels whose end depth leaves the database are
/// marked invalid.
MotionEstimate reverse_initial(const MotionEstimate& forward, const ReferenceDatabase& db,
                               const ExposureSchedule& schedule);

/// Fine search of the time-reversed problem, anchored at the forward end
/// depth. The result is expressed in reversed time (see reverse_initial).
FineResult refine_reverse(const ReferenceDatabase& db, const ImageF& capture, const ExposureSchedule& schedule,
                          const ResolvedGrid& grid, const MotionEstimate& forward, const FineOptions& options);

}  // namespace sltsr
