#pragma once

#include <cstdint>
#include <optional>

#include "sltsr/image.hpp"
#include "sltsr/search_coarse.hpp"

namespace sltsr {

struct BpOptions {
  /// Weight of the L1 depth difference (per slice) between 4-neighbours.
  double lambda = 0.1;
  int iterations = 30;
  /// Caps the pairwise cost; unset keeps it plain L1.
  std::optional<double> truncation;
  /// Messages count as converged once no entry moves by more than this in one
  /// iteration (roundoff alone keeps them from repeating exactly). Negative
  /// disables early stopping.
  double tolerance = 1e-9;
  int threads = 1;
};

struct BpReport {
  int iterations = 0;
  /// True when the messages stopped changing before the iteration cap.
  bool converged = false;
  /// Largest message change in the last iteration.
  double last_change = 0.0;
};

/// Data cost of depth slice d at a pixel: 1 - score, 2 where the score is
/// undefined, 0 everywhere for invalid pixels.
double data_cost(const CostVolume& volume, const Mask& valid, int x, int y, int d);

/// Per-pixel argmin of the data cost; -1 where invalid. Costs within 1e-9 of
/// the minimum count as tied and go to the smaller slice, as in bp_refine.
Image<std::int32_t> wta_labels(const CostVolume& volume, const Mask& valid);

/// Min-sum loopy belief propagation over depth slices on the 4-connected
/// grid. Messages are updated synchronously, normalized to a zero minimum and
/// computed in linear time with the L1 distance transform. Stops early once
/// the messages reach a fixed point. Returns -1 at invalid pixels.
Image<std::int32_t> bp_refine(const CostVolume& volume, const Mask& valid, const BpOptions& options,
                              BpReport* report = nullptr);

/// Data plus pairwise energy of a labeling, over valid pixels and the edges
/// joining two valid pixels.
double labeling_energy(const CostVolume& volume, const Mask& valid, const Image<std::int32_t>& labels,
                       const BpOptions& options);

/// Copies BP depths into an estimate. Velocities follow the best velocity the
/// volume recorded at the new depth.
MotionEstimate apply_depth_labels(const MotionEstimate& estimate, const CostVolume& volume,
                                  const Image<std::int32_t>& labels);

}  // namespace sltsr
