#pragma once

#include "sltsr/image.hpp"
#include "sltsr/patterns.hpp"
#include "sltsr/schedule.hpp"

namespace sltsr {

struct MarkerReadout {
  /// Mean intensity of each slot, index k-1 for pattern id k.
  std::vector<double> slot_means;
};

MarkerReadout read_markers(const ImageF& capture, const MarkerGeometry& geometry);

/// Recovers the exposure schedule from the marker strip of a capture.
///
/// A slot is active when its mean exceeds `threshold` times the brightest
/// slot. Active slots must form one run in cyclic order 1..n_pmax; the run's
/// first slot gives n_start and the normalized slot means give the weights.
/// The sensor is assumed linear, so slot intensity is proportional to the
/// time each pattern was on.
ExposureSchedule decode_markers(const ImageF& capture, double t_e, const MarkerGeometry& geometry, int n_pmax,
                                double threshold = 0.05);

}  // namespace sltsr
