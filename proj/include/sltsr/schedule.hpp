#pragma once

#include <vector>

namespace sltsr {

/// Which patterns one camera exposure integrated, in temporal order, and for
/// what fraction of the exposure each was on.
struct ExposureSchedule {
  /// Zero-based offset of the first observed pattern in the cyclic sequence
  /// 1..n_pmax, i.e. pattern_ids.front() - 1.
  int n_start = 0;
  std::vector<int> pattern_ids;
  /// Exposure fractions, summing to 1.
  std::vector<double> weights;
  /// Number of patterns with nonzero weight (== pattern_ids.size()).
  int n_p = 0;
  double t_e = 0.0;

  /// Checks sizes, weight sum and that ids are consecutive modulo n_pmax.
  void validate(int n_pmax) const;

  /// Largest weight; the fraction of a full pattern interval.
  double full_weight() const;
  /// Duration of a full pattern interval, T_E * full_weight().
  double interval_s() const { return t_e * full_weight(); }
  /// Duration pattern n (0-based) was on.
  double duration_s(int n) const { return t_e * weights.at(static_cast<std::size_t>(n)); }

  /// Uniform schedule of n_p whole intervals starting at `first_id`.
  static ExposureSchedule uniform(int first_id, int n_p, int n_pmax, double t_e);
};

/// Drops fractional first/last patterns whose weight is below `min_weight`,
/// folding their weight into the adjacent pattern (a single remaining pattern
/// is always kept), then equalizes the weights that lie within `snap_tol` of
/// the largest one: those are whole projector intervals measured with noise.
ExposureSchedule matching_schedule(const ExposureSchedule& schedule, double min_weight = 0.1,
                                   double snap_tol = 0.02);

/// Time-reversed schedule: patterns and weights in reverse order.
ExposureSchedule reversed(const ExposureSchedule& schedule);

}  // namespace sltsr
