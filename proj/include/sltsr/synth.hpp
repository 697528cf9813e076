#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "sltsr/image.hpp"
#include "sltsr/refdb.hpp"
#include "sltsr/schedule.hpp"

namespace sltsr {

/// Inclusive slice range [lo, hi] of one pattern and its schedule weight.
struct SweepTerm {
  int pattern_id = 0;
  int lo = 0;
  int hi = 0;
  double weight = 0.0;
};

/// Depth at exposure start plus one velocity per pattern interval. A single
/// velocity means constant motion.
struct MotionHypothesis {
  double d0_mm = 0.0;
  std::vector<double> velocities_mm_s;

  static MotionHypothesis constant(double d0_mm, double v_mm_s) { return {d0_mm, {v_mm_s}}; }
};

/// Depth swept while pattern `n` of the schedule was on at velocity v, in
/// (fractional) database slices: v * duration_n / step.
double interval_sweep(const ExposureSchedule& schedule, int n, double step_mm, double v_mm_s);

/// Slice offsets of the N_p + 1 interval boundaries from the start slice.
/// Boundary n is the accumulated sweep of intervals 0..n-1 rounded to the
/// nearest slice; the sweep is accumulated left to right in double, the same
/// way every search path does it. `velocities` has one entry (constant
/// motion) or one per interval.
std::vector<int> sweep_offsets(const ExposureSchedule& schedule, double step_mm, std::span<const double> velocities_mm_s);

/// Nearest-slice rounding of an accumulated sweep.
inline int boundary_offset(double total) { return static_cast<int>(std::lround(total)); }

/// Slice ranges per pattern for a start slice and boundary offsets.
/// Pattern n spans [d0 + b_n, d0 + b_{n+1}], endpoints sorted ascending, so
/// the boundary slice is shared by adjacent intervals. Returns nullopt when
/// any range leaves [0, n_slices).
std::optional<std::vector<SweepTerm>> sweep_terms(const ExposureSchedule& schedule, int d0_index,
                                                  std::span<const int> offsets, int n_slices);

/// Converts a millimetre hypothesis into sweep terms. Throws
/// HypothesisOutOfRange when the swept depth leaves the database.
std::vector<SweepTerm> plan_sweep(const ReferenceDatabase& db, const ExposureSchedule& schedule,
                                  const MotionHypothesis& hypothesis);

/// (T_E / T_E_ref) / sum of schedule weights.
double synth_scale(const ReferenceDatabase& db, const ExposureSchedule& schedule);

/// Running sums of one pattern's slices along depth over a pixel region:
/// level k holds sum_{i<k} slice_i, so [lo, hi] sums to level(hi+1) - level(lo).
/// Levels are accumulated in ascending slice order in double precision, so
/// every pixel's values are independent of the region it was built over.
class DepthIntegral {
 public:
  DepthIntegral(const ReferenceDatabase& db, int pattern_id, Rect region, int levels = -1);

  const Rect& region() const { return region_; }
  int levels() const { return levels_; }
  int pattern_id() const { return pattern_id_; }
  const double* level(int k) const {
    return data_.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(region_.width) *
                              static_cast<std::size_t>(region_.height);
  }

 private:
  int pattern_id_ = 0;
  Rect region_;
  int levels_ = 0;
  std::vector<double> data_;
};

/// Adds weight * mean(slices lo..hi) into `acc` for `count` consecutive
/// pixels starting at region-local offset `offset`. This is the single place
/// where the per-pattern term of a synthesized patch is evaluated.
inline void accumulate_term(const DepthIntegral& integral, const SweepTerm& term, std::size_t offset,
                            std::size_t count, double* acc) {
  const double* top = integral.level(term.hi + 1) + offset;
  const double* bottom = integral.level(term.lo) + offset;
  const double n = static_cast<double>(term.hi - term.lo + 1);
  const double w = term.weight;
  for (std::size_t i = 0; i < count; ++i) acc[i] += w * ((top[i] - bottom[i]) / n);
}

/// Synthesized reference image over `rect` (which must lie inside every
/// integral's region). `integrals` are looked up by pattern id.
ImageD synthesize(std::span<const DepthIntegral* const> integrals, std::span<const SweepTerm> terms, double scale,
                  const Rect& rect);

/// Constant-velocity reference patch.
ImageD synth_const(const ReferenceDatabase& db, const ExposureSchedule& schedule, double d0_mm, double v_mm_s,
                   Pixel center, int window);

/// Reference patch for one velocity per interval. With equal velocities the
/// output is bit-identical to synth_const.
ImageD synth_fine(const ReferenceDatabase& db, const ExposureSchedule& schedule, double d0_mm,
                  std::span<const double> velocities_mm_s, Pixel center, int window);

/// Window moments. Each sum is taken row by row (ascending columns), then the
/// row sums are added in ascending row order; the searches reproduce exactly
/// this order.
struct Moments {
  double n = 0.0;
  double a = 0.0;
  double b = 0.0;
  double aa = 0.0;
  double bb = 0.0;
  double ab = 0.0;
};

Moments window_moments(const ImageD& a, const ImageD& b);

inline constexpr double kUndefinedScore = std::numeric_limits<double>::quiet_NaN();

inline bool score_defined(double s) { return !std::isnan(s); }

/// Zero-mean normalized cross-correlation from moments; NaN when either side
/// has (numerically) zero variance.
inline double ncc_from_moments(const Moments& m) {
  const double va = m.aa - m.a * m.a / m.n;
  const double vb = m.bb - m.b * m.b / m.n;
  if (!(va > 1e-12 * m.aa) || !(vb > 1e-12 * m.bb)) return kUndefinedScore;
  const double cov = m.ab - m.a * m.b / m.n;
  const double r = cov / std::sqrt(va * vb);
  return r > 1.0 ? 1.0 : (r < -1.0 ? -1.0 : r);
}

/// NCC of two equally sized patches in [-1, 1], or kUndefinedScore.
double ncc(const ImageD& a, const ImageD& b);

}  // namespace sltsr
