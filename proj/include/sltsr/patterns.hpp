#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sltsr/image.hpp"

namespace sltsr {

/// Peripheral strip of per-pattern synchronization slots.
///
/// The strip occupies rows [strip_y0, strip_y0 + strip_rows) over the full
/// pattern width. Slot k (1-based pattern id) covers columns
/// [slot_x0 + (k-1)*pitch + slot_gap/2, ... + slot_width) where
/// pitch = slot_width + slot_gap. The measurement region is everything above
/// the strip.
struct MarkerGeometry {
  int strip_y0 = 0;
  int strip_rows = 0;
  int slot_x0 = 0;
  int slot_width = 0;
  int slot_gap = 0;
  int slot_count = 0;

  Rect strip(int pattern_width) const { return Rect{0, strip_y0, pattern_width, strip_rows}; }
  Rect slot_of(int pattern_id) const;
  /// Rows usable for depth measurement.
  Rect measurement(int width, int height) const { return Rect{0, 0, width, strip_y0 < height ? strip_y0 : height}; }
  /// Throws InvalidArgument unless every slot fits inside width x height.
  void validate(int width, int height) const;

  /// Bottom strip of `strip_rows` rows with `slot_count` slots spread over
  /// `width` columns.
  static MarkerGeometry bottom_strip(int width, int height, int strip_rows, int slot_count, int slot_gap = 2);

  bool operator==(const MarkerGeometry&) const = default;
};

/// Binary random-dot projector image. Intensity is exactly 0 or 1.
struct DotPattern {
  int pattern_id = 1;
  std::uint64_t seed = 0;
  double dot_density = 0.0;
  int dot_radius = 1;
  ImageF intensity;
  std::optional<MarkerGeometry> marker;

  int width() const { return intensity.width(); }
  int height() const { return intensity.height(); }
};

/// Pixels set by one dot: a disc of the given radius (radius 0 is one pixel).
std::vector<Pixel> dot_footprint(int radius);

/// Independent uniform dot placement; lit pixel count is round(density*w*h).
/// Distinct pattern ids with the same seed draw from distinct streams.
DotPattern generate_pattern(int width, int height, double density, int pattern_id, std::uint64_t seed,
                            int dot_radius = 1);

/// `n_patterns` patterns (ids 1..n) at density total_density / n each. Dots of
/// different patterns never share a pixel, so the temporal composite of the
/// whole set has lit fraction total_density regardless of n.
std::vector<DotPattern> generate_equalized_set(int n_patterns, double total_density, int width, int height,
                                               std::uint64_t seed, int dot_radius = 1);

/// Clears the strip and lights the slot of `pattern.pattern_id`. Pixels above
/// the strip are left untouched. Idempotent.
DotPattern embed_marker(const DotPattern& pattern, const MarkerGeometry& geometry);

/// Fraction of pixels in `region` with intensity above 0.5.
double lit_fraction(const ImageF& image, const Rect& region);
inline double lit_fraction(const ImageF& image) { return lit_fraction(image, image.bounds()); }

}  // namespace sltsr
