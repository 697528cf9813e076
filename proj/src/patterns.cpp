#include "sltsr/patterns.hpp"

#include <cmath>
#include <string>

#include "sltsr/rng.hpp"

namespace sltsr {
namespace {

void check_density(double density, const char* what) {
  if (!(density > 0.0 && density < 1.0))
    throw InvalidArgument(std::string(what) + " must lie in (0, 1), got " + std::to_string(density));
}

// Stamps dots until exactly `target` pixels are lit. Pixels whose `blocked`
// flag is set are never lit. The final stamp may be partial.
void place_dots(ImageF& image, std::vector<unsigned char>& blocked, std::size_t target, int radius, Rng& rng) {
  const auto footprint = dot_footprint(radius);
  const int w = image.width();
  const int h = image.height();
  std::size_t free_pixels = 0;
  for (unsigned char b : blocked) free_pixels += b ? 0 : 1;
  if (target > free_pixels) throw InvalidArgument("dot density leaves no room for remaining patterns");
  std::size_t lit = 0;
  while (lit < target) {
    const int cx = static_cast<int>(rng.below(static_cast<std::uint64_t>(w)));
    const int cy = static_cast<int>(rng.below(static_cast<std::uint64_t>(h)));
    for (const Pixel& o : footprint) {
      const int x = cx + o.x;
      const int y = cy + o.y;
      if (x < 0 || y < 0 || x >= w || y >= h) continue;
      const std::size_t idx = static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x);
      if (blocked[idx]) continue;
      blocked[idx] = 1;
      image(x, y) = 1.0f;
      if (++lit == target) break;
    }
  }
}

std::size_t target_count(double density, int width, int height) {
  return static_cast<std::size_t>(std::llround(density * static_cast<double>(width) * static_cast<double>(height)));
}

}  // namespace

Rect MarkerGeometry::slot_of(int pattern_id) const {
  if (pattern_id < 1 || pattern_id > slot_count)
    throw IndexError("pattern id " + std::to_string(pattern_id) + " has no marker slot");
  const int pitch = slot_width + slot_gap;
  return Rect{slot_x0 + (pattern_id - 1) * pitch + slot_gap / 2, strip_y0, slot_width, strip_rows};
}

void MarkerGeometry::validate(int width, int height) const {
  if (strip_rows <= 0 || slot_width <= 0 || slot_count <= 0 || slot_gap < 0)
    throw InvalidArgument("marker geometry needs positive strip rows, slot width and slot count");
  if (strip_y0 <= 0) throw InvalidArgument("marker strip leaves no measurement region");
  const Rect bounds{0, 0, width, height};
  for (int k = 1; k <= slot_count; ++k)
    if (!bounds.contains(slot_of(k)))
      throw InvalidArgument("marker slot " + std::to_string(k) + " lies outside the pattern");
}

MarkerGeometry MarkerGeometry::bottom_strip(int width, int height, int strip_rows, int slot_count, int slot_gap) {
  if (slot_count <= 0) throw InvalidArgument("slot count must be positive");
  MarkerGeometry g;
  g.strip_rows = strip_rows;
  g.strip_y0 = height - strip_rows;
  g.slot_count = slot_count;
  g.slot_gap = slot_gap;
  g.slot_width = width / slot_count - slot_gap;
  g.slot_x0 = 0;
  g.validate(width, height);
  return g;
}

std::vector<Pixel> dot_footprint(int radius) {
  if (radius < 0) throw InvalidArgument("dot radius must be non-negative");
  std::vector<Pixel> out;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx)
      if (dx * dx + dy * dy <= radius * radius) out.push_back({dx, dy});
  return out;
}

DotPattern generate_pattern(int width, int height, double density, int pattern_id, std::uint64_t seed,
                            int dot_radius) {
  if (width <= 0 || height <= 0) throw InvalidArgument("pattern dimensions must be positive");
  check_density(density, "dot density");
  DotPattern p;
  p.pattern_id = pattern_id;
  p.seed = seed;
  p.dot_density = density;
  p.dot_radius = dot_radius;
  p.intensity = ImageF(width, height, 0.0f);
  std::vector<unsigned char> blocked(p.intensity.size(), 0);
  Rng rng(mix_seed(seed, static_cast<std::uint64_t>(pattern_id)));
  place_dots(p.intensity, blocked, target_count(density, width, height), dot_radius, rng);
  return p;
}

std::vector<DotPattern> generate_equalized_set(int n_patterns, double total_density, int width, int height,
                                               std::uint64_t seed, int dot_radius) {
  if (n_patterns < 1) throw InvalidArgument("need at least one pattern");
  if (width <= 0 || height <= 0) throw InvalidArgument("pattern dimensions must be positive");
  check_density(total_density, "total density");
  const double per = total_density / n_patterns;
  check_density(per, "per-pattern density");
  std::vector<DotPattern> set;
  std::vector<unsigned char> occupied(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
  for (int id = 1; id <= n_patterns; ++id) {
    DotPattern p;
    p.pattern_id = id;
    p.seed = seed;
    p.dot_density = per;
    p.dot_radius = dot_radius;
    p.intensity = ImageF(width, height, 0.0f);
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(id)));
    place_dots(p.intensity, occupied, target_count(per, width, height), dot_radius, rng);
    set.push_back(std::move(p));
  }
  return set;
}

DotPattern embed_marker(const DotPattern& pattern, const MarkerGeometry& geometry) {
  geometry.validate(pattern.width(), pattern.height());
  const Rect slot = geometry.slot_of(pattern.pattern_id);
  DotPattern out = pattern;
  const Rect strip = geometry.strip(pattern.width());
  for (int y = strip.y0; y < strip.y1(); ++y)
    for (int x = strip.x0; x < strip.x1(); ++x) out.intensity(x, y) = slot.contains(x, y) ? 1.0f : 0.0f;
  out.marker = geometry;
  return out;
}

double lit_fraction(const ImageF& image, const Rect& region) {
  if (region.empty() || !image.bounds().contains(region)) throw InvalidArgument("lit_fraction region invalid");
  std::size_t lit = 0;
  for (int y = region.y0; y < region.y1(); ++y)
    for (int x = region.x0; x < region.x1(); ++x) lit += image(x, y) > 0.5f ? 1 : 0;
  return static_cast<double>(lit) / (static_cast<double>(region.width) * region.height);
}

}  // namespace sltsr
