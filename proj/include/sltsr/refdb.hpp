#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "sltsr/image.hpp"
#include "sltsr/optics.hpp"
#include "sltsr/patterns.hpp"

namespace sltsr {

/// Read-only window into one database slice. Rows are `stride` floats apart.
struct PatchView {
  const float* origin = nullptr;
  int stride = 0;
  Rect rect;
  /// True when the requested window was clipped at the image border.
  bool partial = false;

  float operator()(int x, int y) const {
    return origin[static_cast<std::ptrdiff_t>(y) * stride + x];
  }
  int width() const { return rect.width; }
  int height() const { return rect.height; }
};

/// Static reference images indexed by (pattern id, depth slice).
///
/// Slice i of every pattern is a noise-free image of a plane at
/// depth_of(i) = d_min + i * step, stored as float32, row-major, depth-major.
/// The database replaces geometric calibration: matching only ever reads it.
class ReferenceDatabase {
 public:
  struct Meta {
    double d_min_mm = 0.0;
    double d_max_mm = 0.0;
    double step_mm = 0.0;
    double t_e_ref_s = 0.0;
    int width = 0;
    int height = 0;
    int n_slices = 0;
    std::vector<int> pattern_ids;
    bool operator==(const Meta&) const = default;
  };

  ReferenceDatabase() = default;
  /// `stacks[k]` holds n_slices * width * height floats for meta.pattern_ids[k].
  ReferenceDatabase(Meta meta, std::vector<std::vector<float>> stacks);

  const Meta& meta() const { return meta_; }
  double d_min() const { return meta_.d_min_mm; }
  double d_max() const { return meta_.d_max_mm; }
  double step() const { return meta_.step_mm; }
  double t_e_ref() const { return meta_.t_e_ref_s; }
  int width() const { return meta_.width; }
  int height() const { return meta_.height; }
  int n_slices() const { return meta_.n_slices; }
  int n_patterns() const { return static_cast<int>(meta_.pattern_ids.size()); }
  const std::vector<int>& pattern_ids() const { return meta_.pattern_ids; }
  bool has_pattern(int pattern_id) const;

  double depth_of(int index) const { return meta_.d_min_mm + index * meta_.step_mm; }
  /// Nearest slice, ties toward the smaller depth. Throws IndexError outside
  /// [d_min - step/2, d_max + step/2].
  int index_of(double depth_mm) const;

  /// Whole slice as a row-major span.
  std::span<const float> slice(int pattern_id, int depth_index) const;
  PatchView slice_patch(int pattern_id, int depth_index, Pixel center, int window) const;

  bool operator==(const ReferenceDatabase&) const = default;

 private:
  std::size_t stack_of(int pattern_id) const;

  Meta meta_;
  std::vector<std::vector<float>> stacks_;
};

/// floor((d_max - d_min) / step) + 1 with a small tolerance for float error.
int slice_count(double d_min, double d_max, double step);

/// Renders one noise-free static image per (pattern, depth slice) over the
/// rig's depth range with exposure `t_e_ref_s`.
ReferenceDatabase build_database(const Rig& rig, std::span<const DotPattern> patterns, double step_mm,
                                 double t_e_ref_s, int threads = 1);

/// Writes manifest.json plus one little-endian float32 stack per pattern.
void save_database(const ReferenceDatabase& db, const std::filesystem::path& dir);
/// Validates the manifest against the stack files before reading pixels.
/// Any mismatch raises CorruptDatabase.
ReferenceDatabase load_database(const std::filesystem::path& dir);

}  // namespace sltsr
