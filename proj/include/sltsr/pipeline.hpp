#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sltsr/bp.hpp"
#include "sltsr/config.hpp"
#include "sltsr/optics.hpp"
#include "sltsr/patterns.hpp"
#include "sltsr/refdb.hpp"
#include "sltsr/search_coarse.hpp"
#include "sltsr/search_fine.hpp"
#include "sltsr/superres.hpp"

namespace sltsr {

/// The projector cycle (ids 1..n_pmax, markers embedded) and its marker layout.
struct PatternSet {
  std::vector<DotPattern> patterns;
  MarkerGeometry marker;
};

PatternSet make_patterns(const RunConfig& config);
SceneMotion make_scene(const RunConfig& config);
CapturedImage simulate(const RunConfig& config, const PatternSet& set);

/// Rows above the marker strip.
Rect matching_region(const RunConfig& config);

/// Builds the database, or loads it from `cache_dir` when an entry built from
/// identical settings exists there (and stores it otherwise).
ReferenceDatabase make_database(const RunConfig& config, const PatternSet& set,
                                const std::optional<std::filesystem::path>& cache_dir = std::nullopt);

struct Reconstruction {
  ExposureSchedule decoded;
  /// Schedule used for matching (small fractional ends merged).
  ExposureSchedule schedule;
  ResolvedGrid grid;
  std::vector<std::string> stages;
  MotionEstimate coarse;
  /// Result of the last stage that ran.
  MotionEstimate estimate;
  CostVolume volume;
  std::optional<MotionEstimate> reverse;
};

/// Decodes the markers, then runs config.search.order up to and including
/// `last_stage` (all stages when empty).
Reconstruction reconstruct(const RunConfig& config, const ReferenceDatabase& db, const ImageF& capture,
                           const std::string& last_stage = "");

/// Forward sequence, averaged with the reverse pass when one was run.
ShapeSequence super_resolve(const Reconstruction& rec);

/// Simulated ground truth depth at each frame timestamp.
std::vector<ImageD> truth_frames(const RunConfig& config, const std::vector<double>& timestamps_s);

struct TrendConfig {
  RunConfig base;
  std::vector<int> n_patterns{1, 3, 6};
  std::vector<double> velocities_mm_s{50.0};
  std::vector<std::string> textures{"uniform"};
  std::vector<std::uint64_t> seeds{1};
};

TrendConfig parse_trend_config(const nlohmann::json& j);

/// One CSV row per (texture, n_patterns, velocity, seed): simulate, build or
/// reuse the database, reconstruct and score against the plane ground truth.
std::string run_trend_experiment(const TrendConfig& config,
                                 const std::optional<std::filesystem::path>& cache_dir = std::nullopt);

}  // namespace sltsr
