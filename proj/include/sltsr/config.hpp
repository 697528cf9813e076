#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sltsr/optics.hpp"

namespace sltsr {

struct PatternConfig {
  /// Patterns in the projector cycle; 0 means n_patterns + 2, the fewest for
  /// which any exposure leaves an unlit marker slot.
  int n_pmax = 0;
  /// Lit fraction of the temporal composite of one exposure.
  double total_density = 0.2;
  /// Scale per-pattern density by 1 / n_patterns with disjoint dots.
  bool equalize = true;
  int dot_radius = 1;
  std::uint64_t seed = 1;
  int marker_rows = 6;
  int marker_gap = 2;
};

struct SceneConfig {
  double depth_mm = 650.0;
  /// Per-interval velocities; the last entry repeats.
  std::vector<double> velocities_mm_s{0.0};
  double acceleration_mm_s2 = 0.0;
  double t_e_s = 1.0 / 3.0;
  /// Whole projector intervals per exposure.
  int n_patterns = 6;
  double start_phase = 0.0;
  int first_pattern = 1;
  std::string texture = "uniform";
  int texture_period_px = 12;
  std::uint64_t texture_seed = 3;
  std::uint64_t noise_seed = 7;
  int substeps = 8;
};

struct DatabaseConfig {
  double step_mm = 0.5;
  double t_e_ref_s = 1.0 / 3.0;
};

struct SearchConfig {
  int window = 12;
  double score_min = 0.3;
  double v_max_mm_s = 100.0;
  std::optional<double> v_step_mm_s;
  int local_radius = 1;
  std::optional<double> v_adjacency_max_mm_s;
  /// Fractional end patterns below this weight are merged into their neighbour.
  double min_weight = 0.1;
  double marker_threshold = 0.05;
  double bp_lambda = 0.1;
  int bp_iterations = 30;
  std::optional<double> bp_truncation;
  /// Stage order; any of "coarse", "bp", "fine", starting with "coarse".
  std::vector<std::string> order{"coarse", "bp", "fine"};
  bool bidirectional = true;
};

struct RunConfig {
  Rig rig;
  PatternConfig patterns;
  SceneConfig scene;
  DatabaseConfig database;
  SearchConfig search;
  int threads = 1;

  int n_pmax() const { return patterns.n_pmax > 0 ? patterns.n_pmax : scene.n_patterns + 2; }
  /// Throws InvalidArgument on inconsistent settings.
  void validate() const;
};

/// Defaults overridden by `j`. Unknown keys are rejected.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);
/// Every setting, including defaults, so a run can be reproduced from it.
nlohmann::json to_json(const RunConfig& config);

/// Applies "section.key=value" overrides (value parsed as JSON, falling back
/// to a string).
RunConfig apply_overrides(const RunConfig& config, const std::vector<std::string>& overrides);

}  // namespace sltsr
