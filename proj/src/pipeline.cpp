#include "sltsr/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <sstream>

#include "sltsr/errors.hpp"
#include "sltsr/eval.hpp"
#include "sltsr/sync.hpp"

namespace sltsr {

namespace {

MarkerGeometry marker_of(const RunConfig& c) {
  return MarkerGeometry::bottom_strip(c.rig.cam_width, c.rig.cam_height, c.patterns.marker_rows, c.n_pmax(),
                                      c.patterns.marker_gap);
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

double rms(const std::vector<double>& v) {
  if (v.empty()) return std::nan("");
  double ss = 0.0;
  for (double x : v) ss += x * x;
  return std::sqrt(ss / static_cast<double>(v.size()));
}

}  // namespace

PatternSet make_patterns(const RunConfig& c) {
  c.validate();
  const int w = c.rig.projector_width();
  const int h = c.rig.cam_height;
  const int n = c.n_pmax();
  PatternSet set;
  set.marker = marker_of(c);
  std::vector<DotPattern> raw;
  if (c.patterns.equalize) {
    raw = generate_equalized_set(n, c.patterns.total_density * n / c.scene.n_patterns, w, h, c.patterns.seed,
                                 c.patterns.dot_radius);
  } else {
    for (int id = 1; id <= n; ++id)
      raw.push_back(generate_pattern(w, h, c.patterns.total_density, id, c.patterns.seed, c.patterns.dot_radius));
  }
  for (const auto& p : raw) set.patterns.push_back(embed_marker(p, set.marker));
  return set;
}

SceneMotion make_scene(const RunConfig& c) {
  SceneMotion s = SceneMotion::plane(c.rig, c.scene.depth_mm, c.scene.velocities_mm_s, c.scene.t_e_s, c.scene.n_patterns);
  s.acceleration_mm_s2 = c.scene.acceleration_mm_s2;
  s.start_phase = c.scene.start_phase;
  const Texture tex = parse_texture(c.scene.texture);
  if (tex != Texture::uniform)
    s.albedo = make_albedo(tex, c.rig.cam_width, c.rig.cam_height, c.scene.texture_period_px, c.scene.texture_seed);
  return s;
}

CapturedImage simulate(const RunConfig& c, const PatternSet& set) {
  c.validate();
  const auto cycle = rotate_to(set.patterns, c.scene.first_pattern);
  CaptureOptions opts;
  opts.substeps = c.scene.substeps;
  opts.noise_seed = c.scene.noise_seed;
  return render_capture(c.rig, cycle, make_scene(c), opts);
}

Rect matching_region(const RunConfig& c) { return Rect{0, 0, c.rig.cam_width, marker_of(c).strip_y0}; }

ReferenceDatabase make_database(const RunConfig& c, const PatternSet& set,
                                const std::optional<std::filesystem::path>& cache_dir) {
  std::filesystem::path entry;
  if (cache_dir) {
    const nlohmann::json full = to_json(c);
    nlohmann::json key = {{"rig", full["rig"]},
                          {"patterns", full["patterns"]},
                          {"n_pmax", c.n_pmax()},
                          {"n_patterns", c.patterns.equalize ? c.scene.n_patterns : 0},
                          {"database", full["database"]}};
    key["rig"].erase("noise_sigma");
    char name[32];
    std::snprintf(name, sizeof name, "db-%016llx", static_cast<unsigned long long>(fnv1a(key.dump())));
    entry = *cache_dir / name;
    if (std::filesystem::exists(entry / "manifest.json")) {
      try {
        return load_database(entry);
      } catch (const CorruptDatabase&) {
        // Rebuilt below.
      }
    }
  }
  ReferenceDatabase db = build_database(c.rig, set.patterns, c.database.step_mm, c.database.t_e_ref_s, c.threads);
  if (cache_dir) save_database(db, entry);
  return db;
}

Reconstruction reconstruct(const RunConfig& c, const ReferenceDatabase& db, const ImageF& capture,
                           const std::string& last_stage) {
  c.validate();
  if (!last_stage.empty() &&
      std::find(c.search.order.begin(), c.search.order.end(), last_stage) == c.search.order.end())
    throw InvalidArgument("stage '" + last_stage + "' is not in search.order");
  Reconstruction rec;
  rec.decoded = decode_markers(capture, c.scene.t_e_s, marker_of(c), c.n_pmax(), c.search.marker_threshold);
  rec.schedule = matching_schedule(rec.decoded, c.search.min_weight);
  rec.schedule.validate(c.n_pmax());
  rec.grid = resolve_grid(SearchGrid{c.search.v_max_mm_s, c.search.v_step_mm_s}, db, rec.schedule);
  const Rect region = matching_region(c);

  bool fine_ran = false;
  for (const auto& stage : c.search.order) {
    if (stage == "coarse") {
      CoarseOptions o;
      o.window = c.search.window;
      o.score_min = c.search.score_min;
      o.threads = c.threads;
      o.region = region;
      SearchGrid g{c.search.v_max_mm_s, c.search.v_step_mm_s};
      CoarseResult r = estimate_initial(db, capture, rec.schedule, g, o);
      rec.coarse = r.estimate;
      rec.estimate = std::move(r.estimate);
      rec.volume = std::move(r.volume);
    } else if (stage == "bp") {
      BpOptions o;
      o.lambda = c.search.bp_lambda;
      o.iterations = c.search.bp_iterations;
      o.truncation = c.search.bp_truncation;
      o.threads = c.threads;
      const auto labels = bp_refine(rec.volume, rec.estimate.valid, o);
      rec.estimate = apply_depth_labels(rec.estimate, rec.volume, labels);
    } else {
      FineOptions o;
      o.window = c.search.window;
      o.local_radius = c.search.local_radius;
      o.v_adjacency_max_mm_s = c.search.v_adjacency_max_mm_s;
      o.score_min = c.search.score_min;
      o.threads = c.threads;
      o.region = region;
      FineResult r = refine(db, capture, rec.schedule, rec.grid, rec.estimate, o);
      rec.estimate = std::move(r.estimate);
      rec.volume = std::move(r.volume);
      fine_ran = true;
    }
    rec.stages.push_back(stage);
    if (stage == last_stage) break;
  }
  if (fine_ran && c.search.bidirectional) {
    FineOptions o;
    o.window = c.search.window;
    o.local_radius = c.search.local_radius;
    o.v_adjacency_max_mm_s = c.search.v_adjacency_max_mm_s;
    o.score_min = c.search.score_min;
    o.threads = c.threads;
    o.region = region;
    rec.reverse = refine_reverse(db, capture, rec.schedule, rec.grid, rec.estimate, o).estimate;
  }
  return rec;
}

ShapeSequence super_resolve(const Reconstruction& rec) {
  ShapeSequence fwd = accumulate(rec.estimate, rec.schedule);
  if (!rec.reverse) return fwd;
  return accumulate_bidirectional(fwd, accumulate_reverse(*rec.reverse, rec.schedule));
}

std::vector<ImageD> truth_frames(const RunConfig& c, const std::vector<double>& timestamps_s) {
  const SceneMotion scene = make_scene(c);
  std::vector<ImageD> out;
  for (double t : timestamps_s) {
    ImageD d = scene.depth0;
    const double dz = scene.displacement(t);
    for (double& v : d.pixels()) v += dz;
    out.push_back(std::move(d));
  }
  return out;
}

TrendConfig parse_trend_config(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidArgument("trend config must be an object");
  TrendConfig t;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    try {
      if (k == "base") t.base = parse_config(it.value());
      else if (k == "n_patterns") t.n_patterns = it.value().get<std::vector<int>>();
      else if (k == "velocities_mm_s") t.velocities_mm_s = it.value().get<std::vector<double>>();
      else if (k == "textures") t.textures = it.value().get<std::vector<std::string>>();
      else if (k == "seeds") t.seeds = it.value().get<std::vector<std::uint64_t>>();
      else throw InvalidArgument("unknown trend config key '" + k + "'");
    } catch (const nlohmann::json::exception& e) {
      throw InvalidArgument("trend config key '" + k + "': " + e.what());
    }
  }
  if (t.n_patterns.empty() || t.velocities_mm_s.empty() || t.textures.empty() || t.seeds.empty())
    throw InvalidArgument("trend sweep axes must be non-empty");
  for (const auto& tex : t.textures) parse_texture(tex);
  return t;
}

std::string run_trend_experiment(const TrendConfig& tc, const std::optional<std::filesystem::path>& cache_dir) {
  std::ostringstream csv;
  csv << std::fixed << std::setprecision(6);
  csv << "texture,n_patterns,velocity_mm_s,seed,valid_fraction,plane_rmse_mm,depth_rmse_mm,d0_rmse_mm\n";
  for (const auto& tex : tc.textures) {
    for (int n : tc.n_patterns) {
      RunConfig c = tc.base;
      c.scene.n_patterns = n;
      c.scene.texture = tex;
      c.scene.first_pattern = 1;
      c.validate();
      const PatternSet set = make_patterns(c);
      const ReferenceDatabase db = make_database(c, set, cache_dir);
      for (double v : tc.velocities_mm_s) {
        for (std::uint64_t seed : tc.seeds) {
          c.scene.velocities_mm_s = {v};
          c.scene.noise_seed = seed;
          c.scene.texture_seed = seed;
          const CapturedImage cap = simulate(c, set);
          const Reconstruction rec = reconstruct(c, db, cap.intensity);
          const ShapeSequence seq = super_resolve(rec);
          const auto truth = truth_frames(c, seq.timestamps_s);
          std::vector<double> plane, depth;
          for (int f = 0; f < seq.n_frames(); ++f) {
            try {
              plane.push_back(fit_plane_rmse(seq.frames[static_cast<std::size_t>(f)], seq.valid, c.rig.focal_px));
              depth.push_back(depth_rmse(seq.frames[static_cast<std::size_t>(f)], truth[static_cast<std::size_t>(f)], seq.valid));
            } catch (const DegenerateGeometry&) {
            } catch (const InvalidArgument&) {
            }
          }
          const Rect est = estimable_rect(matching_region(c), c.search.window);
          std::size_t valid = 0;
          for (auto m : seq.valid.pixels()) valid += m ? 1 : 0;
          csv << tex << ',' << n << ',' << v << ',' << seed << ','
              << static_cast<double>(valid) / (static_cast<double>(est.width) * est.height) << ',' << rms(plane) << ','
              << rms(depth) << ',' << (depth.empty() ? std::nan("") : depth.front()) << '\n';
        }
      }
    }
  }
  return csv.str();
}

}  // namespace sltsr
