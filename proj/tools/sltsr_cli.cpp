// Command-line front end: simulation, database, reconstruction, evaluation.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sltsr/errors.hpp"
#include "sltsr/eval.hpp"
#include "sltsr/image_io.hpp"
#include "sltsr/pipeline.hpp"
#include "sltsr/sync.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sltsr;

namespace {

enum Exit { kOk = 0, kInvalidConfig = 2, kDataError = 3, kDegenerate = 4 };

struct Common {
  std::string config;
  std::vector<std::string> overrides;
  int threads = 0;
  std::string out = ".";
};

RunConfig resolve(const Common& c) {
  RunConfig cfg = c.config.empty() ? parse_config(json::object()) : load_config(c.config);
  cfg = apply_overrides(cfg, c.overrides);
  if (c.threads > 0) cfg.threads = c.threads;
  cfg.validate();
  return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

fs::path prepare_out(const Common& c, const RunConfig& cfg) {
  const fs::path out(c.out);
  fs::create_directories(out);
  write_json(out / "resolved_config.json", to_json(cfg));
  return out;
}

json schedule_json(const ExposureSchedule& s) {
  return {{"n_start", s.n_start}, {"pattern_ids", s.pattern_ids}, {"weights", s.weights}, {"n_p", s.n_p}, {"t_e_s", s.t_e}};
}

ImageF read_image(const std::string& path) {
  const fs::path p(path);
  if (p.extension() == ".pgm") return read_pgm(p);
  return read_pfm(p);
}

ImageF to_float(const ImageD& d) { return image_cast<float>(d); }

ImageF mask_image(const Mask& m) {
  ImageF out(m.width(), m.height());
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) out(x, y) = m(x, y) ? 1.0f : 0.0f;
  return out;
}

std::optional<fs::path> cache_dir() {
  if (const char* env = std::getenv("SLTSR_DB_CACHE"); env && *env) return fs::path(env);
  return std::nullopt;
}

ReferenceDatabase obtain_database(const std::string& db_dir, const RunConfig& cfg) {
  if (!db_dir.empty()) return load_database(db_dir);
  return make_database(cfg, make_patterns(cfg), cache_dir());
}

void write_estimate(const fs::path& out, const MotionEstimate& e) {
  write_pfm(out / "depth.pfm", e.depth_mm());
  for (int n = 0; n < e.n_intervals(); ++n) {
    char name[32];
    std::snprintf(name, sizeof name, "velocity_%02d.pfm", n + 1);
    write_pfm(out / name, e.velocity_mm_s(n));
  }
  write_pfm(out / "score.pfm", e.score);
  write_pgm8(out / "valid.pgm", mask_image(e.valid));
}

void write_volume(const fs::path& out, const CostVolume& v, const MotionEstimate& e) {
  std::vector<float> data(v.depth_score.begin(), v.depth_score.end());
  std::ofstream f(out / "cost_volume.f32", std::ios::binary);
  f.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size() * sizeof(float)));
  if (!f) throw IoError("cannot write cost volume");
  write_json(out / "cost_volume.json", {{"file", "cost_volume.f32"},
                                        {"dtype", "float32"},
                                        {"endianness", "little"},
                                        {"layout", "depth,y,x"},
                                        {"width", v.width},
                                        {"height", v.height},
                                        {"n_depths", v.n_depths},
                                        {"d_min_mm", e.d_min_mm},
                                        {"step_mm", e.step_mm},
                                        {"reduction", "max over velocity"}});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structured-light temporal super-resolution toolkit"};
  app.require_subcommand(1);

  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", common.config, "Run configuration (JSON)");
    sub->add_option("-s,--set", common.overrides, "Override, e.g. scene.n_patterns=3");
    sub->add_option("-j,--threads", common.threads, "Worker threads");
    sub->add_option("-o,--out", common.out, "Output directory");
  };

  auto* gen = app.add_subcommand("gen-patterns", "Write the projector pattern cycle as PGM");
  add_common(gen);

  auto* sim = app.add_subcommand("simulate", "Render one capture of the configured scene");
  add_common(sim);

  auto* bdb = app.add_subcommand("build-db", "Build the reference database");
  add_common(bdb);

  std::string capture_path;
  auto* dec = app.add_subcommand("decode-markers", "Print the exposure schedule read from the markers");
  add_common(dec);
  dec->add_option("capture", capture_path, "Capture (PFM or PGM)")->required();

  std::string db_dir, stage = "fine";
  bool save_volume = false;
  auto* rec = app.add_subcommand("reconstruct", "Estimate depth and velocities");
  add_common(rec);
  rec->add_option("capture", capture_path, "Capture (PFM or PGM)")->required();
  rec->add_option("--db", db_dir, "Database directory (built or taken from $SLTSR_DB_CACHE when omitted)");
  rec->add_option("--stage", stage, "Last stage to run")->check(CLI::IsMember({"coarse", "bp", "fine"}));
  rec->add_flag("--save-volume", save_volume, "Also write the cost volume");

  auto* sr = app.add_subcommand("superres", "Write the temporally super-resolved depth frames");
  add_common(sr);
  sr->add_option("capture", capture_path, "Capture (PFM or PGM)")->required();
  sr->add_option("--db", db_dir, "Database directory");

  std::string frames_dir;
  std::vector<int> region_arg;
  auto* ev = app.add_subcommand("eval", "Score superres frames against the simulated ground truth");
  add_common(ev);
  ev->add_option("frames", frames_dir, "Directory written by superres")->required();
  ev->add_option("--region", region_arg, "Velocity profile region x y w h")->expected(4);

  std::string trend_config;
  auto* tr = app.add_subcommand("trend", "Run a trend experiment sweep and write CSV");
  tr->add_option("trend_config", trend_config, "Trend configuration (JSON)")->required();
  tr->add_option("-o,--out", common.out, "Output directory");
  tr->add_option("-j,--threads", common.threads, "Worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalidConfig;
  }

  try {
    if (tr->parsed()) {
      std::ifstream in(trend_config);
      if (!in) throw IoError("cannot open " + trend_config);
      json j;
      try {
        j = json::parse(in);
      } catch (const json::exception& e) {
        throw InvalidArgument(std::string("trend config is not valid JSON: ") + e.what());
      }
      TrendConfig tc = parse_trend_config(j);
      if (common.threads > 0) tc.base.threads = common.threads;
      const fs::path out(common.out);
      fs::create_directories(out);
      json snapshot = {{"base", to_json(tc.base)},
                       {"n_patterns", tc.n_patterns},
                       {"velocities_mm_s", tc.velocities_mm_s},
                       {"textures", tc.textures},
                       {"seeds", tc.seeds}};
      write_json(out / "resolved_config.json", snapshot);
      const std::string csv = run_trend_experiment(tc, cache_dir());
      write_text(out / "trend.csv", csv);
      std::cout << csv;
      return kOk;
    }

    const RunConfig cfg = resolve(common);
    const fs::path out = prepare_out(common, cfg);

    if (gen->parsed()) {
      const PatternSet set = make_patterns(cfg);
      json index = json::array();
      for (const auto& p : set.patterns) {
        char name[32];
        std::snprintf(name, sizeof name, "pattern_%02d.pgm", p.pattern_id);
        write_pgm8(out / name, p.intensity);
        index.push_back({{"pattern_id", p.pattern_id}, {"file", name}, {"dot_density", p.dot_density}});
      }
      const auto& m = set.marker;
      write_json(out / "patterns.json",
                 {{"patterns", index},
                  {"marker", {{"strip_y0", m.strip_y0}, {"strip_rows", m.strip_rows}, {"slot_x0", m.slot_x0},
                              {"slot_width", m.slot_width}, {"slot_gap", m.slot_gap}, {"slot_count", m.slot_count}}}});
    } else if (sim->parsed()) {
      const CapturedImage cap = simulate(cfg, make_patterns(cfg));
      write_pfm(out / "capture.pfm", cap.intensity);
      float peak = 0.0f;
      for (float v : cap.intensity.pixels()) peak = std::max(peak, v);
      write_pgm16(out / "capture.pgm", cap.intensity, peak > 0.0f ? peak : 1.0f);
      write_json(out / "truth.json", {{"schedule", schedule_json(cap.true_schedule)},
                                      {"depth_mm", cfg.scene.depth_mm},
                                      {"velocities_mm_s", cfg.scene.velocities_mm_s},
                                      {"acceleration_mm_s2", cfg.scene.acceleration_mm_s2}});
    } else if (bdb->parsed()) {
      const ReferenceDatabase db = build_database(cfg.rig, make_patterns(cfg).patterns, cfg.database.step_mm,
                                                  cfg.database.t_e_ref_s, cfg.threads);
      save_database(db, out / "db");
      std::cout << "database: " << db.n_patterns() << " patterns x " << db.n_slices() << " slices -> "
                << (out / "db").string() << "\n";
    } else if (dec->parsed()) {
      const ImageF cap = read_image(capture_path);
      const MarkerGeometry m = make_patterns(cfg).marker;
      const ExposureSchedule s = decode_markers(cap, cfg.scene.t_e_s, m, cfg.n_pmax(), cfg.search.marker_threshold);
      const json j = schedule_json(s);
      write_json(out / "schedule.json", j);
      std::cout << j.dump(2) << "\n";
    } else if (rec->parsed()) {
      const ImageF cap = read_image(capture_path);
      const ReferenceDatabase db = obtain_database(db_dir, cfg);
      const Reconstruction r = reconstruct(cfg, db, cap, stage);
      write_estimate(out, r.estimate);
      write_json(out / "schedule.json", {{"decoded", schedule_json(r.decoded)},
                                         {"matching", schedule_json(r.schedule)},
                                         {"stages", r.stages},
                                         {"v_step_mm_s", r.grid.v_step_mm_s},
                                         {"valid_pixels", r.estimate.valid_count()}});
      if (save_volume) write_volume(out, r.volume, r.estimate);
    } else if (sr->parsed()) {
      const ImageF cap = read_image(capture_path);
      const ReferenceDatabase db = obtain_database(db_dir, cfg);
      const Reconstruction r = reconstruct(cfg, db, cap);
      const ShapeSequence seq = super_resolve(r);
      json frames = json::array();
      for (int f = 0; f < seq.n_frames(); ++f) {
        char depth[32], vel[32];
        std::snprintf(depth, sizeof depth, "frame_%02d.pfm", f + 1);
        std::snprintf(vel, sizeof vel, "velocity_%02d.pfm", f + 1);
        write_pfm(out / depth, to_float(seq.frames[static_cast<std::size_t>(f)]));
        write_pfm(out / vel, to_float(seq.velocities[static_cast<std::size_t>(f)]));
        frames.push_back({{"index", f + 1},
                          {"file", depth},
                          {"velocity_file", vel},
                          {"timestamp_s", seq.timestamps_s[static_cast<std::size_t>(f)]},
                          {"pattern_id", r.schedule.pattern_ids[static_cast<std::size_t>(f)]}});
      }
      write_pgm8(out / "valid.pgm", mask_image(seq.valid));
      write_json(out / "index.json", {{"frames", frames},
                                      {"valid_mask", "valid.pgm"},
                                      {"schedule", schedule_json(r.schedule)},
                                      {"bidirectional", r.reverse.has_value()}});
    } else if (ev->parsed()) {
      std::ifstream in(fs::path(frames_dir) / "index.json");
      if (!in) throw IoError("no index.json in " + frames_dir);
      json index;
      try {
        index = json::parse(in);
      } catch (const json::exception& e) {
        throw IoError(std::string("index.json is not valid JSON: ") + e.what());
      }
      ShapeSequence seq;
      const ImageF valid = read_pgm(fs::path(frames_dir) / index.at("valid_mask").get<std::string>());
      seq.valid = Mask(valid.width(), valid.height());
      for (int y = 0; y < valid.height(); ++y)
        for (int x = 0; x < valid.width(); ++x) seq.valid(x, y) = valid(x, y) > 0.5f ? 1 : 0;
      for (const auto& f : index.at("frames")) {
        seq.frames.push_back(image_cast<double>(read_pfm(fs::path(frames_dir) / f.at("file").get<std::string>())));
        seq.velocities.push_back(
            image_cast<double>(read_pfm(fs::path(frames_dir) / f.at("velocity_file").get<std::string>())));
        seq.timestamps_s.push_back(f.at("timestamp_s").get<double>());
      }
      const auto truth = truth_frames(cfg, seq.timestamps_s);
      json rows = json::array();
      for (int f = 0; f < seq.n_frames(); ++f) {
        const auto& d = seq.frames[static_cast<std::size_t>(f)];
        rows.push_back({{"index", f + 1},
                        {"plane_rmse_mm", fit_plane_rmse(d, seq.valid, cfg.rig.focal_px)},
                        {"depth_rmse_mm", depth_rmse(d, truth[static_cast<std::size_t>(f)], seq.valid)}});
      }
      const Rect region = region_arg.size() == 4 ? Rect{region_arg[0], region_arg[1], region_arg[2], region_arg[3]}
                                                 : matching_region(cfg);
      write_text(out / "velocity_profile.csv", export_velocity_profile(seq, region));
      const json report = {{"frames", rows}};
      write_json(out / "eval.json", report);
      std::cout << report.dump(2) << "\n";
    }
    return kOk;
  } catch (const DegenerateGeometry& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDegenerate;
  } catch (const InvalidArgument& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return kInvalidConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  }
}
