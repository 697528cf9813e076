// Acceptance checks: one PASS/FAIL line per criterion. Exit status is 0 unless
// --strict is given and a criterion failed, so that ctest records the report
// without hiding it behind a red build.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "sltsr/bp.hpp"
#include "sltsr/errors.hpp"
#include "sltsr/eval.hpp"
#include "sltsr/rng.hpp"
#include "sltsr/search_fine.hpp"
#include "sltsr/superres.hpp"
#include "sltsr/sync.hpp"

using namespace sltsr;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s << std::setprecision(precision) << v;
  return s.str();
}

std::string pct(double f) { return fmt(100.0 * f, 4) + "%"; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Mid-size rig used by the trend and motion checks: 96 x 72 px, 241 slices.
RunConfig mid_config() {
  RunConfig c = testing::small_config(96, 72, 560.0, 680.0, 600.0, 6);
  c.threads = 1;
  return c;
}

struct Run {
  RunConfig config;
  Reconstruction rec;
  ShapeSequence sequence;
};

Run run_pipeline(const RunConfig& c, const PatternSet& set, const ReferenceDatabase& db) {
  Run r{c, {}, {}};
  const CapturedImage cap = simulate(c, set);
  r.rec = reconstruct(c, db, cap.intensity);
  r.sequence = super_resolve(r.rec);
  return r;
}

// RMS over frames of the plane-fit RMSE of each super-resolved frame.
double plane_rmse(const Run& r) {
  double ss = 0.0;
  int n = 0;
  for (const auto& f : r.sequence.frames) {
    const double e = fit_plane_rmse(f, r.sequence.valid, r.config.rig.focal_px);
    ss += e * e;
    ++n;
  }
  return std::sqrt(ss / n);
}

// Fraction of valid pixels whose start depth (and, when v_tol > 0, every
// interval velocity) lies within tolerance of the truth.
struct Accuracy {
  std::size_t valid = 0;
  double both = 0.0;
  double depth_only = 0.0;
};

Accuracy accuracy(const MotionEstimate& e, double depth, double d_tol, double v, double v_tol) {
  Accuracy a;
  std::size_t ok_both = 0, ok_depth = 0;
  const ImageF d = e.depth_mm();
  for (int y = 0; y < d.height(); ++y)
    for (int x = 0; x < d.width(); ++x) {
      if (!e.valid(x, y)) continue;
      ++a.valid;
      const bool dep = std::abs(d(x, y) - depth) <= d_tol + 1e-9;
      bool vel = true;
      for (const auto& vs : e.velocity_steps)
        if (std::abs(vs(x, y) * e.v_step_mm_s - v) > v_tol + 1e-9) vel = false;
      ok_depth += dep ? 1 : 0;
      ok_both += dep && vel ? 1 : 0;
    }
  if (a.valid) {
    a.both = static_cast<double>(ok_both) / static_cast<double>(a.valid);
    a.depth_only = static_cast<double>(ok_depth) / static_cast<double>(a.valid);
  }
  return a;
}

Outcome static_exactness() {
  Outcome o{true, ""};
  for (int np : {1, 3, 6}) {
    RunConfig c;
    c.scene.n_patterns = np;
    c.scene.depth_mm = 650.0;
    c.threads = 1;
    const PatternSet set = make_patterns(c);
    const ReferenceDatabase db = make_database(c, set);
    const CapturedImage cap = simulate(c, set);
    const auto t0 = std::chrono::steady_clock::now();
    const Reconstruction rec = reconstruct(c, db, cap.intensity);
    const double secs = seconds_since(t0);
    const Accuracy a = accuracy(rec.estimate, 650.0, db.step(), 0.0, -1.0);
    const bool ok = a.valid > 0 && a.depth_only >= 0.99 && secs < 120.0;
    o.pass = o.pass && ok;
    o.detail += "N_p=" + std::to_string(np) + ": " + pct(a.depth_only) + " of " + std::to_string(a.valid) + " px in " +
                fmt(secs, 3) + " s; ";
  }
  o.detail += "160x120, 601 slices, need >=99% and <120 s";
  return o;
}

Outcome moving_plane() {
  RunConfig c;
  c.scene.depth_mm = 600.0;
  c.scene.velocities_mm_s = {50.0};
  c.scene.n_patterns = 6;
  c.rig.noise_sigma = 0.01;
  c.threads = 1;
  const PatternSet set = make_patterns(c);
  const ReferenceDatabase db = make_database(c, set);
  const CapturedImage cap = simulate(c, set);
  const Reconstruction rec = reconstruct(c, db, cap.intensity, "coarse");
  const double vs = rec.grid.v_step_mm_s;
  const Accuracy a = accuracy(rec.coarse, 600.0, db.step(), 50.0, vs);

  RunConfig clean = c;
  clean.rig.noise_sigma = 0.0;
  const Reconstruction rec0 = reconstruct(clean, db, simulate(clean, set).intensity, "coarse");
  const Accuracy a0 = accuracy(rec0.coarse, 600.0, db.step(), 50.0, vs);
  return {a.valid > 0 && a.both >= 0.95,
          pct(a.both) + " of " + std::to_string(a.valid) + " px within 0.5 mm and " + fmt(vs) +
              " mm/s (depth alone " + pct(a.depth_only) + "; noise-free " + pct(a0.both) + "); need >=95%"};
}

Outcome pattern_count_trend() {
  Outcome o{true, ""};
  for (const std::string tex : {"uniform", "checker", "noise", "grain"}) {
    std::vector<double> rmse;
    for (int np : {1, 3, 6}) {
      RunConfig c = mid_config();
      c.scene.n_patterns = np;
      c.scene.texture = tex;
      c.scene.velocities_mm_s = {50.0};
      c.rig.noise_sigma = 0.01;
      const PatternSet set = make_patterns(c);
      rmse.push_back(plane_rmse(run_pipeline(c, set, make_database(c, set))));
    }
    const bool ok = rmse[1] <= rmse[0] && rmse[2] <= rmse[1];
    o.pass = o.pass && ok;
    o.detail += tex + " " + fmt(rmse[0]) + "/" + fmt(rmse[1]) + "/" + fmt(rmse[2]) + (ok ? "" : " (not monotone)") + "; ";
  }
  o.detail += "plane RMSE mm at N_p=1/3/6, v=50 mm/s";
  return o;
}

Outcome velocity_trend() {
  const std::vector<double> levels{15.0, 35.0, 55.0, 75.0};
  auto sweep = [&](int np, const std::vector<double>& vs) {
    RunConfig c = mid_config();
    c.scene.n_patterns = np;
    c.rig.noise_sigma = 0.01;
    const PatternSet set = make_patterns(c);
    const ReferenceDatabase db = make_database(c, set);
    std::vector<double> out;
    for (double v : vs) {
      c.scene.velocities_mm_s = {v};
      out.push_back(plane_rmse(run_pipeline(c, set, db)));
    }
    return out;
  };
  const auto one = sweep(1, levels);
  const auto six = sweep(6, {0.0, levels.back()});
  bool increasing = true;
  for (std::size_t k = 1; k < one.size(); ++k) increasing = increasing && one[k] > one[k - 1];
  const bool bounded = six[1] <= 3.0 * six[0];
  std::string d = "N_p=1 RMSE at";
  for (std::size_t k = 0; k < levels.size(); ++k) d += " " + fmt(levels[k]) + ":" + fmt(one[k]);
  d += increasing ? " (increasing)" : " (not strictly increasing)";
  d += "; N_p=6 static " + fmt(six[0]) + ", at " + fmt(levels.back()) + " mm/s " + fmt(six[1]) + " (ratio " +
       fmt(six[1] / six[0], 3) + ", need <=3)";
  return {increasing && bounded, d};
}

struct Line {
  double slope = 0.0;
  double r2 = 0.0;
};

Line fit_line(const std::vector<double>& y) {
  const double n = static_cast<double>(y.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    mx += static_cast<double>(k);
    my += y[k];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    const double dx = static_cast<double>(k) - mx, dy = y[k] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  Line l;
  l.slope = sxy / sxx;
  l.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return l;
}

struct AccelResult {
  std::vector<double> velocity;
  std::vector<double> spacing;
};

// Mean over valid pixels of each interval's refined velocity, and of the
// depth gap between consecutive super-resolved frames.
AccelResult accelerating_plane(double noise, double accel, int np, double mean_v) {
  RunConfig c = mid_config();
  c.scene.n_patterns = np;
  c.scene.acceleration_mm_s2 = accel;
  c.scene.velocities_mm_s = {mean_v - accel * c.scene.t_e_s / 2.0};
  c.rig.noise_sigma = noise;
  const PatternSet set = make_patterns(c);
  const Run r = run_pipeline(c, set, make_database(c, set));
  AccelResult out;
  const auto& s = r.sequence;
  for (int n = 0; n < s.n_frames(); ++n) {
    double v = 0.0, gap = 0.0;
    std::size_t count = 0;
    for (int y = 0; y < s.valid.height(); ++y)
      for (int x = 0; x < s.valid.width(); ++x) {
        if (!s.valid(x, y)) continue;
        v += s.velocities[static_cast<std::size_t>(n)](x, y);
        if (n > 0) gap += s.frames[static_cast<std::size_t>(n)](x, y) - s.frames[static_cast<std::size_t>(n) - 1](x, y);
        ++count;
      }
    out.velocity.push_back(v / static_cast<double>(count));
    if (n > 0) out.spacing.push_back(gap / static_cast<double>(count));
  }
  return out;
}

Outcome acceleration() {
  // One velocity step (4.5 mm/s at N_p=3) per interval: the fastest change the
  // default fine search (+-1 step around the constant estimate) can follow.
  const int np = 3;
  const double accel = 40.5;
  const double expected = accel * (1.0 / 3.0) / np;
  const AccelResult r = accelerating_plane(0.0, accel, np, 45.0);
  const Line l = fit_line(r.velocity);
  bool spacing_up = true;
  for (std::size_t k = 1; k < r.spacing.size(); ++k) spacing_up = spacing_up && r.spacing[k] > r.spacing[k - 1];
  const bool ok = l.r2 >= 0.9 && std::abs(l.slope - expected) <= 0.2 * expected && spacing_up;
  std::string d = "interval velocities";
  for (double v : r.velocity) d += " " + fmt(v);
  d += "; R2 " + fmt(l.r2, 3) + ", slope " + fmt(l.slope, 3) + " vs " + fmt(expected, 3) + " mm/s per interval";
  d += spacing_up ? ", spacings increase" : ", spacings not increasing";
  const AccelResult noisy = accelerating_plane(0.01, accel, np, 45.0);
  d += " (with noise 0.01: slope " + fmt(fit_line(noisy.velocity).slope, 3) + ")";
  return {ok, d};
}

Outcome marker_round_trip() {
  Rng rng(2024);
  int exact = 0, total = 0;
  double worst = 0.0;
  std::string failures;
  auto draw = [&](int np, double phase) {
    RunConfig c = testing::small_config(64, 40, 590.0, 620.0, 600.0, np);
    c.scene.start_phase = phase;
    c.scene.first_pattern = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(c.n_pmax())));
    const PatternSet set = make_patterns(c);
    const CapturedImage cap = simulate(c, set);
    ++total;
    try {
      const ExposureSchedule s = decode_markers(cap.intensity, c.scene.t_e_s, set.marker, c.n_pmax(),
                                                c.search.marker_threshold);
      const auto& t = cap.true_schedule;
      bool ok = s.n_start == t.n_start && s.pattern_ids == t.pattern_ids;
      if (ok)
        for (std::size_t k = 0; k < s.weights.size(); ++k) {
          worst = std::max(worst, std::abs(s.weights[k] - t.weights[k]));
          ok = ok && std::abs(s.weights[k] - t.weights[k]) <= 0.02;
        }
      if (ok) ++exact;
      else failures += " N_p=" + std::to_string(np) + "/phase " + fmt(phase, 3);
    } catch (const Error& e) {
      failures += " N_p=" + std::to_string(np) + "/phase " + fmt(phase, 3) + " (" + e.what() + ")";
    }
  };
  draw(6, 0.75);  // First interval a quarter of a pattern period.
  while (total < 50) draw(1 + static_cast<int>(rng.below(6)), rng.uniform());
  std::string d = std::to_string(exact) + "/" + std::to_string(total) +
                  " draws exact (largest weight error " + fmt(worst, 3) + ", need <=0.02)";
  if (!failures.empty()) d += "; failed:" + failures;
  return {exact == total, d};
}

Outcome oracle_equivalence() {
  // Synthesis against slice averaging.
  RunConfig c = testing::small_config(48, 36, 590.0, 620.0, 600.0, 3);
  c.scene.start_phase = 0.4;
  const testing::Bench b = testing::make_bench(c);
  Rng rng(7);
  double worst = 0.0;
  int patches = 0;
  for (int k = 0; k < 200; ++k) {
    const int i = static_cast<int>(rng.below(static_cast<std::uint64_t>(b.db.n_slices())));
    const Pixel p{6 + static_cast<int>(rng.below(36)), 6 + static_cast<int>(rng.below(22))};
    std::vector<double> v(static_cast<std::size_t>(b.schedule.n_p));
    for (double& x : v) x = 120.0 * rng.uniform() - 60.0;
    if (k % 2 == 0) std::fill(v.begin(), v.end(), v[0]);
    const ImageD oracle = testing::naive_patch(b.db, b.schedule, i, v, p, 12);
    if (oracle.empty()) continue;
    const ImageD got = k % 2 == 0 ? synth_const(b.db, b.schedule, b.db.depth_of(i), v[0], p, 12)
                                  : synth_fine(b.db, b.schedule, b.db.depth_of(i), v, p, 12);
    for (std::size_t q = 0; q < got.size(); ++q) worst = std::max(worst, std::abs(got.pixels()[q] - oracle.pixels()[q]));
    ++patches;
  }

  // Coarse search against the triple loop.
  RunConfig cc = testing::small_config(40, 30, 595.0, 612.0, 600.0, 3);
  cc.scene.velocities_mm_s = {30.0};
  cc.scene.start_phase = 0.3;
  cc.rig.noise_sigma = 0.01;
  const testing::Bench cb = testing::make_bench(cc);
  CoarseOptions co;
  co.window = 8;
  co.region = cb.region;
  const CoarseResult cr = estimate_initial(cb.db, cb.capture.intensity, cb.schedule, SearchGrid{20.0, 4.0}, co);
  const Rect out = estimable_rect(cb.region, 8);
  const testing::Naive n = testing::naive_argmax(cb, cr.grid, out, 8);
  int coarse_px = 0, coarse_bad = 0;
  for (int y = out.y0; y < out.y1(); ++y)
    for (int x = out.x0; x < out.x1(); ++x) {
      ++coarse_px;
      bool ok = cr.estimate.depth_index(x, y) == n.depth(x, y) && cr.estimate.velocity_steps[0](x, y) == n.steps(x, y);
      if (n.depth(x, y) >= 0) ok = ok && cr.estimate.score(x, y) == static_cast<float>(n.score(x, y));
      coarse_bad += ok ? 0 : 1;
    }

  // Fine search against exhaustive enumeration: 8 x 8 px, 5 depths, N_p <= 3.
  int fine_px = 0, fine_bad = 0;
  for (int np : {2, 3}) {
    RunConfig fc = testing::small_config(40, 30, 596.0, 610.0, 600.0, np);
    fc.scene.velocities_mm_s = {-10.0, 15.0, 30.0};
    fc.scene.start_phase = np == 2 ? 0.4 : 0.0;
    fc.rig.noise_sigma = 0.01;
    const testing::Bench fb = testing::make_bench(fc);
    const Rect region{12, 6, 15, 15};
    CoarseOptions o;
    o.window = 8;
    o.region = region;
    const CoarseResult init = estimate_initial(fb.db, fb.capture.intensity, fb.schedule, SearchGrid{20.0, 3.0}, o);
    FineOptions fo;
    fo.window = 8;
    fo.region = region;
    fo.local_radius = 2;
    fo.v_adjacency_max_mm_s = 3.0;
    const FineResult fr = refine(fb.db, fb.capture.intensity, fb.schedule, init.grid, init.estimate, fo);
    const Rect fout = estimable_rect(region, 8);
    for (int y = fout.y0; y < fout.y1(); ++y)
      for (int x = fout.x0; x < fout.x1(); ++x) {
        if (!init.estimate.valid(x, y)) continue;
        ++fine_px;
        const testing::Best e = testing::exhaustive(fb, fb.schedule, init.grid, init.estimate, Pixel{x, y}, 8, 2, 1);
        bool ok = fr.estimate.depth_index(x, y) == e.depth && fr.estimate.score(x, y) == static_cast<float>(e.score);
        for (int k = 0; k < fb.schedule.n_p; ++k)
          ok = ok && fr.estimate.velocity_steps[static_cast<std::size_t>(k)](x, y) == e.steps[static_cast<std::size_t>(k)];
        fine_bad += ok ? 0 : 1;
      }
  }
  const bool pass = worst <= 1e-6 && patches > 50 && coarse_bad == 0 && fine_bad == 0 && fine_px > 0;
  return {pass, "synthesis max error " + fmt(worst, 3) + " over " + std::to_string(patches) + " patches; coarse " +
                    std::to_string(coarse_px - coarse_bad) + "/" + std::to_string(coarse_px) + " px exact; fine " +
                    std::to_string(fine_px - fine_bad) + "/" + std::to_string(fine_px) + " px exact"};
}

Outcome affine_invariance() {
  RunConfig c = testing::small_config(64, 48, 580.0, 630.0, 600.0, 6);
  c.scene.velocities_mm_s = {40.0};
  c.scene.texture = "noise";
  c.rig.noise_sigma = 0.01;
  const testing::Bench b = testing::make_bench(c);
  CoarseOptions o;
  o.region = b.region;
  const SearchGrid grid{};
  const CoarseResult base = estimate_initial(b.db, b.capture.intensity, b.schedule, grid, o);
  std::size_t px = 0, changed = 0;
  for (double g : {0.5, 2.0}) {
    ImageF cap = b.capture.intensity;
    for (float& v : cap.pixels()) v = static_cast<float>(g * v + 0.1);
    const CoarseResult r = estimate_initial(b.db, cap, b.schedule, grid, o);
    for (int y = 0; y < cap.height(); ++y)
      for (int x = 0; x < cap.width(); ++x) {
        if (base.estimate.depth_index(x, y) < 0) continue;
        ++px;
        if (r.estimate.depth_index(x, y) != base.estimate.depth_index(x, y) ||
            r.estimate.velocity_steps[0](x, y) != base.estimate.velocity_steps[0](x, y))
          ++changed;
      }
  }
  return {changed == 0, std::to_string(changed) + " of " + std::to_string(px) +
                            " per-pixel argmaxes changed under gain 0.5 and 2 with bias 0.1"};
}

// Peaked scores around a random tilted plane of labels, plus uniform noise.
CostVolume planar_volume(int w, int h, int depths, Rng& rng) {
  CostVolume v(w, h, depths, 1, false);
  const double a = 3.0 + rng.uniform() * (depths - 6);
  const double bx = 0.3 * rng.uniform() - 0.15, by = 0.3 * rng.uniform() - 0.15;
  const double noise = 0.3 + 0.6 * rng.uniform();
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double l = a + bx * (x - w / 2) + by * (y - h / 2);
      for (int d = 0; d < depths; ++d) {
        const double s = std::exp(-0.5 * (d - l) * (d - l)) + noise * (2.0 * rng.uniform() - 1.0);
        v.depth_score[v.at(x, y, d)] = std::clamp(s, -1.0, 1.0);
      }
    }
  return v;
}

Outcome bp_properties() {
  Rng rng(99);
  int lower = 0, wta_equal = 0, converged = 0, stable = 0;
  int most_iterations = 0;
  const int volumes = 100;
  for (int k = 0; k < volumes; ++k) {
    const CostVolume v = planar_volume(24, 18, 16, rng);
    Mask valid(24, 18, 1);
    for (int q = 0; q < 10; ++q) valid(static_cast<int>(rng.below(24)), static_cast<int>(rng.below(18))) = 0;
    const auto wta = wta_labels(v, valid);
    BpOptions o;
    o.lambda = 0.0;
    wta_equal += bp_refine(v, valid, o) == wta ? 1 : 0;
    o.lambda = 0.1;
    const auto bp = bp_refine(v, valid, o);
    lower += labeling_energy(v, valid, bp, o) <= labeling_energy(v, valid, wta, o) ? 1 : 0;
    // Run to the fixed point, then keep iterating past it.
    BpReport rep;
    o.iterations = 2000;
    const auto fixed = bp_refine(v, valid, o, &rep);
    if (!rep.converged) continue;
    ++converged;
    most_iterations = std::max(most_iterations, rep.iterations);
    o.iterations = rep.iterations + 50;
    o.tolerance = -1.0;
    stable += bp_refine(v, valid, o) == fixed ? 1 : 0;
    o.tolerance = BpOptions{}.tolerance;
  }
  const bool pass = wta_equal == volumes && lower >= 99 && converged > 0 && stable == converged;
  return {pass, "lambda=0 equals WTA on " + std::to_string(wta_equal) + "/100; BP energy <= WTA on " +
                    std::to_string(lower) + "/100 (need >=99, default 30 iterations); " + std::to_string(converged) +
                    "/100 reach a message fixed point (within " + std::to_string(most_iterations) +
                    " iterations) and " + std::to_string(stable) + " of those keep their labels over 50 further iterations"};
}

template <typename T>
bool same_bytes(const std::vector<T>& a, const std::vector<T>& b) {
  return a.size() == b.size() && (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(T)) == 0);
}

template <typename T>
bool same_bytes(const Image<T>& a, const Image<T>& b) {
  return a.same_shape(b) && std::memcmp(a.data(), b.data(), a.size() * sizeof(T)) == 0;
}

bool same_estimate(const MotionEstimate& a, const MotionEstimate& b) {
  if (!same_bytes(a.depth_index, b.depth_index) || !same_bytes(a.score, b.score) || !same_bytes(a.valid, b.valid))
    return false;
  if (a.velocity_steps.size() != b.velocity_steps.size()) return false;
  for (std::size_t n = 0; n < a.velocity_steps.size(); ++n)
    if (!same_bytes(a.velocity_steps[n], b.velocity_steps[n])) return false;
  return true;
}

Outcome determinism() {
  RunConfig c = testing::small_config(64, 48, 580.0, 630.0, 600.0, 3);
  c.scene.velocities_mm_s = {20.0, 30.0, 40.0};
  c.scene.start_phase = 0.3;
  c.scene.texture = "grain";
  c.rig.noise_sigma = 0.01;
  struct Snapshot {
    ReferenceDatabase db;
    ImageF capture;
    Reconstruction rec;
    CostVolume coarse_volume;
    Image<std::int32_t> bp;
    ShapeSequence seq;
  };
  auto take = [&](int threads) {
    RunConfig t = c;
    t.threads = threads;
    Snapshot s;
    const PatternSet set = make_patterns(t);
    s.db = make_database(t, set);
    s.capture = simulate(t, set).intensity;
    s.rec = reconstruct(t, s.db, s.capture);
    const Reconstruction coarse = reconstruct(t, s.db, s.capture, "coarse");
    s.coarse_volume = coarse.volume;
    BpOptions o;
    o.threads = threads;
    s.bp = bp_refine(coarse.volume, coarse.estimate.valid, o);
    s.seq = super_resolve(s.rec);
    return s;
  };
  const Snapshot ref = take(1);
  std::string d;
  bool all = true;
  for (int threads : {2, 8}) {
    const Snapshot s = take(threads);
    std::vector<std::string> diff;
    if (!(s.db == ref.db)) diff.push_back("database");
    if (!same_bytes(s.capture, ref.capture)) diff.push_back("capture");
    if (!same_bytes(s.coarse_volume.depth_score, ref.coarse_volume.depth_score) ||
        !same_bytes(s.coarse_volume.depth_velocity, ref.coarse_volume.depth_velocity))
      diff.push_back("coarse volume");
    if (!same_estimate(s.rec.coarse, ref.rec.coarse)) diff.push_back("coarse");
    if (!same_bytes(s.bp, ref.bp)) diff.push_back("bp");
    if (!same_estimate(s.rec.estimate, ref.rec.estimate)) diff.push_back("fine");
    if (!s.rec.reverse || !ref.rec.reverse || !same_estimate(*s.rec.reverse, *ref.rec.reverse)) diff.push_back("reverse");
    bool frames = s.seq.n_frames() == ref.seq.n_frames() && same_bytes(s.seq.valid, ref.seq.valid);
    for (int f = 0; frames && f < s.seq.n_frames(); ++f)
      frames = same_bytes(s.seq.frames[static_cast<std::size_t>(f)], ref.seq.frames[static_cast<std::size_t>(f)]) &&
               same_bytes(s.seq.velocities[static_cast<std::size_t>(f)], ref.seq.velocities[static_cast<std::size_t>(f)]);
    if (!frames) diff.push_back("superres");
    std::string list;
    for (const auto& x : diff) list += (list.empty() ? "" : ", ") + x;
    d += std::to_string(threads) + " threads: " + (diff.empty() ? "identical" : "differs in " + list) + "; ";
    all = all && diff.empty();
  }
  d += "database, capture, coarse, bp, fine, reverse and superres outputs compared byte for byte against 1 thread";
  return {all, d};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> check;
};

}  // namespace

int main(int argc, char** argv) {
  bool strict = false;
  std::vector<int> only;
  for (int k = 1; k < argc; ++k) {
    if (std::strcmp(argv[k], "--strict") == 0) strict = true;
    else only.push_back(std::atoi(argv[k]));
  }
  const std::vector<Criterion> criteria{
      {1, "static exactness", static_exactness},
      {2, "moving-plane accuracy", moving_plane},
      {3, "pattern-count trend", pattern_count_trend},
      {4, "velocity trend", velocity_trend},
      {5, "acceleration", acceleration},
      {6, "marker round trip", marker_round_trip},
      {7, "oracle equivalence", oracle_equivalence},
      {8, "NCC affine invariance", affine_invariance},
      {9, "BP properties", bp_properties},
      {10, "determinism", determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.name << ": " << o.detail << " ("
              << fmt(seconds_since(t0), 3) << " s)" << std::endl;
  }
  return strict && failed ? 1 : 0;
}
