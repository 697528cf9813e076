#pragma once

// Small simulated rigs shared by the unit tests and the acceptance checks.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "sltsr/config.hpp"
#include "sltsr/pipeline.hpp"
#include "sltsr/search_coarse.hpp"
#include "sltsr/synth.hpp"

namespace sltsr::testing {

/// Camera of width x height px seeing a plane at `depth` over [d_min, d_max].
inline RunConfig small_config(int width, int height, double d_min, double d_max, double depth, int n_patterns) {
  RunConfig c;
  c.rig.cam_width = width;
  c.rig.cam_height = height;
  c.rig.d_min_mm = d_min;
  c.rig.d_max_mm = d_max;
  c.scene.depth_mm = depth;
  c.scene.n_patterns = n_patterns;
  c.scene.velocities_mm_s = {0.0};
  return c;
}

/// Everything one capture needs: patterns, database and the capture itself.
struct Bench {
  RunConfig config;
  PatternSet set;
  ReferenceDatabase db;
  CapturedImage capture;
  ExposureSchedule schedule;
  Rect region;
};

inline Bench make_bench(const RunConfig& c) {
  Bench b;
  b.config = c;
  b.set = make_patterns(c);
  b.db = make_database(c, b.set);
  b.capture = simulate(c, b.set);
  b.schedule = matching_schedule(b.capture.true_schedule, c.search.min_weight);
  b.region = matching_region(c);
  return b;
}

/// Reference patch computed straight from the definition: the mean of each
/// interval's database slices, weighted by the interval's exposure share and
/// scaled to the capture exposure. Boundaries are the rounded cumulative
/// sweep. Returns an empty image when the sweep leaves the database.
inline ImageD naive_patch(const ReferenceDatabase& db, const ExposureSchedule& s, int d0_index,
                          const std::vector<double>& v, Pixel center, int window) {
  const int np = s.n_p;
  std::vector<int> bound(static_cast<std::size_t>(np) + 1, 0);
  double swept = 0.0;
  for (int n = 0; n < np; ++n) {
    const double vn = v.size() == 1 ? v[0] : v[static_cast<std::size_t>(n)];
    swept = swept + vn * s.t_e * s.weights[static_cast<std::size_t>(n)] / db.step();
    bound[static_cast<std::size_t>(n) + 1] = static_cast<int>(std::lround(swept));
  }
  double wsum = 0.0;
  for (double w : s.weights) wsum += w;
  const double scale = (s.t_e / db.t_e_ref()) / wsum;
  ImageD out(window, window, 0.0);
  const int x0 = center.x - window / 2, y0 = center.y - window / 2;
  for (int n = 0; n < np; ++n) {
    int lo = d0_index + bound[static_cast<std::size_t>(n)];
    int hi = d0_index + bound[static_cast<std::size_t>(n) + 1];
    if (lo > hi) std::swap(lo, hi);
    if (lo < 0 || hi >= db.n_slices()) return ImageD();
    const int id = s.pattern_ids[static_cast<std::size_t>(n)];
    for (int y = 0; y < window; ++y)
      for (int x = 0; x < window; ++x) {
        double sum = 0.0;
        for (int i = lo; i <= hi; ++i)
          sum += db.slice(id, i)[static_cast<std::size_t>(y0 + y) * static_cast<std::size_t>(db.width()) +
                                 static_cast<std::size_t>(x0 + x)];
        out(x, y) += s.weights[static_cast<std::size_t>(n)] * sum / (hi - lo + 1);
      }
  }
  for (double& p : out.pixels()) p *= scale;
  return out;
}

/// Textbook two-pass NCC, NaN for a flat patch.
inline double naive_ncc(const ImageD& a, const ImageD& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a.pixels()[i];
    mb += b.pixels()[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a.pixels()[i] - ma, db = b.pixels()[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa <= 0.0 || sbb <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sab / std::sqrt(saa * sbb);
}

struct Naive {
  Image<std::int32_t> depth;
  Image<std::int32_t> steps;
  ImageD score;
};

// Every (depth, velocity) hypothesis scored from scratch with synth_const and
// ncc; strict improvement in (depth, velocity) order keeps the first maximum.
inline Naive naive_argmax(const testing::Bench& b, const ResolvedGrid& g, const Rect& out, int window) {
  Naive r{Image<std::int32_t>(b.db.width(), b.db.height(), -1), Image<std::int32_t>(b.db.width(), b.db.height(), 0),
          ImageD(b.db.width(), b.db.height(), std::nan(""))};
  const ImageD cap = image_cast<double>(b.capture.intensity);
  for (int y = out.y0; y < out.y1(); ++y)
    for (int x = out.x0; x < out.x1(); ++x) {
      const ImageD patch = crop<double>(cap, window_rect(Pixel{x, y}, window));
      double best = 0.0;
      for (int i = 0; i < g.n_depths; ++i)
        for (int vi = 0; vi < g.n_velocities(); ++vi) {
          const int j = g.steps_of(vi);
          ImageD s;
          try {
            s = synth_const(b.db, b.schedule, b.db.depth_of(i), g.velocity(j), Pixel{x, y}, window);
          } catch (const HypothesisOutOfRange&) {
            continue;
          }
          const double sc = ncc(s, patch);
          if (std::isnan(sc)) continue;
          if (r.depth(x, y) < 0 || sc > best) {
            best = sc;
            r.depth(x, y) = i;
            r.steps(x, y) = j;
          }
        }
      if (r.depth(x, y) >= 0) r.score(x, y) = best;
    }
  return r;
}

struct Best {
  int depth = -1;
  std::vector<int> steps;
  double score = 0.0;
};

// Enumerates every (depth, v_1..v_Np) in lexicographic order with nested
// counters, dropping inadmissible vectors after the fact.
inline Best exhaustive(const testing::Bench& b, const ExposureSchedule& s, const ResolvedGrid& g, const MotionEstimate& init,
                Pixel p, int window, int radius, int max_dj) {
  Best best;
  std::vector<Best> all;
  const ImageD patch = crop<double>(image_cast<double>(b.capture.intensity), window_rect(p, window));
  const int np = s.n_p;
  const int i0 = init.depth_index(p.x, p.y);
  const int side = 2 * radius + 1;
  int combos = 1;
  for (int n = 0; n < np; ++n) combos *= side;
  for (int i = std::max(0, i0 - radius); i <= std::min(b.db.n_slices() - 1, i0 + radius); ++i)
    for (int code = 0; code < combos; ++code) {
      std::vector<int> js(static_cast<std::size_t>(np));
      int rest = code;
      for (int n = np - 1; n >= 0; --n) {
        js[static_cast<std::size_t>(n)] = init.velocity_steps[static_cast<std::size_t>(n)](p.x, p.y) - radius + rest % side;
        rest /= side;
      }
      bool ok = true;
      for (int n = 1; n < np; ++n)
        if (std::abs(js[static_cast<std::size_t>(n)] - js[static_cast<std::size_t>(n) - 1]) > max_dj) ok = false;
      if (!ok) continue;
      std::vector<double> v;
      for (int j : js) v.push_back(g.velocity(j));
      ImageD synth;
      try {
        synth = synth_fine(b.db, s, b.db.depth_of(i), v, p, window);
      } catch (const HypothesisOutOfRange&) {
        continue;
      }
      const double sc = ncc(synth, patch);
      if (std::isnan(sc)) continue;
      all.push_back(Best{i, js, sc});
    }
  // Ties (within 1e-9 of the maximum) go to the candidate nearest the initial
  // estimate, then to the earliest enumerated.
  double top = -1e300;
  for (const auto& c : all) top = std::max(top, c.score);
  int best_dev = 1 << 30;
  for (const auto& c : all) {
    if (c.score < top - 1e-9) continue;
    int dev = std::abs(c.depth - i0);
    for (int n = 0; n < np; ++n)
      dev += std::abs(c.steps[static_cast<std::size_t>(n)] - init.velocity_steps[static_cast<std::size_t>(n)](p.x, p.y));
    if (dev < best_dev) {
      best_dev = dev;
      best = c;
    }
  }
  return best;
}

}  // namespace sltsr::testing
