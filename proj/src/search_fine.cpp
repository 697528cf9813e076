#include "sltsr/search_fine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "sltsr/parallel.hpp"
#include "sltsr/synth.hpp"

namespace sltsr {

namespace {

// Candidates scoring within this of the best are tied; the tie goes to the
// one nearest the initial estimate, so parameters the window cannot observe
// (an interval whose pattern has no dots there) keep their initial value.
constexpr double kTie = 1e-9;

struct PixelSearch {
  const ReferenceDatabase& db;
  const ExposureSchedule& schedule;
  const ResolvedGrid& grid;
  const std::vector<const DepthIntegral*>& integrals;  // one per interval
  Rect region;
  int window;
  int radius;
  int max_dj;
  double scale;

  // Per-pixel state.
  std::size_t origin = 0;  // region-local offset of the window's top-left pixel
  std::vector<int> centre{};
  std::vector<int> js{};
  std::vector<std::vector<double>> acc{};  // acc[n]: sum of the first n terms
  std::vector<double> patch{};
  const double* cap = nullptr;  // window-major capture patch
  double cap_b = 0.0, cap_bb = 0.0;

  int i0 = 0;
  double best = -std::numeric_limits<double>::infinity();  // max over candidates
  double score = 0.0;                                       // of the selected one
  int best_i = -1;
  std::vector<int> best_js{};
  std::vector<double> cand_score{};
  std::vector<int> cand{};  // per candidate: depth, then one step per interval
  std::vector<double> depth_best{};  // per searched depth
  std::vector<int> depth_j0{};

  void add_term(int n, const SweepTerm& t) {
    const auto& prev = acc[static_cast<std::size_t>(n)];
    auto& next = acc[static_cast<std::size_t>(n) + 1];
    std::copy(prev.begin(), prev.end(), next.begin());
    for (int r = 0; r < window; ++r)
      accumulate_term(*integrals[static_cast<std::size_t>(n)], t,
                      origin + static_cast<std::size_t>(r) * static_cast<std::size_t>(region.width),
                      static_cast<std::size_t>(window), next.data() + static_cast<std::size_t>(r) * window);
  }

  double evaluate() {
    const auto& full = acc.back();
    for (std::size_t k = 0; k < full.size(); ++k) patch[k] = full[k] * scale;
    Moments m;
    m.n = static_cast<double>(window) * window;
    for (int r = 0; r < window; ++r) {
      double ra = 0.0, raa = 0.0, rab = 0.0;
      const double* pa = patch.data() + static_cast<std::size_t>(r) * window;
      const double* pb = cap + static_cast<std::size_t>(r) * window;
      for (int x = 0; x < window; ++x) {
        ra += pa[x];
        raa += pa[x] * pa[x];
        rab += pa[x] * pb[x];
      }
      m.a += ra;
      m.aa += raa;
      m.ab += rab;
    }
    m.b = cap_b;
    m.bb = cap_bb;
    return ncc_from_moments(m);
  }

  // `swept` is the unrounded sweep of intervals 0..n-1, accumulated exactly
  // as sweep_offsets() does.
  void extend(int n, double swept, int i, int slot) {
    const int c = centre[static_cast<std::size_t>(n)];
    const int start = i + boundary_offset(swept);
    for (int j = c - radius; j <= c + radius; ++j) {
      if (n > 0 && std::abs(j - js[static_cast<std::size_t>(n) - 1]) > max_dj) continue;
      const double total = swept + interval_sweep(schedule, n, db.step(), grid.velocity(j));
      const int end = i + boundary_offset(total);
      SweepTerm t{schedule.pattern_ids[static_cast<std::size_t>(n)], std::min(start, end), std::max(start, end),
                  schedule.weights[static_cast<std::size_t>(n)]};
      if (t.lo < 0 || t.hi >= db.n_slices()) continue;
      js[static_cast<std::size_t>(n)] = j;
      add_term(n, t);
      if (n + 1 < schedule.n_p) {
        extend(n + 1, total, i, slot);
        continue;
      }
      const double s = evaluate();
      if (!score_defined(s)) continue;
      double& db_best = depth_best[static_cast<std::size_t>(slot)];
      if (std::isnan(db_best) || s > db_best) {
        db_best = s;
        depth_j0[static_cast<std::size_t>(slot)] = js.front();
      }
      best = std::max(best, s);
      cand_score.push_back(s);
      cand.push_back(i);
      cand.insert(cand.end(), js.begin(), js.end());
    }
  }

  void select() {
    best_i = -1;
    const std::size_t stride = js.size() + 1;
    int best_dev = std::numeric_limits<int>::max();
    for (std::size_t k = 0; k < cand_score.size(); ++k) {
      if (cand_score[k] < best - kTie) continue;
      const int* c = cand.data() + k * stride;
      int dev = std::abs(c[0] - i0);
      for (std::size_t n = 0; n < js.size(); ++n) dev += std::abs(c[n + 1] - centre[n]);
      if (dev >= best_dev) continue;
      best_dev = dev;
      best_i = c[0];
      best_js.assign(c + 1, c + stride);
      score = cand_score[k];
    }
  }
};

}  // namespace

FineResult refine(const ReferenceDatabase& db, const ImageF& capture, const ExposureSchedule& schedule,
                  const ResolvedGrid& grid, const MotionEstimate& initial, const FineOptions& options) {
  if (capture.width() != db.width() || capture.height() != db.height())
    throw ShapeError("capture size does not match the reference database");
  if (initial.depth_index.width() != capture.width() || initial.depth_index.height() != capture.height())
    throw ShapeError("initial estimate size does not match the capture");
  if (initial.n_intervals() != schedule.n_p) throw InvalidArgument("initial estimate needs one velocity map per interval");
  if (options.window < 8) throw InvalidArgument("matching window must be at least 8 px");
  if (options.local_radius < 0) throw InvalidArgument("local radius must be non-negative");
  const double v_adj = options.v_adjacency_max_mm_s ? *options.v_adjacency_max_mm_s : 2.0 * grid.v_step_mm_s;
  if (!(v_adj > 0.0)) throw InvalidArgument("v_adjacency_max must be positive");
  for (int id : schedule.pattern_ids)
    if (!db.has_pattern(id)) throw InvalidArgument("schedule pattern " + std::to_string(id) + " not in database");

  const Rect region = options.region ? *options.region : capture.bounds();
  if (!capture.bounds().contains(region)) throw InvalidArgument("matching region outside the capture");
  const int window = options.window;
  const int h = window / 2;
  const Rect out = estimable_rect(region, window);
  const int max_dj = static_cast<int>(std::floor(v_adj / grid.v_step_mm_s + 1e-9));

  std::vector<DepthIntegral> owned;
  for (int id : schedule.pattern_ids)
    if (std::none_of(owned.begin(), owned.end(), [&](const DepthIntegral& d) { return d.pattern_id() == id; }))
      owned.emplace_back(db, id, region);
  std::vector<const DepthIntegral*> per_interval;
  for (int id : schedule.pattern_ids)
    for (const auto& d : owned)
      if (d.pattern_id() == id) per_interval.push_back(&d);

  const double scale = synth_scale(db, schedule);
  FineResult result;
  result.volume = CostVolume(capture.width(), capture.height(), db.n_slices(), 1, false);
  MotionEstimate& est = result.estimate;
  est.depth_index = Image<std::int32_t>(capture.width(), capture.height(), -1);
  est.velocity_steps.assign(static_cast<std::size_t>(schedule.n_p), Image<std::int32_t>(capture.width(), capture.height(), 0));
  est.score = ImageF(capture.width(), capture.height(), std::numeric_limits<float>::quiet_NaN());
  est.valid = Mask(capture.width(), capture.height(), 0);
  est.d_min_mm = db.d_min();
  est.step_mm = db.step();
  est.v_step_mm_s = grid.v_step_mm_s;

  parallel_for(out.y0, out.y1(), options.threads, [&](int y_begin, int y_end) {
    PixelSearch ps{db, schedule, grid, per_interval, region, window, options.local_radius, max_dj, scale};
    const std::size_t px = static_cast<std::size_t>(window) * static_cast<std::size_t>(window);
    ps.acc.assign(static_cast<std::size_t>(schedule.n_p) + 1, std::vector<double>(px, 0.0));
    ps.patch.assign(px, 0.0);
    ps.js.assign(static_cast<std::size_t>(schedule.n_p), 0);
    ps.centre.assign(static_cast<std::size_t>(schedule.n_p), 0);
    std::vector<double> cap(px);
    for (int y = y_begin; y < y_end; ++y) {
      for (int x = out.x0; x < out.x1(); ++x) {
        if (!initial.valid(x, y)) continue;
        const int i0 = initial.depth_index(x, y);
        if (i0 < 0 || i0 >= db.n_slices()) continue;
        for (int n = 0; n < schedule.n_p; ++n)
          ps.centre[static_cast<std::size_t>(n)] = initial.velocity_steps[static_cast<std::size_t>(n)](x, y);

        ps.cap_b = 0.0;
        ps.cap_bb = 0.0;
        for (int r = 0; r < window; ++r) {
          double rb = 0.0, rbb = 0.0;
          const float* src = capture.row(y - h + r).data() + (x - h);
          double* dst = cap.data() + static_cast<std::size_t>(r) * window;
          for (int c = 0; c < window; ++c) {
            dst[c] = static_cast<double>(src[c]);
            rb += dst[c];
            rbb += dst[c] * dst[c];
          }
          ps.cap_b += rb;
          ps.cap_bb += rbb;
        }
        ps.cap = cap.data();
        ps.origin = static_cast<std::size_t>(y - h - region.y0) * static_cast<std::size_t>(region.width) +
                    static_cast<std::size_t>(x - h - region.x0);
        ps.best = -std::numeric_limits<double>::infinity();
        ps.i0 = i0;
        ps.cand_score.clear();
        ps.cand.clear();
        const int i_begin = std::max(0, i0 - options.local_radius);
        const int i_end = std::min(db.n_slices() - 1, i0 + options.local_radius);
        ps.depth_best.assign(static_cast<std::size_t>(i_end - i_begin + 1), std::numeric_limits<double>::quiet_NaN());
        ps.depth_j0.assign(ps.depth_best.size(), 0);
        for (int i = i_begin; i <= i_end; ++i) ps.extend(0, 0.0, i, i - i_begin);

        for (int i = i_begin; i <= i_end; ++i) {
          const std::size_t v = result.volume.at(x, y, i);
          result.volume.depth_score[v] = ps.depth_best[static_cast<std::size_t>(i - i_begin)];
          result.volume.depth_velocity[v] = static_cast<std::int16_t>(ps.depth_j0[static_cast<std::size_t>(i - i_begin)]);
        }
        ps.select();
        if (ps.best_i < 0) continue;
        est.depth_index(x, y) = ps.best_i;
        for (int n = 0; n < schedule.n_p; ++n)
          est.velocity_steps[static_cast<std::size_t>(n)](x, y) = ps.best_js[static_cast<std::size_t>(n)];
        est.score(x, y) = static_cast<float>(ps.score);
        est.valid(x, y) = ps.score >= options.score_min ? 1 : 0;
      }
    }
  });
  return result;
}

MotionEstimate reverse_initial(const MotionEstimate& forward, const ReferenceDatabase& db,
                               const ExposureSchedule& schedule) {
  if (forward.n_intervals() != schedule.n_p) throw InvalidArgument("estimate needs one velocity map per interval");
  const ExposureSchedule rev = reversed(schedule);
  MotionEstimate out = forward;
  const int np = schedule.n_p;
  for (int y = 0; y < forward.depth_index.height(); ++y) {
    for (int x = 0; x < forward.depth_index.width(); ++x) {
      std::vector<double> v(static_cast<std::size_t>(np));
      for (int n = 0; n < np; ++n) {
        const int j = forward.velocity_steps[static_cast<std::size_t>(n)](x, y);
        v[static_cast<std::size_t>(n)] = forward.v_step_mm_s * j;
        out.velocity_steps[static_cast<std::size_t>(np - 1 - n)](x, y) = -j;
      }
      const int end = forward.depth_index(x, y) + sweep_offsets(schedule, db.step(), v).back();
      if (!forward.valid(x, y)) continue;
      if (end < 0 || end >= db.n_slices()) {
        out.valid(x, y) = 0;
        continue;
      }
      out.depth_index(x, y) = end;
    }
  }
  return out;
}

FineResult refine_reverse(const ReferenceDatabase& db, const ImageF& capture, const ExposureSchedule& schedule,
                          const ResolvedGrid& grid, const MotionEstimate& forward, const FineOptions& options) {
  return refine(db, capture, reversed(schedule), grid, reverse_initial(forward, db, schedule), options);
}

}  // namespace sltsr
