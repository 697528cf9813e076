#include "sltsr/search_coarse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kernels.hpp"
#include "sltsr/parallel.hpp"
#include "sltsr/synth.hpp"

namespace sltsr {

ResolvedGrid resolve_grid(const SearchGrid& grid, const ReferenceDatabase& db, const ExposureSchedule& schedule) {
  ResolvedGrid g;
  g.n_depths = db.n_slices();
  g.v_step_mm_s = grid.v_step_mm_s ? *grid.v_step_mm_s : db.step() / schedule.interval_s();
  if (!(g.v_step_mm_s > 0.0) || !std::isfinite(g.v_step_mm_s)) throw InvalidArgument("velocity step must be positive");
  if (!(grid.v_max_mm_s >= 0.0)) throw InvalidArgument("v_max must be non-negative");
  g.k_max = static_cast<int>(std::floor(grid.v_max_mm_s / g.v_step_mm_s + 1e-9));
  if (g.k_max > std::numeric_limits<std::int16_t>::max() / 2) throw InvalidArgument("velocity grid too large");
  return g;
}

CostVolume::CostVolume(int w, int h, int depths, int velocities, bool keep_full)
    : width(w), height(h), n_depths(depths), n_velocities(velocities) {
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * static_cast<std::size_t>(depths);
  depth_score.assign(n, std::numeric_limits<double>::quiet_NaN());
  depth_velocity.assign(n, 0);
  if (keep_full) full.assign(n * static_cast<std::size_t>(velocities), std::numeric_limits<float>::quiet_NaN());
}

float CostVolume::full_score(int x, int y, int d, int vi) const {
  if (full.empty()) throw InvalidArgument("cost volume was built without the full velocity axis");
  const std::size_t plane = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  return full[(static_cast<std::size_t>(d) * static_cast<std::size_t>(n_velocities) + static_cast<std::size_t>(vi)) * plane +
              static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)];
}

ImageF MotionEstimate::depth_mm() const {
  ImageF out(depth_index.width(), depth_index.height(), std::numeric_limits<float>::quiet_NaN());
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x)
      if (valid(x, y)) out(x, y) = static_cast<float>(d_min_mm + depth_index(x, y) * step_mm);
  return out;
}

ImageF MotionEstimate::velocity_mm_s(int interval) const {
  const auto& steps = velocity_steps.at(static_cast<std::size_t>(interval));
  ImageF out(steps.width(), steps.height(), std::numeric_limits<float>::quiet_NaN());
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x)
      if (valid(x, y)) out(x, y) = static_cast<float>(steps(x, y) * v_step_mm_s);
  return out;
}

std::size_t MotionEstimate::valid_count() const {
  std::size_t n = 0;
  for (auto v : valid.pixels()) n += v ? 1 : 0;
  return n;
}

Rect estimable_rect(const Rect& region, int window) {
  if (window < 1) throw InvalidArgument("window must be positive");
  const int h = window / 2;
  const Rect out{region.x0 + h, region.y0 + h, region.width - window + 1, region.height - window + 1};
  if (out.empty()) throw InvalidArgument("matching window larger than the matching region");
  return out;
}

namespace {

struct Best {
  double score = -std::numeric_limits<double>::infinity();
  int depth = -1;
  int steps = 0;
};

// Lexicographic tie-break: higher score, then smaller depth, then smaller velocity.
inline bool better(double s, int depth, int steps, const Best& b) {
  if (b.depth < 0) return true;
  if (s != b.score) return s > b.score;
  return depth < b.depth || (depth == b.depth && steps < b.steps);
}

}  // namespace

CoarseResult estimate_initial(const ReferenceDatabase& db, const ImageF& capture, const ExposureSchedule& schedule,
                              const SearchGrid& grid_spec, const CoarseOptions& options) {
  if (capture.width() != db.width() || capture.height() != db.height())
    throw ShapeError("capture size does not match the reference database");
  if (options.window < 8) throw InvalidArgument("matching window must be at least 8 px");
  for (int id : schedule.pattern_ids)
    if (!db.has_pattern(id)) throw InvalidArgument("schedule pattern " + std::to_string(id) + " not in database");
  if (schedule.n_p < 1 || static_cast<int>(schedule.pattern_ids.size()) != schedule.n_p)
    throw InvalidArgument("schedule is empty or inconsistent");

  const ResolvedGrid grid = resolve_grid(grid_spec, db, schedule);
  const Rect region = options.region ? *options.region : capture.bounds();
  if (!capture.bounds().contains(region)) throw InvalidArgument("matching region outside the capture");
  const int window = options.window;
  const int h = window / 2;
  const Rect out = estimable_rect(region, window);

  std::vector<DepthIntegral> integrals;
  for (int id : schedule.pattern_ids)
    if (std::none_of(integrals.begin(), integrals.end(), [&](const DepthIntegral& d) { return d.pattern_id() == id; }))
      integrals.emplace_back(db, id, region);
  auto integral_of = [&](int id) -> const DepthIntegral& {
    for (const auto& d : integrals)
      if (d.pattern_id() == id) return d;
    throw IndexError("missing integral");
  };

  const ImageD cap = crop<double>(capture, region);
  const detail::CaptureMoments cm = detail::capture_moments(cap, region, out, window);
  const double scale = synth_scale(db, schedule);
  const double n_px = static_cast<double>(window) * window;
  const int n_vel = grid.n_velocities();

  CoarseResult result;
  result.grid = grid;
  result.volume = CostVolume(capture.width(), capture.height(), grid.n_depths, n_vel, options.keep_full_volume);
  std::vector<Best> best(static_cast<std::size_t>(out.width) * static_cast<std::size_t>(out.height));

  // Slice offsets per velocity, relative to the start slice.
  struct Plan {
    std::vector<int> lo, hi;
    int min_off = 0, max_off = 0;
  };
  std::vector<Plan> plans(static_cast<std::size_t>(n_vel));
  for (int vi = 0; vi < n_vel; ++vi) {
    Plan& p = plans[static_cast<std::size_t>(vi)];
    const double v = grid.velocity(grid.steps_of(vi));
    const auto offsets = sweep_offsets(schedule, db.step(), std::span<const double>(&v, 1));
    for (int n = 0; n < schedule.n_p; ++n) {
      const int start = offsets[static_cast<std::size_t>(n)];
      const int end = offsets[static_cast<std::size_t>(n) + 1];
      p.lo.push_back(std::min(start, end));
      p.hi.push_back(std::max(start, end));
      p.min_off = std::min(p.min_off, p.lo.back());
      p.max_off = std::max(p.max_off, p.hi.back());
    }
  }

  const std::size_t plane = static_cast<std::size_t>(capture.width()) * static_cast<std::size_t>(capture.height());
  constexpr int kBandRows = 24;

  parallel_for(out.y0, out.y1(), options.threads, [&](int y_begin, int y_end) {
    const int rw = region.width;
    std::vector<double> synth, sq(static_cast<std::size_t>(rw)), sc(static_cast<std::size_t>(rw));
    std::vector<double> hs, hss, hsc;
    std::vector<double> vs(static_cast<std::size_t>(out.width)), vss(vs.size()), vsc(vs.size());
    std::vector<SweepTerm> terms(static_cast<std::size_t>(schedule.n_p));
    for (int by0 = y_begin; by0 < y_end; by0 += kBandRows) {
      const int by1 = std::min(y_end, by0 + kBandRows);
      const int rows = by1 - by0 + window - 1;
      const int local0 = by0 - h - region.y0;  // first needed region row
      synth.assign(static_cast<std::size_t>(rows) * static_cast<std::size_t>(rw), 0.0);
      hs.assign(static_cast<std::size_t>(rows) * static_cast<std::size_t>(out.width), 0.0);
      hss.assign(hs.size(), 0.0);
      hsc.assign(hs.size(), 0.0);

      for (int vi = 0; vi < n_vel; ++vi) {
        const Plan& plan = plans[static_cast<std::size_t>(vi)];
        const int steps = grid.steps_of(vi);
        const int i_lo = -plan.min_off;
        const int i_hi = grid.n_depths - 1 - plan.max_off;
        for (int i = std::max(0, i_lo); i <= i_hi; ++i) {
          for (int n = 0; n < schedule.n_p; ++n) {
            SweepTerm& t = terms[static_cast<std::size_t>(n)];
            t.pattern_id = schedule.pattern_ids[static_cast<std::size_t>(n)];
            t.lo = i + plan.lo[static_cast<std::size_t>(n)];
            t.hi = i + plan.hi[static_cast<std::size_t>(n)];
            t.weight = schedule.weights[static_cast<std::size_t>(n)];
          }
          std::fill(synth.begin(), synth.end(), 0.0);
          for (const SweepTerm& t : terms) {
            const DepthIntegral& integral = integral_of(t.pattern_id);
            accumulate_term(integral, t, static_cast<std::size_t>(local0) * static_cast<std::size_t>(rw),
                            synth.size(), synth.data());
          }
          for (double& v : synth) v = v * scale;
          for (int r = 0; r < rows; ++r) {
            const double* srow = synth.data() + static_cast<std::size_t>(r) * static_cast<std::size_t>(rw);
            const double* crow = cap.row(local0 + r).data();
            for (int x = 0; x < rw; ++x) {
              sq[static_cast<std::size_t>(x)] = srow[x] * srow[x];
              sc[static_cast<std::size_t>(x)] = srow[x] * crow[x];
            }
            const std::size_t o = static_cast<std::size_t>(r) * static_cast<std::size_t>(out.width);
            detail::row_window_sums(srow, out.width, window, hs.data() + o);
            detail::row_window_sums(sq.data(), out.width, window, hss.data() + o);
            detail::row_window_sums(sc.data(), out.width, window, hsc.data() + o);
          }
          for (int y = by0; y < by1; ++y) {
            const std::size_t o = static_cast<std::size_t>(y - by0) * static_cast<std::size_t>(out.width);
            const auto stride = static_cast<std::size_t>(out.width);
            detail::column_window_sums(hs.data() + o, stride, out.width, window, vs.data());
            detail::column_window_sums(hss.data() + o, stride, out.width, window, vss.data());
            detail::column_window_sums(hsc.data() + o, stride, out.width, window, vsc.data());
            const int oy = y - out.y0;
            const double* mb = cm.b.row(oy).data();
            const double* mbb = cm.bb.row(oy).data();
            for (int ox = 0; ox < out.width; ++ox) {
              const Moments m{n_px, vs[static_cast<std::size_t>(ox)], mb[ox], vss[static_cast<std::size_t>(ox)], mbb[ox],
                              vsc[static_cast<std::size_t>(ox)]};
              const double s = ncc_from_moments(m);
              if (!score_defined(s)) continue;
              const int x = out.x0 + ox;
              const std::size_t vol = result.volume.at(x, y, i);
              double& dscore = result.volume.depth_score[vol];
              if (std::isnan(dscore) || s > dscore) {
                dscore = s;
                result.volume.depth_velocity[vol] = static_cast<std::int16_t>(steps);
              }
              if (!result.volume.full.empty())
                result.volume.full[(static_cast<std::size_t>(i) * static_cast<std::size_t>(n_vel) + static_cast<std::size_t>(vi)) * plane +
                                   static_cast<std::size_t>(y) * static_cast<std::size_t>(capture.width()) +
                                   static_cast<std::size_t>(x)] = static_cast<float>(s);
              Best& b = best[static_cast<std::size_t>(oy) * static_cast<std::size_t>(out.width) + static_cast<std::size_t>(ox)];
              if (better(s, i, steps, b)) b = Best{s, i, steps};
            }
          }
        }
      }
    }
  });

  MotionEstimate& est = result.estimate;
  est.depth_index = Image<std::int32_t>(capture.width(), capture.height(), -1);
  est.velocity_steps.assign(static_cast<std::size_t>(schedule.n_p), Image<std::int32_t>(capture.width(), capture.height(), 0));
  est.score = ImageF(capture.width(), capture.height(), std::numeric_limits<float>::quiet_NaN());
  est.valid = Mask(capture.width(), capture.height(), 0);
  est.d_min_mm = db.d_min();
  est.step_mm = db.step();
  est.v_step_mm_s = grid.v_step_mm_s;
  for (int oy = 0; oy < out.height; ++oy) {
    for (int ox = 0; ox < out.width; ++ox) {
      const Best& b = best[static_cast<std::size_t>(oy) * static_cast<std::size_t>(out.width) + static_cast<std::size_t>(ox)];
      if (b.depth < 0) continue;
      const int x = out.x0 + ox;
      const int y = out.y0 + oy;
      est.score(x, y) = static_cast<float>(b.score);
      est.depth_index(x, y) = b.depth;
      for (auto& v : est.velocity_steps) v(x, y) = b.steps;
      est.valid(x, y) = b.score >= options.score_min ? 1 : 0;
    }
  }
  return result;
}

}  // namespace sltsr
