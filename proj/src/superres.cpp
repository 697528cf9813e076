#include "sltsr/superres.hpp"

#include <cmath>
#include <limits>

#include "sltsr/errors.hpp"

namespace sltsr {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> frame_times(const ExposureSchedule& schedule) {
  std::vector<double> t(static_cast<std::size_t>(schedule.n_p), 0.0);
  for (int n = 1; n < schedule.n_p; ++n)
    t[static_cast<std::size_t>(n)] = t[static_cast<std::size_t>(n) - 1] + schedule.duration_s(n - 1);
  return t;
}

ImageD depth_map(const MotionEstimate& e) {
  ImageD d(e.depth_index.width(), e.depth_index.height(), kNaN);
  for (int y = 0; y < d.height(); ++y)
    for (int x = 0; x < d.width(); ++x)
      if (e.valid(x, y)) d(x, y) = e.d_min_mm + e.depth_index(x, y) * e.step_mm;
  return d;
}

ImageD velocity_map(const MotionEstimate& e, int n) {
  const auto& steps = e.velocity_steps.at(static_cast<std::size_t>(n));
  ImageD v(steps.width(), steps.height(), kNaN);
  for (int y = 0; y < v.height(); ++y)
    for (int x = 0; x < v.width(); ++x)
      if (e.valid(x, y)) v(x, y) = steps(x, y) * e.v_step_mm_s;
  return v;
}

}  // namespace

ShapeSequence accumulate(const ImageD& d0_mm, const std::vector<ImageD>& velocities_mm_s, const Mask& valid,
                         const ExposureSchedule& schedule) {
  if (static_cast<int>(velocities_mm_s.size()) != schedule.n_p)
    throw InvalidArgument("need one velocity map per scheduled pattern");
  if (d0_mm.width() != valid.width() || d0_mm.height() != valid.height())
    throw ShapeError("depth and validity maps differ in size");
  for (const auto& v : velocities_mm_s)
    if (!v.same_shape(d0_mm)) throw ShapeError("velocity map size differs from the depth map");

  ShapeSequence seq;
  seq.valid = valid;
  seq.timestamps_s = frame_times(schedule);
  seq.velocities = velocities_mm_s;
  seq.frames.reserve(static_cast<std::size_t>(schedule.n_p));
  ImageD cur(d0_mm.width(), d0_mm.height(), kNaN);
  for (int y = 0; y < cur.height(); ++y)
    for (int x = 0; x < cur.width(); ++x)
      if (valid(x, y)) cur(x, y) = d0_mm(x, y);
  seq.frames.push_back(cur);
  for (int n = 1; n < schedule.n_p; ++n) {
    const double dt = schedule.duration_s(n - 1);
    const ImageD& v = velocities_mm_s[static_cast<std::size_t>(n) - 1];
    for (int y = 0; y < cur.height(); ++y)
      for (int x = 0; x < cur.width(); ++x)
        if (valid(x, y)) cur(x, y) = cur(x, y) + v(x, y) * dt;
    seq.frames.push_back(cur);
  }
  for (auto& v : seq.velocities)
    for (int y = 0; y < v.height(); ++y)
      for (int x = 0; x < v.width(); ++x)
        if (!valid(x, y)) v(x, y) = kNaN;
  return seq;
}

ShapeSequence accumulate(const MotionEstimate& estimate, const ExposureSchedule& schedule) {
  if (estimate.n_intervals() != schedule.n_p) throw InvalidArgument("estimate needs one velocity map per interval");
  std::vector<ImageD> v;
  for (int n = 0; n < schedule.n_p; ++n) v.push_back(velocity_map(estimate, n));
  return accumulate(depth_map(estimate), v, estimate.valid, schedule);
}

ShapeSequence accumulate_reverse(const MotionEstimate& reverse_estimate, const ExposureSchedule& schedule) {
  const int np = schedule.n_p;
  if (reverse_estimate.n_intervals() != np) throw InvalidArgument("estimate needs one velocity map per interval");
  const Mask& valid = reverse_estimate.valid;
  const ImageD end = depth_map(reverse_estimate);
  std::vector<ImageD> v;
  for (int n = 0; n < np; ++n) {
    ImageD f = velocity_map(reverse_estimate, np - 1 - n);
    for (double& x : f.pixels()) x = -x;
    v.push_back(std::move(f));
  }
  ShapeSequence seq;
  seq.valid = valid;
  seq.timestamps_s = frame_times(schedule);
  seq.velocities = v;
  seq.frames.assign(static_cast<std::size_t>(np), ImageD(end.width(), end.height(), kNaN));
  ImageD cur = end;
  for (int n = np - 1; n >= 0; --n) {
    const double dt = schedule.duration_s(n);
    const ImageD& vn = v[static_cast<std::size_t>(n)];
    for (int y = 0; y < cur.height(); ++y)
      for (int x = 0; x < cur.width(); ++x)
        if (valid(x, y)) cur(x, y) = cur(x, y) - vn(x, y) * dt;
    seq.frames[static_cast<std::size_t>(n)] = cur;
  }
  return seq;
}

ShapeSequence accumulate_bidirectional(const ShapeSequence& forward, const ShapeSequence& reverse) {
  if (forward.n_frames() != reverse.n_frames() || forward.velocities.size() != reverse.velocities.size())
    throw ShapeError("sequences have different frame counts");
  if (forward.timestamps_s != reverse.timestamps_s) throw ShapeError("sequences are not aligned in time");
  if (forward.valid.width() != reverse.valid.width() || forward.valid.height() != reverse.valid.height())
    throw ShapeError("sequences differ in size");
  ShapeSequence out = forward;
  const int w = forward.valid.width();
  const int h = forward.valid.height();
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out.valid(x, y) = forward.valid(x, y) && reverse.valid(x, y) ? 1 : 0;
  auto mean = [&](const std::vector<ImageD>& a, const std::vector<ImageD>& b, std::vector<ImageD>& dst) {
    for (std::size_t k = 0; k < a.size(); ++k) {
      if (!a[k].same_shape(b[k])) throw ShapeError("sequence frames differ in size");
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
          dst[k](x, y) = out.valid(x, y) ? (a[k](x, y) + b[k](x, y)) / 2.0 : kNaN;
    }
  };
  mean(forward.frames, reverse.frames, out.frames);
  mean(forward.velocities, reverse.velocities, out.velocities);
  return out;
}

}  // namespace sltsr
