#include "sltsr/optics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "sltsr/rng.hpp"

namespace sltsr {
namespace {

std::vector<double> gaussian_kernel(double sigma) {
  if (sigma < 1e-6) return {1.0};
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
    k[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (double& v : k) v /= sum;
  return k;
}

int measurement_rows(const DotPattern& pattern, int cam_height) {
  const int rows = pattern.marker ? pattern.marker->strip_y0 : pattern.height();
  return std::min(rows, cam_height);
}

float pattern_at(const DotPattern& p, int u, int y) {
  if (u < 0 || u >= p.width()) return 0.0f;
  return p.intensity(u, y);
}

// Linear interpolation of pattern row y at fractional column u; this is the
// exact camera-pixel integral of a box-pixel projector image.
double sample_row(const DotPattern& p, double u, int y) {
  const double fu = std::floor(u);
  const int k = static_cast<int>(fu);
  const double phi = u - fu;
  return (1.0 - phi) * pattern_at(p, k, y) + phi * pattern_at(p, k + 1, y);
}

void check_pattern_fits(const Rig& rig, const DotPattern& pattern) {
  if (pattern.height() < rig.cam_height)
    throw InvalidArgument("pattern height " + std::to_string(pattern.height()) + " below camera height");
}

bool is_uniform(const ImageD& depth) {
  auto px = depth.pixels();
  return std::all_of(px.begin(), px.end(), [&](double d) { return d == px.front(); });
}

// Per-pixel depth path: every camera pixel gets its own disparity and blur.
void add_depth_map(const Rig& rig, const DotPattern& pattern, const ImageD& depth, double offset_mm, double weight,
                   ImageD& acc) {
  const int rows = measurement_rows(pattern, rig.cam_height);
  for (int y = 0; y < rows; ++y) {
    for (int x = 0; x < rig.cam_width; ++x) {
      const double d = depth(x, y) + offset_mm;
      const double s = rig.disparity(d) - rig.offset_px();
      const auto k = gaussian_kernel(rig.blur_sigma(d));
      const int r = static_cast<int>(k.size() / 2);
      double v = 0.0;
      for (int ty = -r; ty <= r; ++ty) {
        const int yy = y + ty;
        if (yy < 0 || yy >= rows) continue;
        double h = 0.0;
        for (int tx = -r; tx <= r; ++tx) h += k[static_cast<std::size_t>(tx + r)] * sample_row(pattern, x + tx - s, yy);
        v += k[static_cast<std::size_t>(ty + r)] * h;
      }
      acc(x, y) += weight * v;
    }
  }
}

void add_strip(const Rig& rig, const DotPattern& pattern, double weight, ImageD& acc) {
  if (!pattern.marker) return;
  const Rect strip = pattern.marker->strip(pattern.width()).intersect(Rect{0, 0, rig.cam_width, rig.cam_height});
  for (int y = strip.y0; y < strip.y1(); ++y)
    for (int x = strip.x0; x < strip.x1(); ++x) acc(x, y) += weight * pattern.intensity(x, y);
}

ImageF finish(const Rig& rig, const ImageD& acc, const ImageF& albedo, int albedo_rows, std::uint64_t noise_seed) {
  ImageF out(acc.width(), acc.height());
  Rng rng(mix_seed(noise_seed, 0x6e6f697365ULL));
  for (int y = 0; y < acc.height(); ++y) {
    for (int x = 0; x < acc.width(); ++x) {
      double v = acc(x, y) * rig.gain;
      if (!albedo.empty() && y < albedo_rows) v *= albedo(x, y);
      if (rig.noise_sigma > 0.0) v += rig.noise_sigma * rng.normal();
      out(x, y) = static_cast<float>(std::max(v, 0.0));
    }
  }
  return out;
}

}  // namespace

double Rig::blur_sigma(double depth_mm) const {
  return defocus_gain * std::abs(1.0 / depth_mm - 1.0 / focus_depth_mm);
}

double Rig::offset_px() const {
  return projector_offset_px ? *projector_offset_px : std::ceil(disparity(d_min_mm));
}

int Rig::projector_width() const {
  // Camera column x reads projector column x - disparity + offset.
  const double reach = offset_px() - disparity(d_max_mm);
  return cam_width + static_cast<int>(std::ceil(std::max(reach, 0.0))) + 2;
}

void Rig::validate() const {
  if (!(focal_px > 0.0) || !(baseline_mm > 0.0)) throw InvalidArgument("rig focal length and baseline must be > 0");
  if (cam_width <= 0 || cam_height <= 0) throw InvalidArgument("camera dimensions must be positive");
  if (!(d_min_mm > 0.0) || !(d_min_mm <= d_max_mm)) throw InvalidArgument("rig needs 0 < d_min <= d_max");
  if (!(focus_depth_mm > 0.0)) throw InvalidArgument("focus depth must be positive");
  if (defocus_gain < 0.0 || noise_sigma < 0.0) throw InvalidArgument("defocus gain and noise must be >= 0");
  if (!(exposure_unit_s > 0.0)) throw InvalidArgument("exposure unit must be positive");
}

int SceneMotion::n_p() const { return static_cast<int>(std::floor(t_e / t_proj + 1e-9)); }

double SceneMotion::velocity(double t) const {
  double v = 0.0;
  if (!velocities_mm_s.empty()) {
    const int q = std::max(0, static_cast<int>(std::floor(t / t_proj + start_phase)));
    v = velocities_mm_s[std::min<std::size_t>(static_cast<std::size_t>(q), velocities_mm_s.size() - 1)];
  }
  return v + acceleration_mm_s2 * t;
}

double SceneMotion::displacement(double t) const {
  double d = 0.5 * acceleration_mm_s2 * t * t;
  if (velocities_mm_s.empty()) return d;
  double t0 = 0.0;
  for (int q = 0; t0 < t; ++q) {
    const double t1 = std::min(t, (q + 1 - start_phase) * t_proj);
    if (t1 > t0) {
      d += velocities_mm_s[std::min<std::size_t>(static_cast<std::size_t>(q), velocities_mm_s.size() - 1)] * (t1 - t0);
      t0 = t1;
    }
  }
  return d;
}

double SceneMotion::interval_mean_velocity(int q) const {
  const double ta = std::max(0.0, (q - start_phase) * t_proj);
  const double tb = std::min(t_e, (q + 1 - start_phase) * t_proj);
  if (!(tb > ta)) throw InvalidArgument("interval " + std::to_string(q) + " lies outside the exposure");
  return (displacement(tb) - displacement(ta)) / (tb - ta);
}

SceneMotion SceneMotion::plane(const Rig& rig, double depth_mm, std::vector<double> velocities_mm_s, double t_e,
                               int n_p) {
  if (n_p < 1) throw InvalidArgument("n_p must be >= 1");
  SceneMotion s;
  s.depth0 = ImageD(rig.cam_width, rig.cam_height, depth_mm);
  s.velocities_mm_s = std::move(velocities_mm_s);
  s.t_e = t_e;
  s.t_proj = t_e / n_p;
  return s;
}

void add_plane(const Rig& rig, const DotPattern& pattern, double depth_mm, double weight, ImageD& acc) {
  check_pattern_fits(rig, pattern);
  const int rows = measurement_rows(pattern, rig.cam_height);
  const int w = rig.cam_width;
  const double s = rig.disparity(depth_mm) - rig.offset_px();
  const auto k = gaussian_kernel(rig.blur_sigma(depth_mm));
  const int r = static_cast<int>(k.size() / 2);
  // Camera column x reads projector column x - s = x + base + phi.
  const double neg = -s;
  const int base = static_cast<int>(std::floor(neg));
  const double phi = neg - base;

  const int ext = w + 2 * r;
  ImageD horiz(w, rows);
  std::vector<double> shifted(static_cast<std::size_t>(ext));
  for (int y = 0; y < rows; ++y) {
    for (int i = 0; i < ext; ++i) {
      const int x = i - r;
      shifted[static_cast<std::size_t>(i)] =
          (1.0 - phi) * pattern_at(pattern, x + base, y) + phi * pattern_at(pattern, x + base + 1, y);
    }
    auto out = horiz.row(y);
    for (int x = 0; x < w; ++x) {
      double v = 0.0;
      for (int t = 0; t <= 2 * r; ++t) v += k[static_cast<std::size_t>(t)] * shifted[static_cast<std::size_t>(x + t)];
      out[x] = v;
    }
  }
  for (int y = 0; y < rows; ++y) {
    auto out = acc.row(y);
    for (int x = 0; x < w; ++x) {
      double v = 0.0;
      for (int t = -r; t <= r; ++t) {
        const int yy = y + t;
        if (yy < 0 || yy >= rows) continue;
        v += k[static_cast<std::size_t>(t + r)] * horiz(x, yy);
      }
      out[x] += weight * v;
    }
  }
}

ImageF render_static(const Rig& rig, const DotPattern& pattern, double depth_mm, double exposure_s,
                     std::uint64_t noise_seed) {
  rig.validate();
  if (!(depth_mm >= rig.d_min_mm && depth_mm <= rig.d_max_mm)) {
    std::ostringstream msg;
    msg << "depth " << depth_mm << " mm outside rig range [" << rig.d_min_mm << ", " << rig.d_max_mm << "]";
    throw InvalidArgument(msg.str());
  }
  if (!(exposure_s > 0.0)) throw InvalidArgument("exposure must be positive");
  ImageD acc(rig.cam_width, rig.cam_height, 0.0);
  const double weight = exposure_s / rig.exposure_unit_s;
  add_plane(rig, pattern, depth_mm, weight, acc);
  add_strip(rig, pattern, weight, acc);
  return finish(rig, acc, ImageF{}, 0, noise_seed);
}

CapturedImage render_capture(const Rig& rig, std::span<const DotPattern> patterns, const SceneMotion& scene,
                             const CaptureOptions& options) {
  rig.validate();
  if (patterns.empty()) throw InvalidArgument("render_capture needs at least one pattern");
  if (!(scene.t_e > 0.0) || !(scene.t_proj > 0.0)) throw InvalidArgument("exposure and projector period must be > 0");
  if (scene.n_p() < 1) throw InvalidArgument("exposure shorter than one projector interval");
  if (!(scene.start_phase >= 0.0 && scene.start_phase < 1.0)) throw InvalidArgument("start_phase must be in [0,1)");
  if (scene.depth0.width() != rig.cam_width || scene.depth0.height() != rig.cam_height)
    throw ShapeError("scene depth map does not match camera size");
  if (!scene.albedo.empty() && !scene.albedo.same_shape(scene.depth0)) throw ShapeError("albedo map size mismatch");
  if (options.substeps < 8) throw InvalidArgument("at least 8 sub-steps per interval are required");
  for (const auto& p : patterns) check_pattern_fits(rig, p);

  const auto [lo_it, hi_it] = std::minmax_element(scene.depth0.pixels().begin(), scene.depth0.pixels().end());
  const double depth_lo = *lo_it;
  const double depth_hi = *hi_it;
  const bool planar = is_uniform(scene.depth0);
  auto check_range = [&](double t) {
    const double dz = scene.displacement(t);
    if (depth_lo + dz < rig.d_min_mm || depth_hi + dz > rig.d_max_mm) {
      std::ostringstream msg;
      msg << "scene leaves depth range [" << rig.d_min_mm << ", " << rig.d_max_mm << "] at t = " << t << " s";
      throw OutOfRangeError(msg.str(), t);
    }
  };
  check_range(0.0);

  ImageD acc(rig.cam_width, rig.cam_height, 0.0);
  CapturedImage cap;
  cap.t_e = scene.t_e;
  const int n_set = static_cast<int>(patterns.size());
  const int rows = measurement_rows(patterns.front(), rig.cam_height);
  for (int k = 0;; ++k) {
    const double ta = std::max(0.0, (k - scene.start_phase) * scene.t_proj);
    if (ta >= scene.t_e * (1.0 - 1e-12)) break;
    const double tb = std::min(scene.t_e, (k + 1 - scene.start_phase) * scene.t_proj);
    const double dur = tb - ta;
    if (dur <= scene.t_e * 1e-12) continue;
    const DotPattern& pattern = patterns[static_cast<std::size_t>(k % n_set)];
    const int steps = std::max(1, static_cast<int>(std::ceil(options.substeps * dur / scene.t_proj - 1e-9)));
    const double dt = dur / steps;
    const double weight = dt / rig.exposure_unit_s;
    for (int m = 0; m < steps; ++m) {
      const double t = ta + (m + 0.5) * dt;
      check_range(t);
      const double dz = scene.displacement(t);
      if (planar)
        add_plane(rig, pattern, scene.depth0(0, 0) + dz, weight, acc);
      else
        add_depth_map(rig, pattern, scene.depth0, dz, weight, acc);
    }
    add_strip(rig, pattern, dur / rig.exposure_unit_s, acc);
    cap.true_schedule.pattern_ids.push_back(pattern.pattern_id);
    cap.true_schedule.weights.push_back(dur / scene.t_e);
  }
  check_range(scene.t_e);
  cap.true_schedule.n_p = static_cast<int>(cap.true_schedule.pattern_ids.size());
  cap.true_schedule.n_start = cap.true_schedule.pattern_ids.front() - 1;
  cap.true_schedule.t_e = scene.t_e;
  cap.intensity = finish(rig, acc, scene.albedo, rows, options.noise_seed);
  return cap;
}

std::vector<DotPattern> rotate_to(std::span<const DotPattern> patterns, int first_id) {
  const auto it = std::find_if(patterns.begin(), patterns.end(), [&](const DotPattern& p) { return p.pattern_id == first_id; });
  if (it == patterns.end()) throw IndexError("pattern id " + std::to_string(first_id) + " not in set");
  std::vector<DotPattern> out(it, patterns.end());
  out.insert(out.end(), patterns.begin(), it);
  return out;
}

}  // namespace sltsr
