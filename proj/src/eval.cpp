#include "sltsr/eval.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "sltsr/errors.hpp"
#include "sltsr/rng.hpp"

namespace sltsr {

std::vector<Point3> back_project(const ImageD& depth_mm, const Mask& valid, double focal_px) {
  if (depth_mm.width() != valid.width() || depth_mm.height() != valid.height())
    throw ShapeError("depth map and mask differ in size");
  if (!(focal_px > 0.0)) throw InvalidArgument("focal length must be positive");
  const double cx = (depth_mm.width() - 1) / 2.0;
  const double cy = (depth_mm.height() - 1) / 2.0;
  std::vector<Point3> pts;
  for (int y = 0; y < depth_mm.height(); ++y) {
    for (int x = 0; x < depth_mm.width(); ++x) {
      const double z = depth_mm(x, y);
      if (!valid(x, y) || !std::isfinite(z)) continue;
      pts.push_back({(x - cx) * z / focal_px, (y - cy) * z / focal_px, z});
    }
  }
  return pts;
}

double fit_plane_rmse(std::span<const Point3> points) {
  if (points.size() < 3) throw DegenerateGeometry("plane fit needs at least 3 points");
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const auto& p : points) mean += Eigen::Vector3d(p.x, p.y, p.z);
  mean /= static_cast<double>(points.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : points) {
    const Eigen::Vector3d d = Eigen::Vector3d(p.x, p.y, p.z) - mean;
    cov += d * d.transpose();
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  if (eig.info() != Eigen::Success) throw DegenerateGeometry("plane fit did not converge");
  const Eigen::Vector3d ev = eig.eigenvalues();  // ascending
  if (!(ev(1) > 1e-12 * std::max(ev(2), 1e-300))) throw DegenerateGeometry("points are collinear");
  const Eigen::Vector3d normal = eig.eigenvectors().col(0);
  double ss = 0.0;
  for (const auto& p : points) {
    const double r = normal.dot(Eigen::Vector3d(p.x, p.y, p.z) - mean);
    ss += r * r;
  }
  return std::sqrt(ss / static_cast<double>(points.size()));
}

double fit_plane_rmse(const ImageD& depth_mm, const Mask& valid, double focal_px) {
  const auto pts = back_project(depth_mm, valid, focal_px);
  return fit_plane_rmse(pts);
}

double depth_rmse(const ImageD& est_mm, const ImageD& truth_mm, const Mask& valid) {
  if (!est_mm.same_shape(truth_mm) || est_mm.width() != valid.width() || est_mm.height() != valid.height())
    throw ShapeError("depth maps and mask differ in size");
  double ss = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < est_mm.height(); ++y) {
    for (int x = 0; x < est_mm.width(); ++x) {
      const double e = est_mm(x, y);
      const double t = truth_mm(x, y);
      if (!valid(x, y) || !std::isfinite(e) || !std::isfinite(t)) continue;
      ss += (e - t) * (e - t);
      ++n;
    }
  }
  if (n == 0) throw InvalidArgument("no valid pixels to compare");
  return std::sqrt(ss / static_cast<double>(n));
}

std::string export_velocity_profile(const ShapeSequence& sequence, const Rect& region) {
  if (region.empty()) throw InvalidArgument("velocity profile region is empty");
  if (!sequence.valid.bounds().contains(region)) throw IndexError("velocity profile region outside the image");
  std::ostringstream csv;
  csv << std::setprecision(10);
  csv << "interval,t_start_s,mean_velocity_mm_s,pixels\n";
  for (std::size_t n = 0; n < sequence.velocities.size(); ++n) {
    const ImageD& v = sequence.velocities[n];
    double sum = 0.0;
    std::size_t count = 0;
    for (int y = region.y0; y < region.y1(); ++y)
      for (int x = region.x0; x < region.x1(); ++x)
        if (sequence.valid(x, y) && std::isfinite(v(x, y))) {
          sum += v(x, y);
          ++count;
        }
    csv << n + 1 << ',' << sequence.timestamps_s.at(n) << ',';
    if (count) csv << sum / static_cast<double>(count);
    else csv << "nan";
    csv << ',' << count << '\n';
  }
  return csv.str();
}

Texture parse_texture(const std::string& name) {
  if (name == "uniform") return Texture::uniform;
  if (name == "checker") return Texture::checker;
  if (name == "noise") return Texture::noise;
  if (name == "grain") return Texture::grain;
  throw InvalidArgument("unknown texture profile '" + name + "'");
}

std::string texture_name(Texture texture) {
  switch (texture) {
    case Texture::uniform: return "uniform";
    case Texture::checker: return "checker";
    case Texture::noise: return "noise";
    case Texture::grain: return "grain";
  }
  return "uniform";
}

ImageF make_albedo(Texture texture, int width, int height, int period_px, std::uint64_t seed) {
  if (width <= 0 || height <= 0) throw InvalidArgument("albedo size must be positive");
  if (period_px < 1) throw InvalidArgument("texture period must be positive");
  ImageF a(width, height, 1.0f);
  Rng rng(mix_seed(seed, 0x7e47u));
  switch (texture) {
    case Texture::uniform:
      break;
    case Texture::checker:
      for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) a(x, y) = ((x / period_px + y / period_px) % 2 == 0) ? 1.0f : 0.4f;
      break;
    case Texture::noise:
      for (float& v : a.pixels()) v = static_cast<float>(0.6 + 0.4 * rng.uniform());
      break;
    case Texture::grain: {
      // Box-filtered noise, stretched along x like wood grain.
      ImageD n(width, height);
      for (double& v : n.pixels()) v = rng.uniform();
      const int rx = period_px;
      const int ry = std::max(1, period_px / 4);
      double lo = 1e300, hi = -1e300;
      ImageD s(width, height);
      for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
          double sum = 0.0;
          int c = 0;
          for (int dy = -ry; dy <= ry; ++dy)
            for (int dx = -rx; dx <= rx; ++dx) {
              const int xx = x + dx, yy = y + dy;
              if (xx < 0 || yy < 0 || xx >= width || yy >= height) continue;
              sum += n(xx, yy);
              ++c;
            }
          s(x, y) = sum / c;
          lo = std::min(lo, s(x, y));
          hi = std::max(hi, s(x, y));
        }
      }
      const double span = hi > lo ? hi - lo : 1.0;
      for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) a(x, y) = static_cast<float>(0.5 + 0.5 * (s(x, y) - lo) / span);
      break;
    }
  }
  return a;
}

}  // namespace sltsr
