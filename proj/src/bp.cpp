#include "sltsr/bp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "sltsr/errors.hpp"
#include "sltsr/parallel.hpp"

namespace sltsr {

namespace {

void check_inputs(const CostVolume& volume, const Mask& valid) {
  if (valid.width() != volume.width || valid.height() != volume.height)
    throw ShapeError("validity mask does not match the cost volume");
  if (volume.n_depths < 1) throw InvalidArgument("cost volume has no depth labels");
}

// Neighbour directions; messages are stored by the side they arrive from.
enum Dir { kFromLeft = 0, kFromRight = 1, kFromUp = 2, kFromDown = 3 };

// Labels whose cost is within this of the minimum count as tied; ties go to
// the smallest label. Message roundoff is far below it, so converged beliefs
// give the same labels on every further iteration.
constexpr double kTie = 1e-9;

template <typename CostAt>
std::int32_t tied_argmin(int n, CostAt cost) {
  double best = std::numeric_limits<double>::infinity();
  for (int l = 0; l < n; ++l) best = std::min(best, cost(l));
  for (int l = 0; l < n; ++l)
    if (cost(l) <= best + kTie) return l;
  return 0;
}

}  // namespace

double data_cost(const CostVolume& volume, const Mask& valid, int x, int y, int d) {
  if (!valid(x, y)) return 0.0;
  const double s = volume.score(x, y, d);
  return std::isnan(s) ? 2.0 : 1.0 - s;
}

Image<std::int32_t> wta_labels(const CostVolume& volume, const Mask& valid) {
  check_inputs(volume, valid);
  Image<std::int32_t> out(volume.width, volume.height, -1);
  for (int y = 0; y < volume.height; ++y) {
    for (int x = 0; x < volume.width; ++x) {
      if (!valid(x, y)) continue;
      out(x, y) = tied_argmin(volume.n_depths, [&](int d) { return data_cost(volume, valid, x, y, d); });
    }
  }
  return out;
}

Image<std::int32_t> bp_refine(const CostVolume& volume, const Mask& valid, const BpOptions& options,
                              BpReport* report) {
  check_inputs(volume, valid);
  if (options.iterations < 1) throw InvalidArgument("BP needs at least one iteration");
  if (!(options.lambda >= 0.0)) throw InvalidArgument("BP lambda must be non-negative");
  if (options.truncation && !(*options.truncation >= 0.0)) throw InvalidArgument("BP truncation must be non-negative");

  const int w = volume.width;
  const int h = volume.height;
  const int nl = volume.n_depths;
  const std::size_t px = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  const std::size_t labels = static_cast<std::size_t>(nl);
  const double lambda = options.lambda;

  // Data costs, pixel-major.
  std::vector<double> data(px * labels);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int d = 0; d < nl; ++d)
        data[(static_cast<std::size_t>(y) * w + x) * labels + static_cast<std::size_t>(d)] =
            data_cost(volume, valid, x, y, d);

  // msg[dir][pixel][label]: message arriving at pixel from direction dir.
  std::vector<double> msg(4 * px * labels, 0.0), next(4 * px * labels, 0.0);
  auto at = [&](std::vector<double>& m, int dir, std::size_t p) {
    return m.data() + (static_cast<std::size_t>(dir) * px + p) * labels;
  };

  BpReport rep;
  for (int it = 0; it < options.iterations; ++it) {
    parallel_for(0, h, options.threads, [&](int y0, int y1) {
      std::vector<double> base(labels), hbuf(labels);
      for (int y = y0; y < y1; ++y) {
        for (int x = 0; x < w; ++x) {
          const std::size_t p = static_cast<std::size_t>(y) * w + x;
          const double* dp = data.data() + p * labels;
          const double* in[4] = {at(msg, kFromLeft, p), at(msg, kFromRight, p), at(msg, kFromUp, p),
                                 at(msg, kFromDown, p)};
          for (std::size_t l = 0; l < labels; ++l) base[l] = dp[l] + in[0][l] + in[1][l] + in[2][l] + in[3][l];
          // Outgoing: to the right neighbour arrives "from left", and so on.
          struct Out {
            bool exists;
            int exclude;  // message from the receiver, left out of the product
            int arrive;
            std::size_t q;
          };
          const Out outs[4] = {
              {x + 1 < w, kFromRight, kFromLeft, p + 1},
              {x > 0, kFromLeft, kFromRight, p - 1},
              {y + 1 < h, kFromDown, kFromUp, p + static_cast<std::size_t>(w)},
              {y > 0, kFromUp, kFromDown, p - static_cast<std::size_t>(w)},
          };
          for (const Out& o : outs) {
            if (!o.exists) continue;
            const double* ex = in[o.exclude];
            double hmin = std::numeric_limits<double>::infinity();
            for (std::size_t l = 0; l < labels; ++l) {
              hbuf[l] = base[l] - ex[l];
              hmin = std::min(hmin, hbuf[l]);
            }
            double* dst = at(next, o.arrive, o.q);
            std::copy(hbuf.begin(), hbuf.end(), dst);
            for (std::size_t l = 1; l < labels; ++l) dst[l] = std::min(dst[l], dst[l - 1] + lambda);
            for (std::size_t l = labels - 1; l-- > 0;) dst[l] = std::min(dst[l], dst[l + 1] + lambda);
            if (options.truncation) {
              const double cap = hmin + *options.truncation;
              for (std::size_t l = 0; l < labels; ++l) dst[l] = std::min(dst[l], cap);
            }
            double mmin = std::numeric_limits<double>::infinity();
            for (std::size_t l = 0; l < labels; ++l) mmin = std::min(mmin, dst[l]);
            for (std::size_t l = 0; l < labels; ++l) dst[l] -= mmin;
          }
        }
      }
    });
    double change = 0.0;
    for (std::size_t k = 0; k < msg.size(); ++k) change = std::max(change, std::abs(next[k] - msg[k]));
    const bool fixed = change <= options.tolerance;
    msg.swap(next);
    rep.iterations = it + 1;
    rep.last_change = change;
    if (fixed) {
      rep.converged = true;
      break;
    }
  }
  if (report) *report = rep;

  Image<std::int32_t> out(w, h, -1);
  parallel_for(0, h, options.threads, [&](int y0, int y1) {
    for (int y = y0; y < y1; ++y) {
      for (int x = 0; x < w; ++x) {
        if (!valid(x, y)) continue;
        const std::size_t p = static_cast<std::size_t>(y) * w + x;
        const double* dp = data.data() + p * labels;
        const double* in[4] = {at(msg, kFromLeft, p), at(msg, kFromRight, p), at(msg, kFromUp, p),
                               at(msg, kFromDown, p)};
        out(x, y) = tied_argmin(nl, [&](int l) { return dp[l] + in[0][l] + in[1][l] + in[2][l] + in[3][l]; });
      }
    }
  });
  return out;
}

double labeling_energy(const CostVolume& volume, const Mask& valid, const Image<std::int32_t>& labels,
                       const BpOptions& options) {
  check_inputs(volume, valid);
  if (labels.width() != volume.width || labels.height() != volume.height)
    throw ShapeError("labeling does not match the cost volume");
  auto pair = [&](int a, int b) {
    const double c = options.lambda * std::abs(a - b);
    return options.truncation ? std::min(c, *options.truncation) : c;
  };
  double e = 0.0;
  for (int y = 0; y < volume.height; ++y) {
    for (int x = 0; x < volume.width; ++x) {
      if (!valid(x, y)) continue;
      const int l = labels(x, y);
      if (l < 0 || l >= volume.n_depths) throw InvalidArgument("labeling has an out-of-range label");
      e += data_cost(volume, valid, x, y, l);
      if (x + 1 < volume.width && valid(x + 1, y)) e += pair(l, labels(x + 1, y));
      if (y + 1 < volume.height && valid(x, y + 1)) e += pair(l, labels(x, y + 1));
    }
  }
  return e;
}

MotionEstimate apply_depth_labels(const MotionEstimate& estimate, const CostVolume& volume,
                                  const Image<std::int32_t>& labels) {
  if (labels.width() != estimate.depth_index.width() || labels.height() != estimate.depth_index.height() ||
      labels.width() != volume.width || labels.height() != volume.height)
    throw ShapeError("labels do not match the estimate");
  MotionEstimate out = estimate;
  for (int y = 0; y < labels.height(); ++y) {
    for (int x = 0; x < labels.width(); ++x) {
      if (!estimate.valid(x, y)) continue;
      const int l = labels(x, y);
      if (l == estimate.depth_index(x, y)) continue;
      out.depth_index(x, y) = l;
      const double s = volume.score(x, y, l);
      if (std::isnan(s)) {
        out.valid(x, y) = 0;
        out.score(x, y) = std::numeric_limits<float>::quiet_NaN();
        continue;
      }
      out.score(x, y) = static_cast<float>(s);
      for (auto& v : out.velocity_steps) v(x, y) = volume.depth_velocity[volume.at(x, y, l)];
    }
  }
  return out;
}

}  // namespace sltsr
