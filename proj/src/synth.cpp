#include "sltsr/synth.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sltsr {

double interval_sweep(const ExposureSchedule& schedule, int n, double step_mm, double v_mm_s) {
  return v_mm_s * schedule.duration_s(n) / step_mm;
}

std::vector<int> sweep_offsets(const ExposureSchedule& schedule, double step_mm, std::span<const double> velocities_mm_s) {
  if (velocities_mm_s.empty()) throw InvalidArgument("need at least one velocity");
  if (velocities_mm_s.size() != 1 && static_cast<int>(velocities_mm_s.size()) != schedule.n_p)
    throw InvalidArgument("need one velocity or one per scheduled pattern");
  std::vector<int> offsets{0};
  double total = 0.0;
  for (int n = 0; n < schedule.n_p; ++n) {
    const double v = velocities_mm_s.size() == 1 ? velocities_mm_s.front() : velocities_mm_s[static_cast<std::size_t>(n)];
    total = total + interval_sweep(schedule, n, step_mm, v);
    offsets.push_back(boundary_offset(total));
  }
  return offsets;
}

std::optional<std::vector<SweepTerm>> sweep_terms(const ExposureSchedule& schedule, int d0_index,
                                                  std::span<const int> offsets, int n_slices) {
  if (static_cast<int>(offsets.size()) != schedule.n_p + 1)
    throw InvalidArgument("need one boundary offset per interval boundary");
  std::vector<SweepTerm> terms(static_cast<std::size_t>(schedule.n_p));
  for (int n = 0; n < schedule.n_p; ++n) {
    const int start = d0_index + offsets[static_cast<std::size_t>(n)];
    const int end = d0_index + offsets[static_cast<std::size_t>(n) + 1];
    SweepTerm& t = terms[static_cast<std::size_t>(n)];
    t.pattern_id = schedule.pattern_ids[static_cast<std::size_t>(n)];
    t.lo = std::min(start, end);
    t.hi = std::max(start, end);
    t.weight = schedule.weights[static_cast<std::size_t>(n)];
    if (t.lo < 0 || t.hi >= n_slices) return std::nullopt;
  }
  return terms;
}

std::vector<SweepTerm> plan_sweep(const ReferenceDatabase& db, const ExposureSchedule& schedule,
                                  const MotionHypothesis& hypothesis) {
  if (hypothesis.velocities_mm_s.empty()) throw InvalidArgument("hypothesis needs at least one velocity");
  if (hypothesis.velocities_mm_s.size() != 1 && static_cast<int>(hypothesis.velocities_mm_s.size()) != schedule.n_p)
    throw InvalidArgument("hypothesis needs one velocity or one per scheduled pattern");
  int d0 = 0;
  try {
    d0 = db.index_of(hypothesis.d0_mm);
  } catch (const IndexError&) {
    throw HypothesisOutOfRange("start depth outside the database range");
  }
  const auto offsets = sweep_offsets(schedule, db.step(), hypothesis.velocities_mm_s);
  auto terms = sweep_terms(schedule, d0, offsets, db.n_slices());
  if (!terms) {
    std::ostringstream msg;
    msg << "hypothesis d0=" << hypothesis.d0_mm << " mm sweeps outside [" << db.d_min() << ", " << db.d_max() << "]";
    throw HypothesisOutOfRange(msg.str());
  }
  return *terms;
}

double synth_scale(const ReferenceDatabase& db, const ExposureSchedule& schedule) {
  double total = 0.0;
  for (double w : schedule.weights) total += w;
  return (schedule.t_e / db.t_e_ref()) / total;
}

DepthIntegral::DepthIntegral(const ReferenceDatabase& db, int pattern_id, Rect region, int levels)
    : pattern_id_(pattern_id), region_(region), levels_(levels < 0 ? db.n_slices() + 1 : levels) {
  if (region.empty() || !Rect{0, 0, db.width(), db.height()}.contains(region))
    throw IndexError("integral region outside the database frame");
  if (levels_ < 1 || levels_ > db.n_slices() + 1) throw InvalidArgument("bad integral level count");
  const std::size_t px = static_cast<std::size_t>(region.width) * static_cast<std::size_t>(region.height);
  data_.assign(px * static_cast<std::size_t>(levels_), 0.0);
  for (int k = 1; k < levels_; ++k) {
    const auto slice = db.slice(pattern_id, k - 1);
    const double* prev = level(k - 1);
    double* cur = data_.data() + px * static_cast<std::size_t>(k);
    for (int y = 0; y < region.height; ++y) {
      const float* src = slice.data() + static_cast<std::size_t>(region.y0 + y) * static_cast<std::size_t>(db.width()) +
                         static_cast<std::size_t>(region.x0);
      const std::size_t o = static_cast<std::size_t>(y) * static_cast<std::size_t>(region.width);
      for (int x = 0; x < region.width; ++x) cur[o + x] = prev[o + x] + static_cast<double>(src[x]);
    }
  }
}

namespace {

const DepthIntegral& integral_for(std::span<const DepthIntegral* const> integrals, int pattern_id) {
  for (const DepthIntegral* i : integrals)
    if (i->pattern_id() == pattern_id) return *i;
  throw IndexError("no depth integral for pattern " + std::to_string(pattern_id));
}

ImageD synth_window(const ReferenceDatabase& db, const ExposureSchedule& schedule, const MotionHypothesis& hypothesis,
                    Pixel center, int window) {
  if (window <= 0) throw InvalidArgument("window must be positive");
  const Rect rect = window_rect(center, window);
  if (!Rect{0, 0, db.width(), db.height()}.contains(rect)) throw InvalidArgument("window leaves the image");
  const auto terms = plan_sweep(db, schedule, hypothesis);
  int top = 0;
  for (const auto& t : terms) top = std::max(top, t.hi);
  std::vector<DepthIntegral> owned;
  for (const auto& t : terms) {
    const bool have = std::any_of(owned.begin(), owned.end(), [&](const DepthIntegral& d) { return d.pattern_id() == t.pattern_id; });
    if (!have) owned.emplace_back(db, t.pattern_id, rect, top + 2);
  }
  std::vector<const DepthIntegral*> ptrs;
  for (const auto& d : owned) ptrs.push_back(&d);
  return synthesize(ptrs, terms, synth_scale(db, schedule), rect);
}

}  // namespace

ImageD synthesize(std::span<const DepthIntegral* const> integrals, std::span<const SweepTerm> terms, double scale,
                  const Rect& rect) {
  ImageD out(rect.width, rect.height, 0.0);
  for (const auto& term : terms) {
    const DepthIntegral& integral = integral_for(integrals, term.pattern_id);
    const Rect& reg = integral.region();
    if (!reg.contains(rect)) throw IndexError("synthesis rectangle outside integral region");
    if (term.hi + 1 >= integral.levels()) throw IndexError("integral does not cover the sweep");
    for (int y = 0; y < rect.height; ++y) {
      const std::size_t offset = static_cast<std::size_t>(rect.y0 - reg.y0 + y) * static_cast<std::size_t>(reg.width) +
                                 static_cast<std::size_t>(rect.x0 - reg.x0);
      accumulate_term(integral, term, offset, static_cast<std::size_t>(rect.width), out.row(y).data());
    }
  }
  for (double& v : out.pixels()) v = v * scale;
  return out;
}

ImageD synth_const(const ReferenceDatabase& db, const ExposureSchedule& schedule, double d0_mm, double v_mm_s,
                   Pixel center, int window) {
  return synth_window(db, schedule, MotionHypothesis::constant(d0_mm, v_mm_s), center, window);
}

ImageD synth_fine(const ReferenceDatabase& db, const ExposureSchedule& schedule, double d0_mm,
                  std::span<const double> velocities_mm_s, Pixel center, int window) {
  if (static_cast<int>(velocities_mm_s.size()) != schedule.n_p)
    throw InvalidArgument("synth_fine needs one velocity per scheduled pattern");
  return synth_window(db, schedule, MotionHypothesis{d0_mm, {velocities_mm_s.begin(), velocities_mm_s.end()}}, center,
                      window);
}

Moments window_moments(const ImageD& a, const ImageD& b) {
  if (!a.same_shape(b) || a.empty()) throw ShapeError("ncc needs two non-empty patches of equal shape");
  Moments m;
  m.n = static_cast<double>(a.size());
  for (int y = 0; y < a.height(); ++y) {
    double ra = 0.0, rb = 0.0, raa = 0.0, rbb = 0.0, rab = 0.0;
    auto pa = a.row(y);
    auto pb = b.row(y);
    for (int x = 0; x < a.width(); ++x) {
      ra += pa[x];
      rb += pb[x];
      raa += pa[x] * pa[x];
      rbb += pb[x] * pb[x];
      rab += pa[x] * pb[x];
    }
    m.a += ra;
    m.b += rb;
    m.aa += raa;
    m.bb += rbb;
    m.ab += rab;
  }
  return m;
}

double ncc(const ImageD& a, const ImageD& b) { return ncc_from_moments(window_moments(a, b)); }

}  // namespace sltsr
