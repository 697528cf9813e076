#include "sltsr/sync.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace sltsr {

void ExposureSchedule::validate(int n_pmax) const {
  if (pattern_ids.empty()) throw InvalidArgument("schedule has no patterns");
  if (pattern_ids.size() != weights.size()) throw InvalidArgument("schedule ids and weights differ in length");
  if (n_p != static_cast<int>(pattern_ids.size())) throw InvalidArgument("schedule n_p disagrees with its pattern list");
  if (!(t_e > 0.0)) throw InvalidArgument("schedule exposure must be positive");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w > 0.0 && w <= 1.0 + 1e-9)) throw InvalidArgument("schedule weights must lie in (0, 1]");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-3) throw InvalidArgument("schedule weights must sum to 1");
  for (int id : pattern_ids)
    if (id < 1 || id > n_pmax) throw InvalidArgument("schedule pattern id " + std::to_string(id) + " out of range");
  if (n_start != pattern_ids.front() - 1) throw InvalidArgument("schedule n_start disagrees with its first pattern");
  if (pattern_ids.size() > 1) {
    // Forward (ascending) or time-reversed (descending) cyclic order.
    const int step = (pattern_ids[1] - pattern_ids[0] + n_pmax) % n_pmax;
    if (step != 1 && step != n_pmax - 1) throw InvalidArgument("schedule pattern ids are not consecutive");
    for (std::size_t i = 1; i < pattern_ids.size(); ++i)
      if ((pattern_ids[i] - pattern_ids[i - 1] + n_pmax) % n_pmax != step)
        throw InvalidArgument("schedule pattern ids are not consecutive");
  }
}

double ExposureSchedule::full_weight() const {
  if (weights.empty()) throw InvalidArgument("schedule has no weights");
  return *std::max_element(weights.begin(), weights.end());
}

ExposureSchedule ExposureSchedule::uniform(int first_id, int n_p, int n_pmax, double t_e) {
  if (n_p < 1 || n_pmax < 1 || first_id < 1 || first_id > n_pmax) throw InvalidArgument("bad uniform schedule");
  ExposureSchedule s;
  s.n_start = first_id - 1;
  s.n_p = n_p;
  s.t_e = t_e;
  for (int n = 0; n < n_p; ++n) {
    s.pattern_ids.push_back((first_id - 1 + n) % n_pmax + 1);
    s.weights.push_back(1.0 / n_p);
  }
  return s;
}

ExposureSchedule matching_schedule(const ExposureSchedule& schedule, double min_weight, double snap_tol) {
  ExposureSchedule s = schedule;
  if (s.pattern_ids.size() > 1 && s.weights.front() < min_weight) {
    s.weights[1] += s.weights.front();
    s.weights.erase(s.weights.begin());
    s.pattern_ids.erase(s.pattern_ids.begin());
  }
  if (s.pattern_ids.size() > 1 && s.weights.back() < min_weight) {
    s.weights[s.weights.size() - 2] += s.weights.back();
    s.weights.pop_back();
    s.pattern_ids.pop_back();
  }
  // Whole intervals all last T_proj; measured weights within snap_tol of the
  // largest are treated as whole and share their mean.
  const double top = *std::max_element(s.weights.begin(), s.weights.end());
  double whole = 0.0;
  int count = 0;
  for (double w : s.weights)
    if (w >= top - snap_tol) {
      whole += w;
      ++count;
    }
  whole /= count;
  for (double& w : s.weights)
    if (w >= top - snap_tol) w = whole;
  double total = 0.0;
  for (double w : s.weights) total += w;
  for (double& w : s.weights) w /= total;
  s.n_p = static_cast<int>(s.pattern_ids.size());
  s.n_start = s.pattern_ids.front() - 1;
  return s;
}

ExposureSchedule reversed(const ExposureSchedule& schedule) {
  ExposureSchedule s = schedule;
  std::reverse(s.pattern_ids.begin(), s.pattern_ids.end());
  std::reverse(s.weights.begin(), s.weights.end());
  s.n_start = s.pattern_ids.front() - 1;
  return s;
}

MarkerReadout read_markers(const ImageF& capture, const MarkerGeometry& geometry) {
  geometry.validate(capture.width(), capture.height());
  MarkerReadout r;
  for (int k = 1; k <= geometry.slot_count; ++k) {
    const Rect slot = geometry.slot_of(k);
    double sum = 0.0;
    for (int y = slot.y0; y < slot.y1(); ++y)
      for (int x = slot.x0; x < slot.x1(); ++x) sum += capture(x, y);
    r.slot_means.push_back(sum / (static_cast<double>(slot.width) * slot.height));
  }
  return r;
}

ExposureSchedule decode_markers(const ImageF& capture, double t_e, const MarkerGeometry& geometry, int n_pmax,
                                double threshold) {
  if (n_pmax < 1 || n_pmax > geometry.slot_count) throw InvalidArgument("n_pmax must be in [1, slot_count]");
  if (!(threshold > 0.0 && threshold < 1.0)) throw InvalidArgument("marker threshold must be in (0, 1)");
  const auto readout = read_markers(capture, geometry);
  const std::vector<double> means(readout.slot_means.begin(), readout.slot_means.begin() + n_pmax);
  const double peak = *std::max_element(means.begin(), means.end());
  if (!(peak > 0.0)) throw NoSignal("no marker slot is lit");
  std::vector<bool> active(static_cast<std::size_t>(n_pmax));
  for (int k = 0; k < n_pmax; ++k) active[static_cast<std::size_t>(k)] = means[static_cast<std::size_t>(k)] >= threshold * peak;

  // Start slots of active runs in cyclic order.
  std::vector<int> starts;
  for (int k = 0; k < n_pmax; ++k) {
    const int prev = (k + n_pmax - 1) % n_pmax;
    if (active[static_cast<std::size_t>(k)] && !active[static_cast<std::size_t>(prev)]) starts.push_back(k);
  }
  if (starts.empty()) {
    if (n_pmax != 1) throw AmbiguousSchedule("every marker slot is lit; the start of the exposure is ambiguous");
    starts.push_back(0);
  }
  if (starts.size() > 1) throw AmbiguousSchedule("marker activity has more than one gap");

  ExposureSchedule s;
  s.t_e = t_e;
  double total = 0.0;
  for (int k = starts.front(), count = 0; count < n_pmax && active[static_cast<std::size_t>(k)]; k = (k + 1) % n_pmax, ++count) {
    s.pattern_ids.push_back(k + 1);
    s.weights.push_back(means[static_cast<std::size_t>(k)]);
    total += means[static_cast<std::size_t>(k)];
  }
  for (double& w : s.weights) w /= total;
  s.n_p = static_cast<int>(s.pattern_ids.size());
  s.n_start = s.pattern_ids.front() - 1;
  return s;
}

}  // namespace sltsr
