#include "sltsr/config.hpp"

#include <fstream>

#include "sltsr/errors.hpp"
#include "sltsr/eval.hpp"

namespace sltsr {

using nlohmann::json;

namespace {

template <typename T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> get_opt(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<T>();
}

void merge(json& base, const json& user, const std::string& path) {
  if (!user.is_object()) throw InvalidArgument("config " + (path.empty() ? std::string("root") : path) + " must be an object");
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    if (!base.contains(it.key())) throw InvalidArgument("unknown config key '" + key + "'");
    json& slot = base[it.key()];
    if (slot.is_object())
      merge(slot, it.value(), key);
    else
      slot = it.value();
  }
}

RunConfig from_json(const json& j) {
  RunConfig c;
  const json& r = j.at("rig");
  c.rig.focal_px = r.at("focal_px").get<double>();
  c.rig.baseline_mm = r.at("baseline_mm").get<double>();
  c.rig.cam_width = r.at("cam_width").get<int>();
  c.rig.cam_height = r.at("cam_height").get<int>();
  c.rig.d_min_mm = r.at("d_min_mm").get<double>();
  c.rig.d_max_mm = r.at("d_max_mm").get<double>();
  c.rig.focus_depth_mm = r.at("focus_depth_mm").get<double>();
  c.rig.defocus_gain = r.at("defocus_gain").get<double>();
  c.rig.noise_sigma = r.at("noise_sigma").get<double>();
  c.rig.exposure_unit_s = r.at("exposure_unit_s").get<double>();
  c.rig.gain = r.at("gain").get<double>();
  c.rig.projector_offset_px = get_opt<double>(r.at("projector_offset_px"));

  const json& p = j.at("patterns");
  c.patterns.n_pmax = p.at("n_pmax").get<int>();
  c.patterns.total_density = p.at("total_density").get<double>();
  c.patterns.equalize = p.at("equalize").get<bool>();
  c.patterns.dot_radius = p.at("dot_radius").get<int>();
  c.patterns.seed = p.at("seed").get<std::uint64_t>();
  c.patterns.marker_rows = p.at("marker_rows").get<int>();
  c.patterns.marker_gap = p.at("marker_gap").get<int>();

  const json& s = j.at("scene");
  c.scene.depth_mm = s.at("depth_mm").get<double>();
  if (s.at("velocities_mm_s").is_number())
    c.scene.velocities_mm_s = {s.at("velocities_mm_s").get<double>()};
  else
    c.scene.velocities_mm_s = s.at("velocities_mm_s").get<std::vector<double>>();
  c.scene.acceleration_mm_s2 = s.at("acceleration_mm_s2").get<double>();
  c.scene.t_e_s = s.at("t_e_s").get<double>();
  c.scene.n_patterns = s.at("n_patterns").get<int>();
  c.scene.start_phase = s.at("start_phase").get<double>();
  c.scene.first_pattern = s.at("first_pattern").get<int>();
  c.scene.texture = s.at("texture").get<std::string>();
  c.scene.texture_period_px = s.at("texture_period_px").get<int>();
  c.scene.texture_seed = s.at("texture_seed").get<std::uint64_t>();
  c.scene.noise_seed = s.at("noise_seed").get<std::uint64_t>();
  c.scene.substeps = s.at("substeps").get<int>();

  const json& d = j.at("database");
  c.database.step_mm = d.at("step_mm").get<double>();
  c.database.t_e_ref_s = d.at("t_e_ref_s").get<double>();

  const json& q = j.at("search");
  c.search.window = q.at("window").get<int>();
  c.search.score_min = q.at("score_min").get<double>();
  c.search.v_max_mm_s = q.at("v_max_mm_s").get<double>();
  c.search.v_step_mm_s = get_opt<double>(q.at("v_step_mm_s"));
  c.search.local_radius = q.at("local_radius").get<int>();
  c.search.v_adjacency_max_mm_s = get_opt<double>(q.at("v_adjacency_max_mm_s"));
  c.search.min_weight = q.at("min_weight").get<double>();
  c.search.marker_threshold = q.at("marker_threshold").get<double>();
  c.search.bp_lambda = q.at("bp_lambda").get<double>();
  c.search.bp_iterations = q.at("bp_iterations").get<int>();
  c.search.bp_truncation = get_opt<double>(q.at("bp_truncation"));
  c.search.order = q.at("order").get<std::vector<std::string>>();
  c.search.bidirectional = q.at("bidirectional").get<bool>();

  c.threads = j.at("threads").get<int>();
  return c;
}

}  // namespace

void RunConfig::validate() const {
  rig.validate();
  if (scene.n_patterns < 1) throw InvalidArgument("scene.n_patterns must be >= 1");
  if (n_pmax() < scene.n_patterns) throw InvalidArgument("patterns.n_pmax must be >= scene.n_patterns");
  if (scene.first_pattern < 1 || scene.first_pattern > n_pmax()) throw InvalidArgument("scene.first_pattern out of range");
  if (!(scene.t_e_s > 0.0)) throw InvalidArgument("scene.t_e_s must be positive");
  if (!(scene.start_phase >= 0.0 && scene.start_phase < 1.0)) throw InvalidArgument("scene.start_phase must be in [0, 1)");
  if (scene.velocities_mm_s.empty()) throw InvalidArgument("scene.velocities_mm_s must not be empty");
  if (!(scene.depth_mm >= rig.d_min_mm && scene.depth_mm <= rig.d_max_mm))
    throw InvalidArgument("scene.depth_mm outside the rig depth range");
  parse_texture(scene.texture);
  if (scene.texture_period_px < 1) throw InvalidArgument("scene.texture_period_px must be >= 1");
  if (scene.substeps < 8) throw InvalidArgument("scene.substeps must be >= 8");
  if (!(patterns.total_density > 0.0 && patterns.total_density < 1.0))
    throw InvalidArgument("patterns.total_density must lie in (0, 1)");
  if (patterns.equalize && patterns.total_density * n_pmax() / scene.n_patterns >= 1.0)
    throw InvalidArgument("equalized pattern cycle would need a lit fraction >= 1; lower total_density or n_pmax");
  if (patterns.dot_radius < 0) throw InvalidArgument("patterns.dot_radius must be >= 0");
  if (patterns.marker_rows < 1 || patterns.marker_rows >= rig.cam_height)
    throw InvalidArgument("patterns.marker_rows must leave a measurement region");
  if (!(database.step_mm > 0.0)) throw InvalidArgument("database.step_mm must be positive");
  if (!(database.t_e_ref_s > 0.0)) throw InvalidArgument("database.t_e_ref_s must be positive");
  if (search.window < 8) throw InvalidArgument("search.window must be >= 8");
  if (search.local_radius < 0) throw InvalidArgument("search.local_radius must be >= 0");
  if (search.v_step_mm_s && !(*search.v_step_mm_s > 0.0)) throw InvalidArgument("search.v_step_mm_s must be positive");
  if (!(search.v_max_mm_s >= 0.0)) throw InvalidArgument("search.v_max_mm_s must be >= 0");
  if (search.v_adjacency_max_mm_s && !(*search.v_adjacency_max_mm_s > 0.0))
    throw InvalidArgument("search.v_adjacency_max_mm_s must be positive");
  if (search.bp_iterations < 1) throw InvalidArgument("search.bp_iterations must be >= 1");
  if (!(search.bp_lambda >= 0.0)) throw InvalidArgument("search.bp_lambda must be >= 0");
  if (search.order.empty() || search.order.front() != "coarse")
    throw InvalidArgument("search.order must start with \"coarse\"");
  for (std::size_t k = 0; k < search.order.size(); ++k) {
    const auto& s = search.order[k];
    if (s != "coarse" && s != "bp" && s != "fine") throw InvalidArgument("unknown stage '" + s + "' in search.order");
    if (k > 0 && s == "coarse") throw InvalidArgument("coarse may only appear first in search.order");
  }
  if (threads < 1) throw InvalidArgument("threads must be >= 1");
}

json to_json(const RunConfig& c) {
  json j;
  j["rig"] = {{"focal_px", c.rig.focal_px},
              {"baseline_mm", c.rig.baseline_mm},
              {"cam_width", c.rig.cam_width},
              {"cam_height", c.rig.cam_height},
              {"d_min_mm", c.rig.d_min_mm},
              {"d_max_mm", c.rig.d_max_mm},
              {"focus_depth_mm", c.rig.focus_depth_mm},
              {"defocus_gain", c.rig.defocus_gain},
              {"noise_sigma", c.rig.noise_sigma},
              {"exposure_unit_s", c.rig.exposure_unit_s},
              {"gain", c.rig.gain},
              {"projector_offset_px", opt(c.rig.projector_offset_px)}};
  j["patterns"] = {{"n_pmax", c.patterns.n_pmax},
                   {"total_density", c.patterns.total_density},
                   {"equalize", c.patterns.equalize},
                   {"dot_radius", c.patterns.dot_radius},
                   {"seed", c.patterns.seed},
                   {"marker_rows", c.patterns.marker_rows},
                   {"marker_gap", c.patterns.marker_gap}};
  j["scene"] = {{"depth_mm", c.scene.depth_mm},
                {"velocities_mm_s", c.scene.velocities_mm_s},
                {"acceleration_mm_s2", c.scene.acceleration_mm_s2},
                {"t_e_s", c.scene.t_e_s},
                {"n_patterns", c.scene.n_patterns},
                {"start_phase", c.scene.start_phase},
                {"first_pattern", c.scene.first_pattern},
                {"texture", c.scene.texture},
                {"texture_period_px", c.scene.texture_period_px},
                {"texture_seed", c.scene.texture_seed},
                {"noise_seed", c.scene.noise_seed},
                {"substeps", c.scene.substeps}};
  j["database"] = {{"step_mm", c.database.step_mm}, {"t_e_ref_s", c.database.t_e_ref_s}};
  j["search"] = {{"window", c.search.window},
                 {"score_min", c.search.score_min},
                 {"v_max_mm_s", c.search.v_max_mm_s},
                 {"v_step_mm_s", opt(c.search.v_step_mm_s)},
                 {"local_radius", c.search.local_radius},
                 {"v_adjacency_max_mm_s", opt(c.search.v_adjacency_max_mm_s)},
                 {"min_weight", c.search.min_weight},
                 {"marker_threshold", c.search.marker_threshold},
                 {"bp_lambda", c.search.bp_lambda},
                 {"bp_iterations", c.search.bp_iterations},
                 {"bp_truncation", opt(c.search.bp_truncation)},
                 {"order", c.search.order},
                 {"bidirectional", c.search.bidirectional}};
  j["threads"] = c.threads;
  return j;
}

RunConfig parse_config(const json& j) {
  json merged = to_json(RunConfig{});
  merge(merged, j, "");
  RunConfig c;
  try {
    c = from_json(merged);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidArgument("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

RunConfig apply_overrides(const RunConfig& config, const std::vector<std::string>& overrides) {
  json j = to_json(config);
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) throw InvalidArgument("override '" + o + "' is not key=value");
    const std::string key = o.substr(0, eq);
    const std::string text = o.substr(eq + 1);
    json value;
    try {
      value = json::parse(text);
    } catch (const json::exception&) {
      value = text;
    }
    json patch = value;
    std::string rest = key;
    std::vector<std::string> parts;
    for (std::size_t pos; (pos = rest.find('.')) != std::string::npos; rest = rest.substr(pos + 1))
      parts.push_back(rest.substr(0, pos));
    parts.push_back(rest);
    for (auto it = parts.rbegin(); it != parts.rend(); ++it) patch = json{{*it, patch}};
    merge(j, patch, "");
  }
  return parse_config(j);
}

}  // namespace sltsr
