#include "sltsr/refdb.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "sltsr/parallel.hpp"

namespace sltsr {
namespace {

constexpr const char* kFormat = "sltsr-refdb";
constexpr int kVersion = 1;

std::string stack_name(int pattern_id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "pattern_%03d.f32", pattern_id);
  return buf;
}

std::size_t frame_size(const ReferenceDatabase::Meta& m) {
  return static_cast<std::size_t>(m.width) * static_cast<std::size_t>(m.height);
}

}  // namespace

int slice_count(double d_min, double d_max, double step) {
  if (!(step > 0.0)) throw InvalidArgument("depth step must be positive");
  if (!(d_max >= d_min)) throw InvalidArgument("depth range is empty");
  const double range = d_max - d_min;
  if (range > 0.0 && step > range) throw InvalidArgument("depth step larger than the depth range");
  return static_cast<int>(std::floor(range / step + 1e-9)) + 1;
}

ReferenceDatabase::ReferenceDatabase(Meta meta, std::vector<std::vector<float>> stacks)
    : meta_(std::move(meta)), stacks_(std::move(stacks)) {
  if (meta_.width <= 0 || meta_.height <= 0 || meta_.n_slices <= 0) throw InvalidArgument("empty database");
  if (stacks_.size() != meta_.pattern_ids.size()) throw InvalidArgument("one stack per pattern id required");
  for (const auto& s : stacks_)
    if (s.size() != frame_size(meta_) * static_cast<std::size_t>(meta_.n_slices))
      throw InvalidArgument("database stack has the wrong number of pixels");
}

bool ReferenceDatabase::has_pattern(int pattern_id) const {
  return std::find(meta_.pattern_ids.begin(), meta_.pattern_ids.end(), pattern_id) != meta_.pattern_ids.end();
}

std::size_t ReferenceDatabase::stack_of(int pattern_id) const {
  const auto it = std::find(meta_.pattern_ids.begin(), meta_.pattern_ids.end(), pattern_id);
  if (it == meta_.pattern_ids.end()) throw IndexError("pattern id " + std::to_string(pattern_id) + " not in database");
  return static_cast<std::size_t>(it - meta_.pattern_ids.begin());
}

int ReferenceDatabase::index_of(double depth_mm) const {
  const double x = (depth_mm - meta_.d_min_mm) / meta_.step_mm;
  const int idx = static_cast<int>(std::ceil(x - 0.5));
  if (!std::isfinite(x) || idx < 0 || idx >= meta_.n_slices) {
    std::ostringstream msg;
    msg << "depth " << depth_mm << " mm outside database range";
    throw IndexError(msg.str());
  }
  return idx;
}

std::span<const float> ReferenceDatabase::slice(int pattern_id, int depth_index) const {
  const std::size_t s = stack_of(pattern_id);
  if (depth_index < 0 || depth_index >= meta_.n_slices)
    throw IndexError("depth index " + std::to_string(depth_index) + " out of range");
  const std::size_t n = frame_size(meta_);
  return {stacks_[s].data() + n * static_cast<std::size_t>(depth_index), n};
}

PatchView ReferenceDatabase::slice_patch(int pattern_id, int depth_index, Pixel center, int window) const {
  if (window <= 0) throw InvalidArgument("window must be positive");
  const auto frame = slice(pattern_id, depth_index);
  const Rect want = window_rect(center, window);
  const Rect got = want.intersect(Rect{0, 0, meta_.width, meta_.height});
  if (got.empty()) throw IndexError("patch lies entirely outside the image");
  PatchView view;
  view.stride = meta_.width;
  view.rect = got;
  view.partial = !(got == want);
  view.origin = frame.data() + static_cast<std::size_t>(got.y0) * static_cast<std::size_t>(meta_.width) +
                static_cast<std::size_t>(got.x0);
  return view;
}

ReferenceDatabase build_database(const Rig& rig, std::span<const DotPattern> patterns, double step_mm,
                                 double t_e_ref_s, int threads) {
  rig.validate();
  if (patterns.empty()) throw InvalidArgument("database needs at least one pattern");
  if (!(t_e_ref_s > 0.0)) throw InvalidArgument("reference exposure must be positive");
  ReferenceDatabase::Meta meta;
  meta.d_min_mm = rig.d_min_mm;
  meta.d_max_mm = rig.d_max_mm;
  meta.step_mm = step_mm;
  meta.t_e_ref_s = t_e_ref_s;
  meta.width = rig.cam_width;
  meta.height = rig.cam_height;
  meta.n_slices = slice_count(rig.d_min_mm, rig.d_max_mm, step_mm);
  for (const auto& p : patterns) {
    if (std::find(meta.pattern_ids.begin(), meta.pattern_ids.end(), p.pattern_id) != meta.pattern_ids.end())
      throw InvalidArgument("duplicate pattern id " + std::to_string(p.pattern_id));
    meta.pattern_ids.push_back(p.pattern_id);
  }
  Rig clean = rig;
  clean.noise_sigma = 0.0;
  const std::size_t n = frame_size(meta);
  std::vector<std::vector<float>> stacks(patterns.size(),
                                         std::vector<float>(n * static_cast<std::size_t>(meta.n_slices)));
  const int jobs = static_cast<int>(patterns.size()) * meta.n_slices;
  parallel_for(0, jobs, threads, [&](int begin, int end) {
    for (int job = begin; job < end; ++job) {
      const int p = job / meta.n_slices;
      const int i = job % meta.n_slices;
      const double depth = std::min(meta.d_min_mm + i * step_mm, meta.d_max_mm);
      const ImageF img = render_static(clean, patterns[static_cast<std::size_t>(p)], depth, t_e_ref_s);
      std::copy(img.pixels().begin(), img.pixels().end(),
                stacks[static_cast<std::size_t>(p)].begin() + static_cast<std::ptrdiff_t>(n * static_cast<std::size_t>(i)));
    }
  });
  return ReferenceDatabase(std::move(meta), std::move(stacks));
}

void save_database(const ReferenceDatabase& db, const std::filesystem::path& dir) {
  static_assert(std::endian::native == std::endian::little, "database writer assumes a little-endian host");
  std::filesystem::create_directories(dir);
  const auto& m = db.meta();
  nlohmann::json manifest;
  manifest["format"] = kFormat;
  manifest["version"] = kVersion;
  manifest["d_min_mm"] = m.d_min_mm;
  manifest["d_max_mm"] = m.d_max_mm;
  manifest["step_mm"] = m.step_mm;
  manifest["t_e_ref_s"] = m.t_e_ref_s;
  manifest["width"] = m.width;
  manifest["height"] = m.height;
  manifest["n_slices"] = m.n_slices;
  manifest["n_patterns"] = db.n_patterns();
  manifest["dtype"] = "float32";
  manifest["endianness"] = "little";
  manifest["layout"] = "depth-major, row-major";
  manifest["stacks"] = nlohmann::json::array();
  const std::size_t frame = frame_size(m);
  for (int id : m.pattern_ids) {
    const std::string name = stack_name(id);
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw IoError("cannot write " + (dir / name).string());
    for (int i = 0; i < m.n_slices; ++i) {
      const auto s = db.slice(id, i);
      out.write(reinterpret_cast<const char*>(s.data()), static_cast<std::streamsize>(s.size() * sizeof(float)));
    }
    if (!out) throw IoError("short write on " + (dir / name).string());
    manifest["stacks"].push_back({{"pattern_id", id},
                                  {"file", name},
                                  {"bytes", frame * static_cast<std::size_t>(m.n_slices) * sizeof(float)}});
  }
  std::ofstream out(dir / "manifest.json");
  if (!out) throw IoError("cannot write manifest in " + dir.string());
  out << manifest.dump(2) << '\n';
}

ReferenceDatabase load_database(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw IoError("no manifest.json in " + dir.string());
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw CorruptDatabase(std::string("manifest is not valid JSON: ") + e.what());
  }
  ReferenceDatabase::Meta m;
  try {
    if (manifest.at("format").get<std::string>() != kFormat) throw CorruptDatabase("unknown database format");
    if (manifest.at("version").get<int>() != kVersion) throw CorruptDatabase("unsupported database version");
    if (manifest.at("dtype").get<std::string>() != "float32" || manifest.at("endianness").get<std::string>() != "little")
      throw CorruptDatabase("database must be little-endian float32");
    m.d_min_mm = manifest.at("d_min_mm").get<double>();
    m.d_max_mm = manifest.at("d_max_mm").get<double>();
    m.step_mm = manifest.at("step_mm").get<double>();
    m.t_e_ref_s = manifest.at("t_e_ref_s").get<double>();
    m.width = manifest.at("width").get<int>();
    m.height = manifest.at("height").get<int>();
    m.n_slices = manifest.at("n_slices").get<int>();
    for (const auto& s : manifest.at("stacks")) m.pattern_ids.push_back(s.at("pattern_id").get<int>());
    if (static_cast<int>(m.pattern_ids.size()) != manifest.at("n_patterns").get<int>())
      throw CorruptDatabase("manifest pattern count disagrees with its stack list");
  } catch (const nlohmann::json::exception& e) {
    throw CorruptDatabase(std::string("manifest field missing or mistyped: ") + e.what());
  }
  if (m.width <= 0 || m.height <= 0 || m.n_slices <= 0 || m.pattern_ids.empty())
    throw CorruptDatabase("manifest declares an empty database");
  int expected_slices = 0;
  try {
    expected_slices = slice_count(m.d_min_mm, m.d_max_mm, m.step_mm);
  } catch (const InvalidArgument& e) {
    throw CorruptDatabase(std::string("manifest depth range invalid: ") + e.what());
  }
  if (expected_slices != m.n_slices) throw CorruptDatabase("manifest slice count does not match its depth range");

  const std::size_t bytes = frame_size(m) * static_cast<std::size_t>(m.n_slices) * sizeof(float);
  std::vector<std::vector<float>> stacks;
  for (const auto& s : manifest.at("stacks")) {
    const auto path = dir / s.at("file").get<std::string>();
    std::error_code ec;
    const auto actual = std::filesystem::file_size(path, ec);
    if (ec) throw CorruptDatabase("missing stack file " + path.string());
    if (actual != bytes || s.at("bytes").get<std::size_t>() != bytes)
      throw CorruptDatabase("stack " + path.string() + " has " + std::to_string(actual) + " bytes, expected " +
                            std::to_string(bytes));
    std::vector<float> data(bytes / sizeof(float));
    std::ifstream f(path, std::ios::binary);
    f.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(bytes));
    if (f.gcount() != static_cast<std::streamsize>(bytes)) throw CorruptDatabase("short read on " + path.string());
    stacks.push_back(std::move(data));
  }
  return ReferenceDatabase(std::move(m), std::move(stacks));
}

}  // namespace sltsr
