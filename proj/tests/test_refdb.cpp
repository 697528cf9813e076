#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "fixtures.hpp"
#include "sltsr/errors.hpp"
#include "sltsr/refdb.hpp"

using namespace sltsr;
namespace fs = std::filesystem;

namespace {

struct Small {
  Rig rig;
  std::vector<DotPattern> patterns;
  ReferenceDatabase db;
  Small() {
    rig.cam_width = 32;
    rig.cam_height = 24;
    rig.d_min_mm = 600.0;
    rig.d_max_mm = 610.0;
    patterns = generate_equalized_set(2, 0.3, rig.projector_width(), rig.cam_height, 4);
    db = build_database(rig, patterns, 0.5, 1.0 / 3.0);
  }
};

}  // namespace

TEST_CASE("slice count and depth indexing") {
  CHECK(slice_count(500.0, 800.0, 0.5) == 601);
  CHECK(slice_count(600.0, 600.0, 0.5) == 1);
  CHECK_THROWS_AS(slice_count(600.0, 601.0, 2.0), InvalidArgument);
  const Small s;
  CHECK(s.db.n_slices() == 21);
  CHECK(s.db.depth_of(4) == 602.0);
  CHECK(s.db.index_of(602.2) == 4);
  CHECK(s.db.index_of(602.25) == 4);
  CHECK(s.db.index_of(610.2) == 20);
  CHECK_THROWS_AS(s.db.index_of(611.0), IndexError);
}

TEST_CASE("every slice is the static render at its depth") {
  const Small s;
  for (int k = 0; k < 2; ++k)
    for (int i : {0, 7, 20}) {
      const ImageF ref = render_static(s.rig, s.patterns[static_cast<std::size_t>(k)], s.db.depth_of(i), 1.0 / 3.0);
      const auto sl = s.db.slice(k + 1, i);
      for (std::size_t p = 0; p < ref.size(); ++p) CHECK(sl[p] == ref.pixels()[p]);
    }
}

TEST_CASE("database build ignores camera noise and thread count") {
  Small s;
  Rig noisy = s.rig;
  noisy.noise_sigma = 0.05;
  CHECK(build_database(noisy, s.patterns, 0.5, 1.0 / 3.0, 3) == s.db);
}

TEST_CASE("patch views clip at the border") {
  const Small s;
  const PatchView v = s.db.slice_patch(1, 3, Pixel{10, 10}, 8);
  CHECK_FALSE(v.partial);
  CHECK(v.rect == Rect{6, 6, 8, 8});
  CHECK(v(0, 0) == s.db.slice(1, 3)[6 * 32 + 6]);
  const PatchView e = s.db.slice_patch(1, 3, Pixel{1, 1}, 8);
  CHECK(e.partial);
  CHECK_THROWS_AS(s.db.slice(9, 0), IndexError);
}

TEST_CASE("save and load round trip, corruption is detected") {
  const Small s;
  const fs::path dir = fs::temp_directory_path() / "sltsr_refdb_test";
  fs::remove_all(dir);
  save_database(s.db, dir);
  CHECK(load_database(dir) == s.db);

  // Truncated stack.
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() != ".json") {
      fs::resize_file(e.path(), fs::file_size(e.path()) - 4);
      break;
    }
  CHECK_THROWS_AS(load_database(dir), CorruptDatabase);

  save_database(s.db, dir);
  {
    std::ofstream(dir / "manifest.json") << "{ not json";
  }
  CHECK_THROWS_AS(load_database(dir), CorruptDatabase);
  CHECK_THROWS_AS(load_database(dir / "missing"), IoError);
  fs::remove_all(dir);
}
