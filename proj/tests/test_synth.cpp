#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "sltsr/errors.hpp"
#include "sltsr/synth.hpp"

using namespace sltsr;
using sltsr::testing::naive_ncc;
using sltsr::testing::naive_patch;

namespace {

const testing::Bench& bench() {
  static const testing::Bench b = [] {
    RunConfig c = testing::small_config(48, 36, 590.0, 620.0, 600.0, 3);
    c.scene.start_phase = 0.5;
    return testing::make_bench(c);
  }();
  return b;
}

double max_abs_diff(const ImageD& a, const ImageD& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.pixels()[i] - b.pixels()[i]));
  return m;
}

}  // namespace

TEST_CASE("sweep offsets accumulate before rounding") {
  const ExposureSchedule u = ExposureSchedule::uniform(1, 6, 8, 1.0 / 3.0);
  const double v = 50.0;
  const std::vector<double> vs{v};
  const auto off = sweep_offsets(u, 0.5, vs);
  REQUIRE(off.size() == 7);
  for (int n = 0; n <= 6; ++n) CHECK(off[static_cast<std::size_t>(n)] == std::lround(n * 50.0 / 18.0 / 0.5));
  CHECK(interval_sweep(u, 2, 0.5, v) == doctest::Approx(50.0 / 18.0 / 0.5));
}

TEST_CASE("sweep terms share boundary slices and sort descending motion") {
  const ExposureSchedule u = ExposureSchedule::uniform(1, 3, 5, 0.3);
  const std::vector<int> off{0, -2, -4, -6};
  const auto t = sweep_terms(u, 10, off, 20);
  REQUIRE(t);
  CHECK((*t)[0].lo == 8);
  CHECK((*t)[0].hi == 10);
  CHECK((*t)[2].lo == 4);
  CHECK((*t)[2].hi == 6);
  CHECK_FALSE(sweep_terms(u, 3, off, 20));
}

TEST_CASE("synth_const matches the slice-averaging definition") {
  const auto& b = bench();
  REQUIRE(b.schedule.n_p == 4);
  for (double v : {0.0, 12.5, -30.0, 47.0, 90.0})
    for (int i : {15, 20, 33})
      for (Pixel c : {Pixel{6, 6}, Pixel{23, 17}, Pixel{40, 20}}) {
        const ImageD oracle = naive_patch(b.db, b.schedule, i, {v}, c, 12);
        if (oracle.empty()) {
          CHECK_THROWS_AS(synth_const(b.db, b.schedule, b.db.depth_of(i), v, c, 12), HypothesisOutOfRange);
          continue;
        }
        const ImageD got = synth_const(b.db, b.schedule, b.db.depth_of(i), v, c, 12);
        CHECK(max_abs_diff(got, oracle) <= 1e-6);
      }
}

TEST_CASE("synth_fine matches the definition and reduces to synth_const") {
  const auto& b = bench();
  const std::vector<std::vector<double>> cases{{10, 20, 30, 40}, {-40, 0, 40, 0}, {60, 60, 60, 60}};
  for (const auto& v : cases) {
    const Pixel c{24, 15};
    const ImageD got = synth_fine(b.db, b.schedule, b.db.depth_of(20), v, c, 12);
    CHECK(max_abs_diff(got, naive_patch(b.db, b.schedule, 20, v, c, 12)) <= 1e-6);
  }
  const std::vector<double> same(4, 33.0);
  CHECK(synth_fine(b.db, b.schedule, 601.5, same, Pixel{20, 14}, 12) ==
        synth_const(b.db, b.schedule, 601.5, 33.0, Pixel{20, 14}, 12));
}

TEST_CASE("static synthesis reproduces the static capture") {
  const auto& b = bench();
  const int i = b.db.index_of(600.0);
  const ImageD s = synth_const(b.db, b.schedule, 600.0, 0.0, Pixel{24, 15}, 16);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) CHECK(s(x, y) == doctest::Approx(b.capture.intensity(16 + x, 7 + y)).epsilon(1e-5));
  CHECK(i == 20);
}

TEST_CASE("ncc is affine invariant and matches the two-pass formula") {
  ImageD a(8, 8), bimg(8, 8);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) {
      a(x, y) = std::sin(0.7 * x + 1.3 * y);
      bimg(x, y) = std::cos(0.4 * x - 0.9 * y) + 0.3 * a(x, y);
    }
  const double r = ncc(a, bimg);
  CHECK(r == doctest::Approx(naive_ncc(a, bimg)).epsilon(1e-12));
  ImageD c = bimg;
  for (double& p : c.pixels()) p = 2.0 * p + 0.1;
  CHECK(ncc(a, c) == doctest::Approx(r).epsilon(1e-12));
  CHECK(ncc(a, a) == doctest::Approx(1.0));
  CHECK(std::isnan(ncc(a, ImageD(8, 8, 0.5))));
}
