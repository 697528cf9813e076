#pragma once

// Window-sum kernels shared by the coarse and fine searches. Each sum is
// formed exactly as window_moments() forms it, so scores agree bit-for-bit
// with ncc() on extracted patches.

#include <vector>

#include "sltsr/image.hpp"
#include "sltsr/synth.hpp"

namespace sltsr::detail {

/// out[x] = in[x] + in[x+1] + ... + in[x+window-1], added left to right.
inline void row_window_sums(const double* in, int n_out, int window, double* out) {
  for (int x = 0; x < n_out; ++x) out[x] = 0.0;
  for (int c = 0; c < window; ++c) {
    const double* src = in + c;
    for (int x = 0; x < n_out; ++x) out[x] += src[x];
  }
}

/// out[x] = rows[0][x] + rows[1][x] + ... (window rows, `stride` apart).
inline void column_window_sums(const double* rows, std::size_t stride, int n_out, int window, double* out) {
  for (int x = 0; x < n_out; ++x) out[x] = 0.0;
  for (int r = 0; r < window; ++r) {
    const double* src = rows + static_cast<std::size_t>(r) * stride;
    for (int x = 0; x < n_out; ++x) out[x] += src[x];
  }
}

/// Capture-side window moments for every estimable output pixel.
struct CaptureMoments {
  Rect out;
  ImageD b;
  ImageD bb;
};

/// `capture` covers `region` (region-local coordinates).
inline CaptureMoments capture_moments(const ImageD& capture, const Rect& region, const Rect& out, int window) {
  CaptureMoments m{out, ImageD(out.width, out.height), ImageD(out.width, out.height)};
  const int w = region.width;
  const int h = window / 2;
  ImageD hb(out.width, region.height), hbb(out.width, region.height);
  std::vector<double> sq(static_cast<std::size_t>(w));
  for (int y = 0; y < region.height; ++y) {
    const double* row = capture.row(y).data();
    for (int x = 0; x < w; ++x) sq[static_cast<std::size_t>(x)] = row[x] * row[x];
    row_window_sums(row, out.width, window, hb.row(y).data());
    row_window_sums(sq.data(), out.width, window, hbb.row(y).data());
  }
  for (int oy = 0; oy < out.height; ++oy) {
    const int top = out.y0 + oy - h - region.y0;
    column_window_sums(hb.row(top).data(), static_cast<std::size_t>(out.width), out.width, window, m.b.row(oy).data());
    column_window_sums(hbb.row(top).data(), static_cast<std::size_t>(out.width), out.width, window, m.bb.row(oy).data());
  }
  return m;
}

}  // namespace sltsr::detail
