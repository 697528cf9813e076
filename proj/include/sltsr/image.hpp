#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sltsr/errors.hpp"

namespace sltsr {

struct Pixel {
  int x = 0;
  int y = 0;
};

/// Axis-aligned pixel rectangle, half-open on both axes.
struct Rect {
  int x0 = 0;
  int y0 = 0;
  int width = 0;
  int height = 0;

  int x1() const { return x0 + width; }
  int y1() const { return y0 + height; }
  bool empty() const { return width <= 0 || height <= 0; }
  bool contains(int x, int y) const { return x >= x0 && x < x1() && y >= y0 && y < y1(); }
  bool contains(const Rect& r) const {
    return r.x0 >= x0 && r.y0 >= y0 && r.x1() <= x1() && r.y1() <= y1();
  }
  bool intersects(const Rect& r) const {
    return x0 < r.x1() && r.x0 < x1() && y0 < r.y1() && r.y0 < y1();
  }
  Rect intersect(const Rect& r) const;
  bool operator==(const Rect&) const = default;
};

/// Square matching window of side `window` around `center`. For even sizes the
/// center pixel sits at offset window/2 from the left/top edge.
inline Rect window_rect(Pixel center, int window) {
  return Rect{center.x - window / 2, center.y - window / 2, window, window};
}

inline Rect Rect::intersect(const Rect& r) const {
  const int ax = x0 > r.x0 ? x0 : r.x0;
  const int ay = y0 > r.y0 ? y0 : r.y0;
  const int bx = x1() < r.x1() ? x1() : r.x1();
  const int by = y1() < r.y1() ? y1() : r.y1();
  if (bx <= ax || by <= ay) return Rect{ax, ay, 0, 0};
  return Rect{ax, ay, bx - ax, by - ay};
}

/// Dense row-major single-channel image.
template <typename T>
class Image {
 public:
  using value_type = T;

  Image() = default;
  Image(int width, int height, T fill = T{}) : width_(width), height_(height) {
    if (width < 0 || height < 0) throw InvalidArgument("image dimensions must be non-negative");
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  Rect bounds() const { return Rect{0, 0, width_, height_}; }

  T& operator()(int x, int y) { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const { return data_[index(x, y)]; }

  std::span<T> row(int y) { return {data_.data() + index(0, y), static_cast<std::size_t>(width_)}; }
  std::span<const T> row(int y) const {
    return {data_.data() + index(0, y), static_cast<std::size_t>(width_)};
  }

  std::span<T> pixels() { return data_; }
  std::span<const T> pixels() const { return data_; }
  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

  template <typename U>
  bool same_shape(const Image<U>& other) const {
    return width_ == other.width() && height_ == other.height();
  }

  bool operator==(const Image&) const = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

template <typename To, typename From>
Image<To> image_cast(const Image<From>& src) {
  Image<To> out(src.width(), src.height());
  auto in = src.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < in.size(); ++i) dst[i] = static_cast<To>(in[i]);
  return out;
}

/// Copies `rect` out of `src`. Throws if the rectangle leaves the image.
template <typename To, typename From>
Image<To> crop(const Image<From>& src, const Rect& rect) {
  if (!src.bounds().contains(rect)) throw IndexError("crop rectangle outside image bounds");
  Image<To> out(rect.width, rect.height);
  for (int y = 0; y < rect.height; ++y) {
    auto in = src.row(rect.y0 + y);
    auto dst = out.row(y);
    for (int x = 0; x < rect.width; ++x) dst[x] = static_cast<To>(in[rect.x0 + x]);
  }
  return out;
}

using ImageF = Image<float>;
using ImageD = Image<double>;
using Mask = Image<unsigned char>;

}  // namespace sltsr
