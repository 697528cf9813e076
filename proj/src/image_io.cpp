#include "sltsr/image_io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace sltsr {
namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  return in;
}

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string header_token(std::istream& in) {
  std::string tok;
  while (in) {
    const int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
  in >> tok;
  if (!in) throw IoError("truncated image header");
  return tok;
}

int header_int(std::istream& in) {
  const std::string tok = header_token(in);
  try {
    return std::stoi(tok);
  } catch (const std::exception&) {
    throw IoError("bad image header field: " + tok);
  }
}

float clamp01(float v) { return std::clamp(std::isfinite(v) ? v : 0.0f, 0.0f, 1.0f); }

}  // namespace

void write_pgm8(const std::filesystem::path& path, const ImageF& image) {
  auto out = open_out(path);
  out << "P5\n" << image.width() << ' ' << image.height() << "\n255\n";
  std::vector<unsigned char> buf(image.size());
  auto px = image.pixels();
  for (std::size_t i = 0; i < px.size(); ++i)
    buf[i] = static_cast<unsigned char>(std::lround(clamp01(px[i]) * 255.0f));
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

void write_pgm16(const std::filesystem::path& path, const ImageF& image, float white) {
  if (!(white > 0.0f)) throw InvalidArgument("pgm16 white level must be positive");
  auto out = open_out(path);
  out << "P5\n" << image.width() << ' ' << image.height() << "\n65535\n";
  std::vector<unsigned char> buf(image.size() * 2);
  auto px = image.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) {
    const auto v = static_cast<std::uint16_t>(std::lround(clamp01(px[i] / white) * 65535.0f));
    buf[2 * i] = static_cast<unsigned char>(v >> 8);
    buf[2 * i + 1] = static_cast<unsigned char>(v & 0xff);
  }
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

ImageF read_pgm(const std::filesystem::path& path) {
  auto in = open_in(path);
  if (header_token(in) != "P5") throw IoError("not a binary PGM: " + path.string());
  const int w = header_int(in);
  const int h = header_int(in);
  const int maxval = header_int(in);
  in.get();
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535) throw IoError("bad PGM header: " + path.string());
  ImageF image(w, h);
  const std::size_t bytes_per = maxval > 255 ? 2 : 1;
  std::vector<unsigned char> buf(image.size() * bytes_per);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (in.gcount() != static_cast<std::streamsize>(buf.size())) throw IoError("truncated PGM: " + path.string());
  auto px = image.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) {
    const unsigned v = bytes_per == 2 ? (unsigned{buf[2 * i]} << 8) | buf[2 * i + 1] : buf[i];
    px[i] = static_cast<float>(v) / static_cast<float>(maxval);
  }
  return image;
}

void write_pfm(const std::filesystem::path& path, const ImageF& image) {
  static_assert(std::endian::native == std::endian::little, "PFM writer assumes a little-endian host");
  auto out = open_out(path);
  out << "Pf\n" << image.width() << ' ' << image.height() << "\n-1.0\n";
  for (int y = image.height() - 1; y >= 0; --y) {
    auto row = image.row(y);
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  if (!out) throw IoError("write failed: " + path.string());
}

ImageF read_pfm(const std::filesystem::path& path) {
  auto in = open_in(path);
  if (header_token(in) != "Pf") throw IoError("not a grayscale PFM: " + path.string());
  const int w = header_int(in);
  const int h = header_int(in);
  const std::string scale_tok = header_token(in);
  in.get();
  double scale = 0.0;
  try {
    scale = std::stod(scale_tok);
  } catch (const std::exception&) {
    throw IoError("bad PFM scale: " + scale_tok);
  }
  if (w <= 0 || h <= 0 || scale == 0.0) throw IoError("bad PFM header: " + path.string());
  const bool little = scale < 0.0;
  ImageF image(w, h);
  for (int y = h - 1; y >= 0; --y) {
    auto row = image.row(y);
    const auto bytes = static_cast<std::streamsize>(row.size() * sizeof(float));
    in.read(reinterpret_cast<char*>(row.data()), bytes);
    if (in.gcount() != bytes) throw IoError("truncated PFM: " + path.string());
    if (little != (std::endian::native == std::endian::little)) {
      for (float& v : row) {
        std::uint32_t u;
        std::memcpy(&u, &v, 4);
        u = (u >> 24) | ((u >> 8) & 0xff00u) | ((u << 8) & 0xff0000u) | (u << 24);
        std::memcpy(&v, &u, 4);
      }
    }
  }
  return image;
}

}  // namespace sltsr
