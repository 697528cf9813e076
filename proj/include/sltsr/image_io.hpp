#pragma once

#include <filesystem>

#include "sltsr/image.hpp"

namespace sltsr {

/// Binary 8-bit PGM (P5). Values are clamped to [0,1] and scaled to 0..255.
void write_pgm8(const std::filesystem::path& path, const ImageF& image);

/// Binary 16-bit PGM (P5, maxval 65535, big-endian samples). Values are
/// divided by `white`, clamped to [0,1] and scaled to 0..65535.
void write_pgm16(const std::filesystem::path& path, const ImageF& image, float white = 1.0f);

/// Reads 8- or 16-bit binary PGM and normalizes to [0,1].
ImageF read_pgm(const std::filesystem::path& path);

/// Grayscale PFM ("Pf"), little-endian, rows stored bottom-to-top.
void write_pfm(const std::filesystem::path& path, const ImageF& image);
ImageF read_pfm(const std::filesystem::path& path);

}  // namespace sltsr
