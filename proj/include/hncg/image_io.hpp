#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "hncg/grid.hpp"

namespace hncg {

// 8-bit raster as stored on disk (1 = gray, 3 = RGB, 4 = RGBA).
using Bytes8 = Grid<std::uint8_t>;

Bytes8 read_png(const std::filesystem::path& path, int channels);
void write_png(const std::filesystem::path& path, const Bytes8& image);

// Binary PPM (P6, maxval 255).
Bytes8 read_ppm(const std::filesystem::path& path);

// [0,1] float <-> 8-bit, round to nearest with clamping.
std::uint8_t quantize_unit(double v);
Bytes8 quantize(const Image& image);
Image dequantize(const Bytes8& image);

Image read_rgb_png(const std::filesystem::path& path);
void write_rgb_png(const std::filesystem::path& path, const Image& rgb);

// Single-channel mask; 255 maps to 1.
Image read_mask_png(const std::filesystem::path& path);
void write_mask_png(const std::filesystem::path& path, const Image& mask);

SemanticImage read_label_png(const std::filesystem::path& path);
void write_label_png(const std::filesystem::path& path, const SemanticImage& labels);

// PNG or PPM by file signature, always returned as RGB in [0,1].
Image read_color_image(const std::filesystem::path& path);

}  // namespace hncg
