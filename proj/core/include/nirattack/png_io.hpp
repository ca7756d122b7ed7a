#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "nirattack/image.hpp"

namespace nirattack {

/// 8-bit PNG encoder. `channels` is 1 (gray) or 3 (RGB); `pixels` is
/// interleaved, row-major.
std::vector<std::uint8_t> encode_png(int width, int height, int channels,
                                     std::span<const std::uint8_t> pixels);

/// Grayscale PNG of the image.
std::vector<std::uint8_t> encode_png_gray(const NirImage& image);
/// RGB PNG with the gray value replicated into all three channels.
std::vector<std::uint8_t> encode_png_rgb(const NirImage& image);

struct DecodedPng {
  int width = 0;
  int height = 0;
  int channels = 0;  // as stored in the file
  std::vector<std::uint8_t> gray;  // RGB inputs are reduced to (r+g+b)/3
};

/// Throws ParseError on a malformed stream. Palette/16-bit/alpha inputs are
/// converted to 8-bit gray.
DecodedPng decode_png(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

NirImage load_png_image(const std::filesystem::path& path);
void save_png_image(const std::filesystem::path& path, const NirImage& image);

}  // namespace nirattack
