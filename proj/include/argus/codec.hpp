#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "argus/image.hpp"

namespace argus {

using Bytes = std::vector<std::uint8_t>;

Bytes read_file(const std::filesystem::path& path);
// Writes through a temporary sibling and renames, so readers never see a partial file.
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> data);
void write_text(const std::filesystem::path& path, std::string_view text);

// Decoded raster with 1 (gray) or 3 (RGB) channels, samples widened to 16 bits.
struct Raster {
  int width = 0;
  int height = 0;
  int channels = 0;
  int bit_depth = 8;
  std::vector<std::uint16_t> samples;
};

Raster decode_raster(std::span<const std::uint8_t> data);  // PNG or JPEG, sniffed by magic

Bytes encode_png_gray8(const Plane<std::uint8_t>& plane);
Bytes encode_png_gray16(const Plane<std::uint16_t>& plane);
Bytes encode_png_rgb(const ImageRgb& img);

ImageRgb decode_image(std::span<const std::uint8_t> data);
Plane<std::uint8_t> decode_gray8(std::span<const std::uint8_t> data);

// Masks travel as 8-bit grayscale: round(value * 255) out, value / 255 back.
Bytes encode_mask_png(const SoftMask& mask);
Bytes encode_mask_png(const BinMask& mask);
SoftMask decode_mask_png(std::span<const std::uint8_t> data);
BinMask decode_gt_png(std::span<const std::uint8_t> data, int threshold = 128);
Plane<std::uint8_t> quantize_mask(const SoftMask& mask);

// Depth travels as 16-bit grayscale: value / 65535.
Bytes encode_depth_png(const DepthMap& depth);
DepthMap decode_depth_png(std::span<const std::uint8_t> data);
// 8-bit visualisation used when depth is shown to a vision-language model.
Bytes encode_depth_preview_png(const DepthMap& depth);

struct Dimensions {
  int width = 0;
  int height = 0;
};
Dimensions probe_dimensions(const std::filesystem::path& path);

std::string base64_encode(std::span<const std::uint8_t> data);
Bytes base64_decode(std::string_view text);

std::string sha256_hex(std::span<const std::uint8_t> data);
std::string mask_digest(const SoftMask& mask);

}  // namespace argus
