#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

#include "argus/image.hpp"

namespace argus {

// Rotated ellipse; a pixel belongs to it when its centre (x+0.5, y+0.5) does.
struct BlobSpec {
  double cx = 0;
  double cy = 0;
  double rx = 1;
  double ry = 1;
  double angle = 0;  // radians
  bool contains(double x, double y) const;
};

struct SyntheticScene {
  ImageRgb image;
  BinMask gt;
  DepthMap depth;  // blobs are nearer (larger) than the background
  std::vector<BlobSpec> blobs;
  std::uint64_t seed = 0;
  int index = 0;
};

inline constexpr int kSyntheticRing = 6;       // width of the background band used for the contrast check
inline constexpr double kSyntheticContrast = 10;  // max |blob mean - ring mean| per channel

// Scene `index` of the suite drawn from `seed`; a size x size image with 1-3 non-overlapping blobs.
SyntheticScene make_scene(std::uint64_t seed, int index, int size);

// Pixel count of the union of blobs on a w x h grid, from per-row chord intervals.
long blob_union_area(const std::vector<BlobSpec>& blobs, int w, int h);

// Pixels outside every blob whose centre lies within `ring` pixels of the blob's outline.
BinMask blob_ring(const BlobSpec& blob, const BinMask& gt, int ring = kSyntheticRing);

std::string synthetic_id(int index);

// Writes images/, gt/, depth/ and scenes.json under root.
void gen_synthetic(const std::filesystem::path& root, int n, std::uint64_t seed, int size);

nlohmann::json to_json(const BlobSpec& b);

}  // namespace argus
