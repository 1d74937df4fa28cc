#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "argus/image.hpp"

namespace argus {

struct DatasetEntry {
  std::string id;
  std::filesystem::path image;
  std::filesystem::path gt;
  std::optional<std::filesystem::path> depth;
};

// Layout: {root}/images/*.{jpg,jpeg,png}, {root}/gt/*.png, optional {root}/depth/*.png,
// paired by file stem. Entries are sorted by id.
struct DatasetIndex {
  std::filesystem::path root;
  std::vector<DatasetEntry> entries;
  std::vector<std::string> warnings;  // skipped or rejected files

  const DatasetEntry* find(std::string_view id) const;
};

// Throws ConfigError when the root is missing or no image/GT pair survives.
DatasetIndex load_dataset(const std::filesystem::path& root);

ImageRgb load_image(const DatasetEntry& e);
BinMask load_gt(const DatasetEntry& e);  // binarised at 128
std::optional<DepthMap> load_depth(const DatasetEntry& e);

}  // namespace argus
