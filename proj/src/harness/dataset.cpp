#include "argus/harness/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include <fmt/format.h>

#include "argus/codec.hpp"

namespace argus {
namespace fs = std::filesystem;

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

// stem -> path for regular files with one of the given extensions
std::map<std::string, fs::path> scan(const fs::path& dir, std::initializer_list<std::string_view> exts,
                                     std::vector<std::string>& warnings) {
  std::map<std::string, fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& de : fs::directory_iterator(dir)) {
    if (!de.is_regular_file()) continue;
    const std::string ext = lower(de.path().extension().string());
    if (std::find(exts.begin(), exts.end(), ext) == exts.end()) continue;
    const std::string stem = de.path().stem().string();
    if (auto [it, fresh] = out.emplace(stem, de.path()); !fresh) {
      const fs::path keep = std::min(it->second, de.path());
      warnings.push_back(fmt::format("{}: several files share the stem, using {}", stem, keep.filename().string()));
      it->second = keep;
    }
  }
  return out;
}

}  // namespace

const DatasetEntry* DatasetIndex::find(std::string_view id) const {
  const auto it = std::find_if(entries.begin(), entries.end(), [&](const DatasetEntry& e) { return e.id == id; });
  return it == entries.end() ? nullptr : &*it;
}

DatasetIndex load_dataset(const fs::path& root) {
  if (!fs::is_directory(root)) throw ConfigError("dataset root does not exist: " + root.string());
  if (!fs::is_directory(root / "images")) throw ConfigError("dataset has no images/ directory: " + root.string());
  DatasetIndex index;
  index.root = root;
  const auto images = scan(root / "images", {".jpg", ".jpeg", ".png"}, index.warnings);
  const auto gts = scan(root / "gt", {".png"}, index.warnings);
  const auto depths = scan(root / "depth", {".png"}, index.warnings);

  for (const auto& [id, image] : images) {
    const auto gt = gts.find(id);
    if (gt == gts.end()) {
      index.warnings.push_back(fmt::format("{}: no ground truth, skipped", id));
      continue;
    }
    try {
      const auto di = probe_dimensions(image);
      const auto dg = probe_dimensions(gt->second);
      if (di.width != dg.width || di.height != dg.height) {
        index.warnings.push_back(fmt::format("{}: rejected, image is {}x{} but ground truth is {}x{}", id, di.width,
                                             di.height, dg.width, dg.height));
        continue;
      }
    } catch (const Error& e) {
      index.warnings.push_back(fmt::format("{}: rejected, {}", id, e.what()));
      continue;
    }
    DatasetEntry entry{id, image, gt->second, std::nullopt};
    if (const auto d = depths.find(id); d != depths.end()) entry.depth = d->second;
    index.entries.push_back(std::move(entry));
  }
  for (const auto& [id, path] : gts)
    if (!images.count(id)) index.warnings.push_back(fmt::format("{}: ground truth without image, ignored", id));
  if (index.entries.empty()) throw ConfigError("dataset has no usable image/ground-truth pairs: " + root.string());
  return index;
}

ImageRgb load_image(const DatasetEntry& e) { return decode_image(read_file(e.image)); }

BinMask load_gt(const DatasetEntry& e) { return decode_gt_png(read_file(e.gt)); }

std::optional<DepthMap> load_depth(const DatasetEntry& e) {
  if (!e.depth) return std::nullopt;
  return decode_depth_png(read_file(*e.depth));
}

}  // namespace argus
