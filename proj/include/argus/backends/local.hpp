#pragma once

#include <filesystem>
#include <mutex>

#include "argus/backends/backend.hpp"
#include "argus/mask_ops.hpp"

namespace argus {

// Ground-truth answers for a whole image. When a request is posed at another
// resolution the truth is resampled to it first.
class GroundTruth {
public:
  explicit GroundTruth(BinMask gt);
  const BinMask& at(int width, int height) const;
  const Components& components_at(int width, int height) const;

private:
  struct Level {
    BinMask mask;
    Components components;
  };
  const Level& level(int width, int height) const;

  BinMask base_;
  mutable std::mutex mutex_;
  mutable std::vector<std::unique_ptr<Level>> levels_;
};

// Answers every query kind from ground truth with schema-conformant JSON:
//   orientation   vertical iff the truth's bounding box is at least as tall as wide
//   objects/focus/scan  tight boxes of components touching the queried region
//   verify        valid iff IoU(candidate, some component box) >= 0.5
//   feedback      accept iff IoU(binarize(mask), truth) >= 0.95
//   point_labels  positive inside truth, negative outside it but inside the box
class OracleVlm final : public VisionLanguageModel {
public:
  explicit OracleVlm(BinMask gt, std::string descriptor = "gt");
  std::string query(const VlmRequest& req) override;
  BackendId id() const override { return {"oracle", descriptor_}; }

private:
  GroundTruth truth_;
  std::string descriptor_;
};

// Mock segmenter: box prompts give truth & box interior; point prompts give
// the truth components holding at least one positive point.
class GtIntersectSegmenter final : public Segmenter {
public:
  explicit GtIntersectSegmenter(BinMask gt, std::string descriptor = "gt");
  SoftMask segment(const SegmentRequest& req) override;
  BackendId id() const override { return {"mock", "gt_intersect:" + descriptor_}; }

private:
  GroundTruth truth_;
  std::string descriptor_;
};

// Mock segmenter without ground truth: fills the prompted boxes, or the
// bounding rectangle of the positive points grown by a fixed margin.
class BoxFillSegmenter final : public Segmenter {
public:
  explicit BoxFillSegmenter(int point_margin = 8) : margin_(point_margin) {}
  SoftMask segment(const SegmentRequest& req) override;
  BackendId id() const override { return {"mock", "box_fill"}; }

private:
  int margin_;
};

// Loads {root}/{id}.png (16-bit) for each image id.
class FileDepth final : public DepthEstimator {
public:
  explicit FileDepth(std::filesystem::path root);
  DepthMap estimate(const ImageRgb& img, std::string_view image_id) override;
  BackendId id() const override { return {"file", root_.string()}; }

private:
  std::filesystem::path root_;
};

}  // namespace argus
