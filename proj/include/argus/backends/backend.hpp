#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "argus/geometry.hpp"
#include "argus/image.hpp"

namespace argus {

// Which pipeline question a VLM request asks.
enum class QueryKind { scene, objects, inference, orientation, focus, hypotheses, scan, verify, feedback, point_labels };

std::string_view to_string(QueryKind kind);

struct VlmImage {
  std::string role;  // "rgb", "depth", "region", "candidate", "mask_overlay"
  std::variant<ImageRgb, DepthMap> content;
};

struct DecodeOptions {
  double temperature = 0.0;
  int max_tokens = 0;  // 0 = server default, omitted on the wire
};

// Structured side-channel describing what a request is about. Never sent
// over the wire; test doubles answer from it instead of reading the prompt.
struct QueryContext {
  int image_width = 0;
  int image_height = 0;
  std::optional<BBox> region;
  std::optional<BBox> candidate;
  std::vector<Eigen::Vector2d> points;
  std::optional<SoftMask> mask;
};

struct VlmRequest {
  std::string text;
  std::vector<VlmImage> images;  // at most 4
  DecodeOptions decode;
  QueryKind kind = QueryKind::scene;
  QueryContext context;
};

struct PointPrompts {
  std::vector<Eigen::Vector2d> positive;
  std::vector<Eigen::Vector2d> negative;
};

struct SegmentRequest {
  ImageRgb image;
  std::optional<DepthMap> depth;
  std::vector<BBox> boxes;
  std::optional<PointPrompts> points;
};

// Throws ProtocolError when the request violates the prompt contract.
void validate(const VlmRequest& req);
void validate(const SegmentRequest& req);

struct BackendId {
  std::string kind;  // http | scripted | oracle | mock | file
  std::string descriptor;

  std::string str() const { return kind + ":" + descriptor; }
};

class VisionLanguageModel {
public:
  virtual ~VisionLanguageModel() = default;
  virtual std::string query(const VlmRequest& req) = 0;
  virtual BackendId id() const = 0;
};

class Segmenter {
public:
  virtual ~Segmenter() = default;
  // Result has the request image's dimensions.
  virtual SoftMask segment(const SegmentRequest& req) = 0;
  virtual BackendId id() const = 0;
};

class DepthEstimator {
public:
  virtual ~DepthEstimator() = default;
  virtual DepthMap estimate(const ImageRgb& img, std::string_view image_id) = 0;
  virtual BackendId id() const = 0;
};

struct Backends {
  std::shared_ptr<VisionLanguageModel> vlm;
  std::shared_ptr<Segmenter> segmenter;
  std::shared_ptr<DepthEstimator> depth;  // may be null when depth is disabled
};

}  // namespace argus
