#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "argus/geometry.hpp"
#include "argus/image.hpp"

namespace argus {

struct PipelineConfig {
  std::string task_prompt = "camouflaged animals";
  int n_focus = 3;
  int n_hypothesis = 6;
  int k = 3;
  FocusStrategy focus_strategy = FocusStrategy::automatic;
  int resize_limit = 1500;
  double binarize_threshold = 0.5;
  int max_parse_retries = 2;
  bool use_depth = true;
  int max_tokens = 1024;

  void validate() const;  // throws ConfigError
};

nlohmann::ordered_json to_json(const PipelineConfig& cfg);
// Missing keys keep their defaults; unknown keys are rejected.
PipelineConfig pipeline_config_from_json(const nlohmann::json& j, PipelineConfig base = {});

// Working-resolution inputs shared by all stages of one image.
struct Frame {
  ImageRgb image;
  std::optional<DepthMap> depth;

  int width() const { return image.width; }
  int height() const { return image.height; }
};

struct RegionHint {
  std::string description;
  std::optional<BBox> coarse_box;
};

struct SceneCognition {
  std::string scene_summary;
  std::vector<RegionHint> candidate_regions;
  std::vector<std::string> structures;
  std::string camouflage_inference;
  bool degraded = false;
};

enum class Provenance { direct, hypothesis, fallback };
std::string_view to_string(Provenance p);

struct Candidate {
  BBox box;
  Provenance provenance = Provenance::direct;
  std::string rationale;
};

struct CandidateSet {
  std::vector<Candidate> boxes;
  bool fallback = false;
};

enum class Verdict { accept, refine };

struct FeedbackReport {
  Verdict verdict = Verdict::refine;
  std::vector<std::string> tags;  // subset of kFeedbackTags
  std::string note;
};

inline const std::vector<std::string> kFeedbackTags = {"unclear_edges", "missing_center", "irregular_shape",
                                                      "over_segmented", "under_segmented"};

enum class PointLabel { positive, negative, discard };
std::string_view to_string(PointLabel l);

struct SculptState {
  SoftMask current_mask;
  int iteration = 0;
  std::vector<PromptPoint> points;
  std::optional<FeedbackReport> feedback;
  BBox box;
};

nlohmann::ordered_json to_json(const SceneCognition& g);
nlohmann::ordered_json to_json(const CandidateSet& c);
nlohmann::ordered_json to_json(const FeedbackReport& f);
nlohmann::ordered_json box_to_json(const BBox& b);

}  // namespace argus
