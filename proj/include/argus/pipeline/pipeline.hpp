#pragma once

#include <optional>
#include <string>
#include <vector>

#include "argus/backends/backend.hpp"
#include "argus/pipeline/prompts.hpp"
#include "argus/pipeline/trace.hpp"
#include "argus/pipeline/types.hpp"

namespace argus {

// Everything a stage needs besides its own inputs.
struct StageContext {
  const PipelineConfig& cfg;
  const PromptTemplateSet& prompts;
  VisionLanguageModel& vlm;
  PipelineTrace& trace;
};

SceneCognition run_conjecture(const Frame& frame, const StageContext& ctx);
CandidateSet run_focus(const Frame& frame, const SceneCognition& g3d, const StageContext& ctx);
// Returns the merged mask at frame resolution; per-candidate states go to `states` when given.
SoftMask run_sculpting(const Frame& frame, const SceneCognition& g3d, const CandidateSet& cands,
                       const StageContext& ctx, Segmenter& seg, std::vector<SculptState>* states = nullptr);

// Keeps the first of any pair with box IoU >= 0.9, widened to the union of both.
std::vector<Candidate> deduplicate(std::vector<Candidate> boxes, double iou_threshold = 0.9);

struct PipelineResult {
  SoftMask mask;  // original image resolution
  PipelineTrace trace;
};

// One image moving through the stages. Sequential mode calls run(); staged
// mode calls the steps for every image before moving on to the next step.
class ImageRun {
public:
  enum class Step { prepare, conjecture, focus, sculpt, done };

  ImageRun(std::string image_id, ImageRgb image, std::optional<DepthMap> depth, PipelineConfig cfg,
           PromptTemplateSet prompts, Backends backends);

  void prepare();
  void conjecture();
  void focus();
  void sculpt();
  PipelineResult finish();
  PipelineResult run();

  Step next_step() const { return step_; }
  const std::string& image_id() const { return id_; }

private:
  StageContext context();
  void expect(Step s) const;

  std::string id_;
  ImageRgb original_;
  std::optional<DepthMap> given_depth_;
  PipelineConfig cfg_;
  PromptTemplateSet prompts_;
  Backends backends_;
  Step step_ = Step::prepare;

  Frame frame_;
  double scale_ = 1.0;
  SceneCognition g3d_;
  CandidateSet candidates_;
  SoftMask working_mask_;
  PipelineTrace trace_;
};

PipelineResult run_pipeline(const std::string& image_id, const ImageRgb& img, const std::optional<DepthMap>& depth,
                            const PipelineConfig& cfg, const PromptTemplateSet& prompts, const Backends& backends);

}  // namespace argus
