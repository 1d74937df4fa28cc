#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "argus/backends/backend.hpp"
#include "argus/backends/scripted.hpp"
#include "argus/harness/config.hpp"
#include "argus/harness/dataset.hpp"
#include "argus/pipeline/prompts.hpp"

namespace argus {

// Builds the backends for each image. HTTP clients are shared; oracle and
// gt-intersect backends are built per image from its ground truth, and each
// image gets a fresh scripted queue.
class BackendFactory {
public:
  explicit BackendFactory(const RunConfig& cfg);

  // Throws BackendUnreachable when an HTTP backend does not answer.
  void probe(std::chrono::seconds timeout = std::chrono::seconds(5)) const;
  Backends for_image(const DatasetEntry& entry) const;
  nlohmann::ordered_json ids() const;  // role -> "kind:descriptor"

private:
  Script script_for(const std::string& id) const;

  RunConfig cfg_;
  std::shared_ptr<VisionLanguageModel> http_vlm_;
  std::shared_ptr<Segmenter> shared_seg_;
  std::shared_ptr<DepthEstimator> shared_depth_;
  std::optional<Script> script_;  // single fixture file shared by all images
};

enum class ImageStatus { ok, transport_error, protocol_error, skipped };
std::string_view to_string(ImageStatus s);

struct ImageOutcome {
  std::string id;
  ImageStatus status = ImageStatus::skipped;
  std::string error;
  std::vector<std::string> flags;
  std::map<std::string, double> seconds;  // per step wall clock
};

struct BatchResult {
  std::vector<ImageOutcome> images;  // dataset order
  nlohmann::ordered_json manifest;
  std::size_t ok() const;
};

// Digest over everything that determines outputs: pipeline config, prompt
// templates and backend identities (not paths, modes or worker counts).
std::string config_digest(const RunConfig& cfg, const PromptTemplateSet& prompts, const nlohmann::ordered_json& ids);

PromptTemplateSet load_prompts(const RunConfig& cfg);

// Runs every dataset entry and writes {out}/masks/{id}.png, {out}/trace/{id}.json,
// {out}/manifest.json (deterministic) and {out}/timings.json (wall clock).
// Per-image failures are recorded, never thrown.
BatchResult run_batch(const RunConfig& cfg, const DatasetIndex& index, const PromptTemplateSet& prompts,
                      const BackendFactory& factory, const std::filesystem::path& out);

// Calls fn(i) for i in [0, n) on up to `jobs` threads.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace argus
