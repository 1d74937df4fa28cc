#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "argus/pipeline/types.hpp"

namespace argus {

enum class RunMode { sequential, staged };
std::string_view to_string(RunMode m);
std::optional<RunMode> parse_run_mode(std::string_view text);

// vlm:       http | scripted | oracle
// segmenter: http | gt_intersect | box_fill
// depth:     files | http | none
struct BackendSpec {
  std::string kind;
  std::string url;
  std::string model;               // vlm over http
  std::filesystem::path fixture;   // scripted: a script file, or a directory of {id}.json / default.json
  std::filesystem::path root;      // files: defaults to {dataset}/depth
};

struct RunConfig {
  std::filesystem::path dataset;
  std::filesystem::path output;
  std::optional<std::filesystem::path> prompts;  // template file; built-in defaults otherwise
  PipelineConfig pipeline;
  RunMode mode = RunMode::sequential;
  int jobs = 1;
  int repeat = 1;
  BackendSpec vlm{"http", "", "Qwen2.5-VL-7B-Instruct", {}, {}};
  BackendSpec segmenter{"http", "", "", {}, {}};
  BackendSpec depth{"files", "", "", {}, {}};
  std::string api_key;  // bearer token for every HTTP backend; never serialised

  void validate() const;  // throws ConfigError
};

// Command-line overrides; unset fields leave the configuration alone.
struct RunOverrides {
  std::optional<std::filesystem::path> dataset, output, prompts, fixture;
  std::optional<RunMode> mode;
  std::optional<int> jobs, repeat, k;
  std::optional<FocusStrategy> focus;
  std::optional<std::string> task_prompt;
  bool no_depth = false;
  std::optional<std::string> vlm_kind, vlm_url, vlm_model, seg_kind, seg_url, depth_kind, depth_url;
};

using EnvLookup = std::function<std::optional<std::string>(const char*)>;
EnvLookup process_env();

// ARGUS_VLM_URL, ARGUS_SEG_URL, ARGUS_DEPTH_URL, ARGUS_VLM_MODEL, ARGUS_API_KEY.
void apply_env(RunConfig& cfg, const EnvLookup& env);
// Relative paths in the file resolve against `base_dir`. Unknown keys throw ConfigError.
void apply_json(RunConfig& cfg, const nlohmann::json& j, const std::filesystem::path& base_dir = {});
void apply_overrides(RunConfig& cfg, const RunOverrides& o);

// Defaults, then environment, then the config file, then flags; validated.
RunConfig resolve_run_config(const std::optional<std::filesystem::path>& config_file, const RunOverrides& overrides,
                             const EnvLookup& env = process_env());

nlohmann::ordered_json to_json(const BackendSpec& b);
nlohmann::ordered_json to_json(const RunConfig& cfg);

}  // namespace argus
