#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "argus/harness/config.hpp"
#include "argus/harness/dataset.hpp"
#include "argus/harness/runner.hpp"
#include "argus/report.hpp"

namespace argus {

struct EvalPair {
  std::string id;
  std::filesystem::path pred;
  std::filesystem::path gt;
};

struct EvalResult {
  EvalReport report;
  std::map<std::string, double> iou;  // binarised prediction vs GT, per image
  std::vector<std::string> unmatched;  // stems present on one side only
};

// Predictions are 8-bit PNGs read as value/255 and resized to the GT when the shapes differ.
// Throws EvaluationError when there is nothing to evaluate.
EvalResult evaluate_pairs(const std::vector<EvalPair>& pairs, int jobs = 1, RunMeta meta = {});
EvalResult evaluate_dirs(const std::filesystem::path& pred_dir, const std::filesystem::path& gt_dir, int jobs = 1,
                         RunMeta meta = {});
// Predictions at {pred_dir}/{id}.png for every dataset entry that has one.
EvalResult evaluate_index(const std::filesystem::path& pred_dir, const DatasetIndex& index, int jobs = 1,
                          RunMeta meta = {});

// report.json and report.md
void write_report(const EvalResult& r, const std::filesystem::path& out_dir, bool with_weighted_f);

double median(std::vector<double> v);

enum class Sweep { focus, k };
std::optional<Sweep> parse_sweep(std::string_view text);

struct AblationRow {
  std::string label;
  MetricValues means;
  double median_iou = 0;
  std::size_t evaluated = 0;
  std::size_t failed = 0;
};

// One batch run per variant under {out}/{focus|k}_{label}, each evaluated against the dataset GT.
std::vector<AblationRow> run_ablation(const RunConfig& base, const DatasetIndex& index, Sweep sweep,
                                      const std::filesystem::path& out);
std::string ablation_markdown(const std::vector<AblationRow>& rows, Sweep sweep, bool with_weighted_f = false);
nlohmann::ordered_json to_json(const std::vector<AblationRow>& rows, Sweep sweep);

// Mean and range of each measure over repeated runs of the same configuration.
struct RepeatSummary {
  std::vector<MetricValues> runs;
  MetricValues mean, min, max;
};
RepeatSummary summarize_repeats(const std::vector<MetricValues>& runs);
std::string repeat_markdown(const RepeatSummary& s, bool with_weighted_f = false);
nlohmann::ordered_json to_json(const RepeatSummary& s);

}  // namespace argus
