#include "argus/harness/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "argus/codec.hpp"
#include "argus/mask_ops.hpp"
#include "argus/metrics.hpp"
#include "argus/resize.hpp"

namespace argus {
namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

std::map<std::string, fs::path> png_stems(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw EvaluationError("not a directory: " + dir.string());
  std::map<std::string, fs::path> out;
  for (const auto& de : fs::directory_iterator(dir))
    if (de.is_regular_file() && de.path().extension() == ".png") out.emplace(de.path().stem().string(), de.path());
  return out;
}

MetricValues nan_values() {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  return {nan, nan, nan, nan, nan};
}

ojson values_json(const MetricValues& v) {
  return {{"mae", v.mae}, {"f_beta", v.f_beta}, {"e_phi", v.e_phi}, {"s_alpha", v.s_alpha}, {"f_beta_w", v.f_beta_w}};
}

std::string cell(double v) { return std::isnan(v) ? "n/a" : fmt::format("{:.3f}", v); }

}  // namespace

EvalResult evaluate_pairs(const std::vector<EvalPair>& pairs, int jobs, RunMeta meta) {
  if (pairs.empty()) throw EvaluationError("no prediction/ground-truth pairs to evaluate");
  std::vector<MetricValues> values(pairs.size());
  std::vector<double> ious(pairs.size());
  std::vector<std::string> errors(pairs.size());
  parallel_for(pairs.size(), jobs, [&](std::size_t i) {
    try {
      const BinMask gt = decode_gt_png(read_file(pairs[i].gt));
      SoftMask pred = decode_mask_png(read_file(pairs[i].pred));
      if (pred.rows() != gt.rows() || pred.cols() != gt.cols()) pred = resize_mask(pred, gt.rows(), gt.cols());
      values[i] = metrics::evaluate_all(pred, gt);
      ious[i] = iou(binarize(pred), gt);
    } catch (const std::exception& e) {
      errors[i] = fmt::format("{}: {}", pairs[i].id, e.what());
    }
  });
  for (const auto& e : errors)
    if (!e.empty()) throw EvaluationError(e);

  EvalResult r;
  std::map<std::string, MetricValues> per_image;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    per_image[pairs[i].id] = values[i];
    r.iou[pairs[i].id] = ious[i];
  }
  r.report = aggregate(std::move(per_image), std::move(meta));
  return r;
}

EvalResult evaluate_dirs(const fs::path& pred_dir, const fs::path& gt_dir, int jobs, RunMeta meta) {
  const auto preds = png_stems(pred_dir);
  const auto gts = png_stems(gt_dir);
  std::vector<EvalPair> pairs;
  std::vector<std::string> unmatched;
  for (const auto& [id, p] : preds) {
    if (const auto g = gts.find(id); g != gts.end())
      pairs.push_back({id, p, g->second});
    else
      unmatched.push_back(id);
  }
  for (const auto& [id, g] : gts)
    if (!preds.count(id)) unmatched.push_back(id);
  if (pairs.empty())
    throw EvaluationError(fmt::format("no matching stems between {} and {}", pred_dir.string(), gt_dir.string()));
  EvalResult r = evaluate_pairs(pairs, jobs, std::move(meta));
  std::sort(unmatched.begin(), unmatched.end());
  r.unmatched = std::move(unmatched);
  return r;
}

EvalResult evaluate_index(const fs::path& pred_dir, const DatasetIndex& index, int jobs, RunMeta meta) {
  std::vector<EvalPair> pairs;
  std::vector<std::string> missing;
  for (const auto& e : index.entries) {
    const fs::path p = pred_dir / (e.id + ".png");
    if (fs::is_regular_file(p))
      pairs.push_back({e.id, p, e.gt});
    else
      missing.push_back(e.id);
  }
  if (pairs.empty()) throw EvaluationError("no predictions in " + pred_dir.string());
  EvalResult r = evaluate_pairs(pairs, jobs, std::move(meta));
  r.unmatched = std::move(missing);
  return r;
}

void write_report(const EvalResult& r, const fs::path& out_dir, bool with_weighted_f) {
  fs::create_directories(out_dir);
  nlohmann::json j = to_json(r.report);
  nlohmann::json ious = nlohmann::json::object();
  for (const auto& [id, v] : r.iou) ious[id] = v;
  j["iou"] = ious;
  j["unmatched"] = r.unmatched;
  j["meta"]["with_weighted_f"] = with_weighted_f;
  write_text(out_dir / "report.json", j.dump(2) + "\n");
  std::string md = to_markdown(r.report, with_weighted_f);
  if (!r.unmatched.empty()) {
    md += fmt::format("\n{} file(s) without a counterpart:", r.unmatched.size());
    for (const auto& id : r.unmatched) md += " " + id;
    md += "\n";
  }
  write_text(out_dir / "report.md", md);
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::optional<Sweep> parse_sweep(std::string_view text) {
  if (text == "focus") return Sweep::focus;
  if (text == "k") return Sweep::k;
  return std::nullopt;
}

std::vector<AblationRow> run_ablation(const RunConfig& base, const DatasetIndex& index, Sweep sweep,
                                      const fs::path& out) {
  std::vector<std::pair<std::string, RunConfig>> variants;
  if (sweep == Sweep::focus) {
    for (auto s : {FocusStrategy::single_left, FocusStrategy::single_up, FocusStrategy::double_split,
                   FocusStrategy::five, FocusStrategy::automatic}) {
      RunConfig c = base;
      c.pipeline.focus_strategy = s;
      variants.emplace_back(std::string(to_string(s)), c);
    }
  } else {
    for (int k : {1, 2, 3}) {
      RunConfig c = base;
      c.pipeline.k = k;
      variants.emplace_back(std::to_string(k), c);
    }
  }

  const PromptTemplateSet prompts = load_prompts(base);
  std::vector<AblationRow> rows;
  for (const auto& [label, cfg] : variants) {
    const fs::path dir = out / fmt::format("{}_{}", sweep == Sweep::focus ? "focus" : "k", label);
    const BackendFactory factory(cfg);
    const BatchResult batch = run_batch(cfg, index, prompts, factory, dir);
    AblationRow row;
    row.label = label;
    row.failed = batch.images.size() - batch.ok();
    try {
      const EvalResult r = evaluate_index(dir / "masks", index, cfg.jobs);
      write_report(r, dir, true);
      row.means = r.report.means;
      std::vector<double> ious;
      for (const auto& [id, v] : r.iou) ious.push_back(v);
      row.median_iou = median(ious);
      row.evaluated = r.iou.size();
    } catch (const EvaluationError&) {
      row.means = nan_values();
      row.median_iou = std::numeric_limits<double>::quiet_NaN();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string ablation_markdown(const std::vector<AblationRow>& rows, Sweep sweep, bool with_weighted_f) {
  std::string header = table_header(with_weighted_f);
  std::string out = fmt::format("| {} {} median IoU | images |\n|---|", sweep == Sweep::focus ? "Focus" : "k", header);
  for (int i = 0; i < (with_weighted_f ? 7 : 6); ++i) out += "---|";
  out += "\n";
  for (const auto& r : rows) {
    out += fmt::format("| {} | {} | {} | {} | {} |", r.label, cell(r.means.mae), cell(r.means.f_beta),
                       cell(r.means.e_phi), cell(r.means.s_alpha));
    if (with_weighted_f) out += fmt::format(" {} |", cell(r.means.f_beta_w));
    out += fmt::format(" {} | {} |\n", cell(r.median_iou),
                       r.failed ? fmt::format("{} ({} failed)", r.evaluated, r.failed) : std::to_string(r.evaluated));
  }
  return out;
}

ojson to_json(const std::vector<AblationRow>& rows, Sweep sweep) {
  ojson arr = ojson::array();
  for (const auto& r : rows)
    arr.push_back({{"label", r.label},
                   {"means", values_json(r.means)},
                   {"median_iou", r.median_iou},
                   {"evaluated", r.evaluated},
                   {"failed", r.failed}});
  return {{"sweep", sweep == Sweep::focus ? "focus" : "k"}, {"rows", arr}};
}

RepeatSummary summarize_repeats(const std::vector<MetricValues>& runs) {
  if (runs.empty()) throw EvaluationError("no repeated runs to summarise");
  RepeatSummary s;
  s.runs = runs;
  s.min = s.max = runs.front();
  const auto fields = {&MetricValues::mae, &MetricValues::f_beta, &MetricValues::e_phi, &MetricValues::s_alpha,
                       &MetricValues::f_beta_w};
  for (auto f : fields) {
    double sum = 0;
    for (const auto& r : runs) {
      sum += r.*f;
      s.min.*f = std::min(s.min.*f, r.*f);
      s.max.*f = std::max(s.max.*f, r.*f);
    }
    s.mean.*f = sum / static_cast<double>(runs.size());
  }
  return s;
}

std::string repeat_markdown(const RepeatSummary& s, bool with_weighted_f) {
  const int columns = with_weighted_f ? 5 : 4;
  std::string out = "| Run " + table_header(with_weighted_f) + "\n|---|";
  for (int i = 0; i < columns; ++i) out += "---|";
  out += "\n";
  for (std::size_t i = 0; i < s.runs.size(); ++i) out += markdown_row(std::to_string(i + 1), s.runs[i], with_weighted_f) + "\n";
  out += markdown_row("**mean**", s.mean, with_weighted_f) + "\n";
  std::string range = "| **range** |";
  const auto add = [&](double lo, double hi) { range += fmt::format(" [{:.3f}, {:.3f}] |", lo, hi); };
  add(s.min.mae, s.max.mae);
  add(s.min.f_beta, s.max.f_beta);
  add(s.min.e_phi, s.max.e_phi);
  add(s.min.s_alpha, s.max.s_alpha);
  if (with_weighted_f) add(s.min.f_beta_w, s.max.f_beta_w);
  return out + range + "\n";
}

ojson to_json(const RepeatSummary& s) {
  ojson runs = ojson::array();
  for (const auto& r : s.runs) runs.push_back(values_json(r));
  return {{"runs", runs}, {"mean", values_json(s.mean)}, {"min", values_json(s.min)}, {"max", values_json(s.max)}};
}

}  // namespace argus
