// argus: run | eval | ablate | synth | overlay | prompts
//
// Exit codes: 0 ok, 1 configuration or input error, 2 backend unreachable, 3 evaluation error.

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "argus/codec.hpp"
#include "argus/harness/config.hpp"
#include "argus/harness/dataset.hpp"
#include "argus/harness/evaluate.hpp"
#include "argus/harness/runner.hpp"
#include "argus/harness/synthetic.hpp"
#include "argus/overlay.hpp"

namespace fs = std::filesystem;
using namespace argus;

namespace {

enum Exit { kOk = 0, kConfig = 1, kUnreachable = 2, kEval = 3 };

struct RunFlags {
  std::string config, dataset, out, mode, focus, prompt, prompts, fixture;
  std::string vlm, vlm_url, vlm_model, seg, seg_url, depth, depth_url;
  int jobs = 0, k = 0, repeat = 0;
  bool no_depth = false, no_probe = false;
};

void add_run_flags(CLI::App* app, RunFlags& f) {
  app->add_option("--config", f.config, "Run configuration JSON");
  app->add_option("--dataset", f.dataset, "Dataset root (images/, gt/, depth/)");
  app->add_option("--out", f.out, "Output directory");
  app->add_option("--mode", f.mode, "sequential | staged")->check(CLI::IsMember({"sequential", "staged"}));
  app->add_option("--jobs", f.jobs, "Images processed concurrently")->check(CLI::PositiveNumber);
  app->add_option("--focus", f.focus, "Focus strategy")
      ->check(CLI::IsMember({"single_left", "single_up", "double", "five", "auto"}));
  app->add_option("--k", f.k, "Refinement rounds")->check(CLI::PositiveNumber);
  app->add_flag("--no-depth", f.no_depth, "Run without depth maps");
  app->add_option("--prompt", f.prompt, "Task prompt, e.g. \"camouflaged animals\"");
  app->add_option("--prompts", f.prompts, "Prompt template file");
  app->add_option("--vlm", f.vlm, "VLM backend kind")->check(CLI::IsMember({"http", "scripted", "oracle"}));
  app->add_option("--vlm-url", f.vlm_url, "VLM base URL");
  app->add_option("--vlm-model", f.vlm_model, "VLM model name");
  app->add_option("--fixture", f.fixture, "Scripted VLM fixture (file or directory)");
  app->add_option("--segmenter", f.seg, "Segmenter backend kind")
      ->check(CLI::IsMember({"http", "gt_intersect", "box_fill"}));
  app->add_option("--seg-url", f.seg_url, "Segmenter base URL");
  app->add_option("--depth", f.depth, "Depth backend kind")->check(CLI::IsMember({"files", "http", "none"}));
  app->add_option("--depth-url", f.depth_url, "Depth service base URL");
  app->add_flag("--no-probe", f.no_probe, "Skip the startup reachability check");
}

RunOverrides to_overrides(const RunFlags& f) {
  RunOverrides o;
  const auto set = [](auto& dst, const std::string& v) {
    if (!v.empty()) dst = v;
  };
  if (!f.dataset.empty()) o.dataset = f.dataset;
  if (!f.out.empty()) o.output = f.out;
  if (!f.prompts.empty()) o.prompts = f.prompts;
  if (!f.fixture.empty()) o.fixture = f.fixture;
  if (!f.mode.empty()) o.mode = parse_run_mode(f.mode);
  if (!f.focus.empty()) o.focus = parse_focus_strategy(f.focus);
  if (f.jobs > 0) o.jobs = f.jobs;
  if (f.k > 0) o.k = f.k;
  if (f.repeat > 0) o.repeat = f.repeat;
  set(o.task_prompt, f.prompt);
  set(o.vlm_kind, f.vlm);
  set(o.vlm_url, f.vlm_url);
  set(o.vlm_model, f.vlm_model);
  set(o.seg_kind, f.seg);
  set(o.seg_url, f.seg_url);
  set(o.depth_kind, f.depth);
  set(o.depth_url, f.depth_url);
  o.no_depth = f.no_depth;
  return o;
}

RunConfig resolve(const RunFlags& f) {
  return resolve_run_config(f.config.empty() ? std::nullopt : std::optional<fs::path>(f.config), to_overrides(f));
}

void print_warnings(const DatasetIndex& index) {
  for (const auto& w : index.warnings) std::cerr << "warning: " << w << "\n";
}

int cmd_run(const RunFlags& f) {
  const RunConfig cfg = resolve(f);
  const DatasetIndex index = load_dataset(cfg.dataset);
  print_warnings(index);
  const BackendFactory factory(cfg);
  if (!f.no_probe) factory.probe();
  const PromptTemplateSet prompts = load_prompts(cfg);

  std::vector<MetricValues> repeats;
  for (int r = 0; r < cfg.repeat; ++r) {
    const fs::path out = cfg.repeat == 1 ? cfg.output : cfg.output / fmt::format("repeat_{}", r + 1);
    const BatchResult batch = run_batch(cfg, index, prompts, factory, out);
    std::cout << fmt::format("{}: {} image(s), {} ok", out.string(), batch.images.size(), batch.ok());
    for (const auto& o : batch.images)
      if (o.status != ImageStatus::ok) std::cout << fmt::format("\n  {} {}: {}", o.id, to_string(o.status), o.error);
    std::cout << "\n";
    if (cfg.repeat > 1 && batch.ok() > 0) repeats.push_back(evaluate_index(out / "masks", index, cfg.jobs).report.means);
  }
  if (cfg.repeat > 1 && !repeats.empty()) {
    const RepeatSummary s = summarize_repeats(repeats);
    write_text(cfg.output / "repeat_summary.json", to_json(s).dump(2) + "\n");
    const std::string md = repeat_markdown(s);
    write_text(cfg.output / "repeat_summary.md", md);
    std::cout << md;
  }
  return kOk;
}

int cmd_ablate(const RunFlags& f, const std::string& sweep_name, bool with_fw) {
  const RunConfig cfg = resolve(f);
  const DatasetIndex index = load_dataset(cfg.dataset);
  print_warnings(index);
  if (!f.no_probe) BackendFactory(cfg).probe();
  const Sweep sweep = *parse_sweep(sweep_name);
  const auto rows = run_ablation(cfg, index, sweep, cfg.output);
  const std::string md = ablation_markdown(rows, sweep, with_fw);
  write_text(cfg.output / fmt::format("ablation_{}.md", sweep_name), md);
  write_text(cfg.output / fmt::format("ablation_{}.json", sweep_name), to_json(rows, sweep).dump(2) + "\n");
  std::cout << md;
  return kOk;
}

int cmd_eval(const std::string& pred, const std::string& gt, std::string out, bool with_fw, int jobs) {
  if (out.empty()) out = pred;
  RunMeta meta;
  meta.extra = {{"pred", pred}, {"gt", gt}};
  const EvalResult r = evaluate_dirs(pred, gt, std::max(1, jobs), meta);
  write_report(r, out, with_fw);
  for (const auto& id : r.unmatched) std::cerr << "warning: no counterpart for " << id << "\n";
  std::cout << fmt::format("{} image(s)\n| Image {}\n{}\n", r.report.per_image.size(), table_header(with_fw),
                           markdown_row("mean", r.report.means, with_fw));
  return kOk;
}

int cmd_overlay(const std::string& image, const std::string& mask, const std::string& out) {
  const ImageRgb img = decode_image(read_file(image));
  const BinMask m = decode_gt_png(read_file(mask));
  write_file(out, encode_png_rgb(render_overlay(img, m)));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Camouflaged-object segmentation chain: batch runner, evaluator and ablation harness"};
  app.require_subcommand(1);

  RunFlags run_flags;
  auto* run = app.add_subcommand("run", "Run the pipeline over a dataset");
  add_run_flags(run, run_flags);
  run->add_option("--repeat", run_flags.repeat, "Repeat the run and report mean and range")->check(CLI::PositiveNumber);

  RunFlags ablate_flags;
  std::string sweep;
  bool ablate_fw = false;
  auto* ablate = app.add_subcommand("ablate", "Sweep focus strategies or refinement rounds");
  add_run_flags(ablate, ablate_flags);
  ablate->add_option("--sweep", sweep, "focus | k")->required()->check(CLI::IsMember({"focus", "k"}));
  ablate->add_flag("--with-fw", ablate_fw, "Add the weighted F-measure column");

  std::string pred, gt, eval_out;
  bool with_fw = false;
  int eval_jobs = 1;
  auto* eval = app.add_subcommand("eval", "Score predicted masks against ground truth");
  eval->add_option("--pred", pred, "Directory of predicted PNG masks")->required();
  eval->add_option("--gt", gt, "Directory of ground-truth PNG masks")->required();
  eval->add_option("--out", eval_out, "Report directory (default: --pred)");
  eval->add_flag("--with-fw", with_fw, "Add the weighted F-measure column");
  eval->add_option("--jobs", eval_jobs, "Worker threads")->check(CLI::PositiveNumber);

  std::string synth_out;
  int synth_n = 20, synth_size = 256;
  std::uint64_t synth_seed = 7;
  auto* synth = app.add_subcommand("synth", "Write a synthetic low-contrast dataset");
  synth->add_option("--out", synth_out, "Dataset root")->required();
  synth->add_option("-n,--count", synth_n, "Number of scenes")->check(CLI::PositiveNumber);
  synth->add_option("--seed", synth_seed, "Random seed");
  synth->add_option("--size", synth_size, "Image side in pixels")->check(CLI::Range(16, 8192));

  std::string ov_image, ov_mask, ov_out;
  auto* overlay = app.add_subcommand("overlay", "Draw a mask over an image");
  overlay->add_option("--image", ov_image)->required();
  overlay->add_option("--mask", ov_mask)->required();
  overlay->add_option("--out", ov_out)->required();

  std::string prompts_out;
  auto* prompts = app.add_subcommand("prompts", "Write the built-in prompt templates");
  prompts->add_option("--out", prompts_out, "Destination JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*run) return cmd_run(run_flags);
    if (*ablate) return cmd_ablate(ablate_flags, sweep, ablate_fw);
    if (*eval) return cmd_eval(pred, gt, eval_out, with_fw, eval_jobs);
    if (*synth) {
      gen_synthetic(synth_out, synth_n, synth_seed, synth_size);
      std::cout << fmt::format("{}: {} scene(s), seed {}, {}x{}\n", synth_out, synth_n, synth_seed, synth_size,
                               synth_size);
      return kOk;
    }
    if (*overlay) return cmd_overlay(ov_image, ov_mask, ov_out);
    if (*prompts) {
      write_text(prompts_out, PromptTemplateSet::defaults().to_json().dump(2) + "\n");
      return kOk;
    }
  } catch (const BackendUnreachable& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUnreachable;
  } catch (const EvaluationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kEval;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  }
  return kOk;
}
