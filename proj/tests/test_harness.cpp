#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "argus/codec.hpp"
#include "argus/error.hpp"
#include "argus/harness/config.hpp"
#include "argus/harness/dataset.hpp"
#include "argus/harness/evaluate.hpp"
#include "argus/harness/runner.hpp"
#include "argus/harness/synthetic.hpp"
#include "argus/overlay.hpp"
#include "oracles/naive_metrics.hpp"
#include "support/generators.hpp"
#include "support/harness_fixtures.hpp"

using namespace argus;
namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace testgen;

namespace {

ImageRgb flat_image(int w, int h, std::uint8_t v) {
  ImageRgb img(w, h);
  std::fill(img.pixels.begin(), img.pixels.end(), v);
  return img;
}

void write_pair(const fs::path& root, const std::string& id, int w, int h, int gt_w = -1) {
  write_file(root / "images" / (id + ".png"), encode_png_rgb(flat_image(w, h, 100)));
  BinMask gt = BinMask::Constant(h, gt_w < 0 ? w : gt_w, false);
  gt.block(1, 1, 2, 2).setConstant(true);
  write_file(root / "gt" / (id + ".png"), encode_mask_png(gt));
}

double ramanujan_perimeter(double a, double b) {
  const double h = (a - b) * (a - b) / ((a + b) * (a + b));
  return std::numbers::pi * (a + b) * (1 + 3 * h / (10 + std::sqrt(4 - 3 * h)));
}

}  // namespace

TEST_CASE("load_dataset pairs by stem and reports what it skips") {
  const fs::path root = scratch("dataset");
  write_pair(root, "a", 8, 6);
  write_pair(root, "b", 8, 6);
  write_pair(root, "c", 5, 5);
  write_file(root / "images" / "orphan.png", encode_png_rgb(flat_image(4, 4, 0)));
  write_pair(root, "skewed", 8, 6, 7);
  write_file(root / "gt" / "lonely.png", encode_mask_png(BinMask(BinMask::Constant(3, 3, true))));
  write_file(root / "depth" / "a.png", encode_depth_png(DepthMap::Constant(6, 8, 0.5)));

  const DatasetIndex idx = load_dataset(root);
  REQUIRE(idx.entries.size() == 3);
  CHECK(idx.entries[0].id == "a");
  CHECK(idx.entries[2].id == "c");
  CHECK(idx.entries[0].depth.has_value());
  CHECK_FALSE(idx.entries[1].depth.has_value());
  CHECK(idx.find("b") != nullptr);
  CHECK(idx.find("skewed") == nullptr);
  REQUIRE(idx.warnings.size() == 3);
  const auto mentions = [&](const std::string& id) {
    return std::any_of(idx.warnings.begin(), idx.warnings.end(),
                       [&](const std::string& w) { return w.find(id) != std::string::npos; });
  };
  CHECK(mentions("orphan"));
  CHECK(mentions("skewed"));
  CHECK(mentions("lonely"));

  const BinMask gt = load_gt(idx.entries[0]);
  CHECK(gt.count() == 4);
  CHECK(load_depth(idx.entries[0])->isApproxToConstant(0.5, 1e-4));

  CHECK_THROWS_AS(load_dataset(root / "missing"), ConfigError);
  const fs::path empty = scratch("dataset_empty");
  fs::create_directories(empty / "images");
  CHECK_THROWS_AS(load_dataset(empty), ConfigError);
}

TEST_CASE("synthetic scenes") {
  SUBCASE("same seed and index give the same scene") {
    const SyntheticScene a = make_scene(7, 3, 128);
    const SyntheticScene b = make_scene(7, 3, 128);
    CHECK(a.image == b.image);
    CHECK((a.gt == b.gt).all());
    CHECK((a.depth == b.depth).all());
    CHECK_FALSE(make_scene(8, 3, 128).image == a.image);
    CHECK_FALSE(make_scene(7, 4, 128).image == a.image);
  }

  SUBCASE("GT area matches the analytic union area and blobs are low contrast") {
    for (int i = 0; i < 20; ++i) {
      const SyntheticScene s = make_scene(7, i, 256);
      CAPTURE(i);
      REQUIRE(s.blobs.size() >= 1);
      REQUIRE(s.blobs.size() <= 3);
      CHECK(s.gt.count() == blob_union_area(s.blobs, 256, 256));
      for (const BlobSpec& b : s.blobs) {
        const BinMask ring = blob_ring(b, s.gt);
        REQUIRE(ring.count() > 0);
        std::array<double, 3> in{}, out{};
        long n_in = 0;
        for (int y = 0; y < 256; ++y)
          for (int x = 0; x < 256; ++x) {
            const auto* p = s.image.at(x, y);
            if (b.contains(x + 0.5, y + 0.5)) {
              ++n_in;
              for (int c = 0; c < 3; ++c) in[c] += p[c];
            } else if (ring(y, x)) {
              for (int c = 0; c < 3; ++c) out[c] += p[c];
            }
          }
        REQUIRE(n_in > 0);
        for (int c = 0; c < 3; ++c)
          CHECK(std::fabs(in[c] / n_in - out[c] / ring.count()) <= kSyntheticContrast);
      }
      // foreground is nearer than the background on average
      double fg = 0, bg = 0;
      for (Eigen::Index k = 0; k < s.gt.size(); ++k) (s.gt.data()[k] ? fg : bg) += s.depth.data()[k];
      CHECK(fg / s.gt.count() > bg / (s.gt.size() - s.gt.count()));
    }
  }

  SUBCASE("blob_union_area against pixel-centre counting") {
    testgen::Rng rng(11);
    for (int t = 0; t < 50; ++t) {
      std::vector<BlobSpec> blobs;
      for (int b = 0; b < rng.range(1, 3); ++b)
        blobs.push_back({rng.uniform() * 60, rng.uniform() * 40, 1 + rng.uniform() * 20, 1 + rng.uniform() * 20,
                         rng.uniform() * std::numbers::pi});
      long naive = 0;
      for (int y = 0; y < 40; ++y)
        for (int x = 0; x < 60; ++x)
          naive += std::any_of(blobs.begin(), blobs.end(), [&](const BlobSpec& b) { return b.contains(x + 0.5, y + 0.5); });
      CHECK(blob_union_area(blobs, 60, 40) == naive);
    }
  }

  SUBCASE("gen_synthetic writes a loadable dataset") {
    const fs::path root = scratch("synth");
    gen_synthetic(root, 4, 7, 64);
    const DatasetIndex idx = load_dataset(root);
    REQUIRE(idx.entries.size() == 4);
    CHECK(idx.warnings.empty());
    CHECK(idx.entries[0].id == "synth_000");
    const SyntheticScene s = make_scene(7, 2, 64);
    CHECK(load_image(idx.entries[2]) == s.image);
    CHECK((load_gt(idx.entries[2]) == s.gt).all());
    const json scenes = json::parse(slurp(root / "scenes.json"));
    CHECK(scenes.dump().find("synth_003") != std::string::npos);
  }
}

TEST_CASE("evaluation of prediction directories") {
  const fs::path root = scratch("eval");
  testgen::Rng rng(5);
  std::vector<SoftMask> preds;
  std::vector<BinMask> gts;
  for (int i = 0; i < 5; ++i) {
    const int h = 12 + i, w = 14 - i;
    SoftMask p(h, w);
    for (Eigen::Index k = 0; k < p.size(); ++k) p.data()[k] = rng.range(0, 255) / 255.0;  // survives 8-bit PNG
    const BinMask g = testgen::random_mixed_mask(rng, h, w);
    const std::string id = fmt::format("img{}", i);
    write_file(root / "pred" / (id + ".png"), encode_mask_png(p));
    write_file(root / "gt" / (id + ".png"), encode_mask_png(g));
    write_file(root / "self" / (id + ".png"), encode_mask_png(g));
    write_file(root / "inv" / (id + ".png"), encode_mask_png(BinMask(!g)));
    preds.push_back(p);
    gts.push_back(g);
  }

  SUBCASE("identical prediction") {
    const EvalResult r = evaluate_dirs(root / "self", root / "gt");
    CHECK(r.report.means.mae == 0.0);
    CHECK(r.report.means.f_beta == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.report.means.e_phi >= 0.996);
    CHECK(r.report.means.s_alpha == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r.report.means.f_beta_w == doctest::Approx(1.0).epsilon(1e-6));
    for (const auto& [id, v] : r.iou) CHECK(v == 1.0);
  }

  SUBCASE("inverted prediction") {
    const EvalResult r = evaluate_dirs(root / "inv", root / "gt");
    CHECK(r.report.means.mae == 1.0);
    CHECK(r.report.means.f_beta == doctest::Approx(0.0));
  }

  SUBCASE("five images against the naive oracle") {
    const EvalResult r = evaluate_dirs(root / "pred", root / "gt", 3);
    REQUIRE(r.report.per_image.size() == 5);
    double sums[5] = {};
    for (int i = 0; i < 5; ++i) {
      const auto p = testgen::to_naive(preds[i]);
      const auto g = testgen::to_naive(gts[i]);
      const double expect[5] = {naive::mae(p, g), naive::adaptive_f(p, g), naive::e_measure(p, g),
                                naive::s_measure(p, g), naive::weighted_f(p, g)};
      const MetricValues& got = r.report.per_image.at(fmt::format("img{}", i));
      const double have[5] = {got.mae, got.f_beta, got.e_phi, got.s_alpha, got.f_beta_w};
      for (int m = 0; m < 5; ++m) {
        CAPTURE(i);
        CAPTURE(m);
        CHECK(std::fabs(have[m] - expect[m]) <= 1e-6);
        sums[m] += expect[m];
      }
    }
    CHECK(r.report.means.mae == doctest::Approx(sums[0] / 5).epsilon(1e-9));
    CHECK(r.report.means.s_alpha == doctest::Approx(sums[3] / 5).epsilon(1e-9));

    write_report(r, root / "report", true);
    const json rep = json::parse(slurp(root / "report" / "report.json"));
    CHECK(rep.contains("iou"));
    CHECK(rep["meta"]["with_weighted_f"] == true);
    CHECK(slurp(root / "report" / "report.md").find("F_β") != std::string::npos);
  }

  SUBCASE("predictions at another resolution are resized to the GT") {
    write_file(root / "big" / "img0.png", encode_mask_png(BinMask(BinMask::Constant(24, 28, true))));
    const EvalResult r = evaluate_dirs(root / "big", root / "gt");
    CHECK(r.report.per_image.size() == 1);
    CHECK(r.unmatched.size() == 4);
  }

  SUBCASE("nothing to evaluate") {
    fs::create_directories(root / "none");
    CHECK_THROWS_AS(evaluate_dirs(root / "none", root / "gt"), EvaluationError);
    CHECK_THROWS_AS(evaluate_dirs(root / "nowhere", root / "gt"), EvaluationError);
    write_text(root / "broken" / "img0.png", "not a png");
    CHECK_THROWS_AS(evaluate_dirs(root / "broken", root / "gt"), EvaluationError);
  }
}

TEST_CASE("median and repeat summaries") {
  CHECK(median({3, 1, 2}) == 2);
  CHECK(median({4, 1, 2, 3}) == 2.5);
  CHECK(std::isnan(median({})));
  const RepeatSummary s = summarize_repeats({{0.1, 0.5, 0.6, 0.7, 0.4}, {0.3, 0.7, 0.8, 0.9, 0.6}});
  CHECK(s.mean.mae == doctest::Approx(0.2));
  CHECK(s.min.f_beta == 0.5);
  CHECK(s.max.s_alpha == 0.9);
  const std::string md = repeat_markdown(s);
  CHECK(md.find("[0.100, 0.300]") != std::string::npos);
  CHECK_THROWS_AS(summarize_repeats({}), EvaluationError);
}

TEST_CASE("run configuration precedence: flags over file over environment") {
  const fs::path dir = scratch("config");
  write_text(dir / "run.json", R"({
    "dataset": "data", "output": "out", "jobs": 2, "mode": "staged",
    "pipeline": {"k": 2, "task_prompt": "camouflaged insects"},
    "backends": {"vlm": {"kind": "http", "url": "http://file-vlm:9000"}, "segmenter": {"kind": "box_fill"}}
  })");
  const EnvLookup env = [](const char* key) -> std::optional<std::string> {
    const std::string k = key;
    if (k == "ARGUS_VLM_URL") return "http://env-vlm:1";
    if (k == "ARGUS_VLM_MODEL") return "env-model";
    if (k == "ARGUS_API_KEY") return "s3cr3t";
    return std::nullopt;
  };

  RunOverrides o;
  o.jobs = 4;
  o.focus = FocusStrategy::five;
  RunConfig c = resolve_run_config(dir / "run.json", o, env);
  CHECK(c.jobs == 4);
  CHECK(c.mode == RunMode::staged);
  CHECK(c.pipeline.k == 2);
  CHECK(c.pipeline.task_prompt == "camouflaged insects");
  CHECK(c.pipeline.focus_strategy == FocusStrategy::five);
  CHECK(c.vlm.url == "http://file-vlm:9000");
  CHECK(c.vlm.model == "env-model");
  CHECK(c.api_key == "s3cr3t");
  CHECK(c.dataset == dir / "data");
  CHECK(c.output == dir / "out");
  CHECK(c.depth.root == dir / "data" / "depth");
  CHECK(to_json(c).dump().find("s3cr3t") == std::string::npos);

  o.vlm_url = "http://flag-vlm:2";
  o.no_depth = true;
  c = resolve_run_config(dir / "run.json", o, env);
  CHECK(c.vlm.url == "http://flag-vlm:2");
  CHECK_FALSE(c.pipeline.use_depth);

  RunOverrides bare;
  bare.dataset = "d";
  bare.output = "o";
  bare.seg_kind = "box_fill";
  CHECK(resolve_run_config(std::nullopt, bare, env).vlm.url == "http://env-vlm:1");
  CHECK_THROWS_AS(resolve_run_config(std::nullopt, bare, [](const char*) { return std::nullopt; }), ConfigError);

  write_text(dir / "typo.json", R"({"dataset": "d", "output": "o", "jbos": 3})");
  CHECK_THROWS_AS(resolve_run_config(dir / "typo.json", {}, env), ConfigError);
  write_text(dir / "bad.json", "{not json");
  CHECK_THROWS_AS(resolve_run_config(dir / "bad.json", {}, env), ConfigError);
  CHECK_THROWS_AS(resolve_run_config(dir / "absent.json", {}, env), ConfigError);
}

TEST_CASE("overlay") {
  testgen::Rng rng(2);
  ImageRgb img(40, 30);
  for (auto& v : img.pixels) v = static_cast<std::uint8_t>(rng.range(0, 255));

  SUBCASE("empty mask leaves the image untouched") {
    CHECK(render_overlay(img, BinMask::Constant(30, 40, false)) == img);
  }

  SUBCASE("full mask is a uniform tint with no contour at the border") {
    const ImageRgb grey = flat_image(40, 30, 100);
    const ImageRgb out = render_overlay(grey, BinMask::Constant(30, 40, true));
    const std::uint8_t r = static_cast<std::uint8_t>(std::lround(0.6 * 100 + 0.4 * 255));
    const std::uint8_t g = static_cast<std::uint8_t>(std::lround(0.6 * 100));
    for (int y = 0; y < 30; ++y)
      for (int x = 0; x < 40; ++x) {
        const auto* p = out.at(x, y);
        REQUIRE(p[0] == r);
        REQUIRE(p[1] == g);
        REQUIRE(p[2] == g);
      }
  }

  SUBCASE("contour pixels per unit width track the blob perimeter") {
    for (int i = 0; i < 10; ++i) {
      const SyntheticScene s = make_scene(7, i, 256);
      for (const BlobSpec& b : s.blobs) {
        BinMask one = BinMask::Constant(256, 256, false);
        for (int y = 0; y < 256; ++y)
          for (int x = 0; x < 256; ++x) one(y, x) = b.contains(x + 0.5, y + 0.5);
        const double per_width = mask_contour(one, 2).count() / 2.0;
        const double perimeter = ramanujan_perimeter(b.rx, b.ry);
        CAPTURE(perimeter);
        CHECK(per_width >= 0.8 * perimeter);
        CHECK(per_width <= 1.2 * perimeter);
      }
    }
  }

  SUBCASE("contour stays inside the mask") {
    const BinMask m = testgen::random_mixed_mask(rng, 30, 40);
    const BinMask c = mask_contour(m, 2);
    CHECK_FALSE((c && !m).any());
    CHECK(mask_contour(m, 0).count() == 0);
    const ImageRgb out = render_overlay(img, m);
    for (int y = 0; y < 30; ++y)
      for (int x = 0; x < 40; ++x)
        if (!m(y, x)) REQUIRE(std::equal(out.at(x, y), out.at(x, y) + 3, img.at(x, y)));
  }

  CHECK_THROWS_AS(render_overlay(img, BinMask::Constant(30, 41, true)), DimensionMismatch);
}

TEST_CASE("scripted batches are byte-identical across workers and modes, and survive a fault") {
  const ScriptedSuite s = scripted_suite("batch");
  const auto seq1 = run_config(scripted_config(s, s.root / "seq1", 1, RunMode::sequential));
  const auto seq4 = run_config(scripted_config(s, s.root / "seq4", 4, RunMode::sequential));
  const auto stg4 = run_config(scripted_config(s, s.root / "stg4", 4, RunMode::staged));
  const auto stg1 = run_config(scripted_config(s, s.root / "stg1", 1, RunMode::staged));

  const auto reference = tree(s.root / "seq1");
  CHECK(reference.size() == 1 + 9 + 9);
  CHECK(tree(s.root / "seq4") == reference);
  CHECK(tree(s.root / "stg4") == reference);
  CHECK(tree(s.root / "stg1") == reference);

  CHECK(seq1.ok() == 9);
  const json manifest = json::parse(reference.at("manifest.json"));
  CHECK(manifest["counts"]["ok"] == 9);
  CHECK(manifest["counts"]["transport_error"] == 1);
  REQUIRE(manifest["images"].size() == 10);
  for (const auto& e : manifest["images"]) {
    const bool faulty = e["id"] == synthetic_id(4);
    CHECK(e["status"] == (faulty ? "transport_error" : "ok"));
    if (faulty) {
      CHECK(e["error"].get<std::string>().find("injected fault") != std::string::npos);
      CHECK_FALSE(e.contains("mask"));
    } else {
      CHECK(fs::is_regular_file(s.root / "seq1" / e["mask"].get<std::string>()));
      CHECK(fs::is_regular_file(s.root / "seq1" / e["trace"].get<std::string>()));
    }
  }
  CHECK_FALSE(fs::exists(s.root / "seq1" / "masks" / (synthetic_id(4) + ".png")));
  const json timings = json::parse(slurp(s.root / "stg4" / "timings.json"));
  CHECK(timings["mode"] == "staged");
  CHECK(timings["jobs"] == 4);
  CHECK(timings["images"][synthetic_id(0)].contains("sculpt"));

  // a rerun into the same directory clears the stale mask of a now-failing image
  write_file(s.root / "seq1" / "masks" / (synthetic_id(4) + ".png"), encode_mask_png(BinMask(BinMask::Constant(2, 2, true))));
  run_config(scripted_config(s, s.root / "seq1", 2, RunMode::sequential));
  CHECK(tree(s.root / "seq1") == reference);
  (void)seq4;
  (void)stg4;
  (void)stg1;
}

TEST_CASE("depth wiring follows the use_depth switch") {
  const ScriptedSuite s = scripted_suite("depth");
  const auto depth_records = [](const fs::path& trace) {
    int n = 0;
    const json doc = json::parse(slurp(trace));
    for (const auto& r : doc["records"]) n += r.value("call", "") == "depth";
    return n;
  };
  RunConfig with = scripted_config(s, s.root / "with", 2, RunMode::sequential);
  run_config(with);
  RunConfig without = with;
  without.output = s.root / "without";
  without.pipeline.use_depth = false;
  run_config(without);
  for (int i : {0, 3, 9}) {
    const fs::path t = fs::path("trace") / (synthetic_id(i) + ".json");
    CHECK(depth_records(s.root / "with" / t) == 1);
    CHECK(depth_records(s.root / "without" / t) == 0);
  }
  CHECK(json::parse(slurp(s.root / "with" / "manifest.json"))["use_depth"] == "on");
  CHECK(json::parse(slurp(s.root / "without" / "manifest.json"))["use_depth"] == "off");

  // a missing depth file fails only that image
  fs::remove(s.dataset / "depth" / (synthetic_id(1) + ".png"));
  with.output = s.root / "holes";
  const BatchResult r = run_config(with);
  CHECK(r.images[1].status == ImageStatus::skipped);
  CHECK(r.images[1].error.find(synthetic_id(1)) != std::string::npos);
}

TEST_CASE("oracle ablation over refinement rounds") {
  const fs::path root = scratch("ablate");
  gen_synthetic(root / "data", 4, 7, 128);
  RunOverrides o;
  o.dataset = root / "data";
  o.output = root / "out";
  o.vlm_kind = "oracle";
  o.seg_kind = "gt_intersect";
  o.jobs = 2;
  const RunConfig cfg = resolve_run_config(std::nullopt, o, [](const char*) { return std::nullopt; });
  const auto rows = run_ablation(cfg, load_dataset(cfg.dataset), Sweep::k, cfg.output);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].label == "1");
  CHECK(rows[2].label == "3");
  for (const auto& r : rows) {
    CHECK(r.evaluated == 4);
    CHECK(r.failed == 0);
    CHECK(r.median_iou >= 0.9);
  }
  CHECK(fs::is_regular_file(root / "out" / "k_2" / "report.json"));
  const std::string md = ablation_markdown(rows, Sweep::k);
  CHECK(md.rfind("| k | M↓ | F_β↑ | E_φ↑ | S_α↑ | median IoU | images |", 0) == 0);
  CHECK(to_json(rows, Sweep::k)["rows"].size() == 3);
}

#ifdef ARGUS_CLI
TEST_CASE("command line exit codes") {
  const fs::path root = scratch("cli");
  const auto run = [&](const std::string& args) {
    const int status = std::system(fmt::format("\"{}\" {} >{} 2>&1", ARGUS_CLI, args, (root / "log.txt").string()).c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };
  const std::string data = (root / "data").string();
  CHECK(run(fmt::format("synth --out {} -n 3 --size 64", data)) == 0);
  CHECK(run(fmt::format("run --dataset {} --out {} --vlm oracle --segmenter gt_intersect", data, (root / "o").string())) == 0);
  CHECK(fs::is_regular_file(root / "o" / "manifest.json"));
  CHECK(run(fmt::format("eval --pred {} --gt {}/gt", (root / "o" / "masks").string(), data)) == 0);
  CHECK(fs::is_regular_file(root / "o" / "masks" / "report.md"));
  CHECK(run(fmt::format("run --dataset {} --out {} --vlm-url http://127.0.0.1:1 --segmenter box_fill", data,
                        (root / "x").string())) == 2);
  CHECK(run(fmt::format("run --dataset {} --out {}", (root / "nope").string(), (root / "x").string())) == 1);
  CHECK(run("run --jobs 0") == 1);
  CHECK(run(fmt::format("eval --pred {} --gt {}/gt", (root / "nope").string(), data)) == 3);
  CHECK(run(fmt::format("prompts --out {}", (root / "p.json").string())) == 0);
  CHECK(json::parse(slurp(root / "p.json")).is_object());
}
#endif

TEST_CASE("the example configuration in the repository resolves") {
  const fs::path file = fs::path(ARGUS_SOURCE_DIR) / "configs" / "example.json";
  const RunConfig c = resolve_run_config(file, {}, [](const char*) { return std::nullopt; });
  CHECK(c.mode == RunMode::staged);
  CHECK(c.pipeline.k == 3);
  CHECK(c.vlm.kind == "http");
  CHECK(c.depth.root == c.dataset / "depth");
}
