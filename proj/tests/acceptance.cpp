// One PASS/FAIL line per acceptance criterion; exits non-zero if any fails.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <vector>

#include <fmt/format.h>

#include "argus/backends/http.hpp"
#include "argus/backends/local.hpp"
#include "argus/backends/scripted.hpp"
#include "argus/geometry.hpp"
#include "argus/harness/evaluate.hpp"
#include "argus/mask_ops.hpp"
#include "argus/metrics.hpp"
#include "argus/pipeline/pipeline.hpp"
#include "oracles/naive_metrics.hpp"
#include "support/generators.hpp"
#include "support/harness_fixtures.hpp"
#include "support/stub_server.hpp"
#include "support/wire_fixtures.hpp"

using namespace argus;
using namespace testgen;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects failed conditions; the first few are reported.
struct Checker {
  int failures = 0;
  std::vector<std::string> notes;
  void require(bool ok, const std::string& what) {
    if (ok) return;
    ++failures;
    if (notes.size() < 3) notes.push_back(what);
  }
  Outcome outcome(const std::string& summary) const {
    if (failures == 0) return {true, summary};
    std::string d = fmt::format("{} failure(s): ", failures);
    for (std::size_t i = 0; i < notes.size(); ++i) d += (i ? "; " : "") + notes[i];
    return {false, d};
  }
};

Outcome metric_identity() {
  Checker c;
  Rng rng(2024);
  double worst_e = 1;
  for (int i = 0; i < 50; ++i) {
    const BinMask gt = random_mixed_mask(rng, rng.range(8, 64), rng.range(8, 64));
    const SoftMask pred = to_soft(gt);
    const auto v = metrics::evaluate_all(pred, gt);
    c.require(v.mae == 0.0, fmt::format("mae {} on mask {}", v.mae, i));
    c.require(v.f_beta == 1.0, fmt::format("f_beta {} on mask {}", v.f_beta, i));
    c.require(std::fabs(v.s_alpha - 1) <= 1e-6, fmt::format("s_alpha {} on mask {}", v.s_alpha, i));
    c.require(std::fabs(v.f_beta_w - 1) <= 1e-6, fmt::format("f_beta_w {} on mask {}", v.f_beta_w, i));
    c.require(v.e_phi >= 0.996, fmt::format("e_phi {} on mask {}", v.e_phi, i));
    worst_e = std::min(worst_e, v.e_phi);
  }
  return c.outcome(fmt::format("50 masks, min E_phi {:.4f}", worst_e));
}

Outcome metric_oracle() {
  Checker c;
  Rng rng(77);
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    const int h = rng.range(1, 16), w = rng.range(1, 16);
    const SoftMask pred = random_soft(rng, h, w);
    const BinMask gt = random_any_mask(rng, h, w);
    const auto p = to_naive(pred);
    const auto g = to_naive(gt);
    const auto v = metrics::evaluate_all(pred, gt);
    const std::pair<const char*, std::pair<double, double>> pairs[] = {
        {"mae", {v.mae, naive::mae(p, g)}},
        {"f_beta", {v.f_beta, naive::adaptive_f(p, g)}},
        {"e_phi", {v.e_phi, naive::e_measure(p, g)}},
        {"s_alpha", {v.s_alpha, naive::s_measure(p, g)}},
        {"f_beta_w", {v.f_beta_w, naive::weighted_f(p, g)}},
    };
    for (const auto& [name, vals] : pairs) {
      const double d = std::fabs(vals.first - vals.second);
      worst = std::max(worst, d);
      c.require(d <= 1e-6, fmt::format("{} differs by {:.2e} on pair {} ({}x{})", name, d, i, h, w));
    }
  }
  return c.outcome(fmt::format("100 pairs x 5 measures, max |diff| {:.1e}", worst));
}

Outcome geometry() {
  Checker c;
  Rng rng(3);
  const auto area = [](const std::vector<Region>& rs) {
    long s = 0;
    for (const auto& r : rs) s += r.box.area();
    return s;
  };
  for (int i = 0; i < 200; ++i) {
    const int w = rng.range(3, 2000), h = rng.range(3, 2000);
    const auto left = decompose_regions(w, h, FocusStrategy::single_left);
    const auto up = decompose_regions(w, h, FocusStrategy::single_up);
    for (const auto* tiles : {&left, &up}) {
      c.require(tiles->size() == 3, fmt::format("{}x{}: {} tiles", w, h, tiles->size()));
      c.require(area(*tiles) == static_cast<long>(w) * h, fmt::format("{}x{}: tiles do not cover the image", w, h));
      for (std::size_t a = 0; a < tiles->size(); ++a) {
        c.require((*tiles)[a].box.within(w, h), fmt::format("{}x{}: tile outside", w, h));
        for (std::size_t b = a + 1; b < tiles->size(); ++b)
          c.require(box_intersection((*tiles)[a].box, (*tiles)[b].box).empty(), fmt::format("{}x{}: overlap", w, h));
      }
    }
    std::vector<Region> both = left;
    both.insert(both.end(), up.begin(), up.end());
    c.require(decompose_regions(w, h, FocusStrategy::double_split) == both, fmt::format("{}x{}: double split", w, h));
    for (const auto& r : decompose_regions(w, h, FocusStrategy::five))
      c.require(r.box.within(w, h), fmt::format("{}x{}: five-region tile outside", w, h));

    const int x0 = rng.range(0, 1000), y0 = rng.range(0, 1000);
    const BBox box{x0, y0, x0 + rng.range(1, 1500), y0 + rng.range(1, 1500)};
    const auto pts = point_grid(box);
    c.require(pts.size() == 10, "point_grid size");
    for (const auto& p : pts) c.require(box.strictly_contains(p.x(), p.y()), "point on or outside the box");
    const int dx = rng.range(-500, 500), dy = rng.range(-500, 500);
    const auto moved = point_grid(box.translated(dx, dy));
    for (std::size_t k = 0; k < pts.size() && k < moved.size(); ++k)
      c.require(moved[k].x() == pts[k].x() + dx && moved[k].y() == pts[k].y() + dy, "translation equivariance");
  }
  return c.outcome("200 sizes; tiling, union, double split, 10-point grid");
}

// Shared by the convergence and ablation criteria.
struct SyntheticSuite {
  fs::path root;
  RunConfig cfg;
  DatasetIndex index;
  std::vector<AblationRow> k_rows;
};

SyntheticSuite& suite() {
  static SyntheticSuite s = [] {
    SyntheticSuite out;
    out.root = scratch("acceptance");
    gen_synthetic(out.root / "data", 20, 7, 256);
    RunOverrides o;
    o.dataset = out.root / "data";
    o.output = out.root / "runs";
    o.vlm_kind = "oracle";
    o.seg_kind = "gt_intersect";
    o.k = 3;
    o.focus = FocusStrategy::automatic;
    o.jobs = 4;
    out.cfg = resolve_run_config(std::nullopt, o, [](const char*) { return std::nullopt; });
    out.index = load_dataset(out.cfg.dataset);
    return out;
  }();
  return s;
}

Outcome oracle_convergence() {
  Checker c;
  SyntheticSuite& s = suite();
  c.require(s.index.entries.size() == 20, "suite does not hold 20 scenes");
  s.k_rows = run_ablation(s.cfg, s.index, Sweep::k, s.cfg.output);
  const EvalResult k3 = evaluate_index(s.cfg.output / "k_3" / "masks", s.index, s.cfg.jobs);
  int good = 0;
  for (const auto& [id, v] : k3.iou) good += v >= 0.9;
  c.require(good >= 18, fmt::format("only {}/20 scenes reach IoU 0.9", good));
  c.require(s.k_rows.size() == 3, "k sweep rows");
  const double m1 = s.k_rows.front().median_iou, m3 = s.k_rows.back().median_iou;
  c.require(m3 >= m1, fmt::format("median IoU k=3 {:.4f} < k=1 {:.4f}", m3, m1));
  return c.outcome(fmt::format("{}/20 scenes IoU >= 0.9; median IoU k=1 {:.4f}, k=3 {:.4f}", good, m1, m3));
}

Outcome ablation_structure() {
  Checker c;
  SyntheticSuite& s = suite();
  const auto focus_rows = run_ablation(s.cfg, s.index, Sweep::focus, s.cfg.output);
  const std::vector<std::string> labels = {"single_left", "single_up", "double", "five", "auto"};
  c.require(focus_rows.size() == 5, fmt::format("{} focus rows", focus_rows.size()));
  for (std::size_t i = 0; i < focus_rows.size() && i < labels.size(); ++i) {
    c.require(focus_rows[i].label == labels[i], "focus row order");
    c.require(focus_rows[i].failed == 0 && focus_rows[i].evaluated == 20,
              fmt::format("{}: {} evaluated, {} failed", focus_rows[i].label, focus_rows[i].evaluated,
                          focus_rows[i].failed));
  }
  c.require(s.k_rows.size() == 3, "k sweep rows (run by the convergence criterion)");
  for (std::size_t i = 0; i < s.k_rows.size(); ++i) c.require(s.k_rows[i].label == std::to_string(i + 1), "k row order");
  const std::string columns = "| M↓ | F_β↑ | E_φ↑ | S_α↑ |";
  const std::string fmd = ablation_markdown(focus_rows, Sweep::focus);
  const std::string kmd = ablation_markdown(s.k_rows, Sweep::k);
  c.require(fmd.find("| Focus " + columns) == 0, "focus table header");
  c.require(kmd.find("| k " + columns) == 0, "k table header");
  const auto lines = [](const std::string& t) { return std::count(t.begin(), t.end(), '\n'); };
  c.require(lines(fmd) == 2 + 5 && lines(kmd) == 2 + 3, "table row counts");
  return c.outcome("5 focus rows and 3 k rows with M, F_beta, E_phi, S_alpha columns; all variants ran");
}

Outcome determinism_resilience() {
  Checker c;
  const ScriptedSuite s = scripted_suite("acceptance_det");
  run_config(scripted_config(s, s.root / "seq1", 1, RunMode::sequential));
  run_config(scripted_config(s, s.root / "seq4", 4, RunMode::sequential));
  run_config(scripted_config(s, s.root / "stg4", 4, RunMode::staged));
  const auto ref = tree(s.root / "seq1");
  c.require(tree(s.root / "seq4") == ref, "--jobs 1 vs --jobs 4 outputs differ");
  c.require(tree(s.root / "stg4") == ref, "sequential vs staged outputs differ");

  const json m = json::parse(ref.at("manifest.json"));
  int ok = 0;
  for (const auto& e : m["images"]) {
    const std::string id = e["id"];
    const bool faulty = id == synthetic_id(4);
    const bool mask = fs::is_regular_file(s.root / "seq1" / "masks" / (id + ".png"));
    c.require(e["status"] == (faulty ? "transport_error" : "ok"), id + " status");
    c.require(mask != faulty, id + " mask presence");
    ok += !faulty && mask && e["status"] == "ok";
  }
  c.require(m["images"].size() == 10, "manifest lists 10 images");
  c.require(m["counts"]["ok"] == 9 && m["counts"]["transport_error"] == 1, "manifest counts");
  return c.outcome(fmt::format("10 images byte-identical over 3 schedules; fault on image 5 left {} valid outputs", ok));
}

Outcome fallback_totality() {
  Checker c;
  PipelineConfig cfg;
  cfg.use_depth = false;
  cfg.k = 2;
  const ImageRgb img = make_scene(7, 0, 64).image;
  const auto run = [&](const json& script) {
    const Backends b{std::make_shared<ScriptedVlm>(script_from_json(script)), std::make_shared<BoxFillSegmenter>(),
                     nullptr};
    return run_pipeline("forced", img, std::nullopt, cfg, PromptTemplateSet::defaults(), b);
  };
  const auto yields = [&](const PipelineResult& r, const char* flag, const char* what) {
    c.require(r.mask.rows() == 64 && r.mask.cols() == 64, std::string(what) + ": mask shape");
    c.require(binarize(r.mask).count() > 0, std::string(what) + ": empty mask");
    c.require(r.trace.has_flag(flag), std::string(what) + ": missing flag " + flag);
  };

  json empty_r = lizard_script();
  empty_r["objects"] = {{{"regions", json::array()}, {"structures", json::array()}}};
  yields(run(empty_r), "empty_regions", "empty R");

  json hyp = lizard_script();
  hyp["focus"] = {{{"boxes", json::array()}}};
  hyp["scan"] = {{{"boxes", {{0.5, 0.5, 0.75, 0.9}}}}, {{"boxes", json::array()}}};
  const auto rh = run(hyp);
  yields(rh, "hypothesis_branch", "empty C");
  const auto hc = rh.trace.to_json()["summary"]["candidates"]["boxes"];
  c.require(hc.size() == 1 && hc[0]["provenance"] == "hypothesis", "empty C: candidate from C'");

  json reject = lizard_script();
  reject["verify"] = {{{"valid", false}, {"reason", "background"}}};
  const auto rr = run(reject);
  yields(rr, "fallback_full_image", "verification rejects all");
  const auto rc = rr.trace.to_json()["summary"]["candidates"]["boxes"];
  c.require(rc.size() == 1 && rc[0]["box"].dump() == "[0,0,64,64]", "rejection: full-image box");
  return c.outcome("empty R, empty C with C', all rejected: each yields a mask and a flagged trace");
}

Outcome wire_golden() {
  Checker c;
  const fs::path wire = fs::path(ARGUS_TEST_FIXTURES) / "wire";
  const auto serve = [&](const std::string& response_file) {
    const std::string canned = slurp(wire / response_file);
    return std::make_unique<StubServer>(
        [canned](const httplib::Request&, httplib::Response& res, int) { res.set_content(canned, "application/json"); });
  };

  {
    auto stub = serve("chat_response.json");
    HttpVlm vlm(HttpEndpoint(stub->url("/api/"), "secret-token", fast_policy()), "qwen2.5-vl-7b-instruct");
    const std::string reply = vlm.query(chat_request());
    const auto calls = stub->captured();
    c.require(calls.size() == 1 && calls[0].body == slurp(wire / "chat_request.json"), "chat request bytes");
    c.require(calls.size() == 1 && calls[0].path == "/api/v1/chat/completions", "chat path");
    c.require(reply == R"({"scene": "a moth resting on lichen-covered bark"})", "chat reply decode");
  }
  {
    auto stub = serve("segment_response.json");
    HttpSegmenter seg(HttpEndpoint(stub->url(), "", fast_policy()));
    const SoftMask m = seg.segment(segment_request());
    const auto calls = stub->captured();
    c.require(calls.size() == 1 && calls[0].body == slurp(wire / "segment_request.json"), "segment request bytes");
    bool exact = m.rows() == 10 && m.cols() == 10;
    for (int y = 0; exact && y < 10; ++y)
      for (int x = 0; x < 10; ++x) exact = exact && m(y, x) == ((x * y * 3) % 256) / 255.0;
    c.require(exact, "segment mask decode");
  }
  {
    auto stub = serve("depth_response.json");
    HttpDepth depth(HttpEndpoint(stub->url(), "", fast_policy()));
    const DepthMap d = depth.estimate(depth_image(), "x");
    const auto calls = stub->captured();
    c.require(calls.size() == 1 && calls[0].body == slurp(wire / "depth_request.json"), "depth request bytes");
    bool exact = d.rows() == 4 && d.cols() == 6;
    for (int y = 0; exact && y < 4; ++y)
      for (int x = 0; x < 6; ++x) exact = exact && d(y, x) == (x * 10000 + y * 3000) / 65535.0;
    c.require(exact, "depth map decode");
  }
  return c.outcome("chat, segment and depth bodies byte-identical to fixtures; responses decoded exactly");
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"metric identity suite", 10, metric_identity},
      {"metric oracle equivalence", 60, metric_oracle},
      {"geometry suite", 5, geometry},
      {"oracle convergence", 120, oracle_convergence},
      {"ablation structure", 600, ablation_structure},
      {"determinism and resilience", 600, determinism_resilience},
      {"fallback totality", 60, fallback_totality},
      {"wire-protocol golden tests", 60, wire_golden},
  };

  int failed = 0;
  for (const auto& crit : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = crit.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (o.pass && secs > crit.budget_s) o = {false, fmt::format("took {:.1f}s, budget {:.0f}s", secs, crit.budget_s)};
    failed += !o.pass;
    std::cout << fmt::format("{} {}: {} [{:.2f}s]", o.pass ? "PASS" : "FAIL", crit.name, o.detail, secs) << std::endl;
  }
  std::cout << fmt::format("{}/{} criteria passed", criteria.size() - failed, criteria.size()) << std::endl;
  return failed == 0 ? 0 : 1;
}
