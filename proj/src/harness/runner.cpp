#include "argus/harness/runner.hpp"

#include <atomic>
#include <fstream>
#include <thread>

#include <fmt/format.h>

#include "argus/backends/http.hpp"
#include "argus/backends/local.hpp"
#include "argus/codec.hpp"
#include "argus/pipeline/pipeline.hpp"

namespace argus {
namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw ConfigError("cannot read " + p.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(fmt::format("{} is not valid JSON: {}", p.string(), e.what()));
  }
}

void write_atomic(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  write_text(tmp, text);
  fs::rename(tmp, path);
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

}  // namespace

BackendFactory::BackendFactory(const RunConfig& cfg) : cfg_(cfg) {
  if (cfg_.vlm.kind == "http") {
    http_vlm_ = std::make_shared<HttpVlm>(HttpEndpoint(cfg_.vlm.url, cfg_.api_key), cfg_.vlm.model);
  } else if (cfg_.vlm.kind == "scripted") {
    if (fs::is_regular_file(cfg_.vlm.fixture))
      script_ = script_from_json(read_json(cfg_.vlm.fixture));
    else if (!fs::is_directory(cfg_.vlm.fixture))
      throw ConfigError("scripted fixture not found: " + cfg_.vlm.fixture.string());
  }

  if (cfg_.segmenter.kind == "http")
    shared_seg_ = std::make_shared<HttpSegmenter>(HttpEndpoint(cfg_.segmenter.url, cfg_.api_key));
  else if (cfg_.segmenter.kind == "box_fill")
    shared_seg_ = std::make_shared<BoxFillSegmenter>();

  if (cfg_.pipeline.use_depth) {
    if (cfg_.depth.kind == "http")
      shared_depth_ = std::make_shared<HttpDepth>(HttpEndpoint(cfg_.depth.url, cfg_.api_key));
    else if (cfg_.depth.kind == "files")
      shared_depth_ = std::make_shared<FileDepth>(cfg_.depth.root.empty() ? cfg_.dataset / "depth" : cfg_.depth.root);
  }
}

void BackendFactory::probe(std::chrono::seconds timeout) const {
  const auto check = [&](const char* role, const HttpEndpoint& ep) {
    if (!ep.reachable(timeout))
      throw BackendUnreachable(fmt::format("{} backend at {} is unreachable", role, ep.base_url()));
  };
  if (auto* v = dynamic_cast<HttpVlm*>(http_vlm_.get())) check("vlm", v->endpoint());
  if (auto* s = dynamic_cast<HttpSegmenter*>(shared_seg_.get())) check("segmenter", s->endpoint());
  if (auto* d = dynamic_cast<HttpDepth*>(shared_depth_.get())) check("depth", d->endpoint());
}

Script BackendFactory::script_for(const std::string& id) const {
  if (script_) return *script_;
  for (const fs::path& p : {cfg_.vlm.fixture / (id + ".json"), cfg_.vlm.fixture / "default.json"})
    if (fs::is_regular_file(p)) return script_from_json(read_json(p));
  throw ConfigError(fmt::format("no scripted fixture for image '{}' in {}", id, cfg_.vlm.fixture.string()));
}

Backends BackendFactory::for_image(const DatasetEntry& entry) const {
  Backends b;
  std::optional<BinMask> gt;
  const auto truth = [&]() -> const BinMask& {
    if (!gt) gt = load_gt(entry);
    return *gt;
  };
  if (cfg_.vlm.kind == "http")
    b.vlm = http_vlm_;
  else if (cfg_.vlm.kind == "scripted")
    b.vlm = std::make_shared<ScriptedVlm>(script_for(entry.id), cfg_.vlm.fixture.string());
  else
    b.vlm = std::make_shared<OracleVlm>(truth());

  b.segmenter = cfg_.segmenter.kind == "gt_intersect" ? std::make_shared<GtIntersectSegmenter>(truth()) : shared_seg_;
  b.depth = shared_depth_;
  return b;
}

ojson BackendFactory::ids() const {
  const auto fmt_spec = [](const BackendSpec& s, const std::string& descriptor) { return s.kind + ":" + descriptor; };
  ojson j;
  if (cfg_.vlm.kind == "http")
    j["vlm"] = http_vlm_->id().str();
  else
    j["vlm"] = fmt_spec(cfg_.vlm, cfg_.vlm.kind == "scripted" ? cfg_.vlm.fixture.filename().string() : "gt");
  j["segmenter"] = shared_seg_ ? shared_seg_->id().str() : fmt_spec(cfg_.segmenter, "gt");
  j["depth"] = shared_depth_ ? ojson(shared_depth_->id().str()) : ojson(nullptr);
  return j;
}

std::string_view to_string(ImageStatus s) {
  switch (s) {
    case ImageStatus::ok: return "ok";
    case ImageStatus::transport_error: return "transport_error";
    case ImageStatus::protocol_error: return "protocol_error";
    case ImageStatus::skipped: return "skipped";
  }
  return "unknown";
}

std::size_t BatchResult::ok() const {
  return static_cast<std::size_t>(
      std::count_if(images.begin(), images.end(), [](const ImageOutcome& o) { return o.status == ImageStatus::ok; }));
}

std::string config_digest(const RunConfig& cfg, const PromptTemplateSet& prompts, const ojson& ids) {
  const ojson j = {{"pipeline", to_json(cfg.pipeline)}, {"prompts", prompts.to_json()}, {"backends", ids}};
  const std::string text = j.dump();
  return sha256_hex({reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

PromptTemplateSet load_prompts(const RunConfig& cfg) {
  return cfg.prompts ? PromptTemplateSet::load(*cfg.prompts) : PromptTemplateSet::defaults();
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  for (auto& t : pool) t.join();
}

BatchResult run_batch(const RunConfig& cfg, const DatasetIndex& index, const PromptTemplateSet& prompts,
                      const BackendFactory& factory, const fs::path& out) {
  const auto t_start = Clock::now();
  fs::create_directories(out / "masks");
  fs::create_directories(out / "trace");
  const auto& entries = index.entries;
  const std::size_t n = entries.size();

  std::vector<ImageOutcome> outcomes(n);
  std::vector<std::unique_ptr<ImageRun>> runs(n);
  for (std::size_t i = 0; i < n; ++i) outcomes[i].id = entries[i].id;

  const auto mask_path = [&](std::size_t i) { return out / "masks" / (entries[i].id + ".png"); };
  const auto trace_path = [&](std::size_t i) { return out / "trace" / (entries[i].id + ".json"); };

  const auto fail = [&](std::size_t i, ImageStatus status, const std::string& msg) {
    outcomes[i].status = status;
    outcomes[i].error = msg;
    runs[i].reset();
    fs::remove(mask_path(i));  // never leave a stale result from an earlier run
    fs::remove(trace_path(i));
  };

  using Step = std::function<void(std::size_t)>;
  const std::vector<std::pair<std::string, Step>> steps = {
      {"prepare",
       [&](std::size_t i) {
         runs[i] = std::make_unique<ImageRun>(entries[i].id, load_image(entries[i]), std::nullopt, cfg.pipeline,
                                              prompts, factory.for_image(entries[i]));
         runs[i]->prepare();
       }},
      {"conjecture", [&](std::size_t i) { runs[i]->conjecture(); }},
      {"focus", [&](std::size_t i) { runs[i]->focus(); }},
      {"sculpt", [&](std::size_t i) { runs[i]->sculpt(); }},
      {"finish",
       [&](std::size_t i) {
         const PipelineResult r = runs[i]->finish();
         runs[i].reset();
         write_file(mask_path(i), encode_mask_png(r.mask));
         write_text(trace_path(i), r.trace.dump());
         outcomes[i].flags = r.trace.flags();
         outcomes[i].status = ImageStatus::ok;
       }},
  };

  // Runs one step for image i unless it already failed.
  const auto guarded = [&](std::size_t i, std::size_t s) {
    if (s > 0 && !runs[i]) return;
    const auto t0 = Clock::now();
    try {
      steps[s].second(i);
    } catch (const TransportError& e) {
      fail(i, ImageStatus::transport_error, e.what());
    } catch (const ProtocolError& e) {
      fail(i, ImageStatus::protocol_error, e.what());
    } catch (const std::exception& e) {
      fail(i, ImageStatus::skipped, e.what());
    }
    outcomes[i].seconds[steps[s].first] = seconds_since(t0);
  };

  if (cfg.mode == RunMode::sequential) {
    parallel_for(n, cfg.jobs, [&](std::size_t i) {
      for (std::size_t s = 0; s < steps.size(); ++s) guarded(i, s);
    });
  } else {
    for (std::size_t s = 0; s < steps.size(); ++s) parallel_for(n, cfg.jobs, [&](std::size_t i) { guarded(i, s); });
  }

  BatchResult result;
  const ojson ids = factory.ids();
  ojson images = ojson::array();
  std::map<std::string, int> counts = {{"ok", 0}, {"transport_error", 0}, {"protocol_error", 0}, {"skipped", 0}};
  ojson timings = ojson::object();
  for (const auto& o : outcomes) {
    ojson e = {{"id", o.id}, {"status", std::string(to_string(o.status))}};
    if (o.status == ImageStatus::ok) {
      e["mask"] = "masks/" + o.id + ".png";
      e["trace"] = "trace/" + o.id + ".json";
      e["flags"] = o.flags;
    } else {
      e["error"] = o.error;
    }
    images.push_back(std::move(e));
    ++counts[std::string(to_string(o.status))];
    timings[o.id] = o.seconds;
  }
  ojson warnings = index.warnings;
  result.manifest = {{"config_digest", config_digest(cfg, prompts, ids)},
                     {"backends", ids},
                     {"use_depth", cfg.pipeline.use_depth ? "on" : "off"},
                     {"pipeline", to_json(cfg.pipeline)},
                     {"dataset", {{"entries", n}, {"warnings", warnings}}},
                     {"counts", counts},
                     {"images", images}};
  write_atomic(out / "manifest.json", result.manifest.dump(2) + "\n");
  const ojson timing_doc = {{"mode", std::string(to_string(cfg.mode))},
                            {"jobs", cfg.jobs},
                            {"total_seconds", seconds_since(t_start)},
                            {"images", timings}};
  write_atomic(out / "timings.json", timing_doc.dump(2) + "\n");
  result.images = std::move(outcomes);
  return result;
}

}  // namespace argus
