#pragma once

#include <chrono>
#include <functional>
#include <string>
#include <vector>

#include "argus/backends/backend.hpp"

namespace argus {

struct RetryPolicy {
  std::vector<std::chrono::milliseconds> backoff{std::chrono::milliseconds(500), std::chrono::milliseconds(2000)};
  std::chrono::seconds timeout{120};
  std::function<void(std::chrono::milliseconds)> sleep;  // defaults to std::this_thread::sleep_for

  int retries() const { return static_cast<int>(backoff.size()); }
};

// One base URL (scheme://host[:port][/prefix]) plus auth and retry settings.
// A fresh connection is opened per request, so an endpoint is safe to share
// across worker threads.
class HttpEndpoint {
public:
  explicit HttpEndpoint(std::string base_url, std::string bearer_token = {}, RetryPolicy policy = {});

  // POSTs body as application/json to prefix + route; returns the 2xx body.
  // Transport errors, 429 and 5xx are retried; other statuses throw at once.
  std::string post_json(const std::string& route, const std::string& body) const;

  // True when something answers HTTP at the base URL (any status).
  bool reachable(std::chrono::seconds timeout = std::chrono::seconds(5)) const;

  const std::string& base_url() const { return base_url_; }

private:
  std::string base_url_;
  std::string origin_;  // scheme://host:port
  std::string prefix_;  // path prefix without trailing slash
  std::string token_;
  RetryPolicy policy_;
};

// Wire bodies, exposed for golden tests.
std::string chat_completion_body(const VlmRequest& req, const std::string& model);
std::string parse_chat_completion(const std::string& body);
std::string segment_body(const SegmentRequest& req);
SoftMask parse_segment_response(const std::string& body, int width, int height);
std::string depth_body(const ImageRgb& img);
DepthMap parse_depth_response(const std::string& body, int width, int height);

class HttpVlm final : public VisionLanguageModel {
public:
  HttpVlm(HttpEndpoint endpoint, std::string model);
  std::string query(const VlmRequest& req) override;
  BackendId id() const override;
  const HttpEndpoint& endpoint() const { return endpoint_; }

private:
  HttpEndpoint endpoint_;
  std::string model_;
};

class HttpSegmenter final : public Segmenter {
public:
  explicit HttpSegmenter(HttpEndpoint endpoint);
  SoftMask segment(const SegmentRequest& req) override;
  BackendId id() const override;
  const HttpEndpoint& endpoint() const { return endpoint_; }

private:
  HttpEndpoint endpoint_;
};

class HttpDepth final : public DepthEstimator {
public:
  explicit HttpDepth(HttpEndpoint endpoint);
  DepthMap estimate(const ImageRgb& img, std::string_view image_id) override;
  BackendId id() const override;
  const HttpEndpoint& endpoint() const { return endpoint_; }

private:
  HttpEndpoint endpoint_;
};

}  // namespace argus
