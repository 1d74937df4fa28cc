#include "argus/backends/http.hpp"

#include <regex>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "argus/codec.hpp"

namespace argus {
namespace {

using ordered_json = nlohmann::ordered_json;

std::string excerpt(const std::string& body, std::size_t limit = 200) {
  if (body.size() <= limit) return body;
  return body.substr(0, limit) + "...";
}

nlohmann::json parse_reply(const std::string& body, const char* what) {
  try {
    return nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(fmt::format("{} reply is not JSON: {}", what, excerpt(body)));
  }
}

std::string reply_string(const nlohmann::json& j, const char* key, const char* what) {
  if (!j.is_object() || !j.contains(key) || !j[key].is_string())
    throw ProtocolError(fmt::format("{} reply lacks string field '{}'", what, key));
  return j[key].get<std::string>();
}

ordered_json temperature_value(double t) {
  // integral temperatures go out as JSON integers ("temperature": 0)
  if (t == static_cast<double>(static_cast<long long>(t))) return static_cast<long long>(t);
  return t;
}

std::string png_data_url(const VlmImage& im) {
  const Bytes png = std::visit(
      [](const auto& content) -> Bytes {
        using T = std::decay_t<decltype(content)>;
        if constexpr (std::is_same_v<T, ImageRgb>)
          return encode_png_rgb(content);
        else
          return encode_depth_preview_png(content);
      },
      im.content);
  return "data:image/png;base64," + base64_encode(png);
}

ordered_json box_json(const BBox& b) { return ordered_json::array({b.x0, b.y0, b.x1, b.y1}); }

ordered_json points_json(const std::vector<Eigen::Vector2d>& pts) {
  ordered_json arr = ordered_json::array();
  for (const auto& p : pts) arr.push_back(ordered_json::array({p.x(), p.y()}));
  return arr;
}

}  // namespace

HttpEndpoint::HttpEndpoint(std::string base_url, std::string bearer_token, RetryPolicy policy)
    : base_url_(std::move(base_url)), token_(std::move(bearer_token)), policy_(std::move(policy)) {
  static const std::regex url_re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(base_url_, m, url_re)) throw ConfigError("invalid backend URL: '" + base_url_ + "'");
  origin_ = m[1].str();
  prefix_ = m[2].str();
  while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
  if (!policy_.sleep) policy_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

std::string HttpEndpoint::post_json(const std::string& route, const std::string& body) const {
  const std::string path = prefix_ + route;
  std::string last_failure;
  for (int attempt = 0; attempt <= policy_.retries(); ++attempt) {
    if (attempt > 0) policy_.sleep(policy_.backoff[attempt - 1]);
    httplib::Client client(origin_);
    client.set_connection_timeout(policy_.timeout);
    client.set_read_timeout(policy_.timeout);
    client.set_write_timeout(policy_.timeout);
    if (!token_.empty()) client.set_bearer_token_auth(token_);
    // body is passed by const reference and never rebuilt, so retries resend identical bytes
    const auto res = client.Post(path, body, "application/json");
    if (!res) {
      last_failure = fmt::format("{}{}: {}", origin_, path, httplib::to_string(res.error()));
      continue;
    }
    if (res->status >= 200 && res->status < 300) return res->body;
    last_failure = fmt::format("{}{} returned HTTP {}: {}", origin_, path, res->status, excerpt(res->body));
    if (res->status != 429 && res->status < 500) throw TransportError(last_failure);
  }
  throw TransportError(fmt::format("{} (after {} retries)", last_failure, policy_.retries()));
}

bool HttpEndpoint::reachable(std::chrono::seconds timeout) const {
  httplib::Client client(origin_);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  return static_cast<bool>(client.Get(prefix_.empty() ? "/" : prefix_));
}

std::string chat_completion_body(const VlmRequest& req, const std::string& model) {
  ordered_json content = ordered_json::array();
  content.push_back({{"type", "text"}, {"text", req.text}});
  for (const auto& im : req.images)
    content.push_back({{"type", "image_url"}, {"image_url", {{"url", png_data_url(im)}}}});
  ordered_json body;
  body["model"] = model;
  body["temperature"] = temperature_value(req.decode.temperature);
  if (req.decode.max_tokens > 0) body["max_tokens"] = req.decode.max_tokens;
  body["messages"] = ordered_json::array({{{"role", "user"}, {"content", content}}});
  return body.dump();
}

std::string parse_chat_completion(const std::string& body) {
  const auto j = parse_reply(body, "chat completion");
  try {
    const auto& content = j.at("choices").at(0).at("message").at("content");
    if (content.is_string()) return content.get<std::string>();
    if (content.is_array()) {
      std::string text;
      for (const auto& part : content)
        if (part.value("type", "") == "text") text += part.value("text", "");
      return text;
    }
  } catch (const nlohmann::json::exception&) {
  }
  throw ProtocolError("chat completion reply lacks choices[0].message.content: " + excerpt(body));
}

std::string segment_body(const SegmentRequest& req) {
  ordered_json body;
  body["image_png_b64"] = base64_encode(encode_png_rgb(req.image));
  if (req.depth) body["depth_png_b64"] = base64_encode(encode_depth_png(*req.depth));
  if (!req.boxes.empty()) {
    ordered_json boxes = ordered_json::array();
    for (const auto& b : req.boxes) boxes.push_back(box_json(b));
    body["boxes"] = boxes;
  }
  if (req.points) {
    ordered_json pts;
    pts["positive"] = points_json(req.points->positive);
    pts["negative"] = points_json(req.points->negative);
    body["points"] = pts;
  }
  return body.dump();
}

SoftMask parse_segment_response(const std::string& body, int width, int height) {
  const auto j = parse_reply(body, "segment");
  SoftMask mask;
  try {
    mask = decode_mask_png(base64_decode(reply_string(j, "mask_png_b64", "segment")));
  } catch (const CodecError& e) {
    throw ProtocolError(std::string("segment reply mask does not decode: ") + e.what());
  }
  if (mask.cols() != width || mask.rows() != height)
    throw ProtocolError(fmt::format("segmenter returned a {}x{} mask for a {}x{} image", mask.cols(), mask.rows(),
                                    width, height));
  return mask;
}

std::string depth_body(const ImageRgb& img) {
  ordered_json body;
  body["image_png_b64"] = base64_encode(encode_png_rgb(img));
  return body.dump();
}

DepthMap parse_depth_response(const std::string& body, int width, int height) {
  const auto j = parse_reply(body, "depth");
  DepthMap depth;
  try {
    depth = decode_depth_png(base64_decode(reply_string(j, "depth_png16_b64", "depth")));
  } catch (const CodecError& e) {
    throw ProtocolError(std::string("depth reply does not decode: ") + e.what());
  }
  if (depth.cols() != width || depth.rows() != height)
    throw ProtocolError(fmt::format("depth service returned {}x{} for a {}x{} image", depth.cols(), depth.rows(),
                                    width, height));
  return depth;
}

HttpVlm::HttpVlm(HttpEndpoint endpoint, std::string model) : endpoint_(std::move(endpoint)), model_(std::move(model)) {}

std::string HttpVlm::query(const VlmRequest& req) {
  validate(req);
  return parse_chat_completion(endpoint_.post_json("/v1/chat/completions", chat_completion_body(req, model_)));
}

BackendId HttpVlm::id() const { return {"http", endpoint_.base_url() + "#" + model_}; }

HttpSegmenter::HttpSegmenter(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {}

SoftMask HttpSegmenter::segment(const SegmentRequest& req) {
  validate(req);
  return parse_segment_response(endpoint_.post_json("/v1/segment", segment_body(req)), req.image.width,
                                req.image.height);
}

BackendId HttpSegmenter::id() const { return {"http", endpoint_.base_url()}; }

HttpDepth::HttpDepth(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {}

DepthMap HttpDepth::estimate(const ImageRgb& img, std::string_view) {
  return parse_depth_response(endpoint_.post_json("/v1/depth", depth_body(img)), img.width, img.height);
}

BackendId HttpDepth::id() const { return {"http", endpoint_.base_url()}; }

}  // namespace argus
