#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <string>

#include "httplib.h"
#include "json.hpp"
#include "mimic/core/file_io.hpp"
#include "mimic/llm/prompt.hpp"

namespace mimic {

/// Transport-level failure (connection, timeout, non-2xx status).
class NetworkError : public Error {
 public:
  using Error::Error;
};

/// Sends one request and returns the model's raw text answer.
using VlmTransport = std::function<std::string(const VlmRequest&)>;

struct ParsedUrl {
  std::string origin;  ///< scheme://host[:port]
  std::string path;
};

inline ParsedUrl split_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw InvalidArgument("endpoint URL needs a scheme: '" + url + "'");
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

/// JSON-over-HTTP adapter. The request body is
/// `{"model", "prompt", "images": [{"name", "data_base64"}]}`; the response
/// body must carry the answer in `text` (or `choices[0].message.content`).
/// Image references that exist on disk relative to `image_root` are
/// attached as base64; others are sent by name only.
inline VlmTransport http_transport(std::filesystem::path image_root = {}, std::optional<std::string> api_key = {}) {
  return [image_root = std::move(image_root), api_key = std::move(api_key)](const VlmRequest& req) -> std::string {
    const auto url = split_url(req.endpoint);
    httplib::Client cli(url.origin);
    const auto timeout = std::chrono::duration<double>(req.timeout_seconds);
    cli.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    cli.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    cli.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));

    nlohmann::json images = nlohmann::json::array();
    for (const auto& ref : req.image_refs) {
      nlohmann::json img{{"name", ref}};
      const std::filesystem::path p = std::filesystem::path(ref).is_absolute() ? std::filesystem::path(ref) : image_root / ref;
      std::error_code ec;
      if (!image_root.empty() && std::filesystem::is_regular_file(p, ec))
        img["data_base64"] = httplib::detail::base64_encode(read_file(p));
      images.push_back(std::move(img));
    }
    const nlohmann::json body{{"model", req.model_name}, {"prompt", req.prompt_text}, {"images", images}};
    httplib::Headers headers;
    if (api_key) headers.emplace("Authorization", "Bearer " + *api_key);

    const auto res = cli.Post(url.path, headers, body.dump(), "application/json");
    if (!res) throw NetworkError("request to " + req.endpoint + " failed: " + httplib::to_string(res.error()));
    if (res->status < 200 || res->status >= 300)
      throw NetworkError("request to " + req.endpoint + " returned HTTP " + std::to_string(res->status));
    try {
      const auto j = nlohmann::json::parse(res->body);
      if (j.contains("text")) return j.at("text").get<std::string>();
      return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw NetworkError("malformed response body from " + req.endpoint + ": " + e.what());
    }
  };
}

}  // namespace mimic
