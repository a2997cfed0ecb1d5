#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "arbitrage/errors.hpp"

namespace arbitrage::http {

struct HttpOptions {
  int max_attempts = 3;
  int backoff_initial_ms = 250;  // doubles per retry; set 0 in tests
  int timeout_seconds = 60;
};

// Fills `{name}` placeholders in a JSON body template. Values are escaped as
// JSON string content, so templates can place them inside quoted strings.
// Unknown placeholder names are an error; literal braces not matching
// `{lower_snake}` pass through untouched.
[[nodiscard]] inline std::string render_template(
    std::string_view tmpl, const std::map<std::string, std::string>& values) {
  auto escape = [](const std::string& raw) {
    const std::string quoted = nlohmann::json(raw).dump();
    return quoted.substr(1, quoted.size() - 2);
  };
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      std::size_t j = i + 1;
      while (j < tmpl.size() &&
             ((tmpl[j] >= 'a' && tmpl[j] <= 'z') || tmpl[j] == '_')) {
        ++j;
      }
      if (j > i + 1 && j < tmpl.size() && tmpl[j] == '}') {
        const std::string name(tmpl.substr(i + 1, j - i - 1));
        const auto it = values.find(name);
        if (it == values.end()) {
          throw ConfigError("unknown template placeholder {" + name + "}");
        }
        out += escape(it->second);
        i = j + 1;
        continue;
      }
    }
    out.push_back(tmpl[i]);
    ++i;
  }
  return out;
}

// Walks a dotted path into a JSON document; decimal segments index arrays
// ("choices.0.text"). Returns nullopt when any step is missing.
[[nodiscard]] inline std::optional<nlohmann::json> extract_path(
    const nlohmann::json& doc, std::string_view path) {
  const nlohmann::json* cur = &doc;
  std::size_t pos = 0;
  while (pos <= path.size()) {
    const std::size_t dot = path.find('.', pos);
    const std::string_view seg =
        path.substr(pos, dot == std::string_view::npos ? path.size() - pos : dot - pos);
    if (seg.empty()) return std::nullopt;
    bool numeric = true;
    for (char c : seg) {
      if (c < '0' || c > '9') {
        numeric = false;
        break;
      }
    }
    if (numeric && cur->is_array()) {
      const std::size_t idx = std::stoul(std::string(seg));
      if (idx >= cur->size()) return std::nullopt;
      cur = &(*cur)[idx];
    } else if (cur->is_object()) {
      const auto it = cur->find(std::string(seg));
      if (it == cur->end()) return std::nullopt;
      cur = &*it;
    } else {
      return std::nullopt;
    }
    if (dot == std::string_view::npos) break;
    pos = dot + 1;
  }
  return *cur;
}

struct PostResult {
  bool ok = false;
  nlohmann::json body;
  std::string error;
};

// Splits "http://host:port/some/path" into client base and request path.
inline void split_url(const std::string& url, std::string& base, std::string& path) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("endpoint URL missing scheme: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    base = url;
    path = "/";
  } else {
    base = url.substr(0, path_start);
    path = url.substr(path_start);
  }
}

// POSTs a JSON body. Transport errors and 5xx responses are retried with
// exponential backoff; other non-2xx statuses fail immediately.
[[nodiscard]] inline PostResult post_json(const std::string& url,
                                          const std::string& body,
                                          const HttpOptions& opt = {}) {
  std::string base, path;
  split_url(url, base, path);
  httplib::Client client(base);
  client.set_connection_timeout(opt.timeout_seconds, 0);
  client.set_read_timeout(opt.timeout_seconds, 0);
  client.set_write_timeout(opt.timeout_seconds, 0);

  PostResult out;
  int delay_ms = opt.backoff_initial_ms;
  for (int attempt = 1; attempt <= opt.max_attempts; ++attempt) {
    auto res = client.Post(path, body, "application/json");
    if (res && res->status >= 200 && res->status < 300) {
      try {
        out.body = nlohmann::json::parse(res->body);
        out.ok = true;
        return out;
      } catch (const nlohmann::json::parse_error& e) {
        out.error = "non-JSON response body: " + std::string(e.what());
        return out;
      }
    }
    if (res && res->status < 500) {
      out.error = "HTTP status " + std::to_string(res->status);
      return out;
    }
    out.error = res ? "HTTP status " + std::to_string(res->status)
                    : "transport error: " + httplib::to_string(res.error());
    if (attempt < opt.max_attempts && delay_ms > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
      delay_ms *= 2;
    }
  }
  return out;
}

}  // namespace arbitrage::http
