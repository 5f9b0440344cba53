// Copyright 2026 The BlackSpectrum Authors
// SPDX-License-Identifier: Apache-2.0

#include "http_util.hpp"

#include <httplib.h>

#include <chrono>
#include <cstdlib>
#include <random>
#include <thread>

#include "blackspectrum/errors.hpp"

namespace blackspectrum::detail {

using nlohmann::json;

namespace {

struct SplitUrl {
  std::string base;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("endpoint must include a scheme: " + url);
  }
  size_t path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

int jitter_ms(int base) {
  thread_local std::mt19937_64 gen{std::random_device{}()};
  return static_cast<int>(gen() % static_cast<uint64_t>(std::max(base, 1)));
}

}  // namespace

json post_json(const std::string& url, const json& body, const std::string& auth_env,
               int timeout_ms, const RetryPolicy& retry) {
  SplitUrl target = split_url(url);

  httplib::Headers headers{{"Accept", "application/json"}};
  if (!auth_env.empty()) {
    const char* token = std::getenv(auth_env.c_str());
    if (token == nullptr || *token == '\0') {
      throw ConfigError("auth environment variable '" + auth_env + "' is not set");
    }
    headers.emplace("Authorization", std::string("Bearer ") + token);
  }

  std::string payload = body.dump();
  int attempts = std::max(retry.max_attempts, 1);
  int last_status = 0;
  std::string last_detail;

  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) {
      int delay = retry.base_delay_ms * (1 << (attempt - 1));
      delay = std::min(delay, 4000) + jitter_ms(retry.base_delay_ms);
      std::this_thread::sleep_for(std::chrono::milliseconds(delay));
    }

    httplib::Client client(target.base);
    client.set_connection_timeout(0, timeout_ms * 1000);
    client.set_read_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);
    client.set_write_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);

    auto res = client.Post(target.path, headers, payload, "application/json");
    if (!res) {
      last_status = 0;
      last_detail = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || (res->status >= 500 && res->status <= 599)) {
      last_status = res->status;
      last_detail = "server returned " + std::to_string(res->status);
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      throw ApiError(res->status, "request to " + url + " failed");
    }
    try {
      return json::parse(res->body);
    } catch (const json::parse_error& e) {
      throw ApiError(res->status, std::string("response is not valid JSON: ") + e.what());
    }
  }

  if (last_status == 429) {
    throw RateLimited("rate limited after " + std::to_string(attempts) + " attempts: " + url);
  }
  throw ApiError(last_status, "request to " + url + " failed after " +
                                  std::to_string(attempts) + " attempts (" + last_detail + ")");
}

}  // namespace blackspectrum::detail
