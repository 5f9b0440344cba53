// Copyright 2026 The BlackSpectrum Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <nlohmann/json.hpp>
#include <string>

namespace blackspectrum::detail {

struct RetryPolicy {
  int max_attempts = 4;
  int base_delay_ms = 200;
};

// POSTs a JSON body and returns the parsed JSON response. Transport
// failures, 429 and 5xx are retried with exponential backoff plus jitter;
// any other non-2xx status raises ApiError immediately. When attempts run
// out the last failure is rethrown as RateLimited (for 429) or ApiError.
// auth_env names an environment variable holding a bearer token; only the
// variable name may appear in error messages.
nlohmann::json post_json(const std::string& url, const nlohmann::json& body,
                         const std::string& auth_env, int timeout_ms,
                         const RetryPolicy& retry);

}  // namespace blackspectrum::detail
