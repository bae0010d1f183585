#pragma once

#include <chrono>
#include <string>

#include "json.hpp"

namespace hyst::detail {

struct RetryPolicy {
    int max_attempts = 3;
    std::chrono::milliseconds initial_backoff{500};
    std::chrono::milliseconds max_backoff{4000};
    std::chrono::seconds timeout{60};
};

// POSTs a JSON body to base_url + path. The bearer token is read from api_key_env
// (skipped when the name is empty). Network errors, 429 and 5xx are retried with capped
// exponential backoff; 401/403 throw AuthError immediately.
nlohmann::json post_json(const std::string& base_url, const std::string& path, const nlohmann::json& body,
                         const std::string& api_key_env, const RetryPolicy& policy);

}  // namespace hyst::detail
