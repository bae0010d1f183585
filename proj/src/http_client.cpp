#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "http_client.hpp"

#include "hyst/error.hpp"

#include <cstdlib>
#include <thread>

namespace hyst::detail {

namespace {

struct Endpoint {
    std::string origin;  // scheme://host[:port]
    std::string prefix;  // path below the origin, no trailing slash
};

Endpoint split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("endpoint URL needs a scheme: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    Endpoint ep;
    ep.origin = url.substr(0, path_start);
    if (path_start != std::string::npos) ep.prefix = url.substr(path_start);
    while (!ep.prefix.empty() && ep.prefix.back() == '/') ep.prefix.pop_back();
    return ep;
}

}  // namespace

nlohmann::json post_json(const std::string& base_url, const std::string& path, const nlohmann::json& body,
                         const std::string& api_key_env, const RetryPolicy& policy) {
    auto ep = split_url(base_url);
    httplib::Headers headers;
    if (!api_key_env.empty()) {
        const char* key = std::getenv(api_key_env.c_str());
        if (!key || !*key) throw AuthError("credential environment variable " + api_key_env + " is not set");
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    httplib::Client client(ep.origin);
    client.set_connection_timeout(policy.timeout);
    client.set_read_timeout(policy.timeout);
    client.set_write_timeout(policy.timeout);

    const auto payload = body.dump();
    const auto target = ep.prefix + path;
    std::string last_error;
    auto backoff = policy.initial_backoff;
    for (int attempt = 1; attempt <= policy.max_attempts; ++attempt) {
        auto res = client.Post(target, headers, payload, "application/json");
        if (res) {
            if (res->status == 401 || res->status == 403) {
                throw AuthError("authentication failed (" + std::to_string(res->status) + ") at " + base_url);
            }
            if (res->status >= 200 && res->status < 300) {
                try {
                    return nlohmann::json::parse(res->body);
                } catch (const nlohmann::json::parse_error& e) {
                    throw TransportError(std::string("malformed response body: ") + e.what());
                }
            }
            last_error = "HTTP " + std::to_string(res->status);
            if (res->status != 429 && res->status < 500) {
                throw TransportError(last_error + " from " + base_url + target + ": " + res->body);
            }
        } else {
            last_error = httplib::to_string(res.error());
        }
        if (attempt < policy.max_attempts) {
            std::this_thread::sleep_for(backoff);
            backoff = std::min(backoff * 2, policy.max_backoff);
        }
    }
    throw TransportError("giving up after " + std::to_string(policy.max_attempts) + " attempts: " + last_error);
}

}  // namespace hyst::detail
