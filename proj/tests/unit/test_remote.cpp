#include "doctest.h"
#include "httplib.h"
#include "json.hpp"

#include "hyst/dense.hpp"
#include "hyst/error.hpp"
#include "hyst/planner.hpp"
#include "hyst/text.hpp"

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <thread>

using namespace hyst;
using nlohmann::json;

namespace {

// Local stand-in for an OpenAI-style service.
class FakeService {
public:
    using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

    explicit FakeService(Handler handler) : handler_(std::move(handler)) {
        auto wrap = [this](const httplib::Request& req, httplib::Response& res) {
            ++hits;
            last_auth = req.get_header_value("Authorization");
            last_body = req.body;
            handler_(req, res);
        };
        server_.Post("/v1/embeddings", wrap);
        server_.Post("/v1/chat/completions", wrap);
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~FakeService() {
        server_.stop();
        thread_.join();
    }

    std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

    std::atomic<int> hits{0};
    std::string last_auth;
    std::string last_body;

private:
    Handler handler_;
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

json embedding_response(std::size_t n, std::size_t dim) {
    json data = json::array();
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> v(dim, 0.0);
        v[i % dim] = 1.0;
        data.push_back({{"index", i}, {"embedding", v}});
    }
    return {{"data", data}};
}

RemoteEmbedderConfig config_for(const FakeService& svc, std::size_t dim) {
    RemoteEmbedderConfig c;
    c.base_url = svc.base_url();
    c.model = "test-embed";
    c.api_key_env = "HYST_TEST_KEY";
    c.dimension = dim;
    c.initial_backoff = std::chrono::milliseconds(1);
    c.max_backoff = std::chrono::milliseconds(2);
    c.timeout = std::chrono::seconds(5);
    return c;
}

struct KeyGuard {
    explicit KeyGuard(const char* value) {
        if (value) {
            setenv("HYST_TEST_KEY", value, 1);
        } else {
            unsetenv("HYST_TEST_KEY");
        }
    }
    ~KeyGuard() { unsetenv("HYST_TEST_KEY"); }
};

const std::vector<std::string> kThree = {"alpha", "beta", "gamma"};

}  // namespace

TEST_CASE("recorded response plays back exactly") {
    const auto recorded = read_file(std::string(HYST_FIXTURES) + "/embeddings_recorded.json");
    FakeService svc([&](const httplib::Request&, httplib::Response& res) { res.set_content(recorded, "application/json"); });
    KeyGuard key("sk-test");
    auto vectors = embed_remote(kThree, config_for(svc, 4));
    REQUIRE(vectors.size() == 3);
    CHECK(vectors[0] == Vector{0.125, -0.5, 0.25, 1.0});
    CHECK(vectors[1] == Vector{3.0, 2.0, 1.0, 0.5});
    CHECK(vectors[2] == Vector{0.0, 0.0, -1.0, 0.75});
    CHECK(svc.last_auth == "Bearer sk-test");
    auto body = json::parse(svc.last_body);
    CHECK(body["model"] == "test-embed");
    CHECK(body["input"] == json(kThree));
}

TEST_CASE("dimension checks") {
    std::size_t served_dim = 1536;
    FakeService svc([&](const httplib::Request& req, httplib::Response& res) {
        auto n = json::parse(req.body)["input"].size();
        res.set_content(embedding_response(n, served_dim).dump(), "application/json");
    });
    KeyGuard key("k");
    RemoteEmbedder embedder(config_for(svc, 1536));
    VectorStore store(1536);
    auto v = embedder.embed_one("shoes");
    CHECK_NOTHROW(store.add("a", {}, v));

    served_dim = 512;
    CHECK_THROWS_AS(embedder.embed_one("shoes"), DimensionMismatch);
    RemoteEmbedder small(config_for(svc, 512));
    auto w = small.embed_one("shoes");
    CHECK_THROWS_AS(store.add("b", {}, w), DimensionMismatch);
}

TEST_CASE("batches split the input") {
    FakeService svc([&](const httplib::Request& req, httplib::Response& res) {
        auto n = json::parse(req.body)["input"].size();
        CHECK(n <= 2);
        res.set_content(embedding_response(n, 8).dump(), "application/json");
    });
    KeyGuard key("k");
    auto cfg = config_for(svc, 8);
    cfg.batch_size = 2;
    std::vector<std::string> texts = {"a", "b", "c", "d", "e"};
    CHECK(embed_remote(texts, cfg).size() == 5);
    CHECK(svc.hits == 3);
}

TEST_CASE("retries transient failures") {
    FakeService svc([&](const httplib::Request&, httplib::Response& res) {
        static int calls = 0;
        if (++calls < 3) {
            res.status = 503;
            return;
        }
        res.set_content(embedding_response(1, 8).dump(), "application/json");
    });
    KeyGuard key("k");
    CHECK(embed_remote(std::vector<std::string>{"x"}, config_for(svc, 8)).size() == 1);
    CHECK(svc.hits == 3);
}

TEST_CASE("gives up after the attempt budget") {
    FakeService svc([&](const httplib::Request&, httplib::Response& res) { res.status = 500; });
    KeyGuard key("k");
    CHECK_THROWS_AS(embed_remote(std::vector<std::string>{"x"}, config_for(svc, 8)), TransportError);
    CHECK(svc.hits == 3);
}

TEST_CASE("authentication failures") {
    FakeService svc([&](const httplib::Request&, httplib::Response& res) { res.status = 401; });
    {
        KeyGuard key("bad");
        CHECK_THROWS_AS(embed_remote(std::vector<std::string>{"x"}, config_for(svc, 8)), AuthError);
        CHECK(svc.hits == 1);
    }
    KeyGuard none(nullptr);
    CHECK_THROWS_AS(embed_remote(std::vector<std::string>{"x"}, config_for(svc, 8)), AuthError);
    CHECK(svc.hits == 1);
}

TEST_CASE("client errors are not retried") {
    FakeService svc([&](const httplib::Request&, httplib::Response& res) { res.status = 400; });
    KeyGuard key("k");
    CHECK_THROWS_AS(embed_remote(std::vector<std::string>{"x"}, config_for(svc, 8)), TransportError);
    CHECK(svc.hits == 1);
}

TEST_CASE("embedding cache avoids repeat calls") {
    FakeService svc([&](const httplib::Request& req, httplib::Response& res) {
        auto n = json::parse(req.body)["input"].size();
        res.set_content(embedding_response(n, 8).dump(), "application/json");
    });
    KeyGuard key("k");
    auto path = (std::filesystem::temp_directory_path() / "hyst_cache_test.jsonl").string();
    std::filesystem::remove(path);
    auto inner = std::make_shared<RemoteEmbedder>(config_for(svc, 8));
    {
        CachedEmbedder cached(inner, path);
        auto first = cached.embed(kThree);
        CHECK(svc.hits == 1);
        CHECK(cached.embed(kThree) == first);
        CHECK(svc.hits == 1);
        CHECK(cached.cached_entries() == 3);
    }
    CachedEmbedder reopened(inner, path);
    CHECK(reopened.cached_entries() == 3);
    auto again = reopened.embed(std::vector<std::string>{"alpha", "delta"});
    CHECK(svc.hits == 2);
    CHECK(again.size() == 2);
    CHECK(reopened.cached_entries() == 4);
    std::filesystem::remove(path);
}

TEST_CASE("chat completion client") {
    FakeService svc([&](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"choices":[{"message":{"role":"assistant","content":"{\"BRAND\":{\"$eq\":\"Nike\"}}"}}]})",
                        "application/json");
    });
    KeyGuard key("k");
    RemoteLLMConfig cfg;
    cfg.base_url = svc.base_url();
    cfg.api_key_env = "HYST_TEST_KEY";
    cfg.initial_backoff = std::chrono::milliseconds(1);
    RemoteLLMClient client(cfg);
    CHECK(client.complete("hello", kPlannerTemperature, kPlannerTopP) == R"({"BRAND":{"$eq":"Nike"}})");
    auto body = json::parse(svc.last_body);
    CHECK(body["model"] == "gpt-4o");
    CHECK(body["temperature"] == 0.3);
    CHECK(body["top_p"] == 0.8);
    CHECK(body["messages"][0]["content"] == "hello");
}
