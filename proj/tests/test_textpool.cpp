#include <doctest.h>

#include "textpool.hpp"
#include "support/paths.hpp"

#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <set>
#include <thread>

using namespace idsynth;

TEST_CASE("csv parsing") {
    CHECK(parse_csv_line("a,b,c") == std::vector<std::string>{"a", "b", "c"});
    CHECK(parse_csv_line("a,\"b, with comma\",c") ==
          std::vector<std::string>{"a", "b, with comma", "c"});
    CHECK(parse_csv_line("\"he said \"\"hi\"\"\",x") ==
          std::vector<std::string>{"he said \"hi\"", "x"});
    CHECK(parse_csv_line("one") == std::vector<std::string>{"one"});
    CHECK(parse_csv_line("a,,c") == std::vector<std::string>{"a", "", "c"});
}

TEST_CASE("offline corpus pools") {
    PoolProvider provider(ProviderConfig{});

    PoolKey key{"hispanic", "F", "es", ""};
    TextPool given = provider.fetch(PoolKind::given_names, key);
    CHECK(given.provenance == "offline_corpus");
    CHECK(given.entries.size() >= 40);
    CHECK(std::count(given.entries.begin(), given.entries.end(), "Maria") == 1);
    std::set<std::string> uniq(given.entries.begin(), given.entries.end());
    CHECK(uniq.size() == given.entries.size());

    TextPool sur = provider.fetch(PoolKind::surnames, key);
    CHECK(sur.entries.size() >= 40);

    PoolKey az{"", "", "", "AZ"};
    TextPool addr = provider.fetch(PoolKind::addresses, az);
    CHECK(addr.entries.size() >= 40);
    for (const auto& line : addr.entries) CHECK(line.find(", AZ ") != std::string::npos);

    CHECK_THROWS(provider.fetch(PoolKind::given_names, PoolKey{"martian", "F", "en", ""}));
}

TEST_CASE("corpus deduplication and minimum size") {
    const std::string dir = testutil::tmp_dir("corpus_small");
    {
        std::ofstream names(dir + "/names.csv");
        names << "ethnicity,sex,language,given,surname\n";
        for (int i = 0; i < 45; ++i) names << "x,F,en,Name" << i % 41 << ",Sur" << i << "\n";
    }
    ProviderConfig cfg;
    cfg.corpus_dir = dir;
    PoolProvider provider(cfg);
    TextPool pool = provider.fetch(PoolKind::given_names, PoolKey{"x", "F", "en", ""});
    CHECK(pool.entries.size() == 41);

    ProviderConfig strict = cfg;
    strict.min_entries = 42;
    PoolProvider provider2(strict);
    CHECK_THROWS(provider2.fetch(PoolKind::given_names, PoolKey{"x", "F", "en", ""}));
}

TEST_CASE("disk cache makes reruns provider-independent") {
    const std::string cache = testutil::tmp_dir("pool_cache");

    ProviderConfig cfg;
    cfg.cache_dir = cache;
    PoolProvider first(cfg);
    TextPool a = first.fetch(PoolKind::given_names, PoolKey{"white", "M", "en", ""});
    CHECK(std::filesystem::exists(cache + "/given_names-white-M-en.json"));

    ProviderConfig broken;
    broken.corpus_dir = "/nonexistent";
    broken.cache_dir = cache;
    PoolProvider second(broken);
    TextPool b = second.fetch(PoolKind::given_names, PoolKey{"white", "M", "en", ""});
    CHECK(a.entries == b.entries);
    CHECK_THROWS(second.fetch(PoolKind::surnames, PoolKey{"white", "M", "en", ""}));
}

TEST_CASE("prompts embed the pool key") {
    const std::string p =
        PoolProvider::prompt_for(PoolKind::given_names, PoolKey{"hispanic", "F", "es", ""});
    CHECK(p.find("hispanic") != std::string::npos);
    CHECK(p.find("female") != std::string::npos);
    CHECK(p.find("Spanish") != std::string::npos);
    CHECK(p.find("first names") != std::string::npos);

    const std::string a =
        PoolProvider::prompt_for(PoolKind::addresses, PoolKey{"", "", "", "AZ"});
    CHECK(a.find("Arizona") != std::string::npos);
    CHECK(a.find("addresses") != std::string::npos);
}

TEST_CASE("http provider") {
    httplib::Server server;
    std::string seen_prompt;
    std::string seen_auth;
    server.Post("/v1/chat", [&](const httplib::Request& req, httplib::Response& res) {
        seen_auth = req.get_header_value("Authorization");
        auto body = nlohmann::json::parse(req.body);
        seen_prompt = body["messages"][0]["content"];
        std::string content;
        for (int i = 0; i < 45; ++i) content += std::to_string(i + 1) + ". Name" +
                                                std::to_string(i) + "\n";
        nlohmann::json reply = {
            {"choices", {{{"message", {{"content", content}}}}}}};
        res.set_content(reply.dump(), "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread t([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    ProviderConfig cfg;
    cfg.mode = "http";
    cfg.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat";
    cfg.api_key = "sekret";
    PoolProvider provider(cfg);
    TextPool pool = provider.fetch(PoolKind::given_names, PoolKey{"hispanic", "F", "en", ""});

    server.stop();
    t.join();

    CHECK(pool.provenance == "llm");
    CHECK(pool.entries.size() == 45);
    CHECK(pool.entries[0] == "Name0");
    CHECK(seen_prompt.find("hispanic") != std::string::npos);
    CHECK(seen_prompt.find("female") != std::string::npos);
    CHECK(seen_auth == "Bearer sekret");
}

TEST_CASE("http provider falls back to the corpus when unreachable") {
    ProviderConfig cfg;
    cfg.mode = "http";
    cfg.endpoint = "http://127.0.0.1:9/unreachable";
    PoolProvider provider(cfg);
    TextPool pool = provider.fetch(PoolKind::given_names, PoolKey{"white", "F", "en", ""});
    CHECK(pool.provenance == "offline_corpus");
    CHECK(pool.entries.size() >= 40);
}
