#include "textpool.hpp"

#include "common.hpp"

#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace fs = std::filesystem;
using nlohmann::json;

namespace idsynth {

namespace {

std::string default_corpus_dir() { return std::string(IDSYNTH_DATA_DIR) + "/corpus"; }

std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return v && *v ? v : fallback;
}

std::string language_word(const std::string& code) {
    if (code == "en") return "English";
    if (code == "es") return "Spanish";
    if (code == "fr") return "French";
    if (code == "de") return "German";
    if (code == "pt") return "Portuguese";
    return code;
}

std::string sex_word(const std::string& s) {
    if (s == "F") return "female";
    if (s == "M") return "male";
    return s;
}

std::string region_word(const std::string& code) {
    static const std::map<std::string, std::string> names = {
        {"AZ", "Arizona"},   {"WV", "West Virginia"}, {"CA", "California"},
        {"DC", "Washington DC"}, {"TX", "Texas"},     {"NY", "New York"},
        {"FL", "Florida"},   {"WA", "Washington"},    {"OR", "Oregon"},
    };
    auto it = names.find(code);
    return it == names.end() ? code : it->second;
}

std::vector<std::string> dedup_keep_order(const std::vector<std::string>& in) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& s : in)
        if (seen.insert(s).second) out.push_back(s);
    return out;
}

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// Accepts "1. Foo", "1) Foo", "- Foo", "* Foo", plain lines, quoted lines.
std::string strip_list_decoration(std::string s) {
    s = trim(s);
    size_t i = 0;
    while (i < s.size() && isdigit(static_cast<unsigned char>(s[i]))) ++i;
    if (i > 0 && i < s.size() && (s[i] == '.' || s[i] == ')')) s = s.substr(i + 1);
    else if (!s.empty() && (s[0] == '-' || s[0] == '*')) s = s.substr(1);
    s = trim(s);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = trim(s.substr(1, s.size() - 2));
    return s;
}

std::string cache_path(const std::string& dir, PoolKind kind, const PoolKey& key) {
    return (fs::path(dir) / (key.slug(kind) + ".json")).string();
}

}  // namespace

const char* pool_kind_name(PoolKind k) {
    switch (k) {
        case PoolKind::given_names: return "given_names";
        case PoolKind::surnames: return "surnames";
        case PoolKind::addresses: return "addresses";
    }
    return "?";
}

std::string PoolKey::slug(PoolKind kind) const {
    std::string s = pool_kind_name(kind);
    if (kind == PoolKind::addresses) return s + "-" + region;
    return s + "-" + ethnicity + "-" + sex + "-" + language;
}

std::vector<std::string> parse_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

PoolProvider::PoolProvider(ProviderConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.corpus_dir.empty()) cfg_.corpus_dir = default_corpus_dir();
    if (cfg_.mode != "offline" && cfg_.mode != "http")
        throw std::invalid_argument("provider mode must be offline or http");
    if (cfg_.mode == "http") {
        cfg_.endpoint = env_or("IDGEN_LLM_ENDPOINT", cfg_.endpoint);
        cfg_.api_key = env_or("IDGEN_LLM_API_KEY", cfg_.api_key);
        if (cfg_.endpoint.empty())
            throw std::invalid_argument("http provider needs an endpoint");
    }
}

std::string PoolProvider::prompt_for(PoolKind kind, const PoolKey& key) {
    switch (kind) {
        case PoolKind::given_names:
            return strprintf("Please generate 50 distinct %s first names for %s %s,"
                             " one per line.",
                             language_word(key.language).c_str(), key.ethnicity.c_str(),
                             sex_word(key.sex).c_str());
        case PoolKind::surnames:
            return strprintf("Please generate 50 distinct %s last names for %s %s,"
                             " one per line.",
                             language_word(key.language).c_str(), key.ethnicity.c_str(),
                             sex_word(key.sex).c_str());
        case PoolKind::addresses:
            return strprintf("Please generate 50 fictional %s addresses, one per line,"
                             " each with a street number, street name, city, and ZIP code.",
                             region_word(key.region).c_str());
    }
    throw std::logic_error("bad pool kind");
}

TextPool PoolProvider::fetch(PoolKind kind, const PoolKey& key) {
    const auto memo_key = std::make_pair(static_cast<int>(kind), key);
    std::lock_guard<std::mutex> lock(mu_);
    if (auto it = memo_.find(memo_key); it != memo_.end()) return it->second;

    TextPool pool;
    bool from_cache = false;
    if (!cfg_.cache_dir.empty()) {
        const std::string path = cache_path(cfg_.cache_dir, kind, key);
        if (fs::exists(path)) {
            std::ifstream in(path);
            json j;
            in >> j;
            pool.kind = kind;
            pool.key = key;
            pool.entries = j.at("entries").get<std::vector<std::string>>();
            pool.provenance = j.at("provenance").get<std::string>();
            from_cache = true;
        }
    }

    if (!from_cache) {
        if (cfg_.mode == "http") {
            try {
                pool = fetch_http(kind, key);
            } catch (const std::exception&) {
                if (cfg_.corpus_dir.empty()) throw;
                pool = fetch_offline(kind, key);
            }
        } else {
            pool = fetch_offline(kind, key);
        }
        if (!cfg_.cache_dir.empty()) {
            fs::create_directories(cfg_.cache_dir);
            json j = {{"entries", pool.entries}, {"provenance", pool.provenance}};
            std::ofstream out(cache_path(cfg_.cache_dir, kind, key));
            out << j.dump(2) << "\n";
        }
    }

    if (pool.entries.size() < cfg_.min_entries)
        throw std::runtime_error(strprintf("pool %s has %zu entries, need %zu",
                                           key.slug(kind).c_str(), pool.entries.size(),
                                           cfg_.min_entries));
    memo_[memo_key] = pool;
    return pool;
}

TextPool PoolProvider::fetch_offline(PoolKind kind, const PoolKey& key) const {
    const bool addresses = (kind == PoolKind::addresses);
    const std::string file = addresses ? "addresses.csv" : "names.csv";
    const std::string path = (fs::path(cfg_.corpus_dir) / file).string();
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open corpus: " + path);

    TextPool pool;
    pool.kind = kind;
    pool.key = key;
    pool.provenance = "offline_corpus";

    std::string line;
    std::getline(in, line);  // header
    std::vector<std::string> collected;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto cols = parse_csv_line(line);
        if (addresses) {
            if (cols.size() != 2)
                throw std::runtime_error(path + ": bad row: " + line);
            if (cols[0] == key.region) collected.push_back(cols[1]);
        } else {
            if (cols.size() != 5)
                throw std::runtime_error(path + ": bad row: " + line);
            if (cols[0] == key.ethnicity && cols[1] == key.sex && cols[2] == key.language)
                collected.push_back(kind == PoolKind::given_names ? cols[3] : cols[4]);
        }
    }
    pool.entries = dedup_keep_order(collected);
    if (pool.entries.empty())
        throw std::runtime_error("corpus has no entries for " + key.slug(kind));
    return pool;
}

TextPool PoolProvider::fetch_http(PoolKind kind, const PoolKey& key) const {
    const auto scheme_end = cfg_.endpoint.find("://");
    if (scheme_end == std::string::npos)
        throw std::runtime_error("bad endpoint: " + cfg_.endpoint);
    const auto path_start = cfg_.endpoint.find('/', scheme_end + 3);
    const std::string base = path_start == std::string::npos
                                 ? cfg_.endpoint
                                 : cfg_.endpoint.substr(0, path_start);
    const std::string path =
        path_start == std::string::npos ? "/" : cfg_.endpoint.substr(path_start);

    httplib::Client client(base);
    client.set_connection_timeout(10);
    client.set_read_timeout(60);

    httplib::Headers headers;
    if (!cfg_.api_key.empty())
        headers.emplace("Authorization", "Bearer " + cfg_.api_key);

    const json body = {
        {"model", cfg_.model},
        {"messages", json::array({{{"role", "user"}, {"content", prompt_for(kind, key)}}})},
    };
    auto res = client.Post(path, headers, body.dump(), "application/json");
    if (!res) throw std::runtime_error("provider unreachable: " + cfg_.endpoint);
    if (res->status != 200)
        throw std::runtime_error(strprintf("provider returned %d", res->status));

    const json reply = json::parse(res->body);
    const std::string content =
        reply.at("choices").at(0).at("message").at("content").get<std::string>();

    std::vector<std::string> collected;
    std::string cur;
    std::istringstream ss(content);
    while (std::getline(ss, cur)) {
        const std::string item = strip_list_decoration(cur);
        if (!item.empty()) collected.push_back(item);
    }

    TextPool pool;
    pool.kind = kind;
    pool.key = key;
    pool.provenance = "llm";
    pool.entries = dedup_keep_order(collected);
    return pool;
}

}  // namespace idsynth
