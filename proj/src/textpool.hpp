#pragma once

#include <map>
#include <mutex>
#include <string>
#include <vector>

namespace idsynth {

enum class PoolKind { given_names, surnames, addresses };

const char* pool_kind_name(PoolKind k);

// Names are keyed by (ethnicity, sex, language); addresses by region alone.
struct PoolKey {
    std::string ethnicity;
    std::string sex;       // "F" | "M"
    std::string language;  // e.g. "en", "es"
    std::string region;    // e.g. "AZ"

    std::string slug(PoolKind kind) const;
    bool operator<(const PoolKey& o) const {
        return std::tie(ethnicity, sex, language, region) <
               std::tie(o.ethnicity, o.sex, o.language, o.region);
    }
};

struct TextPool {
    PoolKind kind = PoolKind::given_names;
    PoolKey key;
    std::vector<std::string> entries;  // deduplicated, source order kept
    std::string provenance;            // "offline_corpus" | "llm"
};

struct ProviderConfig {
    std::string mode = "offline";  // "offline" | "http"
    std::string corpus_dir;        // defaults to the bundled corpus
    std::string cache_dir;         // empty disables the disk cache
    std::string endpoint;          // http mode; falls back to IDGEN_LLM_ENDPOINT
    std::string api_key;           // falls back to IDGEN_LLM_API_KEY
    std::string model = "default";
    size_t min_entries = 40;
};

class PoolProvider {
public:
    explicit PoolProvider(ProviderConfig cfg);

    // Memoized and thread-safe; disk cache consulted before any provider call.
    TextPool fetch(PoolKind kind, const PoolKey& key);

    static std::string prompt_for(PoolKind kind, const PoolKey& key);

private:
    TextPool fetch_offline(PoolKind kind, const PoolKey& key) const;
    TextPool fetch_http(PoolKind kind, const PoolKey& key) const;

    ProviderConfig cfg_;
    std::mutex mu_;
    std::map<std::pair<int, PoolKey>, TextPool> memo_;
};

// One CSV record; handles quoted fields with embedded commas.
std::vector<std::string> parse_csv_line(const std::string& line);

}  // namespace idsynth
