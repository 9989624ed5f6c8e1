#pragma once

#include "manifest.hpp"
#include "mesh.hpp"
#include "textpool.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace idsynth {

// The six injectors in manifest order.
const std::vector<std::string>& all_fraud_types();

// Standalone face-morph variants draw their blend weight from this range so
// both identities stay visible; the mixed variant keeps the default blend.
inline constexpr double kMorphWeightLo = 0.3;
inline constexpr double kMorphWeightHi = 0.7;

struct RunConfig {
    std::string pack_dir;
    std::string portrait_dir;
    std::string out_dir;
    int count = 0;                        // documents to generate
    uint64_t master_seed = 0;
    std::vector<std::string> fraud_types; // subset of all_fraud_types(), may be empty
    Date now{2025, 1, 1};
    int threads = 0;                      // 0 picks the core count
    ProviderConfig provider;
};

struct RunSummary {
    int documents = 0;        // work units completed this run
    int images_written = 0;
    int entries_appended = 0;
    int skipped_existing = 0; // samples already present from an earlier run
    std::string manifest_path;
    double seconds = 0.0;     // render phase wall time
};

// One genuine document per qualified portrait plus one variant per requested
// fraud type. Per-document seed = hash(master seed, doc index); identities are
// assigned serially so uniqueness pools see a stable order, then documents
// render in parallel. The manifest is flushed in doc order, so interrupting a
// run leaves a valid prefix and re-running skips what already exists.
RunSummary generate_dataset(const RunConfig& cfg);

// doc_00042 style ids.
std::string doc_id_for(int index);

}  // namespace idsynth
